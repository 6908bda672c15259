//! Optimal squeezing bias and gain, boundary analyses, and a bracketing
//! numerical optimizer that serves as an independent check on the closed forms.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{build_resource, ResourceClass};
use crate::measures::eta_generalized;
use crate::teleport::{
    fidelity_closed_form, fidelity_from_variances, teleported_variances, variances_closed_form_network, Gain,
};

/// Golden-section width below which the slope bisection takes over.
const GOLDEN_HANDOFF: f64 = 1e-5;
/// Step of the five-point derivative stencil used for slope signs.
const SLOPE_STEP: f64 = 1e-3;
/// Bracket width at which scalar searches stop.
pub const ARGUMENT_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasRange {
    /// Keep `|d| <= rbar` so both squeezings stay nonnegative; optimal biases are clamped.
    #[default]
    Constrained,
    /// Any real bias.
    Unconstrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Numerical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub d_opt: f64,
    pub g_opt: f64,
    pub fidelity_opt: f64,
    pub eta_n: f64,
    pub method: Method,
    /// The unconstrained optimum fell outside `[-rbar, rbar]` and was clamped.
    pub clamped: bool,
}

/// Two-mode optimal bias, `ln(n1 / n2) / 4`.
pub fn d_opt_two_mode(n1: f64, n2: f64) -> f64 {
    0.25 * (n1 / n2).ln()
}

fn network_ratio(n_modes: usize, n1: f64, n2: f64, rbar: f64) -> f64 {
    let n = n_modes as f64;
    n / ((n - 2.0) + 2.0 * (4.0 * rbar).exp() * n2 / n1)
}

/// Optimal gain `1 - N / [(N - 2) + 2 e^{4 rbar} n2 / n1]`.
///
/// For `N = 2` there are no cooperating parties and the gain multiplies
/// nothing; 1 is returned by convention.
pub fn g_n_opt(n_modes: usize, n1: f64, n2: f64, rbar: f64) -> f64 {
    if n_modes == 2 {
        return 1.0;
    }
    1.0 - network_ratio(n_modes, n1, n2, rbar)
}

/// Optimal bias `rbar + ln{N / [(N - 2) + 2 e^{4 rbar} n2 / n1]} / 4`, unclamped.
pub fn d_n_opt(n_modes: usize, n1: f64, n2: f64, rbar: f64) -> f64 {
    if n_modes == 2 {
        return d_opt_two_mode(n1, n2);
    }
    rbar + 0.25 * network_ratio(n_modes, n1, n2, rbar).ln()
}

/// Closed-form optimum of the class. In constrained mode a clamped bias is
/// evaluated at the boundary, so the fidelity drops below `1 / (1 + eta_N)`.
pub fn optimal_fidelity(class: &ResourceClass, range: BiasRange) -> Result<OptimizationResult> {
    let (n, n1, n2, rbar) = (class.n_modes(), class.n1(), class.n2(), class.rbar());
    let d_raw = d_n_opt(n, n1, n2, rbar);
    let g_opt = g_n_opt(n, n1, n2, rbar);
    let eta_n = eta_generalized(class);
    let (d_opt, clamped) = match range {
        BiasRange::Unconstrained => (d_raw, false),
        BiasRange::Constrained => {
            let d = class.clamp_bias(d_raw);
            (d, d != d_raw)
        }
    };
    let fidelity_opt = if clamped {
        fidelity_closed_form(&class.with_bias(d_opt)?, Gain::Fixed(g_opt))?.fidelity
    } else {
        1.0 / (1.0 + eta_n)
    };
    Ok(OptimizationResult { d_opt, g_opt, fidelity_opt, eta_n, method: Method::ClosedForm, clamped })
}

fn finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalFailure(format!("objective is not finite at {x}")))
    }
}

fn check_bracket(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(invalid(format!("invalid search bracket [{lo}, {hi}]")));
    }
    Ok(())
}

/// Plain golden-section search on `[lo, hi]` down to bracket width `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    check_bracket(lo, hi)?;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = finite(f(c), c)?;
    let mut fd = finite(f(d), d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = finite(f(c), c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = finite(f(d), d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimizer of a smooth convex function on `[lo, hi]`.
///
/// Golden section narrows the bracket first; the last digits come from
/// bisecting on the sign of a five-point derivative, since comparing function
/// values alone cannot resolve the argument beyond about `sqrt(eps)`.
/// The stencil may reach `2 * SLOPE_STEP` outside the bracket, so `f` must be
/// finite slightly beyond it.
pub fn minimize_convex<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    check_bracket(lo, hi)?;
    let x0 = golden_section(&f, lo, hi, GOLDEN_HANDOFF.max(tol))?;
    let half = GOLDEN_HANDOFF;
    let (mut a, mut b) = ((x0 - half).max(lo), (x0 + half).min(hi));
    while b - a > tol {
        let m = 0.5 * (a + b);
        let h = SLOPE_STEP * m.abs().max(1.0);
        let slope = 8.0 * (finite(f(m + h), m + h)? - finite(f(m - h), m - h)?)
            - (finite(f(m + 2.0 * h), m + 2.0 * h)? - finite(f(m - 2.0 * h), m - 2.0 * h)?);
        if slope > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Nested scalar minimization of `phi(d, g)`: the inner search runs over the
/// gain, the outer one over the bias. Each axis is convex.
pub fn numerical_optimum<F: Fn(f64, f64) -> f64>(
    objective: F,
    d_bounds: (f64, f64),
    g_bounds: (f64, f64),
) -> Result<OptimizationResult> {
    check_bracket(d_bounds.0, d_bounds.1)?;
    check_bracket(g_bounds.0, g_bounds.1)?;
    let inner = |d: f64| -> Result<(f64, f64)> {
        let g = minimize_convex(|g| objective(d, g), g_bounds.0, g_bounds.1, ARGUMENT_TOL)?;
        Ok((g, finite(objective(d, g), d)?))
    };
    // Errors inside the outer closure surface as NaN and are reported by `finite`.
    let outer = |d: f64| inner(d).map(|(_, v)| v).unwrap_or(f64::NAN);
    let d = minimize_convex(outer, d_bounds.0, d_bounds.1, ARGUMENT_TOL)?;
    let (g, phi) = inner(d)?;
    if !(phi > 0.0) {
        return Err(Error::NumericalFailure(format!("objective minimum {phi} is not positive")));
    }
    Ok(OptimizationResult {
        d_opt: d,
        g_opt: g,
        fidelity_opt: phi.powf(-0.5),
        eta_n: phi.sqrt() - 1.0,
        method: Method::Numerical,
        clamped: false,
    })
}

/// `phi(d, g)` of the class from the closed-form network variances.
pub fn network_objective(class: ResourceClass) -> impl Fn(f64, f64) -> f64 {
    move |d, g| match class.with_bias_unconstrained(d) {
        Ok(spec) => {
            let (vx, vp) = variances_closed_form_network(&spec, g);
            (vx + 2.0) * (vp + 2.0) / 4.0
        }
        Err(_) => f64::NAN,
    }
}

/// `phi(d, g)` of the class evaluated on the built covariance matrix.
pub fn pipeline_objective(class: ResourceClass) -> impl Fn(f64, f64) -> f64 {
    move |d, g| {
        let phi = || -> Result<f64> {
            let cm = build_resource(&class.with_bias_unconstrained(d)?)?;
            let (vx, vp) = teleported_variances(&cm, 0, 1, g)?;
            Ok(fidelity_from_variances(vx, vp)?.powi(-2))
        };
        phi().unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorstCase {
    pub d_worst: f64,
    pub fidelity_worst: f64,
    /// Optimal-gain fidelity with `r1 = 0` (`d = -rbar`).
    pub fidelity_r1_zero: f64,
    /// Optimal-gain fidelity with `r2 = 0` (`d = +rbar`).
    pub fidelity_r2_zero: f64,
    /// Boundary picked by the threshold `n1 > 2 n2 e^{2 rbar} / (N e^{2 rbar} + 2 - N)`.
    pub threshold_predicts_r1_zero: bool,
}

/// Threshold rule for the worst preparation: `r1 = 0` iff `n1` exceeds the bound.
/// Exact for `N = 2` and for equal noises, asymptotic in `rbar` otherwise.
pub fn worst_threshold_r1_zero(class: &ResourceClass) -> bool {
    let n = class.n_modes() as f64;
    let e = (2.0 * class.rbar()).exp();
    class.n1() > 2.0 * class.n2() * e / (n * e + 2.0 - n)
}

/// Lowest optimal-gain fidelity over the class. By convexity it sits at `d = +-rbar`.
pub fn worst_case(class: &ResourceClass) -> Result<WorstCase> {
    let rbar = class.rbar();
    let fid = |d: f64| -> Result<f64> { Ok(fidelity_closed_form(&class.with_bias(d)?, Gain::Optimal)?.fidelity) };
    let f_r1_zero = fid(-rbar)?;
    let f_r2_zero = fid(rbar)?;
    let (d_worst, fidelity_worst) = if f_r1_zero <= f_r2_zero { (-rbar, f_r1_zero) } else { (rbar, f_r2_zero) };
    Ok(WorstCase {
        d_worst,
        fidelity_worst,
        fidelity_r1_zero: f_r1_zero,
        fidelity_r2_zero: f_r2_zero,
        threshold_predicts_r1_zero: worst_threshold_r1_zero(class),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnbiasedBias {
    pub d: f64,
    /// No root inside `[-rbar, rbar]`; `d` is the nearer boundary.
    pub at_boundary: bool,
}

/// Bias giving equal single-mode x and p variances after the N-splitter:
/// the root of `n1 sinh(2(rbar + d)) = (N - 1) n2 sinh(2(rbar - d))`.
pub fn d_unbiased(class: &ResourceClass) -> Result<UnbiasedBias> {
    let rbar = class.rbar();
    if rbar == 0.0 {
        return Ok(UnbiasedBias { d: 0.0, at_boundary: false });
    }
    let k = (class.n_modes() - 1) as f64;
    let h = |d: f64| class.n1() * (2.0 * (rbar + d)).sinh() - k * class.n2() * (2.0 * (rbar - d)).sinh();
    let (mut lo, mut hi) = (-rbar, rbar);
    let (h_lo, h_hi) = (h(lo), h(hi));
    if h_lo > 0.0 {
        return Ok(UnbiasedBias { d: lo, at_boundary: true });
    }
    if h_hi < 0.0 {
        return Ok(UnbiasedBias { d: hi, at_boundary: true });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(UnbiasedBias { d: 0.5 * (lo + hi), at_boundary: false })
}
