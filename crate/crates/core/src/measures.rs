//! PPT symplectic eigenvalues and the entanglement quantifiers built on them.

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{build_resource, CovarianceMatrix, ResourceClass, ResourceSpec};

/// Discriminant slack, relative to `max(1, Sigma^2)`, before clamping to zero.
const DISCRIMINANT_TOL: f64 = 1e-9;
/// `E_T` at or beyond which the contangle is reported as divergent.
pub const CONTANGLE_CUTOFF: f64 = 1.0 - 1e-12;
/// Sentinel returned by [`contangle_from_et`] in the GHZ limit.
pub const CONTANGLE_DIVERGENT: f64 = f64::INFINITY;

/// Logarithm used by `f` and by the contangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum LogBase {
    /// Entropies in ebits.
    #[default]
    Two,
    /// Entropies in nats.
    E,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

/// `sigma = [[alpha, gamma], [gamma^T, beta]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeBlocks {
    pub alpha: Matrix2<f64>,
    pub beta: Matrix2<f64>,
    pub gamma: Matrix2<f64>,
}

impl TwoModeBlocks {
    pub fn from_cm(sigma: &CovarianceMatrix) -> Result<Self> {
        if sigma.n_modes() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: sigma.n_modes() });
        }
        Ok(Self { alpha: sigma.block(0, 0), beta: sigma.block(1, 1), gamma: sigma.block(0, 1) })
    }

    pub fn assemble(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.alpha);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.beta);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.gamma);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.gamma.transpose());
        m
    }

    /// `det alpha + det beta - 2 det gamma`.
    pub fn pt_invariant(&self) -> f64 {
        self.alpha.determinant() + self.beta.determinant() - 2.0 * self.gamma.determinant()
    }
}

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode CM,
/// from `2 eta^2 = Sigma - sqrt(Sigma^2 - 4 det sigma)`.
pub fn eta_two_mode(sigma: &CovarianceMatrix) -> Result<f64> {
    let blocks = TwoModeBlocks::from_cm(sigma)?;
    let big_sigma = blocks.pt_invariant();
    let det = blocks.assemble().determinant();
    let mut disc = big_sigma * big_sigma - 4.0 * det;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_TOL * (big_sigma * big_sigma).max(1.0) {
            return Err(Error::NumericalFailure(format!("negative discriminant {disc:e}")));
        }
        disc = 0.0;
    }
    // Product of the two roots is det sigma; dividing avoids cancellation when eta is small.
    let eta_sq = 2.0 * det / (big_sigma + disc.sqrt());
    if !(eta_sq > 0.0) || !eta_sq.is_finite() {
        return Err(Error::NumericalFailure(format!("non-positive eta^2 = {eta_sq:e}")));
    }
    Ok(eta_sq.sqrt())
}

/// `sqrt(n1 n2) e^{-(r1 + r2)}` for the two-mode resource.
pub fn eta_closed_form(n1: f64, n2: f64, r1: f64, r2: f64) -> f64 {
    (n1 * n2).sqrt() * (-(r1 + r2)).exp()
}

/// PPT criterion.
pub fn is_entangled(eta: f64) -> bool {
    eta < 1.0
}

/// `f(x) = a log a - b log b` with `a = (1+x)^2/4x`, `b = (1-x)^2/4x`.
pub fn eof_function(x: f64, base: LogBase) -> f64 {
    let (a, b) = eof_coefficients(x);
    let xlogx = |v: f64| if v > 0.0 { v * base.log(v) } else { 0.0 };
    xlogx(a) - xlogx(b)
}

/// The two coefficients of `f`; they always differ by exactly one.
pub fn eof_coefficients(x: f64) -> (f64, f64) {
    ((1.0 + x).powi(2) / (4.0 * x), (1.0 - x).powi(2) / (4.0 * x))
}

/// Entanglement of formation of a symmetric two-mode Gaussian state: `max{0, f(eta)}`.
pub fn eof_symmetric(eta: f64, base: LogBase) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid(format!("eta must be positive and finite, got {eta}")));
    }
    if eta >= 1.0 {
        return Ok(0.0);
    }
    Ok(eof_function(eta, base).max(0.0))
}

/// `eta_N = sqrt(N n1 n2 / (2 e^{4 rbar} + (N - 2) n1 / n2))`.
pub fn eta_generalized(class: &ResourceClass) -> f64 {
    let n = class.n_modes() as f64;
    let (n1, n2) = (class.n1(), class.n2());
    (n * n1 * n2 / (2.0 * (4.0 * class.rbar()).exp() + (n - 2.0) * n1 / n2)).sqrt()
}

/// `max{0, (1 - eta_N) / (1 + eta_N)}`.
pub fn entanglement_of_teleportation(eta_n: f64) -> f64 {
    ((1.0 - eta_n) / (1.0 + eta_n)).max(0.0)
}

/// Inverse of the map `eta_N -> E_T` on the entangled branch.
pub fn eta_from_et(e_t: f64) -> f64 {
    (1.0 - e_t) / (1.0 + e_t)
}

/// Localizable entanglement of formation, `f((1 - E_T) / (1 + E_T))`.
pub fn eof_localizable(e_t: f64, base: LogBase) -> Result<f64> {
    if !(0.0..1.0).contains(&e_t) {
        return Err(invalid(format!("E_T must lie in [0, 1), got {e_t}")));
    }
    eof_symmetric(eta_from_et(e_t), base)
}

/// Residual contangle of a pure symmetric three-mode resource as a function of `E_T`.
///
/// The first log argument is evaluated in the factored form
/// `(1 - t) sqrt(t^2 + 4t + 1) / (2 sqrt2 t + (t + 1) sqrt(t^2 + 1))`, which equals
/// `(2 sqrt2 t - (t+1) sqrt(t^2+1)) / ((t - 1) sqrt(t(t+4) + 1))` but does not
/// cancel catastrophically as `t -> 1`.
pub fn contangle_from_et(e_t: f64, base: LogBase) -> Result<f64> {
    if !(e_t >= 0.0) {
        return Err(invalid(format!("E_T must be >= 0, got {e_t}")));
    }
    if e_t >= CONTANGLE_CUTOFF {
        return Ok(CONTANGLE_DIVERGENT);
    }
    let t = e_t;
    let q = t * (t + 4.0) + 1.0;
    let s = t * t + 1.0;
    let ratio = (1.0 - t) * q.sqrt() / (2.0 * std::f64::consts::SQRT_2 * t + (t + 1.0) * s.sqrt());
    let first = base.log(ratio);
    let second = base.log(s / q);
    Ok(first * first - 0.5 * second * second)
}

/// `(<(x1 - x2)^2> + <(p1 + p2)^2>) / 4` for a two-mode state with `det alpha = det beta`.
///
/// Equals the PPT eigenvalue when the state is also balanced between the two
/// EPR variances; otherwise it is an upper bound.
pub fn epr_eta_symmetric(sigma: &CovarianceMatrix) -> Result<f64> {
    let b = TwoModeBlocks::from_cm(sigma)?;
    let (da, db) = (b.alpha.determinant(), b.beta.determinant());
    if (da - db).abs() > 1e-9 * da.abs().max(db.abs()).max(1.0) {
        return Err(invalid(format!("state is not symmetric: det alpha = {da}, det beta = {db}")));
    }
    let var_x = sigma.quadratic_form(&[1.0, 0.0, -1.0, 0.0])?;
    let var_p = sigma.quadratic_form(&[0.0, 1.0, 0.0, 1.0])?;
    Ok(0.25 * (var_x + var_p))
}

/// Entanglement figures of a resource.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementReport {
    /// Smallest PPT symplectic eigenvalue for the split `{first mode} | rest`.
    pub eta: f64,
    /// Generalized eigenvalue of the class.
    pub eta_n: f64,
    /// Two-mode entanglement of formation (`N = 2` only).
    pub e_f: Option<f64>,
    pub e_t: f64,
    pub e_f_loc: f64,
    /// Residual contangle (pure three-mode resources only).
    pub e_tau: Option<f64>,
    pub log_base: LogBase,
}

impl EntanglementReport {
    pub fn for_spec(spec: &ResourceSpec, base: LogBase) -> Result<Self> {
        let cm = build_resource(spec)?;
        let pt = crate::gaussian::partial_transpose(&cm, &[0])?;
        let eta = crate::gaussian::symplectic_spectrum(&pt)?[0];
        let eta_n = eta_generalized(spec.class());
        let e_t = entanglement_of_teleportation(eta_n);
        let e_f = if spec.n_modes() == 2 { Some(eof_symmetric(eta_two_mode(&cm)?, base)?) } else { None };
        let e_f_loc = eof_localizable(e_t, base)?;
        let e_tau = if spec.n_modes() == 3 && (cm.purity() - 1.0).abs() < 1e-9 {
            Some(contangle_from_et(e_t, base)?)
        } else {
            None
        };
        Ok(Self { eta, eta_n, e_f, e_t, e_f_loc, e_tau, log_base: base })
    }
}
