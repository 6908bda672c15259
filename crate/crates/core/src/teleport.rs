//! Teleported-mode variances and coherent-state fidelity.
//!
//! The sender `k` and receiver `l` use `x_rel = x_k - x_l` and
//! `p_tot = p_k + p_l + g * sum_{j != k,l} p_j`, where the sum runs over the
//! momentum detections of the cooperating parties. With unit input variances
//! the fidelity is `[(var_x_rel + 2)(var_p_tot + 2) / 4]^{-1/2}`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{build_resource, p_index, x_index, CovarianceMatrix, ResourceSpec};
use crate::optimize::g_n_opt;

/// Feed-forward gain on the cooperating parties' momentum results.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gain {
    /// Closed-form variance-minimizing gain of the resource class.
    Optimal,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProtocolParams {
    sender: usize,
    receiver: usize,
    gain: Gain,
}

impl ProtocolParams {
    pub fn new(sender: usize, receiver: usize, gain: Gain) -> Result<Self> {
        if sender == receiver {
            return Err(invalid("sender and receiver must be different modes"));
        }
        if let Gain::Fixed(g) = gain {
            if !g.is_finite() {
                return Err(invalid("gain must be finite"));
            }
        }
        Ok(Self { sender, receiver, gain })
    }

    /// Modes 0 -> 1 with the optimal gain.
    pub fn optimal() -> Self {
        Self { sender: 0, receiver: 1, gain: Gain::Optimal }
    }

    pub fn sender(&self) -> usize {
        self.sender
    }

    pub fn receiver(&self) -> usize {
        self.receiver
    }

    pub fn gain(&self) -> Gain {
        self.gain
    }

    fn check_range(&self, n_modes: usize) -> Result<()> {
        if self.sender >= n_modes || self.receiver >= n_modes {
            return Err(invalid(format!(
                "sender/receiver ({}, {}) out of range for {n_modes} modes",
                self.sender, self.receiver
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TeleportOutcome {
    pub var_x_rel: f64,
    pub var_p_tot: f64,
    pub gain_used: f64,
    pub fidelity: f64,
}

/// Coefficient vectors of `x_rel` and `p_tot` over the 2N quadratures.
pub fn protocol_forms(n_modes: usize, sender: usize, receiver: usize, gain: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![0.0; 2 * n_modes];
    u[x_index(sender)] = 1.0;
    u[x_index(receiver)] = -1.0;
    let mut v = vec![0.0; 2 * n_modes];
    for j in 0..n_modes {
        v[p_index(j)] = if j == sender || j == receiver { 1.0 } else { gain };
    }
    (u, v)
}

/// `(var x_rel, var p_tot)` as quadratic forms on the CM.
pub fn teleported_variances(sigma: &CovarianceMatrix, sender: usize, receiver: usize, gain: f64) -> Result<(f64, f64)> {
    let params = ProtocolParams::new(sender, receiver, Gain::Fixed(gain))?;
    params.check_range(sigma.n_modes())?;
    let (u, v) = protocol_forms(sigma.n_modes(), sender, receiver, gain);
    Ok((sigma.quadratic_form(&u)?, sigma.quadratic_form(&v)?))
}

/// Gain minimizing `var p_tot` on the given CM, by least squares on the
/// cooperating momenta. Returns `None` when there are no cooperating parties.
pub fn gain_minimizing_variance(sigma: &CovarianceMatrix, sender: usize, receiver: usize) -> Result<Option<f64>> {
    let n = sigma.n_modes();
    ProtocolParams::new(sender, receiver, Gain::Fixed(0.0))?.check_range(n)?;
    if n == 2 {
        return Ok(None);
    }
    let (_, base) = protocol_forms(n, sender, receiver, 0.0);
    let (_, with_one) = protocol_forms(n, sender, receiver, 1.0);
    let coop: Vec<f64> = with_one.iter().zip(&base).map(|(a, b)| a - b).collect();
    let m = sigma.entries();
    let mut cross = 0.0;
    let mut self_coop = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            cross += base[i] * m[(i, j)] * coop[j];
            self_coop += coop[i] * m[(i, j)] * coop[j];
        }
    }
    Ok(Some(-cross / self_coop))
}

/// `[(var_x_rel + 2)(var_p_tot + 2) / 4]^{-1/2}`.
pub fn fidelity_from_variances(var_x_rel: f64, var_p_tot: f64) -> Result<f64> {
    if !(var_x_rel >= 0.0) || !(var_p_tot >= 0.0) {
        return Err(invalid(format!("variances must be nonnegative, got ({var_x_rel}, {var_p_tot})")));
    }
    Ok(((var_x_rel + 2.0) * (var_p_tot + 2.0) / 4.0).powf(-0.5))
}

/// Two-mode `phi = e^{-4 rbar} (e^{2(rbar + d)} + n1)(e^{2(rbar - d)} + n2)`, so that `F = phi^{-1/2}`.
pub fn phi_two_mode(rbar: f64, d: f64, n1: f64, n2: f64) -> f64 {
    (-4.0 * rbar).exp() * ((2.0 * (rbar + d)).exp() + n1) * ((2.0 * (rbar - d)).exp() + n2)
}

/// Closed-form network variances for gain `g`:
///
/// * `var x_rel = 2 n2 e^{-2 r2}`
/// * `var p_tot = {[2 + (N-2) g]^2 n1 e^{-2 r1} + 2 (g-1)^2 (N-2) n2 e^{2 r2}} / N`
pub fn variances_closed_form_network(spec: &ResourceSpec, g: f64) -> (f64, f64) {
    let n = spec.n_modes() as f64;
    let (n1, n2, r1, r2) = (spec.n1(), spec.n2(), spec.r1(), spec.r2());
    let var_x = 2.0 * n2 * (-2.0 * r2).exp();
    let var_p = ((2.0 + (n - 2.0) * g).powi(2) * n1 * (-2.0 * r1).exp()
        + 2.0 * (g - 1.0).powi(2) * (n - 2.0) * n2 * (2.0 * r2).exp())
        / n;
    (var_x, var_p)
}

fn resolve_gain(spec: &ResourceSpec, gain: Gain) -> f64 {
    match gain {
        Gain::Fixed(g) => g,
        Gain::Optimal => g_n_opt(spec.n_modes(), spec.n1(), spec.n2(), spec.rbar()),
    }
}

/// Full outcome from the covariance-matrix pipeline.
pub fn fidelity_network(spec: &ResourceSpec, params: &ProtocolParams) -> Result<TeleportOutcome> {
    params.check_range(spec.n_modes())?;
    let g = resolve_gain(spec, params.gain);
    let cm = build_resource(spec)?;
    let (vx, vp) = teleported_variances(&cm, params.sender, params.receiver, g)?;
    outcome(vx, vp, g)
}

/// Same outcome from the closed-form variances.
pub fn fidelity_closed_form(spec: &ResourceSpec, gain: Gain) -> Result<TeleportOutcome> {
    let g = resolve_gain(spec, gain);
    let (vx, vp) = variances_closed_form_network(spec, g);
    outcome(vx, vp, g)
}

fn outcome(vx: f64, vp: f64, g: f64) -> Result<TeleportOutcome> {
    let fidelity = fidelity_from_variances(vx, vp)?;
    if !(fidelity > 0.0 && fidelity <= 1.0 + 1e-12) {
        return Err(Error::NumericalFailure(format!("fidelity {fidelity} outside (0, 1]")));
    }
    Ok(TeleportOutcome { var_x_rel: vx, var_p_tot: vp, gain_used: g, fidelity })
}
