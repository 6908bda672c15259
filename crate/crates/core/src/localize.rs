//! Homodyne conditioning and localizable entanglement.
//!
//! Measuring one quadrature `q` of a mode with block `B` and correlations `C`
//! to the rest leaves the other modes in `A - C (Pi B Pi)^+ C^T`. With
//! `Pi = diag(1, 0)` or `diag(0, 1)` the pseudoinverse is `Pi / B_qq`, so the
//! update is a rank-one correction. The result does not depend on the outcome.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{build_resource, check_modes, CovarianceMatrix, ResourceClass, ResourceSpec};
use crate::measures::{eof_symmetric, epr_eta_symmetric, eta_two_mode, LogBase};
use crate::optimize::d_n_opt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

/// State of the unmeasured modes after a sequence of homodyne detections.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalState {
    pub cm: CovarianceMatrix,
    /// Original indices of the measured modes, in measurement order.
    pub measured_modes: Vec<usize>,
    pub quadratures: Vec<Quadrature>,
    /// Original index of each remaining mode, in output order.
    pub kept_modes: Vec<usize>,
}

impl ConditionalState {
    /// Nothing measured yet.
    pub fn unmeasured(cm: CovarianceMatrix) -> Self {
        let kept_modes = (0..cm.n_modes()).collect();
        Self { cm, measured_modes: Vec::new(), quadratures: Vec::new(), kept_modes }
    }

    /// Measures the original mode `mode` in quadrature `q`.
    pub fn condition(&self, mode: usize, q: Quadrature) -> Result<Self> {
        let pos = self
            .kept_modes
            .iter()
            .position(|&m| m == mode)
            .ok_or_else(|| invalid(format!("mode {mode} is not among the remaining modes")))?;
        let cm = condition_matrix(&self.cm, pos, q)?;
        let mut out = self.clone();
        out.cm = cm;
        out.kept_modes.remove(pos);
        out.measured_modes.push(mode);
        out.quadratures.push(q);
        Ok(out)
    }
}

fn condition_matrix(sigma: &CovarianceMatrix, mode: usize, q: Quadrature) -> Result<CovarianceMatrix> {
    let n = sigma.n_modes();
    if n < 2 {
        return Err(invalid("conditioning needs at least two modes"));
    }
    check_modes(&[mode], n)?;
    let m = sigma.entries();
    let measured = 2 * mode + if q == Quadrature::X { 0 } else { 1 };
    let b_qq = m[(measured, measured)];
    if !(b_qq > 0.0) {
        return Err(Error::NumericalFailure(format!("measured variance {b_qq} is not positive")));
    }
    let kept: Vec<usize> = (0..2 * n).filter(|&i| i / 2 != mode).collect();
    let out = DMatrix::from_fn(kept.len(), kept.len(), |i, j| {
        let (a, b) = (kept[i], kept[j]);
        m[(a, b)] - m[(a, measured)] * m[(b, measured)] / b_qq
    });
    Ok(CovarianceMatrix::from_symmetrized(out))
}

/// Homodyne detection of quadrature `q` on `mode`.
pub fn homodyne_condition(sigma: &CovarianceMatrix, mode: usize, q: Quadrature) -> Result<ConditionalState> {
    ConditionalState::unmeasured(sigma.clone()).condition(mode, q)
}

/// Momentum detections on every mode except `keep`, lowest index first.
pub fn localize(sigma: &CovarianceMatrix, keep: (usize, usize)) -> Result<ConditionalState> {
    let order: Vec<usize> = (0..sigma.n_modes()).filter(|&m| m != keep.0 && m != keep.1).collect();
    localize_in_order(sigma, keep, &order)
}

/// Like [`localize`] with an explicit measurement order.
pub fn localize_in_order(sigma: &CovarianceMatrix, keep: (usize, usize), order: &[usize]) -> Result<ConditionalState> {
    let n = sigma.n_modes();
    if n < 3 {
        return Err(invalid(format!("localization needs N >= 3 modes, got {n}")));
    }
    if keep.0 == keep.1 {
        return Err(invalid("kept modes must differ"));
    }
    check_modes(&[keep.0, keep.1], n)?;
    check_modes(order, n)?;
    if order.len() != n - 2 || order.contains(&keep.0) || order.contains(&keep.1) {
        return Err(invalid("measurement order must list every mode except the kept pair"));
    }
    order.iter().try_fold(ConditionalState::unmeasured(sigma.clone()), |st, &m| st.condition(m, Quadrature::P))
}

fn localized_cm(spec: &ResourceSpec) -> Result<CovarianceMatrix> {
    let cm = build_resource(spec)?;
    if spec.n_modes() == 2 {
        return Ok(cm);
    }
    Ok(localize(&cm, (0, 1))?.cm)
}

/// PPT eigenvalue of the two-mode state left after momentum detections on
/// the other `N - 2` modes. For `N = 2` the resource itself.
pub fn localizable_eta(spec: &ResourceSpec) -> Result<f64> {
    eta_two_mode(&localized_cm(spec)?)
}

/// `(<(x1 - x2)^2> + <(p1 + p2)^2>) / 4` on the localized state. Bounds
/// [`localizable_eta`] from above and meets it at the optimal bias.
pub fn localized_epr_eta(spec: &ResourceSpec) -> Result<f64> {
    epr_eta_symmetric(&localized_cm(spec)?)
}

/// Entanglement of formation of the localized state at the optimal bias.
pub fn localizable_entanglement(class: &ResourceClass, base: LogBase) -> Result<f64> {
    let d = class.clamp_bias(d_n_opt(class.n_modes(), class.n1(), class.n2(), class.rbar()));
    eof_symmetric(localizable_eta(&class.with_bias(d)?)?, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{squeezed_thermal_cm, vacuum_cm, SqueezeAxis};
    use crate::measures::{entanglement_of_teleportation, eof_localizable, eta_generalized};

    #[test]
    fn product_state_is_untouched() {
        let a = squeezed_thermal_cm(1.5, 0.4, SqueezeAxis::MomentumSqueezed).unwrap();
        let b = squeezed_thermal_cm(1.2, 0.9, SqueezeAxis::PositionSqueezed).unwrap();
        let prod = CovarianceMatrix::direct_sum(&[a.clone(), b]).unwrap();
        let st = homodyne_condition(&prod, 1, Quadrature::P).unwrap();
        assert_eq!(st.cm, a);
        assert_eq!(st.kept_modes, vec![0]);
        let v = homodyne_condition(&vacuum_cm(2).unwrap(), 1, Quadrature::X).unwrap();
        assert_eq!(v.cm, vacuum_cm(1).unwrap());
    }

    #[test]
    fn three_mode_resource_localizes_to_symmetric_state() {
        let d = d_n_opt(3, 1.0, 1.0, 0.5);
        let cm = build_resource(&ResourceSpec::new(3, 1.0, 1.0, 0.5, d).unwrap()).unwrap();
        let st = homodyne_condition(&cm, 2, Quadrature::P).unwrap();
        assert!((st.cm.block(0, 0) - st.cm.block(1, 1)).amax() < 1e-10);
        assert!(st.cm.is_physical());
        let eta = eta_two_mode(&st.cm).unwrap();
        assert!((eta - 0.43606).abs() < 1e-4);
    }

    #[test]
    fn measurement_order_and_pair_do_not_matter() {
        let cm = build_resource(&ResourceSpec::new(5, 1.3, 1.1, 0.7, 0.1).unwrap()).unwrap();
        let a = localize_in_order(&cm, (0, 1), &[2, 3, 4]).unwrap();
        let b = localize_in_order(&cm, (0, 1), &[4, 2, 3]).unwrap();
        assert!((a.cm.entries() - b.cm.entries()).amax() < 1e-12);
        let c = localize(&cm, (3, 1)).unwrap();
        assert!((a.cm.entries() - c.cm.entries()).amax() < 1e-12);
    }

    #[test]
    fn localize_guards() {
        let cm = build_resource(&ResourceSpec::new(4, 1.0, 1.0, 0.5, 0.0).unwrap()).unwrap();
        assert!(localize(&cm, (1, 1)).is_err());
        assert!(localize_in_order(&cm, (0, 1), &[2]).is_err());
        assert!(localize_in_order(&cm, (0, 1), &[2, 1]).is_err());
        let two = build_resource(&ResourceSpec::new(2, 1.0, 1.0, 0.5, 0.0).unwrap()).unwrap();
        assert!(localize(&two, (0, 1)).is_err());
        assert!(homodyne_condition(&vacuum_cm(1).unwrap(), 0, Quadrature::P).is_err());
        let st = homodyne_condition(&cm, 2, Quadrature::P).unwrap();
        assert!(st.condition(2, Quadrature::P).is_err());
    }

    #[test]
    fn localizable_eta_examples() {
        let d3 = d_n_opt(3, 1.0, 1.0, 0.5);
        let eta3 = localizable_eta(&ResourceSpec::new(3, 1.0, 1.0, 0.5, d3).unwrap()).unwrap();
        assert!((eta3 - eta_generalized(&ResourceClass::new(3, 1.0, 1.0, 0.5).unwrap())).abs() < 1e-9);

        let two = ResourceSpec::new(2, 1.4, 1.1, 0.6, 0.05).unwrap();
        let want = crate::measures::eta_closed_form(1.4, 1.1, two.r1(), two.r2());
        assert!((localizable_eta(&two).unwrap() - want).abs() < 1e-10);

        let class8 = ResourceClass::new(8, 1.5, 1.0, 1.0).unwrap();
        let d8 = d_n_opt(8, 1.5, 1.0, 1.0);
        let eta8 = localizable_eta(&class8.with_bias(d8).unwrap()).unwrap();
        assert!((eta8 - eta_generalized(&class8)).abs() < 1e-9);
    }

    #[test]
    fn conditioning_keeps_physicality_and_purity_bound() {
        for &(n, n1, n2, rbar, d) in &[(3, 1.0, 1.0, 0.5, 0.0), (4, 1.5, 1.2, 0.8, 0.3), (6, 2.0, 1.0, 1.2, -0.5)] {
            let cm = build_resource(&ResourceSpec::new(n, n1, n2, rbar, d).unwrap()).unwrap();
            let st = localize(&cm, (0, 1)).unwrap();
            let nu = st.cm.symplectic_eigenvalues().unwrap();
            assert!(nu[0] >= 1.0 - 1e-9);
            let marginal = cm.reduced(&[0, 1]).unwrap();
            assert!(st.cm.purity() >= marginal.purity() - 1e-12);
        }
    }

    #[test]
    fn epr_estimate_meets_eta_at_optimal_bias() {
        let class = ResourceClass::new(4, 1.5, 1.0, 0.5).unwrap();
        let d = d_n_opt(4, 1.5, 1.0, 0.5);
        let spec = class.with_bias(d).unwrap();
        let eta = localizable_eta(&spec).unwrap();
        assert!((localized_epr_eta(&spec).unwrap() - eta).abs() < 1e-9);
        let off = class.with_bias(d + 0.2).unwrap();
        assert!(localized_epr_eta(&off).unwrap() > localizable_eta(&off).unwrap() + 1e-4);
    }

    #[test]
    fn localizable_entanglement_values() {
        let sep = ResourceClass::new(4, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(localizable_entanglement(&sep, LogBase::Two).unwrap(), 0.0);
        let c3 = ResourceClass::new(3, 1.0, 1.0, 0.5).unwrap();
        let le = localizable_entanglement(&c3, LogBase::Two).unwrap();
        let via_et = eof_localizable(entanglement_of_teleportation(eta_generalized(&c3)), LogBase::Two).unwrap();
        assert!((le - via_et).abs() < 1e-9);
        assert!((le - eof_symmetric(0.43606, LogBase::Two).unwrap()).abs() < 1e-4);
        let c2 = ResourceClass::new(2, 1.0, 1.0, 0.5).unwrap();
        let le2 = localizable_entanglement(&c2, LogBase::Two).unwrap();
        assert!((le2 - eof_symmetric((-1.0f64).exp(), LogBase::Two).unwrap()).abs() < 1e-10);
    }
}
