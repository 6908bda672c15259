//! Parameter sweeps over average squeezing for several network sizes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::gaussian::{build_resource, ResourceClass};
use crate::measures::{contangle_from_et, entanglement_of_teleportation, eof_localizable, LogBase};
use crate::optimize::{d_unbiased, optimal_fidelity, worst_case, BiasRange};
use crate::teleport::{fidelity_closed_form, Gain};

/// Column order of the sweep table.
pub const CSV_HEADER: &str = "N,rbar,F_opt,F_equal,F_unbiased,F_worst,eta_N,E_T,E_F_loc,E_tau";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub n1: f64,
    pub n2: f64,
    pub rbar_min: f64,
    pub rbar_max: f64,
    pub steps: usize,
    pub range: BiasRange,
    pub log_base: LogBase,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_list: vec![2, 3, 4, 8, 20, 50],
            n1: 1.0,
            n2: 1.0,
            rbar_min: 0.0,
            rbar_max: 2.0,
            steps: 41,
            range: BiasRange::Constrained,
            log_base: LogBase::Two,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(invalid(format!("sweep needs at least 2 steps, got {}", self.steps)));
        }
        if self.n_list.is_empty() {
            return Err(invalid("sweep needs at least one N"));
        }
        if !(self.rbar_min >= 0.0 && self.rbar_min <= self.rbar_max && self.rbar_max.is_finite()) {
            return Err(invalid(format!("need 0 <= rbar_min <= rbar_max, got [{}, {}]", self.rbar_min, self.rbar_max)));
        }
        for &n in &self.n_list {
            ResourceClass::new(n, self.n1, self.n2, self.rbar_min)?;
        }
        Ok(())
    }

    pub fn rbar_grid(&self) -> Vec<f64> {
        let step = (self.rbar_max - self.rbar_min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.rbar_max } else { self.rbar_min + i as f64 * step })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n_modes: usize,
    pub rbar: f64,
    #[serde(rename = "F_opt")]
    pub f_opt: f64,
    /// `d = 0`, optimal gain.
    #[serde(rename = "F_equal")]
    pub f_equal: f64,
    /// Unbiased bias, optimal gain.
    #[serde(rename = "F_unbiased")]
    pub f_unbiased: f64,
    #[serde(rename = "F_worst")]
    pub f_worst: f64,
    #[serde(rename = "eta_N")]
    pub eta_n: f64,
    #[serde(rename = "E_T")]
    pub e_t: f64,
    #[serde(rename = "E_F_loc")]
    pub e_f_loc: f64,
    /// Only for pure three-mode resources.
    #[serde(rename = "E_tau")]
    pub e_tau: Option<f64>,
}

pub fn sweep_row(class: &ResourceClass, range: BiasRange, base: LogBase) -> Result<SweepRow> {
    let opt = optimal_fidelity(class, range)?;
    let f_equal = fidelity_closed_form(&class.with_bias(0.0)?, Gain::Optimal)?.fidelity;
    let du = d_unbiased(class)?.d;
    let f_unbiased = fidelity_closed_form(&class.with_bias(du)?, Gain::Optimal)?.fidelity;
    let f_worst = worst_case(class)?.fidelity_worst;
    let e_t = entanglement_of_teleportation(opt.eta_n);
    let e_f_loc = eof_localizable(e_t, base)?;
    let e_tau = if class.n_modes() == 3 {
        let pure = (build_resource(&class.with_bias(0.0)?)?.purity() - 1.0).abs() < 1e-9;
        if pure {
            Some(contangle_from_et(e_t, base)?)
        } else {
            None
        }
    } else {
        None
    };
    Ok(SweepRow {
        n_modes: class.n_modes(),
        rbar: class.rbar(),
        f_opt: opt.fidelity_opt,
        f_equal,
        f_unbiased,
        f_worst,
        eta_n: opt.eta_n,
        e_t,
        e_f_loc,
        e_tau,
    })
}

/// Rows in N-major, rbar-minor order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let grid = config.rbar_grid();
    let points: Vec<(usize, f64)> = config.n_list.iter().flat_map(|&n| grid.iter().map(move |&r| (n, r))).collect();
    points
        .par_iter()
        .map(|&(n, r)| sweep_row(&ResourceClass::new(n, config.n1, config.n2, r)?, config.range, config.log_base))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_orders_rows_and_fidelities() {
        let rows = run_sweep(&SweepConfig::default()).unwrap();
        assert_eq!(rows.len(), 6 * 41);
        assert_eq!(rows[0].n_modes, 2);
        assert_eq!(rows[41].n_modes, 3);
        assert_eq!(rows[40].rbar, 2.0);
        for row in &rows {
            if row.rbar == 0.0 {
                assert_eq!(row.f_opt, 0.5);
            } else {
                assert!(row.f_opt > 0.5);
            }
            assert!(row.f_worst <= row.f_equal + 1e-12);
            assert!(row.f_equal <= row.f_opt + 1e-12);
            assert!(row.f_unbiased <= row.f_opt + 1e-12);
            assert_eq!(row.e_tau.is_some(), row.n_modes == 3);
        }
    }

    #[test]
    fn mixed_three_mode_rows_have_no_contangle() {
        let cfg = SweepConfig { n_list: vec![3], n1: 1.2, steps: 3, ..SweepConfig::default() };
        assert!(run_sweep(&cfg).unwrap().iter().all(|r| r.e_tau.is_none()));
    }

    #[test]
    fn invalid_configs() {
        assert!(run_sweep(&SweepConfig { steps: 1, ..SweepConfig::default() }).is_err());
        assert!(run_sweep(&SweepConfig { n_list: vec![1], ..SweepConfig::default() }).is_err());
        assert!(run_sweep(&SweepConfig { rbar_min: 1.0, rbar_max: 0.5, ..SweepConfig::default() }).is_err());
        assert!(run_sweep(&SweepConfig { n_list: vec![], ..SweepConfig::default() }).is_err());
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let cfg = SweepConfig { rbar_min: 0.1, rbar_max: 0.7, steps: 7, ..SweepConfig::default() };
        let g = cfg.rbar_grid();
        assert_eq!(g.first(), Some(&0.1));
        assert_eq!(g.last(), Some(&0.7));
    }
}
