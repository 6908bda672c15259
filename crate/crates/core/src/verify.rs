//! Cross-checks between the closed forms, the covariance-matrix pipeline, the
//! numerical optimizer, homodyne localization and Monte Carlo sampling.

use serde::Serialize;

use crate::error::Result;
use crate::gaussian::{build_resource, ResourceClass, ResourceSpec};
use crate::localize::localizable_eta;
use crate::measures::{entanglement_of_teleportation, eof_localizable, eof_symmetric, eta_generalized, LogBase};
use crate::montecarlo::{simulate, McConfig};
use crate::optimize::{d_n_opt, g_n_opt, network_objective, numerical_optimum};
use crate::teleport::{
    fidelity_closed_form, fidelity_from_variances, teleported_variances, variances_closed_form_network, Gain,
    ProtocolParams,
};

pub const NETWORK_SIZES: [usize; 6] = [2, 3, 4, 8, 20, 50];
pub const NOISES: [f64; 3] = [1.0, 1.5, 2.0];

/// `0, 0.25, ..., 2`.
pub fn rbar_grid() -> Vec<f64> {
    (0..=8).map(|k| 0.25 * k as f64).collect()
}

/// Every `(N, n1, n2, rbar)` of the standard grid.
pub fn standard_classes() -> Vec<ResourceClass> {
    let mut out = Vec::new();
    for &n in &NETWORK_SIZES {
        for &n1 in &NOISES {
            for &n2 in &NOISES {
                for &r in &rbar_grid() {
                    out.push(ResourceClass::new(n, n1, n2, r).expect("grid point is valid"));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: u64,
    /// Replaces the network p-variance denominator N by 4, which must be caught.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 2005, samples: 200_000, inject_fault: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Grid point with the largest deviation.
    pub worst_point: String,
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    max: f64,
    worst: String,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, max: 0.0, worst: String::new() }
    }

    fn record(&mut self, deviation: f64, point: impl FnOnce() -> String) {
        if !(deviation <= self.max) {
            self.max = deviation;
            self.worst = point();
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            passed: self.max <= self.tolerance,
            max_deviation: self.max,
            tolerance: self.tolerance,
            worst_point: self.worst,
        }
    }
}

fn label(class: &ResourceClass) -> String {
    format!("N={} n1={} n2={} rbar={}", class.n_modes(), class.n1(), class.n2(), class.rbar())
}

fn spec_label(spec: &ResourceSpec) -> String {
    format!("{} d={}", label(spec.class()), spec.d())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn variance_suite(inject_fault: bool) -> Result<SuiteReport> {
    let mut t = Tracker::new("closed-form variances vs covariance matrix", 1e-10);
    for class in standard_classes() {
        let r = class.rbar();
        for d in [-r / 2.0, 0.0, r / 2.0] {
            let spec = class.with_bias(d)?;
            let cm = build_resource(&spec)?;
            for g in [0.0, 0.5, 1.0] {
                let (vx, vp) = teleported_variances(&cm, 0, 1, g)?;
                let (cx, mut cp) = variances_closed_form_network(&spec, g);
                if inject_fault {
                    cp *= spec.n_modes() as f64 / 4.0;
                }
                t.record(rel(vx, cx).max(rel(vp, cp)), || format!("{} g={g}", spec_label(&spec)));
            }
        }
    }
    Ok(t.finish())
}

fn optimal_fidelity_suite() -> Result<SuiteReport> {
    let mut t = Tracker::new("pipeline fidelity at optimum vs 1/(1+eta_N)", 1e-10);
    for class in standard_classes() {
        let (n, n1, n2, r) = (class.n_modes(), class.n1(), class.n2(), class.rbar());
        let spec = class.with_bias_unconstrained(d_n_opt(n, n1, n2, r))?;
        let cm = build_resource(&spec)?;
        let (vx, vp) = teleported_variances(&cm, 0, 1, g_n_opt(n, n1, n2, r))?;
        let f = fidelity_from_variances(vx, vp)?;
        t.record((f - 1.0 / (1.0 + eta_generalized(&class))).abs(), || label(&class));
    }
    Ok(t.finish())
}

fn optimizer_suite() -> Result<SuiteReport> {
    let mut t = Tracker::new("numerical optimum vs closed-form bias and gain", 1e-8);
    for class in standard_classes() {
        let (n, n1, n2, r) = (class.n_modes(), class.n1(), class.n2(), class.rbar());
        let num = numerical_optimum(network_objective(class), (-r - 1.0, r + 1.0), (-3.0, 3.0))?;
        let mut dev = (num.d_opt - d_n_opt(n, n1, n2, r)).abs();
        if n > 2 {
            dev = dev.max((num.g_opt - g_n_opt(n, n1, n2, r)).abs());
        }
        t.record(dev, || label(&class));
    }
    Ok(t.finish())
}

fn localization_classes() -> Vec<ResourceClass> {
    let mut out = Vec::new();
    for n in [3, 4, 8] {
        for n1 in [1.0, 1.5] {
            for n2 in [1.0, 1.5] {
                for r in [0.25, 0.5, 1.0] {
                    out.push(ResourceClass::new(n, n1, n2, r).expect("grid point is valid"));
                }
            }
        }
    }
    out
}

fn localization_suite() -> Result<SuiteReport> {
    let mut t = Tracker::new("localized eta vs eta_N", 1e-9);
    for class in localization_classes() {
        let d = d_n_opt(class.n_modes(), class.n1(), class.n2(), class.rbar());
        let eta_loc = localizable_eta(&class.with_bias_unconstrained(d)?)?;
        t.record((eta_loc - eta_generalized(&class)).abs(), || label(&class));
    }
    Ok(t.finish())
}

fn measures_suite() -> Result<SuiteReport> {
    let mut t = Tracker::new("E_F_loc from E_T vs f(localized eta)", 1e-9);
    for class in localization_classes() {
        let d = d_n_opt(class.n_modes(), class.n1(), class.n2(), class.rbar());
        let eta_loc = localizable_eta(&class.with_bias_unconstrained(d)?)?;
        let e_t = entanglement_of_teleportation(eta_generalized(&class));
        let a = eof_localizable(e_t, LogBase::Two)?;
        let b = eof_symmetric(eta_loc, LogBase::Two)?;
        t.record((a - b).abs(), || label(&class));
    }
    Ok(t.finish())
}

fn monte_carlo_suite(seed: u64, samples: u64) -> Result<SuiteReport> {
    let mut t = Tracker::new("Monte Carlo fidelity (deviation in standard errors)", 3.0);
    let specs = [
        ResourceSpec::new(2, 1.0, 1.0, 0.5, 0.0)?,
        ResourceSpec::new(3, 1.0, 1.0, 0.5, d_n_opt(3, 1.0, 1.0, 0.5))?,
        ResourceSpec::new(4, 1.5, 1.2, 0.8, 0.1)?,
    ];
    for (i, spec) in specs.iter().enumerate() {
        let est = simulate(&McConfig {
            samples,
            seed: seed.wrapping_add(i as u64),
            spec: *spec,
            params: ProtocolParams::optimal(),
        })?;
        let exact = fidelity_closed_form(spec, Gain::Optimal)?.fidelity;
        t.record((est.fidelity_mean - exact).abs() / est.std_error, || spec_label(spec));
    }
    Ok(t.finish())
}

pub fn run_verify(config: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        variance_suite(config.inject_fault)?,
        optimal_fidelity_suite()?,
        optimizer_suite()?,
        localization_suite()?,
        measures_suite()?,
        monte_carlo_suite(config.seed, config.samples)?,
    ])
}
