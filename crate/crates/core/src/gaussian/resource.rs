use serde::Serialize;

use super::symplectic::{apply, n_splitter};
use super::{squeezed_thermal_unchecked, CovarianceMatrix, SqueezeAxis};
use crate::error::{invalid, Error, Result};

/// Slack allowed on `|d| <= rbar` so that clamped biases round-trip.
const BIAS_SLACK: f64 = 1e-12;

/// An iso-entangled family of symmetric resources: mode count, thermal noises
/// of the momentum-squeezed (`n1`) and position-squeezed (`n2`) inputs, and
/// average squeezing `rbar`. Every bias `d` within the class gives a locally
/// equivalent state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResourceClass {
    n_modes: usize,
    n1: f64,
    n2: f64,
    rbar: f64,
}

impl ResourceClass {
    pub fn new(n_modes: usize, n1: f64, n2: f64, rbar: f64) -> Result<Self> {
        if n_modes < 2 {
            return Err(invalid(format!("resource needs N >= 2 modes, got {n_modes}")));
        }
        for n in [n1, n2] {
            if !n.is_finite() || n < 1.0 {
                return Err(Error::UnphysicalNoise(n));
            }
        }
        if !rbar.is_finite() || rbar < 0.0 {
            return Err(invalid(format!("average squeezing must be finite and >= 0, got {rbar}")));
        }
        Ok(Self { n_modes, n1, n2, rbar })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n1(&self) -> f64 {
        self.n1
    }

    pub fn n2(&self) -> f64 {
        self.n2
    }

    pub fn rbar(&self) -> f64 {
        self.rbar
    }

    /// Fixes the bias, requiring both squeezings `rbar +- d` to be nonnegative.
    pub fn with_bias(&self, d: f64) -> Result<ResourceSpec> {
        if !d.is_finite() || d.abs() > self.rbar + BIAS_SLACK {
            return Err(invalid(format!("bias d = {d} outside [-rbar, rbar] = [-{0}, {0}]", self.rbar)));
        }
        Ok(ResourceSpec { class: *self, d: d.clamp(-self.rbar, self.rbar) })
    }

    /// Fixes the bias without the sign constraint on the individual squeezings.
    /// A negative squeezing simply squeezes the other quadrature.
    pub fn with_bias_unconstrained(&self, d: f64) -> Result<ResourceSpec> {
        if !d.is_finite() {
            return Err(invalid("bias must be finite"));
        }
        Ok(ResourceSpec { class: *self, d })
    }

    /// `d` clamped into `[-rbar, rbar]`.
    pub fn clamp_bias(&self, d: f64) -> f64 {
        d.clamp(-self.rbar, self.rbar)
    }
}

/// A concrete resource: class plus squeezing bias `d = (r1 - r2) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResourceSpec {
    #[serde(flatten)]
    class: ResourceClass,
    d: f64,
}

impl ResourceSpec {
    pub fn new(n_modes: usize, n1: f64, n2: f64, rbar: f64, d: f64) -> Result<Self> {
        ResourceClass::new(n_modes, n1, n2, rbar)?.with_bias(d)
    }

    pub fn unconstrained(n_modes: usize, n1: f64, n2: f64, rbar: f64, d: f64) -> Result<Self> {
        ResourceClass::new(n_modes, n1, n2, rbar)?.with_bias_unconstrained(d)
    }

    pub fn class(&self) -> &ResourceClass {
        &self.class
    }

    pub fn n_modes(&self) -> usize {
        self.class.n_modes
    }

    pub fn n1(&self) -> f64 {
        self.class.n1
    }

    pub fn n2(&self) -> f64 {
        self.class.n2
    }

    pub fn rbar(&self) -> f64 {
        self.class.rbar
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Squeezing of the momentum-squeezed input.
    pub fn r1(&self) -> f64 {
        self.class.rbar + self.d
    }

    /// Squeezing of the position-squeezed inputs.
    pub fn r2(&self) -> f64 {
        self.class.rbar - self.d
    }
}

/// One momentum-squeezed mode `(n1, r1)` and `N-1` position-squeezed modes
/// `(n2, r2)` sent through the N-splitter.
pub fn build_resource(spec: &ResourceSpec) -> Result<CovarianceMatrix> {
    let n = spec.n_modes();
    let mut inputs = Vec::with_capacity(n);
    inputs.push(squeezed_thermal_unchecked(spec.n1(), spec.r1(), SqueezeAxis::MomentumSqueezed));
    for _ in 1..n {
        inputs.push(squeezed_thermal_unchecked(spec.n2(), spec.r2(), SqueezeAxis::PositionSqueezed));
    }
    let input = CovarianceMatrix::direct_sum(&inputs)?;
    apply(&n_splitter(n)?, &input)
}
