//! Monte Carlo estimate of the teleportation fidelity from sampled quadratures.
//!
//! Each sample draws unit-variance vacuum quadratures for the N input modes,
//! scales them by the squeezed-thermal factors, mixes them with the N-splitter
//! and forms `x_rel` and `p_tot`. Nothing here touches a covariance matrix.
//!
//! Samples are split over a fixed number of shards. Shard `i` owns the ChaCha
//! stream `i` of the seed, so results are bit-identical for a given
//! `(seed, samples)` whatever the thread count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::gaussian::{n_splitter, ResourceSpec};
use crate::optimize::g_n_opt;
use crate::teleport::{fidelity_from_variances, protocol_forms, Gain, ProtocolParams};

/// Number of independent streams a run is split into.
pub const SHARDS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub spec: ResourceSpec,
    pub params: ProtocolParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub fidelity_mean: f64,
    /// Delete-one-shard jackknife standard error.
    pub std_error: f64,
    pub var_x_rel_hat: f64,
    pub var_p_tot_hat: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormEstimate {
    pub variance: f64,
    pub std_error: f64,
}

struct Sampler {
    n_modes: usize,
    /// Standard deviations of (x, p) for each input mode.
    scales: Vec<(f64, f64)>,
    mixing: DMatrix<f64>,
}

impl Sampler {
    fn new(spec: &ResourceSpec) -> Result<Self> {
        let n = spec.n_modes();
        let (s1, s2) = (spec.n1().sqrt(), spec.n2().sqrt());
        let mut scales = vec![(s1 * spec.r1().exp(), s1 * (-spec.r1()).exp())];
        scales.extend(std::iter::repeat_n((s2 * (-spec.r2()).exp(), s2 * spec.r2().exp()), n - 1));
        let full = n_splitter(n)?;
        let mixing = DMatrix::from_fn(n, n, |a, b| full.entries()[(2 * a, 2 * b)]);
        Ok(Self { n_modes: n, scales, mixing })
    }

    /// Sums of `y^2` and `y^4` for every form over `count` samples of one stream.
    fn run_shard(&self, forms: &[Vec<f64>], count: u64, seed: u64, stream: u64) -> Vec<(f64, f64)> {
        let n = self.n_modes;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut x_in = vec![0.0; n];
        let mut p_in = vec![0.0; n];
        let mut quad = vec![0.0; 2 * n];
        let mut sums = vec![(0.0, 0.0); forms.len()];
        for _ in 0..count {
            for j in 0..n {
                let (zx, zp) = standard_normal_pair(&mut rng);
                x_in[j] = self.scales[j].0 * zx;
                p_in[j] = self.scales[j].1 * zp;
            }
            for a in 0..n {
                let (mut xa, mut pa) = (0.0, 0.0);
                for b in 0..n {
                    let m = self.mixing[(a, b)];
                    xa += m * x_in[b];
                    pa += m * p_in[b];
                }
                quad[2 * a] = xa;
                quad[2 * a + 1] = pa;
            }
            for (form, acc) in forms.iter().zip(sums.iter_mut()) {
                let y: f64 = form.iter().zip(&quad).map(|(c, q)| c * q).sum();
                let y2 = y * y;
                acc.0 += y2;
                acc.1 += y2 * y2;
            }
        }
        sums
    }

    /// Per-shard `(count, sums)` in shard order.
    fn run(&self, forms: &[Vec<f64>], samples: u64, seed: u64) -> Vec<(u64, Vec<(f64, f64)>)> {
        let shards = SHARDS.min(samples);
        let base = samples / shards;
        let extra = samples % shards;
        (0..shards)
            .into_par_iter()
            .map(|i| {
                let count = base + u64::from(i < extra);
                (count, self.run_shard(forms, count, seed, i))
            })
            .collect()
    }
}

/// Box-Muller transform: two uniforms in, two independent standard normals out.
fn standard_normal_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let radius = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (radius * c, radius * s)
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < 2 {
        return Err(invalid(format!("need at least 2 samples, got {samples}")));
    }
    Ok(())
}

/// Sampled fidelity of the protocol on the configured resource.
pub fn simulate(config: &McConfig) -> Result<McEstimate> {
    check_samples(config.samples)?;
    let spec = &config.spec;
    let params = &config.params;
    let n = spec.n_modes();
    if params.sender() >= n || params.receiver() >= n {
        return Err(invalid("sender/receiver out of range"));
    }
    let g = match params.gain() {
        Gain::Fixed(g) => g,
        Gain::Optimal => g_n_opt(n, spec.n1(), spec.n2(), spec.rbar()),
    };
    let (u, v) = protocol_forms(n, params.sender(), params.receiver(), g);
    let shards = Sampler::new(spec)?.run(&[u, v], config.samples, config.seed);

    let total = config.samples as f64;
    let sx: f64 = shards.iter().map(|(_, s)| s[0].0).sum();
    let sp: f64 = shards.iter().map(|(_, s)| s[1].0).sum();
    let var_x = sx / total;
    let var_p = sp / total;
    let fidelity_mean = fidelity_from_variances(var_x, var_p)?;

    let k = shards.len() as f64;
    let leave_one_out: Vec<f64> = shards
        .iter()
        .map(|(count, s)| {
            let rest = total - *count as f64;
            fidelity_from_variances((sx - s[0].0) / rest, (sp - s[1].0) / rest)
        })
        .collect::<Result<_>>()?;
    let mean_loo = leave_one_out.iter().sum::<f64>() / k;
    let jack_var = (k - 1.0) / k * leave_one_out.iter().map(|f| (f - mean_loo).powi(2)).sum::<f64>();

    Ok(McEstimate { fidelity_mean, std_error: jack_var.sqrt(), var_x_rel_hat: var_x, var_p_tot_hat: var_p })
}

/// Sampled variance of `sum_i c_i X_i` over the 2N output quadratures of the resource.
pub fn variance_of_form(coefficients: &[f64], spec: &ResourceSpec, samples: u64, seed: u64) -> Result<FormEstimate> {
    check_samples(samples)?;
    if coefficients.len() != 2 * spec.n_modes() {
        return Err(invalid(format!("expected {} coefficients, got {}", 2 * spec.n_modes(), coefficients.len())));
    }
    let shards = Sampler::new(spec)?.run(&[coefficients.to_vec()], samples, seed);
    let total = samples as f64;
    let s2: f64 = shards.iter().map(|(_, s)| s[0].0).sum();
    let s4: f64 = shards.iter().map(|(_, s)| s[0].1).sum();
    let variance = s2 / total;
    let spread = (s4 / total - variance * variance).max(0.0);
    Ok(FormEstimate { variance, std_error: (spread / (total - 1.0)).sqrt() })
}
