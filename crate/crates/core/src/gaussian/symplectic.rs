use nalgebra::DMatrix;

use super::{check_modes, omega, CovarianceMatrix};
use crate::error::{invalid, Error, Result};

/// Tolerance on `max |S Omega S^T - Omega|`, relative to `max(1, max|S|^2)`.
const SYMPLECTIC_TOL: f64 = 1e-12;

/// Real `2N x 2N` matrix preserving the symplectic form; acts on quadratures as `X -> S X`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 || !entries.nrows().is_multiple_of(2) {
            return Err(invalid("symplectic transform must be square with even size"));
        }
        let n_modes = entries.nrows() / 2;
        let s = Self { n_modes, entries };
        let scale = s.entries.amax().powi(2).max(1.0);
        if s.symplectic_defect() > SYMPLECTIC_TOL * scale {
            return Err(invalid("matrix does not preserve the symplectic form"));
        }
        Ok(s)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self { n_modes, entries: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Passive transform acting with the same real orthogonal `N x N` matrix on
    /// positions and momenta.
    pub fn passive(mixing: &DMatrix<f64>) -> Result<Self> {
        let n = mixing.nrows();
        if n == 0 || mixing.ncols() != n {
            return Err(invalid("mixing matrix must be square and non-empty"));
        }
        let defect = (mixing * mixing.transpose() - DMatrix::identity(n, n)).amax();
        if defect > 1e-12 {
            return Err(invalid(format!("mixing matrix is not orthogonal (defect {defect:e})")));
        }
        Ok(Self::passive_unchecked(mixing))
    }

    fn passive_unchecked(mixing: &DMatrix<f64>) -> Self {
        let n = mixing.nrows();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                let v = mixing[(a, b)];
                s[(2 * a, 2 * b)] = v;
                s[(2 * a + 1, 2 * b + 1)] = v;
            }
        }
        Self { n_modes: n, entries: s }
    }

    /// Single-mode squeezer `x -> e^r x, p -> e^-r p` on `mode`.
    pub fn squeezer(r: f64, mode: usize, n_modes: usize) -> Result<Self> {
        check_modes(&[mode], n_modes)?;
        let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
        s[(2 * mode, 2 * mode)] = r.exp();
        s[(2 * mode + 1, 2 * mode + 1)] = (-r).exp();
        Ok(Self { n_modes, entries: s })
    }

    /// Phase-space rotation by `theta` on `mode`.
    pub fn phase_rotation(theta: f64, mode: usize, n_modes: usize) -> Result<Self> {
        check_modes(&[mode], n_modes)?;
        let (s, c) = theta.sin_cos();
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let k = 2 * mode;
        m[(k, k)] = c;
        m[(k, k + 1)] = s;
        m[(k + 1, k)] = -s;
        m[(k + 1, k + 1)] = c;
        Ok(Self { n_modes, entries: m })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `max |S Omega S^T - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let om = omega(self.n_modes);
        (&self.entries * &om * self.entries.transpose() - om).amax()
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, found: other.n_modes });
        }
        Ok(Self { n_modes: self.n_modes, entries: &self.entries * &other.entries })
    }

    /// `S^-1 = -Omega S^T Omega`.
    pub fn inverse(&self) -> Self {
        let om = omega(self.n_modes);
        Self { n_modes: self.n_modes, entries: -(&om * self.entries.transpose() * &om) }
    }
}

/// Beam splitter on modes `i`, `j` (zero-based):
/// `a_i -> a_i cos(theta) + a_j sin(theta)`, `a_j -> a_i sin(theta) - a_j cos(theta)`.
///
/// The minus sign on mode `j` is kept as written; it is a local phase and
/// does not change any fidelity or entanglement figure.
pub fn beam_splitter(theta: f64, i: usize, j: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if i == j {
        return Err(invalid("beam splitter needs two distinct modes"));
    }
    check_modes(&[i, j], n_modes)?;
    let mut mix = DMatrix::identity(n_modes, n_modes);
    mix_rows(&mut mix, theta, i, j);
    Ok(SymplecticTransform::passive_unchecked(&mix))
}

/// Left-multiplies `m` by the beam-splitter mixing matrix acting on rows `i`, `j`.
fn mix_rows(m: &mut DMatrix<f64>, theta: f64, i: usize, j: usize) {
    let (s, c) = theta.sin_cos();
    for col in 0..m.ncols() {
        let (ai, aj) = (m[(i, col)], m[(j, col)]);
        m[(i, col)] = c * ai + s * aj;
        m[(j, col)] = s * ai - c * aj;
    }
}

/// Angles of the cascade, in application order: `acos(1/sqrt(N - k))` on modes `(k, k+1)`.
pub fn n_splitter_angles(n: usize) -> Vec<f64> {
    (0..n.saturating_sub(1)).map(|k| (1.0 / ((n - k) as f64).sqrt()).acos()).collect()
}

/// N-splitter `B_{N-1,N}(pi/4) ... B_{2,3}(acos 1/sqrt(N-1)) B_{1,2}(acos 1/sqrt N)`.
///
/// `B_{1,2}` acts first. The first input mode ends up spread with amplitude
/// `1/sqrt(N)` over every output.
pub fn n_splitter(n: usize) -> Result<SymplecticTransform> {
    if n < 2 {
        return Err(invalid(format!("N-splitter needs N >= 2, got {n}")));
    }
    let mut mix = DMatrix::identity(n, n);
    for (k, theta) in n_splitter_angles(n).into_iter().enumerate() {
        mix_rows(&mut mix, theta, k, k + 1);
    }
    Ok(SymplecticTransform::passive_unchecked(&mix))
}

/// `sigma -> S sigma S^T`.
pub fn apply(s: &SymplecticTransform, sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.n_modes != sigma.n_modes() {
        return Err(Error::DimensionMismatch { expected: s.n_modes, found: sigma.n_modes() });
    }
    let out = &s.entries * sigma.entries() * s.entries.transpose();
    Ok(CovarianceMatrix::from_symmetrized(out))
}
