//! Covariance matrices, symplectic transforms and the symmetric resource family.

mod resource;
mod symplectic;

pub use resource::{build_resource, ResourceClass, ResourceSpec};
pub use symplectic::{apply, beam_splitter, n_splitter, SymplecticTransform};

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::error::{invalid, Error, Result};

/// Absolute symmetry tolerance, scaled by the largest entry when that exceeds one.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Lower slack allowed on symplectic eigenvalues before a state counts as unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Index of the position quadrature of `mode` in the interleaved ordering.
#[inline]
pub fn x_index(mode: usize) -> usize {
    2 * mode
}

/// Index of the momentum quadrature of `mode` in the interleaved ordering.
#[inline]
pub fn p_index(mode: usize) -> usize {
    2 * mode + 1
}

/// The symplectic form, block diagonal with per-mode blocks `[[0, 1], [-1, 0]]`.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Which quadrature a single-mode squeezer reduces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqueezeAxis {
    /// Variances `(n e^{2r}, n e^{-2r})`.
    MomentumSqueezed,
    /// Variances `(n e^{-2r}, n e^{2r})`.
    PositionSqueezed,
}

/// Second-moment matrix of a zero-mean Gaussian state of `n_modes` bosonic modes.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape, symmetry and physicality (`sigma + i Omega >= 0`).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_shape(&entries)?;
        let scale = entries.amax().max(1.0);
        for i in 0..entries.nrows() {
            for j in (i + 1)..entries.ncols() {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        let cm = Self::from_symmetrized(entries);
        let nu = symplectic_spectrum(&cm.entries)
            .map_err(|_| Error::Unphysical("matrix is not positive definite".into()))?;
        if nu[0] < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical(format!("smallest symplectic eigenvalue {} is below 1", nu[0])));
        }
        Ok(cm)
    }

    /// Wraps a matrix already known to be a physical CM, forcing exact symmetry.
    pub(crate) fn from_symmetrized(entries: DMatrix<f64>) -> Self {
        let n_modes = entries.nrows() / 2;
        let sym = (&entries + entries.transpose()) * 0.5;
        Self { n_modes, entries: sym }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// The 2x2 block coupling `row_mode` to `col_mode`.
    pub fn block(&self, row_mode: usize, col_mode: usize) -> Matrix2<f64> {
        let (r, c) = (2 * row_mode, 2 * col_mode);
        Matrix2::new(
            self.entries[(r, c)],
            self.entries[(r, c + 1)],
            self.entries[(r + 1, c)],
            self.entries[(r + 1, c + 1)],
        )
    }

    /// `u^T sigma u` for a coefficient vector over the 2N quadratures.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.entries.nrows() {
            return Err(invalid(format!(
                "coefficient vector has length {}, expected {}",
                u.len(),
                self.entries.nrows()
            )));
        }
        let mut acc = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            for (j, &uj) in u.iter().enumerate() {
                acc += ui * self.entries[(i, j)] * uj;
            }
        }
        Ok(acc)
    }

    /// Marginal state of the listed modes, in the listed order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(invalid("reduced state needs at least one mode"));
        }
        check_modes(modes, self.n_modes)?;
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.entries[(idx[i], idx[j])]);
        Ok(Self::from_symmetrized(sub))
    }

    /// Block-diagonal CM of independent subsystems.
    pub fn direct_sum(parts: &[CovarianceMatrix]) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid("direct sum of zero states"));
        }
        let dim: usize = parts.iter().map(|p| p.entries.nrows()).sum();
        let mut out = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            let d = p.entries.nrows();
            out.view_mut((off, off), (d, d)).copy_from(&p.entries);
            off += d;
        }
        Ok(Self::from_symmetrized(out))
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_spectrum(&self.entries)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn is_physical(&self) -> bool {
        matches!(self.symplectic_eigenvalues(), Ok(nu) if nu[0] >= 1.0 - PHYSICALITY_TOL)
    }
}

fn check_shape(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(invalid(format!(
            "expected a non-empty square matrix of even size, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    Ok(m.nrows() / 2)
}

pub(crate) fn check_modes(modes: &[usize], n_modes: usize) -> Result<()> {
    for (i, &m) in modes.iter().enumerate() {
        if m >= n_modes {
            return Err(invalid(format!("mode {m} out of range for {n_modes} modes")));
        }
        if modes[..i].contains(&m) {
            return Err(invalid(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Vacuum state: the identity matrix.
pub fn vacuum_cm(n_modes: usize) -> Result<CovarianceMatrix> {
    if n_modes < 1 {
        return Err(invalid("vacuum needs at least one mode"));
    }
    Ok(CovarianceMatrix::from_symmetrized(DMatrix::identity(2 * n_modes, 2 * n_modes)))
}

/// Single-mode squeezed thermal state with noise factor `n >= 1` and squeezing `r >= 0`.
pub fn squeezed_thermal_cm(n: f64, r: f64, axis: SqueezeAxis) -> Result<CovarianceMatrix> {
    if !n.is_finite() || n < 1.0 {
        return Err(Error::UnphysicalNoise(n));
    }
    if !r.is_finite() || r < 0.0 {
        return Err(invalid(format!("squeezing must be finite and >= 0, got {r}")));
    }
    Ok(squeezed_thermal_unchecked(n, r, axis))
}

/// Same as [`squeezed_thermal_cm`] but accepts negative squeezing, which swaps the axis.
pub(crate) fn squeezed_thermal_unchecked(n: f64, r: f64, axis: SqueezeAxis) -> CovarianceMatrix {
    let (vx, vp) = match axis {
        SqueezeAxis::MomentumSqueezed => (n * (2.0 * r).exp(), n * (-2.0 * r).exp()),
        SqueezeAxis::PositionSqueezed => (n * (-2.0 * r).exp(), n * (2.0 * r).exp()),
    };
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = vx;
    m[(1, 1)] = vp;
    CovarianceMatrix::from_symmetrized(m)
}

/// Symplectic eigenvalues of a CM, sorted ascending, one per mode.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    symplectic_spectrum(&sigma.entries)
}

/// Symplectic spectrum of any symmetric positive-definite `2N x 2N` matrix.
///
/// The squared symplectic eigenvalues are the eigenvalues of `-(Omega m)^2`.
/// With `m = L L^T` that matrix is similar to `K^T K`, `K = L^T Omega L`, which
/// is symmetric and handled by a dense symmetric eigensolver.
pub fn symplectic_spectrum(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n_modes = check_shape(m)?;
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::NumericalFailure("matrix is not positive definite".into()))?;
    let l = chol.l();
    let k = l.transpose() * omega(n_modes) * &l;
    let ktk = k.transpose() * &k;
    let eig = SymmetricEigen::try_new(ktk, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;
    let mut sq: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    sq.sort_by(f64::total_cmp);
    Ok(sq.chunks_exact(2).map(|pair| 0.5 * (pair[0].sqrt() + pair[1].sqrt())).collect())
}

/// Partial transposition: flips the sign of every momentum of the selected modes.
///
/// The result need not be a physical CM, so it is returned as a bare matrix.
pub fn partial_transpose(sigma: &CovarianceMatrix, modes: &[usize]) -> Result<DMatrix<f64>> {
    if modes.is_empty() || modes.len() >= sigma.n_modes {
        return Err(invalid("partial transpose needs a non-empty proper subset of the modes"));
    }
    check_modes(modes, sigma.n_modes)?;
    Ok(flip_momenta(&sigma.entries, modes))
}

pub(crate) fn flip_momenta(m: &DMatrix<f64>, modes: &[usize]) -> DMatrix<f64> {
    let mut out = m.clone();
    for &mode in modes {
        let p = p_index(mode);
        for j in 0..out.ncols() {
            out[(p, j)] = -out[(p, j)];
        }
        for i in 0..out.nrows() {
            out[(i, p)] = -out[(i, p)];
        }
    }
    out
}

/// `1 / sqrt(det sigma)`.
pub fn purity(sigma: &CovarianceMatrix) -> f64 {
    1.0 / sigma.entries.determinant().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn vacuum_is_identity() {
        assert_eq!(vacuum_cm(1).unwrap().entries(), &DMatrix::identity(2, 2));
        assert_eq!(vacuum_cm(3).unwrap().entries(), &DMatrix::identity(6, 6));
        assert!(matches!(vacuum_cm(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn squeezed_thermal_variances() {
        for axis in [SqueezeAxis::MomentumSqueezed, SqueezeAxis::PositionSqueezed] {
            let cm = squeezed_thermal_cm(1.0, 0.0, axis).unwrap();
            assert_eq!(cm.entries(), &DMatrix::identity(2, 2));
        }
        let m = squeezed_thermal_cm(1.0, 0.5, SqueezeAxis::MomentumSqueezed).unwrap();
        assert!((m.entries()[(0, 0)] - E).abs() < 1e-15);
        assert!((m.entries()[(1, 1)] - 1.0 / E).abs() < 1e-15);
        let p = squeezed_thermal_cm(2.0, 0.5, SqueezeAxis::PositionSqueezed).unwrap();
        assert!((p.entries()[(0, 0)] - 2.0 / E).abs() < 1e-15);
        assert!((p.entries()[(1, 1)] - 2.0 * E).abs() < 1e-15);
        assert_eq!(p.entries()[(0, 1)], 0.0);
    }

    #[test]
    fn squeezed_thermal_rejects_bad_input() {
        assert_eq!(squeezed_thermal_cm(0.5, 0.1, SqueezeAxis::MomentumSqueezed), Err(Error::UnphysicalNoise(0.5)));
        assert!(squeezed_thermal_cm(1.0, -0.1, SqueezeAxis::MomentumSqueezed).is_err());
    }

    #[test]
    fn spectrum_of_simple_states() {
        let nu = vacuum_cm(3).unwrap().symplectic_eigenvalues().unwrap();
        assert!(nu.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let th = squeezed_thermal_cm(2.5, 0.7, SqueezeAxis::MomentumSqueezed).unwrap();
        let nu = th.symplectic_eigenvalues().unwrap();
        assert_eq!(nu.len(), 1);
        assert!((nu[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn new_rejects_unphysical_and_asymmetric() {
        let half = DMatrix::identity(2, 2) * 0.5;
        assert!(matches!(CovarianceMatrix::new(half), Err(Error::Unphysical(_))));
        let mut asym = DMatrix::identity(2, 2);
        asym[(0, 1)] = 0.1;
        assert!(matches!(CovarianceMatrix::new(asym), Err(Error::InvalidArgument(_))));
        assert!(CovarianceMatrix::new(DMatrix::identity(3, 3)).is_err());
        let neg = -DMatrix::<f64>::identity(2, 2);
        assert!(CovarianceMatrix::new(neg).is_err());
    }

    #[test]
    fn partial_transpose_guards_and_involution() {
        let v = vacuum_cm(2).unwrap();
        assert!(partial_transpose(&v, &[]).is_err());
        assert!(partial_transpose(&v, &[0, 1]).is_err());
        assert!(partial_transpose(&v, &[2]).is_err());
        let spec = ResourceSpec::new(2, 1.3, 1.1, 0.4, 0.1).unwrap();
        let s = build_resource(&spec).unwrap();
        let pt = partial_transpose(&s, &[1]).unwrap();
        assert_eq!(flip_momenta(&pt, &[1]), *s.entries());
    }

    #[test]
    fn partial_transpose_of_product_state_keeps_spectrum() {
        let a = squeezed_thermal_cm(1.5, 0.3, SqueezeAxis::MomentumSqueezed).unwrap();
        let b = squeezed_thermal_cm(2.0, 0.8, SqueezeAxis::PositionSqueezed).unwrap();
        let prod = CovarianceMatrix::direct_sum(&[a, b]).unwrap();
        let before = prod.symplectic_eigenvalues().unwrap();
        let after = symplectic_spectrum(&partial_transpose(&prod, &[0]).unwrap()).unwrap();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_two_mode_squeezed_state() {
        let spec = ResourceSpec::new(2, 1.0, 1.0, 0.5, 0.0).unwrap();
        let s = build_resource(&spec).unwrap();
        let nu = symplectic_spectrum(&partial_transpose(&s, &[1]).unwrap()).unwrap();
        assert!((nu[0] - (-1.0f64).exp()).abs() < 1e-12);
        assert!((nu[1] - 1.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn purity_values() {
        assert!((purity(&vacuum_cm(2).unwrap()) - 1.0).abs() < 1e-15);
        let spec = ResourceSpec::new(2, 2.0, 1.5, 0.6, 0.2).unwrap();
        let s = build_resource(&spec).unwrap();
        assert!((purity(&s) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_and_direct_sum() {
        let a = squeezed_thermal_cm(1.5, 0.3, SqueezeAxis::MomentumSqueezed).unwrap();
        let b = vacuum_cm(1).unwrap();
        let prod = CovarianceMatrix::direct_sum(&[a.clone(), b]).unwrap();
        assert_eq!(prod.reduced(&[0]).unwrap(), a);
        assert!(prod.reduced(&[0, 0]).is_err());
        assert!(prod.reduced(&[]).is_err());
    }
}
