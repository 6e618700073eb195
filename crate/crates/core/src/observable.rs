//! Observables, pre-selected states and their spectral data.
//!
//! Everything downstream works in the eigenbasis of the first observable, so
//! the [`Spectrum`] produced here is normalized to a fixed convention: ascending
//! eigenvalues, each eigenvector rotated so that its largest-magnitude component
//! is real and positive, and degenerate clusters replaced by a canonical basis
//! built from the projected standard basis vectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|psi| - 1` accepted by [`QuantumState::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Relative Hermiticity tolerance accepted by [`Observable::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default relative width used to group eigenvalues into degenerate clusters.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

/// Normalized pre-selected state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<Complex64>,
}

impl QuantumState {
    /// Wraps an amplitude vector that is already normalized.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// Standard basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::DimensionTooSmall(dim))
    } else {
        Ok(())
    }
}

/// Hermitian matrix representing a measured quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: DMatrix<Complex64>,
}

impl Observable {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        check_dim(rows)?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("observable matrix"));
        }
        let scale = max_abs(&matrix);
        let asym = max_asymmetry(&matrix);
        if asym > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(Self { matrix })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Largest entry magnitude, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Observable) -> Result<DMatrix<Complex64>> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    /// Product `self * other`; Hermitian only when the two commute.
    pub fn product(&self, other: &Observable) -> Result<DMatrix<Complex64>> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(&self.matrix * &other.matrix)
    }

    /// `self^2`, always Hermitian.
    pub fn square(&self) -> Observable {
        let mut sq = &self.matrix * &self.matrix;
        hermitize(&mut sq);
        Observable { matrix: sq }
    }
}

/// Largest `|H_ij - conj(H_ji)|`.
pub fn max_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Averages `m` with its adjoint to remove rounding asymmetry from products.
pub(crate) fn hermitize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors, column `n` = `|a_n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// Amplitudes `<a_n|psi>` of `v` in this eigenbasis.
    pub fn coefficients(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.eigenvectors.ad_mul(v)
    }

    /// Maps eigenbasis amplitudes back to the computational basis.
    pub fn synthesize(&self, coeffs: &DVector<Complex64>) -> DVector<Complex64> {
        &self.eigenvectors * coeffs
    }

    /// Born weights `|<a_n|psi>|^2`.
    pub fn weights(&self, state: &QuantumState) -> Result<Vec<f64>> {
        ensure_dim(self.dim(), state.dim())?;
        Ok(self
            .coefficients(state.amplitudes())
            .iter()
            .map(|c| c.norm_sqr())
            .collect())
    }

    /// Matrix elements `<a_n'|M|a_n>` of an operator in this eigenbasis.
    pub fn represent(&self, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        ensure_dim(self.dim(), m.nrows())?;
        Ok(self.eigenvectors.ad_mul(&(m * &self.eigenvectors)))
    }

    /// `V diag(eigenvalues) V^dagger`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let scaled = DMatrix::from_fn(d, d, |i, j| {
            self.eigenvectors[(i, j)] * self.eigenvalues[j]
        });
        &scaled * self.eigenvectors.adjoint()
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self.eigenvectors.ad_mul(&self.eigenvectors);
        identity_residual(&gram)
    }

    /// Largest spread of eigenvalues; zero for a multiple of the identity.
    pub fn range(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// Smallest separation between distinct eigenvalue clusters.
    pub fn min_gap(&self, tol: f64) -> Option<f64> {
        let cutoff = tol * self.range();
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g > cutoff)
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
    }
}

pub(crate) fn identity_residual(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for ((i, j), z) in m.iter().enumerate().map(|(k, z)| ((k % m.nrows(), k / m.nrows()), z)) {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((z - Complex64::new(target, 0.0)).norm());
    }
    worst
}

/// Diagonalizes a Hermitian observable.
///
/// Eigenvalues within `tol * range` of their neighbour form a degenerate
/// cluster; the cluster basis is rebuilt from the standard basis vectors
/// projected onto the cluster subspace, so the result does not depend on the
/// rotation chosen by the eigensolver.
pub fn spectral_decompose(observable: &Observable, tol: f64) -> Spectrum {
    let m = observable.matrix();
    let d = m.nrows();

    let (values, vectors) = if is_diagonal(m) {
        (
            (0..d).map(|i| m[(i, i)].re).collect::<Vec<_>>(),
            DMatrix::<Complex64>::identity(d, d),
        )
    } else {
        let eig = SymmetricEigen::new(m.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = DMatrix::from_fn(d, d, |r, c| vectors[(r, order[c])]);

    let cutoff = tol.max(0.0) * (eigenvalues[d - 1] - eigenvalues[0]);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eigenvalues[end] - eigenvalues[end - 1] <= cutoff {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(&mut eigenvectors, start, end);
        }
        start = end;
    }

    for c in 0..d {
        fix_phase(&mut eigenvectors, c);
    }

    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Replaces columns `start..end` with a canonical orthonormal basis of their span.
fn canonicalize_cluster(vectors: &mut DMatrix<Complex64>, start: usize, end: usize) {
    let d = vectors.nrows();
    let k = end - start;
    let block = vectors.columns(start, k).clone_owned();

    // y_i = block^dagger e_i lives in C^k; projecting e_i onto the cluster gives block * y_i.
    let mut residuals: Vec<DVector<Complex64>> = (0..d)
        .map(|i| DVector::from_iterator(k, block.row(i).iter().map(|z| z.conj())))
        .collect();

    // Column-pivoted Gram-Schmidt picks which standard vectors span the cluster.
    let mut pivots = Vec::with_capacity(k);
    for _ in 0..k {
        let (best, _) = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !pivots.contains(i))
            .fold((usize::MAX, -1.0f64), |(bi, bn), (i, r)| {
                let n = r.norm();
                if n > bn * (1.0 + 1e-12) { (i, n) } else { (bi, bn) }
            });
        let q = residuals[best].unscale(residuals[best].norm());
        for r in residuals.iter_mut() {
            let overlap = q.dotc(r);
            *r -= &q * overlap;
        }
        pivots.push(best);
    }
    pivots.sort_unstable();

    // Gram-Schmidt in ascending index order over the chosen projections.
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(k);
    for &i in &pivots {
        let mut y = DVector::from_iterator(k, block.row(i).iter().map(|z| z.conj()));
        for _ in 0..2 {
            for q in &basis {
                let overlap = q.dotc(&y);
                y -= q * overlap;
            }
        }
        let n = y.norm();
        basis.push(y.unscale(n));
    }

    for (offset, y) in basis.iter().enumerate() {
        let col = &block * y;
        vectors.set_column(start + offset, &col);
    }
}

/// Rotates column `c` so its largest-magnitude entry is real and positive.
fn fix_phase(vectors: &mut DMatrix<Complex64>, c: usize) {
    let col = vectors.column(c);
    let max = col.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    // First entry within rounding of the maximum, so ties resolve by index.
    let pivot = col
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let z = col[pivot];
    let phase = z.conj() / z.norm();
    let mut col = vectors.column_mut(c);
    col *= phase;
    col[pivot] = Complex64::new(col[pivot].norm(), 0.0);
}

/// Overlaps `<b_m|a_n>` between two eigenbases; row `m`, column `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    entries: DMatrix<Complex64>,
}

impl OverlapMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m, n)]
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Worst deviation of `O^dagger O` and `O O^dagger` from the identity.
    pub fn unitarity_residual(&self) -> f64 {
        let left = self.entries.ad_mul(&self.entries);
        let right = &self.entries * self.entries.adjoint();
        identity_residual(&left).max(identity_residual(&right))
    }
}

pub fn overlap_matrix(spec_a: &Spectrum, spec_b: &Spectrum) -> Result<OverlapMatrix> {
    ensure_dim(spec_a.dim(), spec_b.dim())?;
    Ok(OverlapMatrix {
        entries: spec_b.eigenvectors().ad_mul(spec_a.eigenvectors()),
    })
}

/// Checks that a complex scalar is real up to `tol * scale` and returns its real part.
pub(crate) fn real_part(
    z: Complex64,
    scale: f64,
    tol: f64,
    quantity: &'static str,
) -> Result<f64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite(quantity));
    }
    if z.im.abs() > tol * scale.max(1.0) {
        return Err(Error::NotReal {
            quantity,
            residue: z.im.abs(),
        });
    }
    Ok(z.re)
}

/// `<psi|H|psi>`.
pub fn expectation(state: &QuantumState, observable: &Observable) -> Result<f64> {
    ensure_dim(observable.dim(), state.dim())?;
    let psi = state.amplitudes();
    let value = psi.dotc(&(observable.matrix() * psi));
    let scale = observable.scale() * state.dim() as f64;
    real_part(value, scale, 1e-12, "expectation value")
}
