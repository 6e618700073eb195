//! Random states and observables for property checks and demos.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::observable::{hermitize, Observable, QuantumState};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random state of dimension `dim`.
pub fn state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QuantumState {
    let v = DVector::from_fn(dim, |_, _| gaussian_complex(rng));
    QuantumState::normalized(v).expect("gaussian vector is nonzero")
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Absorb the phases of diag(R) so the distribution is Haar.
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// GUE-like Hermitian matrix with O(1) entries.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Observable {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let mut h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    hermitize(&mut h);
    Observable::new(h).expect("symmetrized matrix is Hermitian")
}

/// Hermitian matrix with the given eigenvalues in a Haar-random basis.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(eigenvalues: &[f64], rng: &mut R) -> Observable {
    let u = unitary(eigenvalues.len(), rng);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        eigenvalues.len(),
        eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let mut h = &u * d * u.adjoint();
    hermitize(&mut h);
    Observable::new(h).expect("unitary conjugate of a real diagonal is Hermitian")
}

/// Eigenvalues drawn uniformly from `[-range, range]` with pairwise separation at least `gap`.
pub fn separated_eigenvalues<R: Rng + ?Sized>(
    dim: usize,
    gap: f64,
    range: f64,
    rng: &mut R,
) -> Vec<f64> {
    // Place `dim` points with minimum spacing by sampling the slack and sorting.
    let slack = 2.0 * range - gap * (dim as f64 - 1.0);
    assert!(slack > 0.0, "range too small for the requested gap");
    let mut offsets: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * slack).collect();
    offsets.sort_by(f64::total_cmp);
    offsets
        .iter()
        .enumerate()
        .map(|(i, o)| -range + o + gap * i as f64)
        .collect()
}
