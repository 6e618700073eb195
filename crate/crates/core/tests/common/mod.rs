//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use seqkraus::analytic::SequentialSetup;
use seqkraus::observable::{spectral_decompose, Observable, QuantumState, DEFAULT_DEGENERACY_TOL};
use seqkraus::random;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma_z() -> Observable {
    Observable::from_real_diagonal(&[1.0, -1.0]).unwrap()
}

pub fn sigma_x() -> Observable {
    Observable::new(DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])).unwrap()
}

pub fn plus() -> QuantumState {
    QuantumState::from_real(&[1.0, 1.0]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random state and a pair of random observables of dimension `d`.
pub struct RandomSystem {
    pub state: QuantumState,
    pub a: Observable,
    pub b: Observable,
}

impl RandomSystem {
    pub fn new<R: Rng>(d: usize, rng: &mut R) -> Self {
        Self {
            state: random::state(d, rng),
            a: random::hermitian(d, rng),
            b: random::hermitian(d, rng),
        }
    }

    /// A with eigenvalues separated by at least `gap`.
    pub fn gapped<R: Rng>(d: usize, gap: f64, rng: &mut R) -> Self {
        let eigs = random::separated_eigenvalues(d, gap, gap * d as f64, rng);
        Self {
            state: random::state(d, rng),
            a: random::hermitian_with_spectrum(&eigs, rng),
            b: random::hermitian(d, rng),
        }
    }

    pub fn setup(&self, la: f64, lb: f64) -> SequentialSetup {
        SequentialSetup::new(
            self.state.clone(),
            spectral_decompose(&self.a, DEFAULT_DEGENERACY_TOL),
            spectral_decompose(&self.b, DEFAULT_DEGENERACY_TOL),
            la,
            lb,
        )
        .unwrap()
    }
}

/// `(2 lambda / pi)^{1/4} exp(-lambda (a - H)^2)` through the dense matrix exponential.
pub fn kraus_dense(h: &Observable, lambda: f64, a: f64) -> DMatrix<Complex64> {
    let d = h.dim();
    let shifted = DMatrix::<Complex64>::identity(d, d) * c(a, 0.0) - h.matrix();
    let generator = (&shifted * &shifted) * c(-lambda, 0.0);
    generator.exp() * c((2.0 * lambda / std::f64::consts::PI).powf(0.25), 0.0)
}

/// `|K_b K_a psi|^2` built from dense matrix exponentials.
pub fn chain_density(sys: &RandomSystem, la: f64, lb: f64, a: f64, b: f64) -> f64 {
    chain_density_of(&sys.state, &sys.a, &sys.b, la, lb, a, b)
}

pub fn chain_density_of(
    psi: &QuantumState,
    a_obs: &Observable,
    b_obs: &Observable,
    la: f64,
    lb: f64,
    a: f64,
    b: f64,
) -> f64 {
    let v: DVector<Complex64> = kraus_dense(b_obs, lb, b) * (kraus_dense(a_obs, la, a) * psi.amplitudes());
    v.norm_squared()
}

/// Adaptive Simpson quadrature on `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, 30)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1)
        + simpson_step(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1)
}

/// Integral over a finite interval split into `pieces` panels, which keeps
/// narrow peaks from slipping between the initial Simpson nodes.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, pieces: usize, tol: f64) -> f64 {
    let w = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|i| integrate(f, lo + w * i as f64, lo + w * (i + 1) as f64, tol / pieces as f64))
        .sum()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn panel_nodes(range: (f64, f64), pieces: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(20);
    let w = (range.1 - range.0) / pieces as f64;
    (0..pieces)
        .flat_map(|p| {
            let mid = range.0 + w * (p as f64 + 0.5);
            rule.iter().map(move |&(x, wt)| (mid + 0.5 * w * x, 0.5 * w * wt)).collect::<Vec<_>>()
        })
        .collect()
}

/// Composite 20-point Gauss-Legendre rule with `pieces` panels.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, pieces: usize) -> f64 {
    panel_nodes((lo, hi), pieces).iter().map(|&(x, w)| w * f(x)).sum()
}

/// Composite tensor-product Gauss-Legendre rule with `pieces` panels per axis.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    a_range: (f64, f64),
    b_range: (f64, f64),
    pieces: usize,
) -> f64 {
    let (na, nb) = (panel_nodes(a_range, pieces), panel_nodes(b_range, pieces));
    na.iter()
        .map(|&(a, wa)| wa * nb.iter().map(|&(b, wb)| wb * f(a, b)).sum::<f64>())
        .sum()
}

/// Integration window that holds all but a negligible tail of the readings.
pub fn reading_window(eigenvalues: &[f64], lambda: f64) -> (f64, f64) {
    let pad = 9.0 / (2.0 * lambda.sqrt());
    let lo = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo - pad, hi + pad)
}

/// Kolmogorov-Smirnov distance between sorted samples and a CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Pearson chi-square over cells; cells with expected count below `min_expected`
/// are pooled into one. Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square(observed: &[u64], expected: &[f64], min_expected: f64) -> (f64, usize, f64) {
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e >= min_expected {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pool_o += o as f64;
            pool_e += e;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        cells += 1;
    }
    let dof = cells - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    (stat, dof, p)
}

/// Derivative at zero from forward differences at steps `h1` and `h2`, with the
/// linear error term removed by Richardson extrapolation.
pub fn richardson_derivative_at_zero(f: impl Fn(f64) -> f64, f0: f64, h1: f64, h2: f64) -> f64 {
    let d1 = (f(h1) - f0) / h1;
    let d2 = (f(h2) - f0) / h2;
    (d2 * h1 - d1 * h2) / (h1 - h2)
}
