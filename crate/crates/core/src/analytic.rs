//! Closed-form statistics of one Gaussian-pointer measurement of `A` followed
//! immediately by one of `B`.
//!
//! All sums are written in the eigenbasis of `A` with amplitudes
//! `psi_n = <a_n|psi>` and overlaps `O_mn = <b_m|a_n>`. Pointer integrals are
//! done analytically, so every evaluator below is exact up to rounding. Complex
//! intermediate sums are carried to the end and their imaginary parts checked
//! rather than discarded, so a wrong conjugation shows up as an error.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::kraus::check_lambda;
use crate::observable::{
    ensure_dim, overlap_matrix, real_part, Observable, OverlapMatrix, QuantumState, Spectrum,
};

const REAL_TOL: f64 = 1e-10;

/// A pre-selected state, both eigenbases and the two detector strengths.
#[derive(Debug, Clone)]
pub struct SequentialSetup {
    state: QuantumState,
    spec_a: Spectrum,
    spec_b: Spectrum,
    overlap: OverlapMatrix,
    coeffs: DVector<Complex64>,
    lambda_a: f64,
    lambda_b: f64,
}

impl SequentialSetup {
    pub fn new(
        state: QuantumState,
        spec_a: Spectrum,
        spec_b: Spectrum,
        lambda_a: f64,
        lambda_b: f64,
    ) -> Result<Self> {
        ensure_dim(spec_a.dim(), state.dim())?;
        ensure_dim(spec_a.dim(), spec_b.dim())?;
        check_lambda(lambda_a)?;
        check_lambda(lambda_b)?;
        let overlap = overlap_matrix(&spec_a, &spec_b)?;
        let coeffs = spec_a.coefficients(state.amplitudes());
        Ok(Self {
            state,
            spec_a,
            spec_b,
            overlap,
            coeffs,
            lambda_a,
            lambda_b,
        })
    }

    /// Same system at different strengths.
    pub fn with_strengths(&self, lambda_a: f64, lambda_b: f64) -> Result<Self> {
        check_lambda(lambda_a)?;
        check_lambda(lambda_b)?;
        Ok(Self {
            lambda_a,
            lambda_b,
            ..self.clone()
        })
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn spec_a(&self) -> &Spectrum {
        &self.spec_a
    }

    pub fn spec_b(&self) -> &Spectrum {
        &self.spec_b
    }

    pub fn overlap(&self) -> &OverlapMatrix {
        &self.overlap
    }

    /// `<a_n|psi>`.
    pub fn coefficients(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }

    pub fn lambda_b(&self) -> f64 {
        self.lambda_b
    }

    pub fn dim(&self) -> usize {
        self.spec_a.dim()
    }

    /// `sum_m <a_n'|b_m> f(m) <b_m|a_n>` as a matrix indexed `(n', n)`.
    fn weighted_gram(&self, f: impl Fn(usize) -> f64) -> DMatrix<Complex64> {
        let o = self.overlap.entries();
        let d = self.dim();
        let scaled = DMatrix::from_fn(d, d, |m, n| o[(m, n)] * f(m));
        o.ad_mul(&scaled)
    }

    /// `sum_{n,n'} conj(psi_n') K(n',n) psi_n w(n,n')`, checked for realness.
    fn quadratic_form(
        &self,
        kernel: &DMatrix<Complex64>,
        weight: impl Fn(usize, usize) -> f64,
        tol: f64,
        quantity: &'static str,
    ) -> Result<f64> {
        quadratic_form(&self.coeffs, kernel, weight, tol, quantity)
    }
}

fn quadratic_form(
    psi: &DVector<Complex64>,
    kernel: &DMatrix<Complex64>,
    weight: impl Fn(usize, usize) -> f64,
    tol: f64,
    quantity: &'static str,
) -> Result<f64> {
    let d = psi.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in 0..d {
        for np in 0..d {
            let term = psi[np].conj() * kernel[(np, n)] * psi[n] * weight(n, np);
            total += term;
            scale += term.norm();
        }
    }
    real_part(total, scale, tol, quantity)
}

/// Variance `1/(4 lambda)` of the reading density `sqrt(2 lambda/pi) exp(-2 lambda x^2)`
/// around a single eigenvalue.
pub fn pointer_variance(lambda: f64) -> f64 {
    0.25 / lambda
}

/// Mean (`k = 1`) or second moment (`k = 2`) of a single pointer reading.
pub fn moment_single(state: &QuantumState, spec: &Spectrum, lambda: f64, k: u32) -> Result<f64> {
    check_lambda(lambda)?;
    let weights = spec.weights(state)?;
    let a = spec.eigenvalues();
    match k {
        1 => Ok(weights.iter().zip(a).map(|(w, x)| w * x).sum()),
        2 => Ok(weights.iter().zip(a).map(|(w, x)| w * x * x).sum::<f64>() + pointer_variance(lambda)),
        other => Err(Error::UnsupportedMoment(other)),
    }
}

/// Born-rule variance `<A^2> - <A>^2` of the state in this eigenbasis.
pub fn projective_variance(state: &QuantumState, spec: &Spectrum) -> Result<f64> {
    let weights = spec.weights(state)?;
    let a = spec.eigenvalues();
    let mean: f64 = weights.iter().zip(a).map(|(w, x)| w * x).sum();
    // Centered form avoids cancellation when |<A>| >> spread.
    Ok(weights.iter().zip(a).map(|(w, x)| w * (x - mean) * (x - mean)).sum())
}

/// Spread of single pointer readings: `sqrt(Var_psi(A) + 1/(4 lambda))`.
pub fn std_single(state: &QuantumState, spec: &Spectrum, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((projective_variance(state, spec)? + pointer_variance(lambda)).sqrt())
}

/// Joint density of the readings `(a, b)`.
pub fn joint_density(setup: &SequentialSetup, a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidOutcome(a));
    }
    if !b.is_finite() {
        return Err(Error::InvalidOutcome(b));
    }
    let (la, lb) = (setup.lambda_a, setup.lambda_b);
    let a_n = setup.spec_a.eigenvalues();
    let b_m = setup.spec_b.eigenvalues();
    let kernel = setup.weighted_gram(|m| {
        let x = b - b_m[m];
        (-2.0 * lb * x * x).exp()
    });
    let sum = setup.quadratic_form(
        &kernel,
        |n, np| {
            let (x, y) = (a - a_n[n], a - a_n[np]);
            (-la * (x * x + y * y)).exp()
        },
        1e-12,
        "joint density",
    )?;
    Ok(2.0 / PI * (la * lb).sqrt() * sum)
}

/// Density of the first reading with the second one integrated out.
pub fn marginal_density_a(setup: &SequentialSetup, a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidOutcome(a));
    }
    let (la, lb) = (setup.lambda_a, setup.lambda_b);
    let a_n = setup.spec_a.eigenvalues();
    let b_integral = (2.0 * lb / PI).sqrt() * gaussian_integral(2.0 * lb);
    let kernel = setup.weighted_gram(|_| b_integral);
    let sum = setup.quadratic_form(
        &kernel,
        |n, np| {
            let (x, y) = (a - a_n[n], a - a_n[np]);
            (-la * (x * x + y * y)).exp()
        },
        REAL_TOL,
        "marginal density",
    )?;
    Ok((2.0 * la / PI).sqrt() * sum)
}

/// `int exp(-alpha x^2) dx` over the real line.
fn gaussian_integral(alpha: f64) -> f64 {
    (PI / alpha).sqrt()
}

/// `int_lo^hi exp(-alpha (x - c)^2) dx`.
fn gaussian_interval(alpha: f64, c: f64, lo: f64, hi: f64) -> f64 {
    let s = alpha.sqrt();
    let (x0, x1) = (s * (lo - c), s * (hi - c));
    // Use the complementary function on whichever tail the interval sits in.
    let diff = if x0 >= 0.0 {
        erfc(x0) - erfc(x1)
    } else if x1 <= 0.0 {
        erfc(-x1) - erfc(-x0)
    } else {
        erf(x1) - erf(x0)
    };
    0.5 * gaussian_integral(alpha) * diff
}

/// Probability that the readings land in `[a_lo, a_hi] x [b_lo, b_hi]`.
///
/// Each term of the joint density is a product of Gaussians in `a` and `b`,
/// so the cell integral is a finite sum of error-function differences.
pub fn joint_cell_probability(
    setup: &SequentialSetup,
    a_range: (f64, f64),
    b_range: (f64, f64),
) -> Result<f64> {
    let (la, lb) = (setup.lambda_a, setup.lambda_b);
    let a_n = setup.spec_a.eigenvalues();
    let b_m = setup.spec_b.eigenvalues();
    let kernel = setup.weighted_gram(|m| {
        (2.0 * lb / PI).sqrt() * gaussian_interval(2.0 * lb, b_m[m], b_range.0, b_range.1)
    });
    let sum = setup.quadratic_form(
        &kernel,
        |n, np| {
            let center = 0.5 * (a_n[n] + a_n[np]);
            let gap = a_n[n] - a_n[np];
            (2.0 * la / PI).sqrt()
                * (-0.5 * la * gap * gap).exp()
                * gaussian_interval(2.0 * la, center, a_range.0, a_range.1)
        },
        1e-12,
        "cell probability",
    )?;
    Ok(sum)
}

/// Joint probability of the eigenvalue pair `(a_n0, b_m0)` when both detectors are projective.
pub fn joint_density_strong(
    state: &QuantumState,
    spec_a: &Spectrum,
    spec_b: &Spectrum,
    n0: usize,
    m0: usize,
) -> Result<f64> {
    ensure_dim(spec_a.dim(), state.dim())?;
    let d = spec_a.dim();
    if n0 >= d {
        return Err(Error::IndexOutOfRange { index: n0, dim: d });
    }
    if m0 >= d {
        return Err(Error::IndexOutOfRange { index: m0, dim: d });
    }
    let overlap = overlap_matrix(spec_a, spec_b)?;
    let psi_n = spec_a.coefficients(state.amplitudes())[n0];
    Ok(psi_n.norm_sqr() * overlap.get(m0, n0).norm_sqr())
}

/// Small-strength expansion of the joint density at fixed readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakExpansionReport {
    /// `sum <psi|a_n'><a_n'|b_m><b_m|a_n><a_n|psi> [(a - a_n)^2 + (a - a_n')^2]`.
    pub a_term: f64,
    /// Same sum weighted by `(b - b_m)^2`.
    pub b_term: f64,
    /// Curvature `a_term + 2 b_term` of the equal-strength profile `lambda - C lambda^2`.
    pub c_coefficient: f64,
    /// Vertex `1 / (2C)`; `None` when `C <= 0`.
    pub optimal_lambda: Option<f64>,
    /// Leading term `(2/pi) sqrt(lambda_A lambda_B)` at the setup's strengths.
    pub leading_density: f64,
}

impl WeakExpansionReport {
    /// Density through first order in the strengths.
    pub fn truncated_density(&self, lambda_a: f64, lambda_b: f64) -> f64 {
        let root = (lambda_a * lambda_b).sqrt();
        2.0 / PI * root * (1.0 - lambda_a * self.a_term - 2.0 * lambda_b * self.b_term)
    }

    /// Shape `lambda - C lambda^2` of the equal-strength expansion.
    pub fn truncated_profile(&self, lambda: f64) -> f64 {
        lambda - self.c_coefficient * lambda * lambda
    }
}

/// Coefficients of the weak-weak expansion of [`joint_density`] at `(a, b)`.
///
/// Each pointer factor `exp(-lambda x^2)` contributes `-lambda x^2` at first
/// order. The two `A` factors carry different indices `n, n'`, while both `B`
/// factors share the index `m`, so the `B` displacement enters twice.
pub fn weak_expansion(setup: &SequentialSetup, a: f64, b: f64) -> Result<WeakExpansionReport> {
    let a_n = setup.spec_a.eigenvalues();
    let b_m = setup.spec_b.eigenvalues();
    let plain = setup.weighted_gram(|_| 1.0);
    let a_term = setup.quadratic_form(
        &plain,
        |n, np| (a - a_n[n]).powi(2) + (a - a_n[np]).powi(2),
        REAL_TOL,
        "weak expansion a-term",
    )?;
    let b_kernel = setup.weighted_gram(|m| (b - b_m[m]).powi(2));
    let b_term = setup.quadratic_form(&b_kernel, |_, _| 1.0, REAL_TOL, "weak expansion b-term")?;
    let c = a_term + 2.0 * b_term;
    Ok(WeakExpansionReport {
        a_term,
        b_term,
        c_coefficient: c,
        optimal_lambda: (c > 0.0).then(|| 0.5 / c),
        leading_density: 2.0 / PI * (setup.lambda_a * setup.lambda_b).sqrt(),
    })
}

/// Total probability of all reading pairs, integrated analytically term by term.
pub fn total_probability(setup: &SequentialSetup) -> Result<f64> {
    let (la, lb) = (setup.lambda_a, setup.lambda_b);
    let a_n = setup.spec_a.eigenvalues();
    let b_integral = (2.0 * lb / PI).sqrt() * gaussian_integral(2.0 * lb);
    let kernel = setup.weighted_gram(|_| b_integral);
    let a_pref = (2.0 * la / PI).sqrt() * gaussian_integral(2.0 * la);
    setup.quadratic_form(
        &kernel,
        |n, np| {
            let gap = a_n[n] - a_n[np];
            a_pref * (-0.5 * la * gap * gap).exp()
        },
        REAL_TOL,
        "total probability",
    )
}

/// Mean first reading over the joint distribution.
pub fn mean_a_sequential(setup: &SequentialSetup) -> Result<f64> {
    let (la, lb) = (setup.lambda_a, setup.lambda_b);
    let a_n = setup.spec_a.eigenvalues();
    let b_integral = (2.0 * lb / PI).sqrt() * gaussian_integral(2.0 * lb);
    let kernel = setup.weighted_gram(|_| b_integral);
    let a_pref = (2.0 * la / PI).sqrt() * gaussian_integral(2.0 * la);
    // int a exp(-la[(a-a_n)^2 + (a-a_n')^2]) da = midpoint * exp(-la gap^2/2) * sqrt(pi/(2 la))
    setup.quadratic_form(
        &kernel,
        |n, np| {
            let gap = a_n[n] - a_n[np];
            a_pref * 0.5 * (a_n[n] + a_n[np]) * (-0.5 * la * gap * gap).exp()
        },
        REAL_TOL,
        "sequential mean of A",
    )
}

/// Mean second reading after the first detector fired with strength `lambda_a`.
///
/// The `b` integral is exact, so the second detector's strength drops out.
pub fn mean_b_sequential(
    state: &QuantumState,
    spec_a: &Spectrum,
    spec_b: &Spectrum,
    lambda_a: f64,
) -> Result<f64> {
    check_lambda(lambda_a)?;
    ensure_dim(spec_a.dim(), state.dim())?;
    let overlap = overlap_matrix(spec_a, spec_b)?;
    let o = overlap.entries();
    let b_m = spec_b.eigenvalues();
    let d = spec_a.dim();
    // <a_n'|B|a_n> = sum_m b_m <a_n'|b_m><b_m|a_n>
    let b_in_a = o.ad_mul(&DMatrix::from_fn(d, d, |m, n| o[(m, n)] * b_m[m]));
    let psi = spec_a.coefficients(state.amplitudes());
    let a_n = spec_a.eigenvalues();
    quadratic_form(
        &psi,
        &b_in_a,
        |n, np| {
            let gap = a_n[n] - a_n[np];
            (-0.5 * lambda_a * gap * gap).exp()
        },
        REAL_TOL,
        "sequential mean of B",
    )
}

/// `lambda_a -> infinity` limit of [`mean_b_sequential`]: `sum_n |psi_n|^2 <a_n|B|a_n>`.
pub fn mean_b_strong_limit(
    state: &QuantumState,
    spec_a: &Spectrum,
    observable_b: &Observable,
) -> Result<f64> {
    ensure_dim(spec_a.dim(), state.dim())?;
    ensure_dim(spec_a.dim(), observable_b.dim())?;
    let psi = spec_a.coefficients(state.amplitudes());
    let v = spec_a.eigenvectors();
    let bv = observable_b.matrix() * v;
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in 0..spec_a.dim() {
        let diag = v.column(n).dotc(&bv.column(n));
        let term = diag * psi[n].norm_sqr();
        total += term;
        scale += term.norm();
    }
    real_part(total, scale, REAL_TOL, "strong-limit mean of B")
}

/// Coefficient of `lambda_a` in `mean_b_sequential - <B>` as `lambda_a -> 0`,
/// evaluated from the commutators
/// `(1/2) sum_n <psi|[B, A^2] + 2 a_n [A, B]|a_n><a_n|psi>`.
pub fn weak_slope(state: &QuantumState, spec_a: &Spectrum, observable_b: &Observable) -> Result<f64> {
    ensure_dim(spec_a.dim(), state.dim())?;
    ensure_dim(spec_a.dim(), observable_b.dim())?;
    let b = observable_b.matrix();
    let psi = state.amplitudes();
    let a_n = spec_a.eigenvalues();
    let psi_n = spec_a.coefficients(psi);

    // A psi and A^2 psi through the spectral representation.
    let a_psi = spec_a.synthesize(&DVector::from_iterator(
        psi_n.len(),
        psi_n.iter().zip(a_n).map(|(c, &x)| c * x),
    ));
    let a2_psi = spec_a.synthesize(&DVector::from_iterator(
        psi_n.len(),
        psi_n.iter().zip(a_n).map(|(c, &x)| c * x * x),
    ));

    // beta_n = <psi|B|a_n>, gamma_n = <psi|A^2 B|a_n>, delta_n = <psi|A B|a_n>,
    // each as conj(<a_n|B|phi>) with phi = psi, A^2 psi, A psi.
    let beta = spec_a.coefficients(&(b * psi));
    let gamma = spec_a.coefficients(&(b * a2_psi));
    let delta = spec_a.coefficients(&(b * a_psi));

    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in 0..psi_n.len() {
        let x = a_n[n];
        // <psi|B A^2 - A^2 B|a_n> = a_n^2 beta_n - gamma_n
        let comm_sq = beta[n].conj() * x * x - gamma[n].conj();
        // <psi|A B - B A|a_n> = delta_n - a_n beta_n
        let comm = delta[n].conj() - beta[n].conj() * x;
        let term = (comm_sq + comm * (2.0 * x)) * psi_n[n];
        total += term;
        scale += term.norm();
    }
    Ok(0.5 * real_part(total, scale, REAL_TOL, "weak slope")?)
}

/// Same coefficient as [`weak_slope`], from expanding the Gaussian weights in
/// [`mean_b_sequential`]: `-(1/2) sum_{n,n'} (a_n - a_n')^2 conj(psi_n') B_n'n psi_n`.
pub fn weak_slope_taylor(
    state: &QuantumState,
    spec_a: &Spectrum,
    observable_b: &Observable,
) -> Result<f64> {
    ensure_dim(spec_a.dim(), state.dim())?;
    let b_in_a = spec_a.represent(observable_b.matrix())?;
    let psi = spec_a.coefficients(state.amplitudes());
    let a_n = spec_a.eigenvalues();
    let sum = quadratic_form(
        &psi,
        &b_in_a,
        |n, np| (a_n[n] - a_n[np]).powi(2),
        REAL_TOL,
        "weak slope (Taylor form)",
    )?;
    Ok(-0.5 * sum)
}

/// Default threshold above which a [`condition4_check`] norm counts as nonzero.
pub const CONDITION4_THRESHOLD: f64 = 1e-10;

/// `|| [exp(-(lambda_a/2)(a_n - A)^2), B] |a_n> ||` for every `n`.
///
/// The Gaussian is diagonal in the `A` eigenbasis with value 1 on `|a_n>`, so the
/// commutator applied to `|a_n>` has components `B_n'n (g_n' - 1)`.
pub fn condition4_check(
    spec_a: &Spectrum,
    observable_b: &Observable,
    lambda_a: f64,
) -> Result<Vec<f64>> {
    check_lambda(lambda_a)?;
    let b_in_a = spec_a.represent(observable_b.matrix())?;
    let a_n = spec_a.eigenvalues();
    let d = spec_a.dim();
    Ok((0..d)
        .map(|n| {
            (0..d)
                .map(|np| {
                    let gap = a_n[n] - a_n[np];
                    let g = (-0.5 * lambda_a * gap * gap).exp();
                    (b_in_a[(np, n)] * (g - 1.0)).norm_sqr()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// Whether any norm from [`condition4_check`] exceeds `threshold`.
pub fn condition4_holds(norms: &[f64], threshold: f64) -> bool {
    norms.iter().any(|&x| x > threshold)
}
