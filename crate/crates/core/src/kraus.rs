//! Gaussian-pointer Kraus operators.
//!
//! A reading `a` of strength `lambda` acts as
//! `K_a = (2 lambda / pi)^{1/4} exp(-lambda (a - A)^2)`, which is diagonal in the
//! eigenbasis of `A`. The family is complete under Lebesgue measure on `a`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observable::{ensure_dim, QuantumState, Spectrum};

/// Densities below this are treated as unreachable outcomes by [`collapse`].
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Strength and pointer reading of one detector click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausParams {
    lambda: f64,
    outcome: f64,
}

impl KrausParams {
    pub fn new(lambda: f64, outcome: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !outcome.is_finite() {
            return Err(Error::InvalidOutcome(outcome));
        }
        Ok(Self { lambda, outcome })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn outcome(&self) -> f64 {
        self.outcome
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStrength(lambda))
    }
}

/// `(2 lambda / pi)^{1/4}`.
pub fn kraus_prefactor(lambda: f64) -> f64 {
    (2.0 * lambda / PI).powf(0.25)
}

/// `K_a |psi>` without renormalization.
pub fn kraus_apply(
    state: &QuantumState,
    spec: &Spectrum,
    params: KrausParams,
) -> Result<DVector<Complex64>> {
    ensure_dim(spec.dim(), state.dim())?;
    let coeffs = spec.coefficients(state.amplitudes());
    let pref = kraus_prefactor(params.lambda);
    let filtered = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(spec.eigenvalues()).map(|(c, &a_n)| {
            let x = params.outcome - a_n;
            c * (pref * (-params.lambda * x * x).exp())
        }),
    );
    Ok(spec.synthesize(&filtered))
}

/// Density of the pointer reading `a`, `<psi|K_a^dagger K_a|psi>`.
pub fn outcome_density(state: &QuantumState, spec: &Spectrum, lambda: f64, a: f64) -> Result<f64> {
    let weights = spec.weights(state)?;
    KrausParams::new(lambda, a)?;
    Ok(mixture_density(&weights, spec.eigenvalues(), lambda, a))
}

/// `sqrt(2 lambda / pi) sum_n w_n exp(-2 lambda (a - a_n)^2)`.
pub(crate) fn mixture_density(weights: &[f64], centers: &[f64], lambda: f64, a: f64) -> f64 {
    let norm = (2.0 * lambda / PI).sqrt();
    weights
        .iter()
        .zip(centers)
        .map(|(w, &c)| {
            let x = a - c;
            w * (-2.0 * lambda * x * x).exp()
        })
        .sum::<f64>()
        * norm
}

/// Collapses `state` onto the reading in `params`.
///
/// Returns the normalized post-measurement state together with `|K_a psi|`,
/// whose square is the outcome density.
pub fn collapse(
    state: &QuantumState,
    spec: &Spectrum,
    params: KrausParams,
) -> Result<(QuantumState, f64)> {
    ensure_dim(spec.dim(), state.dim())?;
    let coeffs = spec.coefficients(state.amplitudes());
    let (filtered, norm) = collapse_coefficients(&coeffs, spec.eigenvalues(), params)?;
    let collapsed = spec.synthesize(&filtered);
    // Renormalize in the computational basis so the state passes its own invariant.
    let n = collapsed.norm();
    Ok((QuantumState::new(collapsed.unscale(n))?, norm))
}

/// Collapse performed entirely in eigenbasis amplitudes; returns unit-norm
/// amplitudes and `|K_a psi|`.
pub(crate) fn collapse_coefficients(
    coeffs: &DVector<Complex64>,
    eigenvalues: &[f64],
    params: KrausParams,
) -> Result<(DVector<Complex64>, f64)> {
    let lambda = params.lambda;
    let a = params.outcome;
    // Shift exponents by the smallest one among populated components so the
    // dominant term is exp(0) even deep in the strong regime.
    let min_exponent = coeffs
        .iter()
        .zip(eigenvalues)
        .filter(|(c, _)| c.norm_sqr() > 0.0)
        .map(|(_, &a_n)| lambda * (a - a_n) * (a - a_n))
        .fold(f64::INFINITY, f64::min);
    if !min_exponent.is_finite() {
        return Err(Error::SuppressedOutcome { density: 0.0 });
    }
    let shifted = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eigenvalues).map(|(c, &a_n)| {
            let x = a - a_n;
            c * (-(lambda * x * x - min_exponent)).exp()
        }),
    );
    let shifted_norm = shifted.norm();
    let log_density =
        2.0 * (kraus_prefactor(lambda).ln() + shifted_norm.ln()) - 2.0 * min_exponent;
    let density = log_density.exp();
    if !(density >= DENSITY_FLOOR) {
        return Err(Error::SuppressedOutcome { density });
    }
    Ok((shifted.unscale(shifted_norm), density.sqrt()))
}
