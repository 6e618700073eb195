//! Sampling oracle: physically simulates "measure A, collapse, measure B".
//!
//! Sample `i` of a run with seed `s` always draws from the ChaCha stream
//! `(s, i)`, and per-chunk statistics are merged in chunk order, so results are
//! bit-identical for any number of worker threads.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::SequentialSetup;
use crate::error::{Error, Result};
use crate::kraus::{check_lambda, collapse, collapse_coefficients, KrausParams};
use crate::observable::{QuantumState, Spectrum};

/// Samples per parallel work unit. Part of the determinism contract: changing
/// it changes the floating-point merge order.
pub const CHUNK: u64 = 8192;

/// One pair of pointer readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSample {
    pub a: f64,
    pub b: f64,
}

/// Counter-based family of independent random streams.
#[derive(Debug, Clone)]
pub struct StreamFamily {
    base: ChaCha8Rng,
}

impl StreamFamily {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator dedicated to sample `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}

/// Index drawn with probability proportional to `weights`.
fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let total: f64 = weights.clone().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last
}

/// Gaussian-mixture draw: component `n` with weight `w_n`, center `c_n`,
/// standard deviation `1/(2 sqrt(lambda))`.
fn draw_reading<R: Rng + ?Sized>(
    weights: impl Iterator<Item = f64> + Clone,
    centers: &[f64],
    lambda: f64,
    rng: &mut R,
) -> f64 {
    let n = pick(weights, rng);
    let z: f64 = rng.sample(StandardNormal);
    centers[n] + z * 0.5 / lambda.sqrt()
}

/// Draws the first reading and returns it with the collapsed state.
pub fn sample_first<R: Rng + ?Sized>(
    state: &QuantumState,
    spec: &Spectrum,
    lambda: f64,
    rng: &mut R,
) -> Result<(f64, QuantumState)> {
    check_lambda(lambda)?;
    let weights = spec.weights(state)?;
    let a = draw_reading(weights.iter().copied(), spec.eigenvalues(), lambda, rng);
    let (collapsed, _) = collapse(state, spec, KrausParams::new(lambda, a)?)?;
    Ok((a, collapsed))
}

/// Draws `(a, b)` by collapsing on `a` and then reading `B` on the collapsed state.
pub fn sample_pair<R: Rng + ?Sized>(setup: &SequentialSetup, rng: &mut R) -> Result<OutcomeSample> {
    let coeffs = setup.coefficients();
    let a = draw_reading(
        coeffs.iter().map(|c| c.norm_sqr()),
        setup.spec_a().eigenvalues(),
        setup.lambda_a(),
        rng,
    );
    let (collapsed, _) = collapse_coefficients(
        coeffs,
        setup.spec_a().eigenvalues(),
        KrausParams::new(setup.lambda_a(), a)?,
    )?;
    let in_b: DVector<Complex64> = setup.overlap().entries() * collapsed;
    let b = draw_reading(
        in_b.iter().map(|c| c.norm_sqr()),
        setup.spec_b().eigenvalues(),
        setup.lambda_b(),
        rng,
    );
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("sampled outcome"));
    }
    Ok(OutcomeSample { a, b })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Raw sums behind a [`RunStatistics`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum_a: CompensatedSum,
    pub sum_a2: CompensatedSum,
    pub sum_b: CompensatedSum,
    pub sum_b2: CompensatedSum,
}

impl Moments {
    pub fn push(&mut self, s: OutcomeSample) {
        self.count += 1;
        self.sum_a.add(s.a);
        self.sum_a2.add(s.a * s.a);
        self.sum_b.add(s.b);
        self.sum_b2.add(s.b * s.b);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum_a.merge(&other.sum_a);
        self.sum_a2.merge(&other.sum_a2);
        self.sum_b.merge(&other.sum_b);
        self.sum_b2.merge(&other.sum_b2);
    }
}

/// Summary of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStatistics {
    pub n_samples: u64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub mean_a2: f64,
    pub mean_b2: f64,
    /// Standard error of `mean_a`: sample standard deviation over `sqrt(n)`.
    pub stderr_a: f64,
    pub stderr_b: f64,
    pub seed: u64,
    moments: Moments,
}

impl RunStatistics {
    pub fn from_moments(moments: Moments, seed: u64) -> Result<Self> {
        let n = moments.count;
        if n == 0 {
            return Err(Error::NoSamples);
        }
        let nf = n as f64;
        let mean_a = moments.sum_a.value() / nf;
        let mean_b = moments.sum_b.value() / nf;
        let mean_a2 = moments.sum_a2.value() / nf;
        let mean_b2 = moments.sum_b2.value() / nf;
        let stderr = |m: f64, m2: f64| {
            if n < 2 {
                f64::INFINITY
            } else {
                let var = ((m2 - m * m) * nf / (nf - 1.0)).max(0.0);
                (var / nf).sqrt()
            }
        };
        Ok(Self {
            n_samples: n,
            mean_a,
            mean_b,
            mean_a2,
            mean_b2,
            stderr_a: stderr(mean_a, mean_a2),
            stderr_b: stderr(mean_b, mean_b2),
            seed,
            moments,
        })
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }

    /// Statistics of the union of the two underlying sample sets.
    pub fn merge(&self, other: &RunStatistics) -> RunStatistics {
        let mut m = self.moments;
        m.merge(&other.moments);
        RunStatistics::from_moments(m, self.seed).expect("merged count is positive")
    }

    /// Sample variance of the first reading.
    pub fn var_a(&self) -> f64 {
        self.stderr_a * self.stderr_a * self.n_samples as f64
    }

    pub fn var_b(&self) -> f64 {
        self.stderr_b * self.stderr_b * self.n_samples as f64
    }
}

fn chunk_bounds(n: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks as usize)
        .into_par_iter()
        .map(move |c| c as u64)
        .map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
}

/// Runs `n` independent sequential experiments and summarizes both readings.
pub fn run_experiment(setup: &SequentialSetup, n: u64, seed: u64) -> Result<RunStatistics> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let family = StreamFamily::new(seed);
    let partials: Vec<Result<Moments>> = chunk_bounds(n)
        .map(|(lo, hi)| {
            let mut m = Moments::default();
            for i in lo..hi {
                m.push(sample_pair(setup, &mut family.stream(i))?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in partials {
        total.merge(&p?);
    }
    RunStatistics::from_moments(total, seed)
}

/// Raw `(a, b)` samples `0..n` of the run with `seed`.
pub fn sample_outcomes(setup: &SequentialSetup, n: u64, seed: u64) -> Result<Vec<OutcomeSample>> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let family = StreamFamily::new(seed);
    (0..n as usize)
        .into_par_iter()
        .map(|i| sample_pair(setup, &mut family.stream(i as u64)))
        .collect()
}

/// Uniform rectangular binning of `(a, b)` readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub bins_a: usize,
    pub bins_b: usize,
    /// Row-major over `a` bins, then `b` bins.
    pub counts: Vec<u64>,
    /// Samples that fell outside the box.
    pub outside: u64,
}

impl Histogram2d {
    pub fn new(a_range: (f64, f64), b_range: (f64, f64), bins_a: usize, bins_b: usize) -> Result<Self> {
        if bins_a == 0 || bins_b == 0 {
            return Err(Error::InvalidConfig("histogram needs at least one bin per axis".into()));
        }
        if !(a_range.0 < a_range.1) || !(b_range.0 < b_range.1) {
            return Err(Error::InvalidConfig("histogram ranges must be increasing".into()));
        }
        Ok(Self {
            a_range,
            b_range,
            bins_a,
            bins_b,
            counts: vec![0; bins_a * bins_b],
            outside: 0,
        })
    }

    fn empty_like(&self) -> Self {
        Self {
            counts: vec![0; self.counts.len()],
            outside: 0,
            ..self.clone()
        }
    }

    fn bin(x: f64, range: (f64, f64), bins: usize) -> Option<usize> {
        if x < range.0 || x >= range.1 {
            return None;
        }
        let i = ((x - range.0) / (range.1 - range.0) * bins as f64) as usize;
        Some(i.min(bins - 1))
    }

    pub fn push(&mut self, s: OutcomeSample) {
        match (
            Self::bin(s.a, self.a_range, self.bins_a),
            Self::bin(s.b, self.b_range, self.bins_b),
        ) {
            (Some(i), Some(j)) => self.counts[i * self.bins_b + j] += 1,
            _ => self.outside += 1,
        }
    }

    pub fn merge(&mut self, other: &Histogram2d) {
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.outside += other.outside;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.bins_b + j]
    }

    /// `[lo, hi)` edges of `a` bin `i`.
    pub fn a_edges(&self, i: usize) -> (f64, f64) {
        edges(self.a_range, self.bins_a, i)
    }

    pub fn b_edges(&self, j: usize) -> (f64, f64) {
        edges(self.b_range, self.bins_b, j)
    }

    pub fn cell_area(&self) -> f64 {
        (self.a_range.1 - self.a_range.0) / self.bins_a as f64
            * (self.b_range.1 - self.b_range.0)
            / self.bins_b as f64
    }
}

fn edges(range: (f64, f64), bins: usize, i: usize) -> (f64, f64) {
    let w = (range.1 - range.0) / bins as f64;
    (range.0 + w * i as f64, range.0 + w * (i + 1) as f64)
}

/// Bins `n` samples of the run with `seed` into a copy of `layout`.
pub fn sample_histogram(
    setup: &SequentialSetup,
    n: u64,
    seed: u64,
    layout: &Histogram2d,
) -> Result<Histogram2d> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let family = StreamFamily::new(seed);
    let partials: Vec<Result<Histogram2d>> = chunk_bounds(n)
        .map(|(lo, hi)| {
            let mut h = layout.empty_like();
            for i in lo..hi {
                h.push(sample_pair(setup, &mut family.stream(i))?);
            }
            Ok(h)
        })
        .collect();
    let mut total = layout.empty_like();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}
