//! Built-in systems: a qubit measured along two axes, a commuting control, and
//! position followed by momentum on a uniform grid.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::weak_slope;
use crate::error::{Error, Result};
use crate::observable::{spectral_decompose, Observable, QuantumState, DEFAULT_DEGENERACY_TOL};

/// Smallest grid accepted by [`washout_study`].
pub const MIN_WASHOUT_POINTS: usize = 51;

/// Qubit with `A = sigma_z` and `B = n . sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    /// Bloch polar angle of the pre-selected state.
    #[serde(default = "half_pi")]
    pub state_theta: f64,
    #[serde(default)]
    pub state_phi: f64,
    /// Bloch polar angle of the `B` axis; the default gives `sigma_x`.
    #[serde(default = "half_pi")]
    pub b_theta: f64,
    #[serde(default)]
    pub b_phi: f64,
}

fn half_pi() -> f64 {
    FRAC_PI_2
}

impl Default for QubitParams {
    fn default() -> Self {
        Self {
            state_theta: FRAC_PI_2,
            state_phi: 0.0,
            b_theta: FRAC_PI_2,
            b_phi: 0.0,
        }
    }
}

/// Function of `A` used as the second observable in the commuting control.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "map")]
pub enum CommutingMap {
    #[default]
    Square,
    Cube,
    Affine { scale: f64, shift: f64 },
}

impl CommutingMap {
    fn apply(&self, x: f64) -> f64 {
        match *self {
            CommutingMap::Square => x * x,
            CommutingMap::Cube => x * x * x,
            CommutingMap::Affine { scale, shift } => scale * x + shift,
        }
    }
}

/// Diagonal `A`, `B = f(A)`, uniform superposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutingParams {
    #[serde(default = "default_commuting_eigenvalues")]
    pub eigenvalues: Vec<f64>,
    #[serde(default)]
    pub function: CommutingMap,
}

fn default_commuting_eigenvalues() -> Vec<f64> {
    vec![-1.0, 0.0, 0.5, 2.0]
}

impl Default for CommutingParams {
    fn default() -> Self {
        Self {
            eigenvalues: default_commuting_eigenvalues(),
            function: CommutingMap::Square,
        }
    }
}

/// Position grid `x_n = delta_x * n`, symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SincGridParams {
    pub n_points: usize,
    pub delta_x: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    /// Standard deviation of `|psi(x)|^2`; defaults to `5 * delta_x`.
    #[serde(default)]
    pub width: Option<f64>,
    /// Mean wavenumber `k` of the phase `exp(i k x)`.
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub center: f64,
}

fn one() -> f64 {
    1.0
}

impl SincGridParams {
    pub fn new(n_points: usize, delta_x: f64) -> Self {
        Self {
            n_points,
            delta_x,
            hbar: 1.0,
            width: None,
            momentum: 0.0,
            center: 0.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.width.unwrap_or(5.0 * self.delta_x)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n_points < 3 || self.n_points % 2 == 0 {
            return bad(format!("sinc_grid n_points must be odd and >= 3, got {}", self.n_points));
        }
        if !(self.delta_x > 0.0 && self.delta_x.is_finite()) {
            return bad(format!("sinc_grid delta_x must be positive, got {}", self.delta_x));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return bad(format!("sinc_grid hbar must be positive, got {}", self.hbar));
        }
        if !(self.width() > 0.0 && self.width().is_finite()) {
            return bad(format!("sinc_grid width must be positive, got {}", self.width()));
        }
        if !self.momentum.is_finite() || !self.center.is_finite() {
            return bad("sinc_grid momentum and center must be finite".into());
        }
        Ok(())
    }

    /// Grid coordinates.
    pub fn positions(&self) -> Vec<f64> {
        let half = (self.n_points / 2) as f64;
        (0..self.n_points)
            .map(|i| self.delta_x * (i as f64 - half))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    Qubit(QubitParams),
    Commuting(CommutingParams),
    SincGrid(SincGridParams),
}

/// A state and the two observables measured on it, in that order.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub state: QuantumState,
    pub a: Observable,
    pub b: Observable,
}

pub fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    match spec {
        ScenarioSpec::Qubit(p) => qubit(p),
        ScenarioSpec::Commuting(p) => commuting(p),
        ScenarioSpec::SincGrid(p) => sinc_grid(p),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit(p: &QubitParams) -> Result<Scenario> {
    let angles = [p.state_theta, p.state_phi, p.b_theta, p.b_phi];
    if angles.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidScenario("qubit angles must be finite".into()));
    }
    // sigma_z = diag(1, -1): |0> carries +1.
    let a = Observable::from_real_diagonal(&[1.0, -1.0])?;
    let (nx, ny, nz) = (
        p.b_theta.sin() * p.b_phi.cos(),
        p.b_theta.sin() * p.b_phi.sin(),
        p.b_theta.cos(),
    );
    let b = Observable::new(DMatrix::from_row_slice(
        2,
        2,
        &[c(nz, 0.0), c(nx, -ny), c(nx, ny), c(-nz, 0.0)],
    ))?;
    let half = 0.5 * p.state_theta;
    let state = QuantumState::normalized(DVector::from_vec(vec![
        c(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), p.state_phi),
    ]))?;
    Ok(Scenario { state, a, b })
}

fn commuting(p: &CommutingParams) -> Result<Scenario> {
    if p.eigenvalues.len() < 2 {
        return Err(Error::InvalidScenario(
            "commuting scenario needs at least two eigenvalues".into(),
        ));
    }
    let a = Observable::from_real_diagonal(&p.eigenvalues)?;
    let mapped: Vec<f64> = p.eigenvalues.iter().map(|&x| p.function.apply(x)).collect();
    let b = Observable::from_real_diagonal(&mapped)?;
    let state = QuantumState::from_real(&vec![1.0; p.eigenvalues.len()])?;
    Ok(Scenario { state, a, b })
}

fn sinc_grid(p: &SincGridParams) -> Result<Scenario> {
    p.validate()?;
    let x = p.positions();
    let a = Observable::from_real_diagonal(&x)?;
    let b = grid_momentum(p.n_points, p.delta_x, p.hbar)?;
    let state = wavepacket(&x, p.center, p.width(), p.momentum)?;
    Ok(Scenario { state, a, b })
}

/// Central-difference momentum `-i hbar d/dx` with Dirichlet ends.
pub fn grid_momentum(n: usize, delta_x: f64, hbar: f64) -> Result<Observable> {
    let h = hbar / (2.0 * delta_x);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = c(0.0, -h);
        m[(i + 1, i)] = c(0.0, h);
    }
    Observable::new(m)
}

/// Exact square of [`grid_momentum`], assembled from its band structure.
pub fn grid_momentum_squared(n: usize, delta_x: f64, hbar: f64) -> Result<Observable> {
    let h2 = (hbar / (2.0 * delta_x)).powi(2);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let neighbours = (i > 0) as u8 + (i + 1 < n) as u8;
        m[(i, i)] = c(h2 * neighbours as f64, 0.0);
        if i + 2 < n {
            m[(i, i + 2)] = c(-h2, 0.0);
            m[(i + 2, i)] = c(-h2, 0.0);
        }
    }
    Observable::new(m)
}

/// Sampled Gaussian `exp(-(x - x0)^2 / (4 w^2) + i k x)`, normalized on the grid.
pub fn wavepacket(x: &[f64], center: f64, width: f64, k: f64) -> Result<QuantumState> {
    let v = DVector::from_iterator(
        x.len(),
        x.iter().map(|&xi| {
            let d = xi - center;
            Complex64::from_polar((-(d * d) / (4.0 * width * width)).exp(), k * xi)
        }),
    );
    QuantumState::normalized(v)
}

/// Grid-refinement study of the weak-limit correction for `B = p` and `B = p^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WashoutConfig {
    /// Grid size for each refinement level; level `i` uses `base_delta_x / 2^i`.
    #[serde(default = "default_grid_sizes")]
    pub grid_sizes: Vec<usize>,
    pub base_delta_x: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    /// Fixed physical width; defaults to `5 * base_delta_x`.
    #[serde(default)]
    pub width: Option<f64>,
    /// Wavenumber of the packet. A real packet makes the `p` correction vanish
    /// identically at every resolution, so the default carries a small boost.
    #[serde(default = "default_washout_momentum")]
    pub momentum: f64,
}

fn default_grid_sizes() -> Vec<usize> {
    vec![201, 401, 801]
}

fn default_washout_momentum() -> f64 {
    0.5
}

impl WashoutConfig {
    pub fn new(grid_sizes: Vec<usize>, base_delta_x: f64) -> Self {
        Self {
            grid_sizes,
            base_delta_x,
            hbar: 1.0,
            width: None,
            momentum: default_washout_momentum(),
        }
    }

    pub fn width(&self) -> f64 {
        self.width.unwrap_or(5.0 * self.base_delta_x)
    }

    /// Grid for refinement level `level`.
    pub fn level(&self, level: usize) -> SincGridParams {
        SincGridParams {
            n_points: self.grid_sizes[level],
            delta_x: self.base_delta_x / f64::powi(2.0, level as i32),
            hbar: self.hbar,
            width: Some(self.width()),
            momentum: self.momentum,
            center: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WashoutRow {
    pub delta_x: f64,
    pub n_points: usize,
    pub slope_p: f64,
    pub slope_p2: f64,
    /// `slope_p` of the previous (coarser) level divided by this one.
    pub ratio_p: Option<f64>,
    /// Relative change of `slope_p2` from the previous level.
    pub change_p2: Option<f64>,
}

/// Weak-limit slopes for `B = p` and `B = p^2` at one resolution.
pub fn grid_slopes(p: &SincGridParams) -> Result<(f64, f64)> {
    let scenario = sinc_grid(p)?;
    let spec_a = spectral_decompose(&scenario.a, DEFAULT_DEGENERACY_TOL);
    let p2 = grid_momentum_squared(p.n_points, p.delta_x, p.hbar)?;
    Ok((
        weak_slope(&scenario.state, &spec_a, &scenario.b)?,
        weak_slope(&scenario.state, &spec_a, &p2)?,
    ))
}

/// Convenience form of [`washout_study_with`] using the default packet.
pub fn washout_study(grid_sizes: &[usize], base_delta_x: f64) -> Result<Vec<WashoutRow>> {
    washout_study_with(&WashoutConfig::new(grid_sizes.to_vec(), base_delta_x))
}

/// Halves the spacing at each level while keeping the packet fixed in physical units.
pub fn washout_study_with(config: &WashoutConfig) -> Result<Vec<WashoutRow>> {
    if config.grid_sizes.is_empty() {
        return Err(Error::InvalidScenario("washout study needs at least one grid".into()));
    }
    if let Some(&n) = config.grid_sizes.iter().find(|&&n| n < MIN_WASHOUT_POINTS) {
        return Err(Error::InvalidScenario(format!(
            "washout grids need at least {MIN_WASHOUT_POINTS} points, got {n}"
        )));
    }
    let slopes: Vec<Result<(f64, f64)>> = (0..config.grid_sizes.len())
        .into_par_iter()
        .map(|level| grid_slopes(&config.level(level)))
        .collect();

    let mut rows: Vec<WashoutRow> = Vec::with_capacity(slopes.len());
    for (level, s) in slopes.into_iter().enumerate() {
        let (slope_p, slope_p2) = s?;
        let prev = rows.last();
        rows.push(WashoutRow {
            delta_x: config.level(level).delta_x,
            n_points: config.grid_sizes[level],
            slope_p,
            slope_p2,
            ratio_p: prev.map(|r| r.slope_p / slope_p),
            change_p2: prev.map(|r| ((slope_p2 - r.slope_p2) / r.slope_p2).abs()),
        });
    }
    Ok(rows)
}
