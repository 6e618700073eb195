//! Run configuration shared by the command-line tool and the examples.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::SequentialSetup;
use crate::error::{Error, Result};
use crate::observable::{spectral_decompose, Observable, QuantumState, DEFAULT_DEGENERACY_TOL};
use crate::scenarios::{
    build_scenario, CommutingParams, QubitParams, Scenario, ScenarioSpec, SincGridParams,
    WashoutConfig,
};

/// A complex number written as `[re, im]`.
pub type ComplexPair = [f64; 2];

/// State and observables given entry by entry, rows first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSystem {
    pub state: Vec<ComplexPair>,
    pub a: Vec<Vec<ComplexPair>>,
    pub b: Vec<Vec<ComplexPair>>,
    /// Rescale the state to unit norm instead of rejecting it.
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemConfig {
    Inline(InlineSystem),
    Qubit(QubitParams),
    Commuting(CommutingParams),
    SincGrid(SincGridParams),
}

impl SystemConfig {
    pub fn build(&self) -> Result<Scenario> {
        match self {
            SystemConfig::Inline(s) => s.build(),
            SystemConfig::Qubit(p) => build_scenario(&ScenarioSpec::Qubit(*p)),
            SystemConfig::Commuting(p) => build_scenario(&ScenarioSpec::Commuting(p.clone())),
            SystemConfig::SincGrid(p) => build_scenario(&ScenarioSpec::SincGrid(*p)),
        }
    }
}

fn to_complex(p: &ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn matrix(field: &str, rows: &[Vec<ComplexPair>]) -> Result<Observable> {
    let d = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(Error::InvalidConfig(format!(
            "system.{field}: row {i} has {} entries, expected {d}",
            r.len()
        )));
    }
    let m = DMatrix::from_fn(d, d, |i, j| to_complex(&rows[i][j]));
    Observable::new(m).map_err(|e| Error::InvalidConfig(format!("system.{field}: {e}")))
}

impl InlineSystem {
    pub fn build(&self) -> Result<Scenario> {
        let v = DVector::from_iterator(self.state.len(), self.state.iter().map(to_complex));
        let state = if self.normalize {
            QuantumState::normalized(v)
        } else {
            QuantumState::new(v)
        }
        .map_err(|e| Error::InvalidConfig(format!("system.state: {e}")))?;
        let a = matrix("a", &self.a)?;
        let b = matrix("b", &self.b)?;
        for (field, obs) in [("a", &a), ("b", &b)] {
            if obs.dim() != state.dim() {
                return Err(Error::InvalidConfig(format!(
                    "system.{field}: dimension {} does not match state dimension {}",
                    obs.dim(),
                    state.dim()
                )));
            }
        }
        Ok(Scenario { state, a, b })
    }
}

/// A single strength or an evenly spaced sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrengthSpec {
    Value(f64),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        /// Space the points evenly in `log(lambda)`.
        #[serde(default)]
        log: bool,
    },
}

impl Default for StrengthSpec {
    fn default() -> Self {
        StrengthSpec::Value(1.0)
    }
}

impl StrengthSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            StrengthSpec::Value(x) => vec![x],
            StrengthSpec::Range { start, stop, points, log } => {
                if points <= 1 {
                    return vec![start];
                }
                let last = (points - 1) as f64;
                (0..points)
                    .map(|i| {
                        let t = i as f64 / last;
                        if i == 0 {
                            start
                        } else if i == points - 1 {
                            stop
                        } else if log {
                            (start.ln() + t * (stop.ln() - start.ln())).exp()
                        } else {
                            start + t * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if let StrengthSpec::Range { points: 0, .. } = self {
            return Err(Error::InvalidConfig(format!("{field}: points must be at least 1")));
        }
        if let Some(x) = self.values().into_iter().find(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidConfig(format!(
                "{field}: strengths must be positive and finite, got {x}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Destination file; standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Binning for `sample`; without it raw outcome pairs are written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    #[serde(default = "default_bins")]
    pub bins_a: usize,
    #[serde(default = "default_bins")]
    pub bins_b: usize,
    /// Defaults to the eigenvalue span padded by five pointer widths.
    #[serde(default)]
    pub a_range: Option<(f64, f64)>,
    #[serde(default)]
    pub b_range: Option<(f64, f64)>,
}

fn default_bins() -> usize {
    40
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins_a: default_bins(),
            bins_b: default_bins(),
            a_range: None,
            b_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub lambda_a: StrengthSpec,
    #[serde(default)]
    pub lambda_b: StrengthSpec,
    /// Monte Carlo samples per strength pair; zero skips sampling.
    #[serde(default)]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub histogram: Option<HistogramConfig>,
    #[serde(default)]
    pub washout: Option<WashoutSection>,
}

/// Refinement levels for `washout`; spacing and `hbar` come from the grid system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WashoutSection {
    #[serde(default = "default_grid_sizes")]
    pub grid_sizes: Vec<usize>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default = "default_washout_momentum")]
    pub momentum: f64,
}

fn default_grid_sizes() -> Vec<usize> {
    vec![201, 401, 801]
}

fn default_washout_momentum() -> f64 {
    0.5
}

impl Default for WashoutSection {
    fn default() -> Self {
        Self {
            grid_sizes: default_grid_sizes(),
            width: None,
            momentum: default_washout_momentum(),
        }
    }
}

impl RunConfig {
    pub fn new(system: SystemConfig) -> Self {
        Self {
            system,
            lambda_a: StrengthSpec::default(),
            lambda_b: StrengthSpec::default(),
            samples: 0,
            seed: 0,
            output: OutputConfig::default(),
            histogram: None,
            washout: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.lambda_a.validate("lambda_a")?;
        self.lambda_b.validate("lambda_b")?;
        if let Some(h) = &self.histogram {
            if h.bins_a == 0 || h.bins_b == 0 {
                return Err(Error::InvalidConfig("histogram: bin counts must be positive".into()));
            }
            for (name, r) in [("a_range", h.a_range), ("b_range", h.b_range)] {
                if let Some((lo, hi)) = r {
                    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                        return Err(Error::InvalidConfig(format!(
                            "histogram.{name}: need finite lo < hi, got ({lo}, {hi})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the system and decomposes both observables at the first strength pair.
    pub fn setup(&self) -> Result<(Scenario, SequentialSetup)> {
        let scenario = self.system.build()?;
        let spec_a = spectral_decompose(&scenario.a, DEFAULT_DEGENERACY_TOL);
        let spec_b = spectral_decompose(&scenario.b, DEFAULT_DEGENERACY_TOL);
        let setup = SequentialSetup::new(
            scenario.state.clone(),
            spec_a,
            spec_b,
            self.lambda_a.values()[0],
            self.lambda_b.values()[0],
        )?;
        Ok((scenario, setup))
    }

    /// Washout parameters derived from a `sinc_grid` system.
    pub fn washout_config(&self) -> Result<WashoutConfig> {
        let SystemConfig::SincGrid(grid) = &self.system else {
            return Err(Error::InvalidConfig(
                "washout requires a system of kind sinc_grid".into(),
            ));
        };
        let section = self.washout.clone().unwrap_or_default();
        Ok(WashoutConfig {
            grid_sizes: section.grid_sizes,
            base_delta_x: grid.delta_x,
            hbar: grid.hbar,
            width: section.width.or(grid.width),
            momentum: section.momentum,
        })
    }
}
