//! The four subcommands of the command-line tool as library functions.
//!
//! Each returns rendered text plus a pass flag; the binary only handles
//! arguments, files and exit codes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analytic::{
    condition4_check, mean_a_sequential, mean_b_sequential, mean_b_strong_limit,
    joint_cell_probability, joint_density, std_single, total_probability, weak_slope, weak_slope_taylor,
    SequentialSetup, CONDITION4_THRESHOLD,
};
use crate::config::{HistogramConfig, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{run_experiment, sample_histogram, sample_outcomes, Histogram2d};
use crate::observable::{expectation, max_abs, Spectrum};
use crate::scenarios::washout_study_with;

/// Message emitted when the two observables commute.
pub const COMMUTING_MESSAGE: &str =
    "condition (3) violated: operators commute; no sequential effect expected";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match *self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Int(n) => json!(n),
            _ => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "columns": self.columns, "rows": rows }))
            .expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    fn assert(&mut self, name: &str, value: f64, tolerance: f64, detail: String) {
        let status = if value <= tolerance { Status::Pass } else { Status::Fail };
        self.lines.push(CheckLine {
            name: name.into(),
            status,
            value,
            tolerance: Some(tolerance),
            detail,
        });
    }

    fn info(&mut self, name: &str, value: f64, detail: String) {
        self.lines.push(CheckLine {
            name: name.into(),
            status: Status::Info,
            value,
            tolerance: None,
            detail,
        });
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = write!(out, "[{}] {}: {:.6e}", l.status.label(), l.name, l.value);
            if let Some(t) = l.tolerance {
                let _ = write!(out, " (tol {t:.1e})");
            }
            if !l.detail.is_empty() {
                let _ = write!(out, "  {}", l.detail);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }

    pub fn to_json(&self) -> String {
        let lines: Vec<Value> = self
            .lines
            .iter()
            .map(|l| {
                json!({
                    "name": l.name,
                    "status": l.status.label(),
                    "value": Cell::Float(l.value).json(),
                    "tolerance": l.tolerance,
                    "detail": l.detail,
                })
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "passed": self.passed(), "checks": lines }))
            .expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_text(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn strength_pairs(config: &RunConfig) -> Vec<(f64, f64)> {
    let lb = config.lambda_b.values();
    config
        .lambda_a
        .values()
        .into_iter()
        .flat_map(|a| lb.iter().map(move |&b| (a, b)))
        .collect()
}

fn spectrum_scale(spec: &Spectrum) -> f64 {
    spec.eigenvalues().iter().fold(1.0_f64, |m, x| m.max(x.abs()))
}

/// Consistency checks of the closed forms and the operator conditions.
pub fn cmd_check(config: &RunConfig) -> Result<CheckReport> {
    let (scenario, base) = config.setup()?;
    let mut report = CheckReport { lines: Vec::new() };
    let pairs = strength_pairs(config);
    let scale_a = spectrum_scale(base.spec_a());
    let scale_b = spectrum_scale(base.spec_b());

    let mut norm_dev = 0.0_f64;
    let mut mean_a_dev = 0.0_f64;
    let mean_a = expectation(&scenario.state, &scenario.a)?;
    for &(la, lb) in &pairs {
        let s = base.with_strengths(la, lb)?;
        norm_dev = norm_dev.max((total_probability(&s)? - 1.0).abs());
        mean_a_dev = mean_a_dev.max((mean_a_sequential(&s)? - mean_a).abs());
    }
    report.assert(
        "normalization",
        norm_dev,
        1e-10,
        format!("max |P_total - 1| over {} strength pairs", pairs.len()),
    );
    report.assert(
        "first-reading mean",
        mean_a_dev,
        1e-10 * scale_a,
        format!("max |<a> - <A>| with <A> = {mean_a:.12e}"),
    );

    let comm = max_abs(&scenario.a.commutator(&scenario.b)?);
    let commute_tol = 1e-12 * scale_a * scale_b;
    if comm <= commute_tol {
        report.info("condition (3)", comm, COMMUTING_MESSAGE.into());
    } else {
        report.info("condition (3)", comm, "max |[A, B]_ij| is nonzero".into());
    }

    let mut lambdas_a = config.lambda_a.values();
    lambdas_a.dedup();
    for &la in &lambdas_a {
        let norms = condition4_check(base.spec_a(), &scenario.b, la)?;
        let worst = norms.iter().cloned().fold(0.0, f64::max);
        let verdict = if worst > CONDITION4_THRESHOLD { "holds" } else { "violated" };
        report.info(
            "condition (4)",
            worst,
            format!("lambda_a = {la:.6e}: max_n ||[G_n, B] |a_n>|| ({verdict})"),
        );
    }

    let slope = weak_slope(&scenario.state, base.spec_a(), &scenario.b)?;
    let taylor = weak_slope_taylor(&scenario.state, base.spec_a(), &scenario.b)?;
    report.assert(
        "weak slope forms agree",
        (slope - taylor).abs(),
        1e-10 * scale_a * scale_a * scale_b,
        format!("commutator form {slope:.12e}, Taylor form {taylor:.12e}"),
    );

    let mean_b = expectation(&scenario.state, &scenario.b)?;
    let strong = mean_b_strong_limit(&scenario.state, base.spec_a(), &scenario.b)?;
    report.info("<B>", mean_b, String::new());
    report.info("strong-limit mean of b", strong, String::new());
    for &la in &lambdas_a {
        let seq = mean_b_sequential(&scenario.state, base.spec_a(), base.spec_b(), la)?;
        report.info(
            "mean of b deviation",
            seq - mean_b,
            format!("lambda_a = {la:.6e}: <b> = {seq:.12e}"),
        );
    }

    if config.samples > 0 {
        let stats = run_experiment(&base, config.samples, config.seed)?;
        let expected = mean_b_sequential(&scenario.state, base.spec_a(), base.spec_b(), base.lambda_a())?;
        report.info(
            "sampled mean of b z-score",
            (stats.mean_b - expected) / stats.stderr_b,
            format!(
                "{} samples at lambda = ({:.3e}, {:.3e}), seed {}",
                stats.n_samples,
                base.lambda_a(),
                base.lambda_b(),
                config.seed
            ),
        );
    }
    Ok(report)
}

/// Closed forms and optional Monte Carlo estimates over every strength pair.
pub fn cmd_sweep(config: &RunConfig) -> Result<Table> {
    let (scenario, base) = config.setup()?;
    let mean_b = expectation(&scenario.state, &scenario.b)?;
    let slope = weak_slope(&scenario.state, base.spec_a(), &scenario.b)?;
    let mut columns = vec![
        "lambda_a",
        "lambda_b",
        "mean_a_seq",
        "mean_b_seq",
        "b_expectation",
        "mean_b_deviation",
        "weak_slope",
        "mean_b_weak",
        "std_a",
    ];
    let sampled = config.samples > 0;
    if sampled {
        columns.extend(["mc_samples", "mc_mean_a", "mc_stderr_a", "mc_mean_b", "mc_stderr_b"]);
    }
    let pairs = strength_pairs(config);
    let rows: Vec<Result<Vec<Cell>>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(la, lb))| {
            let s = base.with_strengths(la, lb)?;
            let seq = mean_b_sequential(s.state(), s.spec_a(), s.spec_b(), la)?;
            let mut row: Vec<Cell> = vec![
                la.into(),
                lb.into(),
                mean_a_sequential(&s)?.into(),
                seq.into(),
                mean_b.into(),
                (seq - mean_b).into(),
                slope.into(),
                (mean_b + la * slope).into(),
                std_single(s.state(), s.spec_a(), la)?.into(),
            ];
            if sampled {
                let stats = run_experiment(&s, config.samples, row_seed(config.seed, i))?;
                row.extend::<[Cell; 5]>([
                    stats.n_samples.into(),
                    stats.mean_a.into(),
                    stats.stderr_a.into(),
                    stats.mean_b.into(),
                    stats.stderr_b.into(),
                ]);
            }
            Ok(row)
        })
        .collect();
    let mut table = Table::new(columns);
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

/// Seed for sweep row `index`; the generator hashes the 64-bit seed, so
/// neighbouring values give unrelated streams.
pub fn row_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

fn pointer_range(spec: &Spectrum, lambda: f64) -> (f64, f64) {
    let pad = 5.0 / (2.0 * lambda.sqrt());
    let e = spec.eigenvalues();
    (e[0] - pad, e[e.len() - 1] + pad)
}

/// Histogram layout for `config`, with default ranges filled in from the setup.
pub fn histogram_layout(setup: &SequentialSetup, h: &HistogramConfig) -> Result<Histogram2d> {
    let a_range = h.a_range.unwrap_or_else(|| pointer_range(setup.spec_a(), setup.lambda_a()));
    let b_range = h.b_range.unwrap_or_else(|| pointer_range(setup.spec_b(), setup.lambda_b()));
    Histogram2d::new(a_range, b_range, h.bins_a, h.bins_b)
}

/// Raw outcome pairs, or a binned histogram with exact cell probabilities.
pub fn cmd_sample(config: &RunConfig) -> Result<Table> {
    if config.lambda_a.values().len() != 1 || config.lambda_b.values().len() != 1 {
        return Err(Error::InvalidConfig(
            "sample needs a single value for lambda_a and lambda_b".into(),
        ));
    }
    if config.samples == 0 {
        return Err(Error::NoSamples);
    }
    let (_, setup) = config.setup()?;
    match &config.histogram {
        None => {
            let mut table = Table::new(vec!["index", "a", "b"]);
            for (i, s) in sample_outcomes(&setup, config.samples, config.seed)?
                .into_iter()
                .enumerate()
            {
                table.push(vec![(i as u64).into(), s.a.into(), s.b.into()]);
            }
            Ok(table)
        }
        Some(h) => {
            let layout = histogram_layout(&setup, h)?;
            let hist = sample_histogram(&setup, config.samples, config.seed, &layout)?;
            let n = hist.total() as f64;
            let mut table = Table::new(vec![
                "a_lo",
                "a_hi",
                "b_lo",
                "b_hi",
                "a_center",
                "b_center",
                "count",
                "empirical_density",
                "analytic_density",
                "probability",
                "expected_count",
            ]);
            let cells: Vec<(usize, usize)> = (0..h.bins_a)
                .flat_map(|i| (0..h.bins_b).map(move |j| (i, j)))
                .collect();
            let exact: Vec<Result<(f64, f64)>> = cells
                .par_iter()
                .map(|&(i, j)| {
                    let (a0, a1) = hist.a_edges(i);
                    let (b0, b1) = hist.b_edges(j);
                    let density = joint_density(&setup, 0.5 * (a0 + a1), 0.5 * (b0 + b1))?;
                    Ok((density, joint_cell_probability(&setup, (a0, a1), (b0, b1))?))
                })
                .collect();
            for (&(i, j), e) in cells.iter().zip(exact) {
                let (density, p) = e?;
                let (a0, a1) = hist.a_edges(i);
                let (b0, b1) = hist.b_edges(j);
                let count = hist.count(i, j);
                table.push(vec![
                    a0.into(),
                    a1.into(),
                    b0.into(),
                    b1.into(),
                    (0.5 * (a0 + a1)).into(),
                    (0.5 * (b0 + b1)).into(),
                    count.into(),
                    (count as f64 / (n * hist.cell_area())).into(),
                    density.into(),
                    p.into(),
                    (p * n).into(),
                ]);
            }
            Ok(table)
        }
    }
}

/// Weak-limit slopes of `p` and `p^2` under grid refinement.
pub fn cmd_washout(config: &RunConfig) -> Result<Table> {
    let rows = washout_study_with(&config.washout_config()?)?;
    let mut table = Table::new(vec![
        "n_points",
        "delta_x",
        "slope_p",
        "slope_p2",
        "ratio_p",
        "change_p2",
    ]);
    for r in rows {
        table.push(vec![
            (r.n_points as u64).into(),
            r.delta_x.into(),
            r.slope_p.into(),
            r.slope_p2.into(),
            r.ratio_p.into(),
            r.change_p2.into(),
        ]);
    }
    Ok(table)
}
