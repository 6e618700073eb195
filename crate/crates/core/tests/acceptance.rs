//! End-to-end acceptance checks. Prints one verdict line per criterion and
//! exits non-zero if any asserted criterion fails.

mod common;

use std::time::Instant;

use common::*;
use rand::Rng;
use seqkraus::analytic::*;
use seqkraus::commands::{cmd_sample, cmd_sweep};
use seqkraus::config::{HistogramConfig, RunConfig, StrengthSpec, SystemConfig};
use seqkraus::montecarlo::{run_experiment, sample_histogram, sample_outcomes, Histogram2d};
use seqkraus::observable::{expectation, spectral_decompose, DEFAULT_DEGENERACY_TOL};
use seqkraus::scenarios::{washout_study_with, QubitParams, WashoutConfig};

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * i as f64 / (n - 1) as f64))
        .collect()
}

fn qubit_system() -> RandomSystem {
    RandomSystem { state: plus(), a: sigma_z(), b: sigma_x() }
}

/// The shared sweep: 100 random systems with strengths spread over six decades.
fn sweep_setups() -> Vec<(RandomSystem, f64, f64)> {
    let mut r = rng(1001);
    (0..100)
        .map(|k| {
            let sys = RandomSystem::new(2 + k % 7, &mut r);
            let la = log_uniform(&mut r, 1e-3, 1e3);
            let lb = log_uniform(&mut r, 1e-3, 1e3);
            (sys, la, lb)
        })
        .collect()
}

fn z_score(x: f64, exact: f64, se: f64) -> f64 {
    (x - exact) / se
}

fn criterion_1() -> Verdict {
    let setups = sweep_setups();
    let start = Instant::now();
    let worst = setups
        .iter()
        .map(|(sys, la, lb)| (total_probability(&sys.setup(*la, *lb)).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    Verdict::new(worst < 1e-10 && elapsed < 1.0, format!("max |P - 1| = {worst:.2e}, {elapsed:.3} s"))
}

fn criterion_2() -> Verdict {
    let worst = sweep_setups()
        .iter()
        .map(|(sys, la, lb)| {
            let m = mean_a_sequential(&sys.setup(*la, *lb)).unwrap();
            (m - expectation(&sys.state, &sys.a).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    let mut r = rng(1002);
    let mut worst_z = 0.0f64;
    for k in 0..5 {
        let sys = RandomSystem::new(2 + k, &mut r);
        let stats = run_experiment(&sys.setup(0.5 + k as f64, 1.0), 1_000_000, 2000 + k as u64).unwrap();
        let z = z_score(stats.mean_a, expectation(&sys.state, &sys.a).unwrap(), stats.stderr_a);
        worst_z = worst_z.max(z.abs());
    }
    Verdict::new(worst < 1e-12 && worst_z < 3.0, format!("max deviation {worst:.2e}, max |z| {worst_z:.2}"))
}

/// Sampled second moment of the first reading with its standard error.
fn second_moment(sys: &RandomSystem, lambda: f64, seed: u64) -> (f64, f64) {
    let samples = sample_outcomes(&sys.setup(lambda, 1.0), 1_000_000, seed).unwrap();
    let n = samples.len() as f64;
    let m2 = samples.iter().map(|s| s.a * s.a).sum::<f64>() / n;
    let var = samples.iter().map(|s| (s.a * s.a - m2).powi(2)).sum::<f64>() / (n - 1.0);
    (m2, (var / n).sqrt())
}

/// Returns the verdict for the stated offset `1/(2 lambda)` and for the offset
/// `1/(4 lambda)` implied by the Kraus operator.
fn criterion_3() -> (Verdict, Verdict) {
    let mut r = rng(1003);
    let sys = RandomSystem::new(3, &mut r);
    let spec = spectral_decompose(&sys.a, DEFAULT_DEGENERACY_TOL);
    let a2 = expectation(&sys.state, &sys.a.square()).unwrap();
    let (mut stated_z, mut implied_z) = (Vec::new(), Vec::new());
    for (i, lambda) in [0.1, 1.0, 10.0].into_iter().enumerate() {
        let (m2, se) = second_moment(&sys, lambda, 3000 + i as u64);
        stated_z.push(z_score(m2, a2 + 0.5 / lambda, se));
        implied_z.push(z_score(m2, a2 + 0.25 / lambda, se));
    }

    let weights = spec.weights(&sys.state).unwrap();
    let mut worst_std = 0.0f64;
    for lambda in log_points(1e-3, 1e3, 13) {
        let m1: f64 = weights.iter().zip(spec.eigenvalues()).map(|(w, a)| w * a).sum();
        let m2: f64 =
            weights.iter().zip(spec.eigenvalues()).map(|(w, a)| w * a * a).sum::<f64>() + 0.25 / lambda;
        let recomputed = (m2 - m1 * m1).sqrt();
        let std = std_single(&sys.state, &spec, lambda).unwrap();
        worst_std = worst_std.max((std - recomputed).abs() / recomputed);
    }

    let fmt = |zs: &[f64]| zs.iter().map(|z| format!("{z:.1}")).collect::<Vec<_>>().join(", ");
    let stated = Verdict::new(
        stated_z.iter().all(|z| z.abs() < 3.0),
        format!("offset 1/(2 lambda): z = [{}] at lambda = 0.1, 1, 10", fmt(&stated_z)),
    );
    let implied = Verdict::new(
        implied_z.iter().all(|z| z.abs() < 3.0) && worst_std < 1e-12,
        format!(
            "offset 1/(4 lambda): z = [{}]; std_single vs recomputed moments {worst_std:.1e}",
            fmt(&implied_z)
        ),
    );
    (stated, implied)
}

fn criterion_4() -> Verdict {
    let mut worst = 0.0f64;
    for (sys, la, _) in sweep_setups() {
        let b = sys.a.square();
        let sa = spectral_decompose(&sys.a, DEFAULT_DEGENERACY_TOL);
        let sb = spectral_decompose(&b, DEFAULT_DEGENERACY_TOL);
        let m = mean_b_sequential(&sys.state, &sa, &sb, la).unwrap();
        worst = worst.max((m - expectation(&sys.state, &b).unwrap()).abs());
    }
    Verdict::new(worst < 1e-12, format!("max |<B>_seq - <B>| = {worst:.2e}"))
}

fn criterion_5() -> Verdict {
    let sys = qubit_system();
    let sa = spectral_decompose(&sys.a, DEFAULT_DEGENERACY_TOL);
    let sb = spectral_decompose(&sys.b, DEFAULT_DEGENERACY_TOL);
    let worst = log_points(1e-3, 1e3, 26)
        .into_iter()
        .map(|l| (mean_b_sequential(&sys.state, &sa, &sb, l).unwrap() - (-2.0 * l).exp()).abs())
        .fold(0.0, f64::max);
    let mut zs = Vec::new();
    for (i, l) in [0.1, 1.0].into_iter().enumerate() {
        let stats = run_experiment(&sys.setup(l, 1.0), 1_000_000, 5000 + i as u64).unwrap();
        zs.push(z_score(stats.mean_b, (-2.0 * l).exp(), stats.stderr_b));
    }
    Verdict::new(
        worst < 1e-12 && zs.iter().all(|z| z.abs() < 3.0),
        format!("max closed-form deviation {worst:.2e}, z = [{:.2}, {:.2}]", zs[0], zs[1]),
    )
}

fn criterion_6() -> Verdict {
    let mut systems = vec![qubit_system()];
    let mut r = rng(1006);
    for k in 0..10 {
        systems.push(RandomSystem::new(3 + k % 2, &mut r));
    }
    let (mut worst_fd, mut worst_taylor) = (0.0f64, 0.0f64);
    let mut qubit_slope = 0.0;
    for (k, sys) in systems.iter().enumerate() {
        let sa = spectral_decompose(&sys.a, DEFAULT_DEGENERACY_TOL);
        let sb = spectral_decompose(&sys.b, DEFAULT_DEGENERACY_TOL);
        let slope = weak_slope(&sys.state, &sa, &sys.b).unwrap();
        let f0 = expectation(&sys.state, &sys.b).unwrap();
        let fd = richardson_derivative_at_zero(
            |l| mean_b_sequential(&sys.state, &sa, &sb, l).unwrap(),
            f0,
            1e-4,
            1e-5,
        );
        worst_fd = worst_fd.max((fd - slope).abs() / slope.abs().max(1e-300));
        let taylor = weak_slope_taylor(&sys.state, &sa, &sys.b).unwrap();
        worst_taylor = worst_taylor.max((taylor - slope).abs());
        if k == 0 {
            qubit_slope = slope;
        }
    }
    let qubit_ok = (qubit_slope + 2.0).abs() < 1e-12;
    Verdict::new(
        worst_fd < 1e-6 && worst_taylor < 1e-10 && qubit_ok,
        format!(
            "qubit slope {qubit_slope:.12}, max relative finite-difference gap {worst_fd:.2e}, \
             max Taylor gap {worst_taylor:.2e}"
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut r = rng(1007);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let sys = RandomSystem::gapped(2 + k % 7, 0.5, &mut r);
        let sa = spectral_decompose(&sys.a, DEFAULT_DEGENERACY_TOL);
        let sb = spectral_decompose(&sys.b, DEFAULT_DEGENERACY_TOL);
        let m = mean_b_sequential(&sys.state, &sa, &sb, 1e3).unwrap();
        let strong = mean_b_strong_limit(&sys.state, &sa, &sys.b).unwrap();
        worst = worst.max((m - strong).abs());
    }
    Verdict::new(worst < 1e-6, format!("max deviation at lambda = 1e3: {worst:.2e} over 20 gapped systems"))
}

fn criterion_8() -> Verdict {
    let mut r = rng(1008);
    let systems = [qubit_system(), RandomSystem::new(3, &mut r)];
    let mut worst = 0.0f64;
    for sys in &systems {
        let stats: Vec<_> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&lb| run_experiment(&sys.setup(1.0, lb), 1_000_000, 8000).unwrap())
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let se = (stats[i].stderr_b.powi(2) + stats[j].stderr_b.powi(2)).sqrt();
                worst = worst.max((stats[i].mean_b - stats[j].mean_b).abs() / se);
            }
        }
    }
    Verdict::new(worst < 3.0, format!("max pairwise |z| {worst:.2}"))
}

fn criterion_9() -> Verdict {
    let mut r = rng(1009);
    let mut cases = vec![(qubit_system(), 0.3, -0.2)];
    for _ in 0..4 {
        let sys = RandomSystem::new(3, &mut r);
        let (a, b) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        cases.push((sys, a, b));
    }
    let (mut worst_vertex, mut ratios) = (0.0f64, Vec::new());
    for (sys, a, b) in &cases {
        let lambda = 1e-2;
        let setup = sys.setup(lambda, lambda);
        let report = weak_expansion(&setup, *a, *b).unwrap();
        let Some(opt) = report.optimal_lambda else {
            continue;
        };
        // the truncated profile has zero derivative at the vertex and falls off on both sides
        let derivative = 1.0 - 2.0 * report.c_coefficient * opt;
        let peak = report.truncated_profile(opt);
        let sides = report.truncated_profile(opt * 0.99).max(report.truncated_profile(opt * 1.01));
        worst_vertex = worst_vertex.max(derivative.abs());
        if sides >= peak {
            worst_vertex = f64::INFINITY;
        }
        let residual = |l: f64| {
            let s = setup.with_strengths(l, l).unwrap();
            (joint_density(&s, *a, *b).unwrap() - report.truncated_density(l, l)).abs()
        };
        ratios.push(residual(lambda) / residual(lambda / 2.0));
    }
    let ratios_ok = !ratios.is_empty() && ratios.iter().all(|q| (6.0..=10.0).contains(q));
    let list = ratios.iter().map(|q| format!("{q:.2}")).collect::<Vec<_>>().join(", ");
    Verdict::new(
        worst_vertex < 1e-15 && ratios_ok,
        format!("vertex derivative {worst_vertex:.1e}, residual ratios [{list}]"),
    )
}

fn criterion_10() -> Verdict {
    let start = Instant::now();
    let rows = washout_study_with(&WashoutConfig::new(vec![201, 401, 801], 0.2)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio_p).collect();
    let p2: Vec<f64> = rows.iter().map(|r| r.slope_p2).collect();
    let mut spread = 0.0f64;
    for i in 0..p2.len() {
        for j in i + 1..p2.len() {
            spread = spread.max((p2[i] - p2[j]).abs() / p2[i].abs().max(p2[j].abs()));
        }
    }
    let ratios_ok = ratios.len() == 2 && ratios.iter().all(|q| (3.2..=4.8).contains(q));
    Verdict::new(
        ratios_ok && spread < 0.05 && elapsed < 60.0,
        format!(
            "p ratios [{:.3}, {:.3}], p^2 slopes [{:.4}, {:.4}, {:.4}] spread {:.1}%, {elapsed:.1} s",
            ratios[0],
            ratios[1],
            p2[0],
            p2[1],
            p2[2],
            100.0 * spread
        ),
    )
}

fn criterion_11() -> Verdict {
    let start = Instant::now();
    let setup = qubit_system().setup(1.0, 1.0);
    let n = 10_000_000u64;
    let layout = Histogram2d::new((-3.5, 3.5), (-3.5, 3.5), 50, 50).unwrap();
    let hist = sample_histogram(&setup, n, 11_000, &layout).unwrap();
    let (mut observed, mut expected) = (Vec::new(), Vec::new());
    let mut inside = 0.0;
    for i in 0..50 {
        for j in 0..50 {
            let p = joint_cell_probability(&setup, hist.a_edges(i), hist.b_edges(j)).unwrap();
            inside += p;
            observed.push(hist.count(i, j));
            expected.push(p * n as f64);
        }
    }
    observed.push(hist.outside);
    expected.push((1.0 - inside).max(0.0) * n as f64);
    let (stat, dof, p) = chi_square(&observed, &expected, 5.0);
    let elapsed = start.elapsed().as_secs_f64();
    Verdict::new(
        p > 0.01 && elapsed < 90.0,
        format!("chi^2 = {stat:.1} on {dof} dof, p = {p:.3}, {elapsed:.1} s"),
    )
}

fn determinism_config() -> RunConfig {
    let mut c = RunConfig::new(SystemConfig::Qubit(QubitParams::default()));
    c.lambda_a = StrengthSpec::Range { start: 0.1, stop: 10.0, points: 5, log: true };
    c.lambda_b = StrengthSpec::Value(1.0);
    c.samples = 50_000;
    c.seed = 12_012;
    c
}

/// Sweep, raw samples and histogram rendered in both formats.
fn rendered_outputs() -> Vec<String> {
    let sweep_cfg = determinism_config();
    let mut raw_cfg = determinism_config();
    raw_cfg.lambda_a = StrengthSpec::Value(0.7);
    let mut hist_cfg = raw_cfg.clone();
    hist_cfg.histogram = Some(HistogramConfig::default());
    let mut out = Vec::new();
    for t in [cmd_sweep(&sweep_cfg), cmd_sample(&raw_cfg), cmd_sample(&hist_cfg)] {
        let t = t.unwrap();
        out.push(t.to_csv());
        out.push(t.to_json());
    }
    out
}

fn criterion_12() -> Verdict {
    let run_on = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(rendered_outputs)
    };
    let single = run_on(1);
    let many = run_on(8);
    let identical = single == many;
    let bytes: usize = single.iter().map(String::len).sum();
    Verdict::new(identical, format!("{bytes} bytes compared across 1 and 8 threads"))
}

fn main() {
    let mut failed = 0;
    let mut report = |label: &str, v: Verdict, counts: bool| {
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("{label} ... {tag} ({})", v.detail);
        if !v.passed && counts {
            failed += 1;
        }
    };

    report("criterion 1 normalization", criterion_1(), true);
    report("criterion 2 first mean invariance", criterion_2(), true);
    let (stated, implied) = criterion_3();
    // The stated offset disagrees with the density of the Kraus operator by a
    // factor of two; it is reported but does not decide the exit status.
    report("criterion 3 variance law, stated offset", stated, false);
    report("criterion 3 variance law, Kraus-implied offset", implied, true);
    report("criterion 4 commuting control", criterion_4(), true);
    report("criterion 5 qubit closed form", criterion_5(), true);
    report("criterion 6 weak-limit slope", criterion_6(), true);
    report("criterion 7 strong limit", criterion_7(), true);
    report("criterion 8 second mean ignores lambda_B", criterion_8(), true);
    report("criterion 9 weak expansion optimum", criterion_9(), true);
    report("criterion 10 washout", criterion_10(), true);
    report("criterion 11 sampler chi-square", criterion_11(), true);
    report("criterion 12 determinism", criterion_12(), true);

    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all asserted criteria passed");
}
