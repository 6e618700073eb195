//! Sequential sigma_z then sigma_x on |+x>: the mean of the second reading
//! decays as exp(-2 lambda_A), checked against sampled runs.

use seqkraus::analytic::{mean_b_sequential, weak_slope, SequentialSetup};
use seqkraus::montecarlo::run_experiment;
use seqkraus::observable::{spectral_decompose, DEFAULT_DEGENERACY_TOL};
use seqkraus::scenarios::{build_scenario, QubitParams, ScenarioSpec};

pub fn run_example() -> seqkraus::Result<()> {
    let s = build_scenario(&ScenarioSpec::Qubit(QubitParams::default()))?;
    let spec_a = spectral_decompose(&s.a, DEFAULT_DEGENERACY_TOL);
    let spec_b = spectral_decompose(&s.b, DEFAULT_DEGENERACY_TOL);

    println!("{:>10} {:>14} {:>14}", "lambda_a", "mean_b_seq", "exp(-2 la)");
    for k in 0..=6 {
        let la = 10f64.powf(-3.0 + 0.75 * k as f64);
        let m = mean_b_sequential(&s.state, &spec_a, &spec_b, la)?;
        println!("{la:>10.3e} {m:>14.10} {:>14.10}", (-2.0 * la).exp());
        assert!((m - (-2.0 * la).exp()).abs() < 1e-12);
    }
    println!("weak slope: {}", weak_slope(&s.state, &spec_a, &s.b)?);

    for la in [0.1, 1.0] {
        let setup = SequentialSetup::new(s.state.clone(), spec_a.clone(), spec_b.clone(), la, 1.0)?;
        let stats = run_experiment(&setup, 100_000, 2024)?;
        let exact = (-2.0 * la).exp();
        let z = (stats.mean_b - exact) / stats.stderr_b;
        println!(
            "lambda_a = {la}: sampled {:.5} +- {:.5}, exact {exact:.5}, z = {z:+.2}",
            stats.mean_b, stats.stderr_b
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
