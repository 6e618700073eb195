//! With B = A^2 the first measurement leaves the statistics of B untouched at
//! every strength.

use seqkraus::analytic::{condition4_check, mean_b_sequential, weak_slope};
use seqkraus::observable::{expectation, spectral_decompose, DEFAULT_DEGENERACY_TOL};
use seqkraus::scenarios::{build_scenario, CommutingParams, ScenarioSpec};

pub fn run_example() -> seqkraus::Result<()> {
    let s = build_scenario(&ScenarioSpec::Commuting(CommutingParams::default()))?;
    let spec_a = spectral_decompose(&s.a, DEFAULT_DEGENERACY_TOL);
    let spec_b = spectral_decompose(&s.b, DEFAULT_DEGENERACY_TOL);
    let exact = expectation(&s.state, &s.b)?;

    println!("<B> = {exact}");
    for la in [1e-3, 0.1, 1.0, 10.0, 1e3] {
        let m = mean_b_sequential(&s.state, &spec_a, &spec_b, la)?;
        let c4 = condition4_check(&spec_a, &s.b, la)?;
        let worst = c4.iter().cloned().fold(0.0, f64::max);
        println!("lambda_a = {la:>7.1e}: <b> - <B> = {:+.2e}, max commutator norm {worst:.1e}", m - exact);
        assert!((m - exact).abs() < 1e-12);
    }
    println!("weak slope: {:.1e}", weak_slope(&s.state, &spec_a, &s.b)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
