//! Equal weak strengths: the joint density at fixed readings behaves like
//! (2/pi)(lambda - C lambda^2), peaking near lambda = 1/(2C).

use seqkraus::analytic::{joint_density, weak_expansion, SequentialSetup};
use seqkraus::observable::{spectral_decompose, DEFAULT_DEGENERACY_TOL};
use seqkraus::scenarios::{build_scenario, QubitParams, ScenarioSpec};

pub fn run_example() -> seqkraus::Result<()> {
    let s = build_scenario(&ScenarioSpec::Qubit(QubitParams::default()))?;
    let spec_a = spectral_decompose(&s.a, DEFAULT_DEGENERACY_TOL);
    let spec_b = spectral_decompose(&s.b, DEFAULT_DEGENERACY_TOL);
    let setup = SequentialSetup::new(s.state, spec_a, spec_b, 1e-3, 1e-3)?;

    let (a, b) = (0.4, -0.3);
    let r = weak_expansion(&setup, a, b)?;
    println!("readings (a, b) = ({a}, {b})");
    println!("A term {:.6}, B term {:.6}, C = {:.6}", r.a_term, r.b_term, r.c_coefficient);
    if let Some(l) = r.optimal_lambda {
        println!("vertex of lambda - C lambda^2 at lambda = {l:.6}");
    }

    println!("{:>10} {:>16} {:>16} {:>12}", "lambda", "full", "truncated", "residual");
    let mut prev: Option<f64> = None;
    for k in 0..5 {
        let l = 0.02 / f64::powi(2.0, k);
        let full = joint_density(&setup.with_strengths(l, l)?, a, b)?;
        let trunc = r.truncated_density(l, l);
        let res = (full - trunc).abs();
        let ratio = prev.map_or(String::new(), |p| format!("x{:.2}", p / res));
        println!("{l:>10.5} {full:>16.10e} {trunc:>16.10e} {res:>12.3e} {ratio}");
        prev = Some(res);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
