//! Bins sampled outcome pairs and compares them with exact cell probabilities
//! through a chi-square statistic.

use seqkraus::analytic::{joint_cell_probability, SequentialSetup};
use seqkraus::montecarlo::{sample_histogram, Histogram2d};
use seqkraus::observable::{spectral_decompose, DEFAULT_DEGENERACY_TOL};
use seqkraus::scenarios::{build_scenario, QubitParams, ScenarioSpec};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn run_example() -> seqkraus::Result<()> {
    let s = build_scenario(&ScenarioSpec::Qubit(QubitParams::default()))?;
    let spec_a = spectral_decompose(&s.a, DEFAULT_DEGENERACY_TOL);
    let spec_b = spectral_decompose(&s.b, DEFAULT_DEGENERACY_TOL);
    let setup = SequentialSetup::new(s.state, spec_a, spec_b, 1.0, 2.0)?;

    let n = 200_000;
    let layout = Histogram2d::new((-3.0, 3.0), (-3.0, 3.0), 12, 12)?;
    let hist = sample_histogram(&setup, n, 99, &layout)?;

    let mut chi2 = 0.0;
    let mut cells = 0;
    for i in 0..12 {
        for j in 0..12 {
            let p = joint_cell_probability(&setup, hist.a_edges(i), hist.b_edges(j))?;
            let expected = p * n as f64;
            if expected >= 5.0 {
                chi2 += (hist.count(i, j) as f64 - expected).powi(2) / expected;
                cells += 1;
            }
        }
    }
    let dof = (cells - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    println!("{n} samples, {} outside the box", hist.outside);
    println!("chi2 = {chi2:.1} over {cells} cells (dof {dof}), p = {p_value:.3}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
