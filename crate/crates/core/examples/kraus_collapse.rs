//! One Gaussian-pointer measurement: reading density, collapse, and the
//! widened spread of readings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqkraus::analytic::{moment_single, projective_variance, std_single};
use seqkraus::kraus::{collapse, outcome_density, KrausParams};
use seqkraus::montecarlo::sample_first;
use seqkraus::observable::{spectral_decompose, Observable, QuantumState, DEFAULT_DEGENERACY_TOL};

pub fn run_example() -> seqkraus::Result<()> {
    let a = Observable::from_real_diagonal(&[-1.0, 0.0, 2.0])?;
    let psi = QuantumState::from_real(&[0.6, 0.0, 0.8])?;
    let spec = spectral_decompose(&a, DEFAULT_DEGENERACY_TOL);

    for lambda in [0.1, 1.0, 10.0] {
        println!(
            "lambda = {lambda:>4}: <a> = {:.6}, std = {:.6} (projective variance {:.4} + 1/(4 lambda))",
            moment_single(&psi, &spec, lambda, 1)?,
            std_single(&psi, &spec, lambda)?,
            projective_variance(&psi, &spec)?
        );
    }

    let lambda = 2.0;
    for reading in [-1.0, 0.5, 2.0] {
        let p = outcome_density(&psi, &spec, lambda, reading)?;
        let (post, norm) = collapse(&psi, &spec, KrausParams::new(lambda, reading)?)?;
        let w = spec.weights(&post)?;
        println!("a = {reading:>4}: density {p:.6}, |K psi|^2 = {:.6}, weights {w:.4?}", norm * norm);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (reading, post) = sample_first(&psi, &spec, lambda, &mut rng)?;
    println!("sampled reading {reading:.4}, post-measurement weights {:.4?}", spec.weights(&post)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
