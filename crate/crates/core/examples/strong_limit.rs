//! As the first measurement sharpens, the mean of the second reading tends to
//! the Born-weighted average of <a_n|B|a_n>.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqkraus::analytic::{mean_b_sequential, mean_b_strong_limit};
use seqkraus::observable::{expectation, spectral_decompose, DEFAULT_DEGENERACY_TOL};
use seqkraus::random;

pub fn run_example() -> seqkraus::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eigs = random::separated_eigenvalues(4, 0.5, 3.0, &mut rng);
    let a = random::hermitian_with_spectrum(&eigs, &mut rng);
    let b = random::hermitian(4, &mut rng);
    let psi = random::state(4, &mut rng);
    let spec_a = spectral_decompose(&a, DEFAULT_DEGENERACY_TOL);
    let spec_b = spectral_decompose(&b, DEFAULT_DEGENERACY_TOL);

    let strong = mean_b_strong_limit(&psi, &spec_a, &b)?;
    println!("A eigenvalues {:?}", spec_a.eigenvalues());
    println!("<B> = {:.10}, strong limit = {strong:.10}", expectation(&psi, &b)?);
    for la in [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0] {
        let m = mean_b_sequential(&psi, &spec_a, &spec_b, la)?;
        println!("lambda_a = {la:>7}: <b> = {m:.10}, distance {:.2e}", (m - strong).abs());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
