//! Position then momentum on a uniform grid. The first-order correction to
//! the momentum mean shrinks as the grid is refined, while the correction to
//! the mean of p^2 settles to a finite value.

use seqkraus::scenarios::washout_study;

pub fn run_example() -> seqkraus::Result<()> {
    let rows = washout_study(&[201, 401, 801], 0.2)?;
    println!("{:>6} {:>8} {:>14} {:>14} {:>8}", "n", "dx", "slope_p", "slope_p2", "ratio");
    for r in &rows {
        println!(
            "{:>6} {:>8.3} {:>14.6e} {:>14.8} {:>8}",
            r.n_points,
            r.delta_x,
            r.slope_p,
            r.slope_p2,
            r.ratio_p.map_or("-".into(), |x| format!("{x:.3}"))
        );
    }
    let last = rows.last().unwrap();
    assert!((last.ratio_p.unwrap() - 4.0).abs() < 0.8);
    assert!(last.change_p2.unwrap() < 0.05);
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
