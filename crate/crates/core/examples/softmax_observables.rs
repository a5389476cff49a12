// Softmax at several inverse temperatures and the collapse observables,
// with the Laplace envelope and the rank boundary.
//
// cargo run --example softmax_observables

use gapcount::gap::{laplace_envelope, rank_boundary};
use gapcount::row::{gap_profile, observables, partition_by_parts, softmax, ScoreRow};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let row = ScoreRow::from_scores(vec![0.0, -1.0, -2.0])?;
    let profile = gap_profile(&row);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "beta", "Z", "by parts", "S", "H", "D", "p*");
    for beta in [0.1, 0.5, 1.0, 2.0, 8.0] {
        let sm = softmax(&row, beta)?;
        let o = observables(&sm);
        println!(
            "{beta:>6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            sm.z,
            partition_by_parts(&profile, beta)?,
            laplace_envelope(&profile, beta)?,
            o.entropy,
            o.top_two_gap,
            o.p_star
        );
    }
    let beta = rank_boundary(&profile, 2f64.ln())?;
    println!("rank boundary at r = log 2: {beta:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
