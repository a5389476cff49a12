// Gap profile, accumulation scale and contact point of a few rows.
//
// cargo run --example contact_triples

use gapcount::gap::{accumulation_scale, contact_triple, resolved_scale, DEFAULT_EPS};
use gapcount::row::{counting_function, gap_profile, ScoreRow};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rows = [
        vec![0.0, -1.0, -2.0],
        vec![2.0, 1.5, 1.5, 1.5, 0.0],
        vec![1.0, 1.0, 0.0],
        vec![3.0],
    ];
    for scores in rows {
        let row = ScoreRow::from_scores(scores.clone())?;
        let profile = gap_profile(&row);
        let t = contact_triple(&row, DEFAULT_EPS)?;
        print!("{scores:?}: N(1) = {}, Λ = {:?}", counting_function(&profile, 1.0)?, accumulation_scale(&profile));
        match t.finite() {
            Some((lambda, alpha, delta)) => println!(", Δ = {delta}, α = {alpha:.4}, C = {:.4}", lambda * delta),
            None => println!(" ({})", if t.is_tie() { "tied maximum" } else { "no competitors" }),
        }
    }

    let row = ScoreRow::from_scores(vec![0.0, -0.5, -0.5, -0.5, -3.0, -3.0])?;
    let profile = gap_profile(&row);
    for r in [0.0, 1.0, 1.5] {
        println!("resolved scale at r = {r}: {}", resolved_scale(&profile, r)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
