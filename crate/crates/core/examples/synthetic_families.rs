// Simplex, block and finite-contact rows against their closed forms.
//
// cargo run --example synthetic_families

use gapcount::gap::{accumulation_scale, contact_triple, DEFAULT_EPS};
use gapcount::row::gap_profile;
use gapcount::synth::{
    block_lambda_closed_form, block_row, simplex_row, BlockConfig, Family, ScoreFamily, SimplexConfig,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let simplex = SimplexConfig::new(1 << 12, 0.8)?;
    let t = contact_triple(&simplex_row(&simplex)?, DEFAULT_EPS)?;
    println!("simplex n=4096 Δ=0.8: Λ = {:?} (closed form {})", t.lambda, simplex.lambda());

    let block = BlockConfig::new(1 << 12, 4, 0.2, 1.5)?;
    let lambda = accumulation_scale(&gap_profile(&block_row(&block)?));
    println!("block n=4096 m=4: Λ = {lambda:?} (closed form {})", block_lambda_closed_form(&block));

    let planted = Family::from_json("block", r#"{"m": 2, "xi": 1.5}"#)?;
    for k in [10, 14, 18] {
        let n = 1usize << k;
        let t = contact_triple(&planted.row(n)?, DEFAULT_EPS)?;
        let (lambda, alpha, delta) = t.finite().expect("block rows are untied");
        println!("planted block n=2^{k}: Λ = {lambda:.4}, α = {alpha:.5}, Δ = {delta:.5}");
    }

    let fc = Family::from_json("finite-contact", "{}")?;
    let t = contact_triple(&fc.row(1000)?, DEFAULT_EPS)?;
    println!("finite-contact n=1000: Λ = {:?}, α = {:?}", t.lambda, t.alpha());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
