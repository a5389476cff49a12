// Realize a block Gram matrix as shared query/key self-attention scores.
//
// cargo run --example gram_realization

use gapcount::gap::{contact_triple, DEFAULT_EPS};
use gapcount::synth::{block_gram, gram_realize, BlockConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = BlockConfig::new(12, 3, 0.25, 1.0)?;
    let sigma = block_gram(&cfg);
    let factor = gram_realize(&sigma, 12)?;
    let err = (factor.scores() - &sigma).amax();
    println!("block Gram n=12 m=3 realized in d_qk = {}: max error {err:.2e}", factor.d_qk());

    let row = factor.score_row(0)?;
    let t = contact_triple(&row, DEFAULT_EPS)?;
    println!("row 0: Λ = {:?}, Δ = {:?}", t.lambda, t.delta());

    // the factor cannot have fewer rows than the numerical rank
    match gram_realize(&sigma, 2) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("d_qk = 2: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
