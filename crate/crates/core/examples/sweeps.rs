// The γ sweep over random rows and the collapse sweep along β = sΛ for the simplex.
//
// cargo run --example sweeps

use gapcount::estimate::{collapse_sweep, gamma_sweep, DEFAULT_GAMMA_GRID};
use gapcount::row::ScoreRow;
use gapcount::synth::SimplexFamily;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0)?;
    let rows = (0..200)
        .map(|_| {
            let n = rng.random_range(64..=1024);
            ScoreRow::from_scores((0..n).map(|_| normal.sample(&mut rng)).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sweep = gamma_sweep(&rows, &DEFAULT_GAMMA_GRID)?;
    println!("gamma  median p*  frac p* <= 1/log n");
    for p in &sweep.points {
        println!("{:>5}  {:>9.4}  {:>6.3}", p.gamma, p.median_p_star, p.frac_below_inv_log_n);
    }

    let points = collapse_sweep(&SimplexFamily::fixed(1.0), &[0.1, 0.5, 2.0, 10.0], &[1 << 10, 1 << 16])?;
    println!("\n     n     s        H        D        Z");
    for p in &points {
        println!("{:>6} {:>5} {:>8.4} {:>8.4} {:>8.4}", p.n, p.s, p.entropy, p.top_two_gap, p.z);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
