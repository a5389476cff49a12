// Power-family fits of an inverse-temperature vector and the temperature schedules.
//
// cargo run --example power_fit

use gapcount::estimate::{
    default_xi_grid, domain_range, power_fit_grid, power_fit_ols, residual_bootstrap_mse, BetaCurve, SIX_POINT_GRID,
};
use gapcount::synth::{dynamic_ntk_scale, legacy_multiplier, yarn_beta};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let beta = BetaCurve::from_fn(1024, |n| 3.0 * (n as f64).ln().sqrt());
    let domain = domain_range(64, 1024);
    let grid = power_fit_grid(&beta, &domain, &default_xi_grid(), true)?;
    let ols = power_fit_ols(&beta, &SIX_POINT_GRID)?;
    println!("planted 3 (log n)^0.5: grid ξ* = {}, a1 = {:.6}, OLS ξ = {:.6}", grid.xi_star, grid.a1, ols.slope);

    let affine = BetaCurve::from_fn(1024, |n| 2.0 * (n as f64).ln() + 5.0);
    let free = power_fit_grid(&affine, &domain, &default_xi_grid(), false)?;
    let bias_free = power_fit_grid(&affine, &domain, &default_xi_grid(), true)?;
    println!("2 log n + 5: ξ* = {} with intercept, {} without", free.xi_star, bias_free.xi_star);
    let boot = residual_bootstrap_mse(&affine, bias_free.xi_star, &domain, 200, 1)?;
    println!("bias-free MSE {:.4e}, relative half-IQR {:.3}", boot.point_estimate, boot.relative_half_iqr());

    for n in [4096usize, 16384, 65536] {
        println!(
            "n = {n:>6}: legacy ξ=1 {:.4}, yarn {:.4}, ntk(d=128) {:.4}",
            legacy_multiplier(n, 4096, 1.0)?,
            yarn_beta(n, 4096)?,
            dynamic_ntk_scale(n, 4096, 128)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
