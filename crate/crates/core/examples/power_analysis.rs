//! Closed-form power of the windowed sign test and a Monte-Carlo check of
//! the member-window probability.

use wbc::power::monte_carlo_p_member;
use wbc::{p_member, power_curve, SimParams, TailDist};

fn main() -> wbc::Result<()> {
    let params = SimParams {
        rho_delta: 0.2,
        gamma_bar: 0.25,
        rho_xi: 0.02,
        y_dist: TailDist::Pareto { shape: 3.0, scale: 0.3 },
        ..SimParams::default()
    };

    let grid: Vec<usize> = (1..=64).collect();
    let profile = power_curve(&params, 512, &grid)?;
    for w in [1, 2, 4, 8, 16, 32, 64] {
        let i = w - 1;
        println!(
            "w = {w:>2}  p = {:.4}  var = {:.2e}  power = {:.3}",
            profile.p_member[i], profile.variance[i], profile.power[i]
        );
    }
    println!("w* = {}", profile.w_star);

    for w in [4, 8, 16] {
        let mc = monte_carlo_p_member(&params, w, 100_000, 1)?;
        println!("w = {w:>2}  formula {:.4}  simulated {mc:.4}", p_member(w, &params)?);
    }
    Ok(())
}
