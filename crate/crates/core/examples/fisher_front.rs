//! Accelerating front of the fractional Fisher equation.
//!
//! Runs the reduced configuration (N = 2048, L = 300, t up to 12) and fits
//! the growth rate of the front on t in [8, 11.5]; the rate should approach
//! 1/alpha. Pass `full` to run the large configuration instead, which needs
//! several GB of memory and hours.
//!
//!     cargo run --release --example fisher_front [full]

use std::time::Instant;

use rf_spectral::evolve::{fit_exponential, rk4_evolve, EvolutionConfig, FisherProblem, RunLimits};

fn main() -> rf_spectral::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let (cfg, window) = if full {
        (EvolutionConfig::full(), (15.0, 21.0))
    } else {
        (EvolutionConfig::scaled(), (8.0, 11.5))
    };

    let t0 = Instant::now();
    let problem = FisherProblem::new(cfg)?;
    println!("matrix N = {} built in {:.1?}", cfg.n, t0.elapsed());

    let t1 = Instant::now();
    let run = rk4_evolve(
        &problem,
        problem.initial_state(),
        RunLimits::default(),
        |snap| {
            if snap.step % 40 == 0 {
                println!("t = {:5.2}  x_half = {:.6e}", snap.time, snap.x_half);
            }
            Ok(())
        },
    )?;
    println!("{} steps in {:.1?}", cfg.steps(), t1.elapsed());

    let fit = fit_exponential(&run.trace, window)?;
    println!(
        "slope = {:.6}  1/alpha = {:.6}  |diff| = {:.3e}  1 - rho = {:.3e}",
        fit.slope,
        1.0 / cfg.alpha,
        (fit.slope - 1.0 / cfg.alpha).abs(),
        1.0 - fit.pearson_rho
    );
    Ok(())
}
