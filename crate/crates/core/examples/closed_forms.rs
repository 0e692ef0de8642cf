//! Closed-form building blocks: Gamma identities, the Riesz-Feller weights,
//! operator values on Higgins functions, and the x = 0 values for odd
//! Christov-type modes.
//!
//!     cargo run --release --example closed_forms

use std::f64::consts::PI;

use rf_spectral::closedform::{
    frac_lap_lambda, op_lambda, weyl_phi_at_zero, ClosedFormFunction, OperatorKind,
};
use rf_spectral::specfun::{c_alpha, gamma, max_skewness, rf_coeffs};

fn main() -> rf_spectral::Result<()> {
    let w: f64 = 0.31;
    println!("Gamma(w) Gamma(1-w) = {:.15}", gamma(w)? * gamma(1.0 - w)?);
    println!("pi / sin(pi w)      = {:.15}", PI / (PI * w).sin());

    for alpha in [0.4, 1.0, 1.37] {
        let c = rf_coeffs(alpha, 0.0)?;
        println!(
            "alpha = {alpha}: c1 = c2 = {:.12}, c_alpha = {:.12}, |gamma| <= {}",
            c.c1,
            c_alpha(alpha)?,
            max_skewness(alpha)
        );
    }

    // fractional Laplacian of lambda_k(x) = ((ix - 1)/(ix + 1))^k
    for k in [1, 2, 5] {
        let v = frac_lap_lambda(0.62, k, 0.4)?;
        println!("(-Laplacian)^(0.31) lambda_{k}(0.4) = {v:.12}");
    }
    let v = op_lambda(OperatorKind::RieszFeller { gamma: 0.3 }, 1.5, 2, 0.0)?;
    println!("D_0.3^1.5 lambda_2(0) = {v:.12}");

    let a = weyl_phi_at_zero(0.5, 1)?;
    println!(
        "phi_1 at 0, alpha = 0.5: right {:.12}, left {:.12}, laplacian {:.12}",
        a.weyl_right, a.weyl_left_neg, a.frac_lap
    );

    for f in [
        ClosedFormFunction::Arctan,
        ClosedFormFunction::Erf,
        ClosedFormFunction::Log1pSq,
    ] {
        let v = f.reference_operator(OperatorKind::FracLaplacian, 1.2, 0.5)?;
        println!("(-Laplacian)^(0.6) {f} at 0.5 = {v:.12}");
    }
    Ok(())
}
