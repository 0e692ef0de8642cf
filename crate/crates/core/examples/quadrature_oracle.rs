//! Spectral values next to direct quadrature of the singular integrals.
//!
//! The quadrature works on the integral forms of each operator and knows
//! nothing about the basis, so agreement is an independent check. It is
//! also much slower.
//!
//!     cargo run --release --example quadrature_oracle

use rf_spectral::closedform::{ClosedFormFunction, OperatorKind};
use rf_spectral::operators::{AuxDecomposition, SpectralOperator};
use rf_spectral::oracle::{quad_operator, weyl_difference, QuadratureConfig, Side};

fn main() -> rf_spectral::Result<()> {
    let cfg = QuadratureConfig::default();
    let u = ClosedFormFunction::Erf;

    for (alpha, gamma, l) in [(0.4, 0.2, 1.1), (1.37, -0.63, 2.5)] {
        let kind = OperatorKind::RieszFeller { gamma };
        let op = SpectralOperator::new(kind, alpha, 256, l, 100)?;
        let r = op.apply_with_aux(&u, Some(&AuxDecomposition::erf_arctan()))?;
        println!("{kind}, alpha = {alpha}");
        println!(
            "{:>10} {:>22} {:>22} {:>10}",
            "x", "spectral", "quadrature", "diff"
        );
        for i in 1..=5 {
            let j = i * 256 / 6;
            let x = r.grid.x_nodes[j];
            let q = quad_operator(kind, alpha, &u, x, &cfg)?;
            println!(
                "{x:>10.4} {:>22.15e} {q:>22.15e} {:>10.2e}",
                r.approx[j].re,
                (r.approx[j].re - q).abs()
            );
        }
    }

    // The right Weyl-Marchaud derivative from its difference quotient and
    // from its derivative form.
    println!("\nWeyl-Marchaud, alpha = 0.4");
    for x in [-1.0, 0.0, 2.0] {
        let d = weyl_difference(&u, 0.4, x, Side::Right, &cfg)?;
        let i = quad_operator(OperatorKind::WeylRight, 0.4, &u, x, &cfg)?;
        println!("x = {x:>4}: difference {d:.12e}  derivative {i:.12e}");
    }
    Ok(())
}
