//! Building, inspecting, converting and saving an operator matrix.
//!
//! The base matrix is the fractional Laplacian on L = 1. Other operators
//! and map scales are column phases and a power of L, so one build can be
//! reused, either by scaling the matrix or on the fly with `apply_as`.
//!
//!     cargo run --release --example operational_matrix

use num_complex::Complex64;
use rf_spectral::basis::{make_grid, ModeIndex, SpectralTransform, KRASNY_EPS};
use rf_spectral::closedform::OperatorKind;
use rf_spectral::opmatrix::{l_lim_diagnostic, MatrixBuilder, OperatorMatrix};

fn main() -> rf_spectral::Result<()> {
    let (alpha, n) = (1.37, 64);
    let builder = MatrixBuilder::new(alpha, n).l_lim(100);
    println!("work units: {:.3e}", builder.work_units());
    let base = builder.build()?;
    println!(
        "column k=0 is zero: {}",
        base.column(0).iter().all(|v| v.norm() == 0.0)
    );
    println!(
        "entry (j=3, k=2): {:.12}",
        base.get(3, ModeIndex(2).slot(n))
    );

    for l_lim in [25, 50, 100] {
        println!(
            "l_lim {l_lim:>3}: change on doubling {:.2e}",
            l_lim_diagnostic(alpha, n, l_lim)?
        );
    }

    // apply to u = 1/(1 + x^2) on L = 2
    let l = 2.0;
    let grid = make_grid(n, l)?;
    let samples: Vec<Complex64> = grid
        .x_nodes
        .iter()
        .map(|x| Complex64::new(1.0 / (1.0 + x * x), 0.0))
        .collect();
    let coeffs = SpectralTransform::new(n)?.analyze(&samples, KRASNY_EPS)?;
    let kind = OperatorKind::RieszFeller { gamma: -0.3 };
    let scaled = base.scale_to_operator(kind, l)?;
    let a = scaled.apply(&coeffs)?;
    let b = base.apply_as(kind, l, &coeffs)?;
    let diff = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    println!("scaled matrix vs apply_as: {diff:.1e}");

    let path = std::env::temp_dir().join("rf_spectral_example.rfm");
    scaled.save(&path)?;
    let back = OperatorMatrix::load(&path)?;
    println!(
        "saved {} bytes, roundtrip identical: {}",
        scaled.serialized_len(),
        back == scaled
    );
    std::fs::remove_file(&path)?;
    Ok(())
}
