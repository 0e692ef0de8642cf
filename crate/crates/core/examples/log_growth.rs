//! Operators of order alpha in (1, 2) applied to ln(1 + x^2).
//!
//! The function is unbounded, so its image under the cot map has a
//! logarithmic singularity and the spectral error stalls around 1e-3 to
//! 1e-4 instead of reaching round-off. No auxiliary split is used.
//!
//!     cargo run --release --example log_growth

use rf_spectral::closedform::{ClosedFormFunction, OperatorKind};
use rf_spectral::operators::SpectralOperator;
use rf_spectral::opmatrix::MatrixBuilder;

fn main() -> rf_spectral::Result<()> {
    let (alpha, gamma, l) = (1.12, 0.83, 30.0);
    let f = ClosedFormFunction::Log1pSq;
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "N", "dxr", "dxl", "rf", "fl"
    );
    for n in [64, 128, 256, 512] {
        let base = MatrixBuilder::new(alpha, n).l_lim(100).build()?;
        let mut row = format!("{n:>6}");
        for kind in [
            OperatorKind::DxWeylRight,
            OperatorKind::DxWeylLeftNeg,
            OperatorKind::RieszFeller { gamma },
            OperatorKind::FracLaplacian,
        ] {
            let op = SpectralOperator::from_matrix(base.scale_to_operator(kind, l)?)?;
            let err = op.apply_with_aux(&f, None)?.linf_error.unwrap_or(f64::NAN);
            row.push_str(&format!(" {err:>12.4e}"));
        }
        println!("{row}");
    }
    Ok(())
}
