//! Error of the Riesz-Feller operator on erf over a grid of map scales L and
//! sizes N. The base matrix is built once per N and reused for every L.
//! Writes `l_sweep.csv` (rows L, columns N) to the current directory.
//!
//!     cargo run --release --example l_sweep

use std::fs::File;
use std::io::BufWriter;

use rf_spectral::closedform::{ClosedFormFunction, OperatorKind};
use rf_spectral::operators::{l_range, sweep_errors, AuxDecomposition};

fn main() -> rf_spectral::Result<()> {
    let ns = [8, 16, 32, 64, 128, 256, 512, 1024];
    let ls = l_range(0.5, 5.0, 0.5)?;
    let grid = sweep_errors(
        &ClosedFormFunction::Erf,
        Some(&AuxDecomposition::erf_arctan()),
        OperatorKind::RieszFeller { gamma: 0.58 },
        1.37,
        &ns,
        &ls,
        100,
    )?;

    print!("{:>5}", "L");
    for n in ns {
        print!(" {n:>9}");
    }
    println!();
    for (l, row) in grid.l_list.iter().zip(&grid.errors) {
        print!("{l:>5.1}");
        for e in row {
            print!(" {e:>9.2e}");
        }
        println!();
    }
    for n in ns {
        if let Some((l, e)) = grid.best_for_n(n) {
            println!("N = {n:>4}: best L = {l}, error {e:.2e}");
        }
    }
    grid.write_csv(BufWriter::new(File::create("l_sweep.csv")?))?;
    Ok(())
}
