//! The operational matrix mapping Fourier coefficients to nodal values of the
//! fractional Laplacian, its phase/scale conversion into the other operators,
//! and a little-endian binary file format.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::basis::{mode_range, CoeffVector, ModeIndex};
use crate::closedform::OperatorKind;
use crate::error::{domain, Error, Result};
use crate::specfun::{c_alpha, ratio_table, RatioKind};

/// Default truncation of the aliasing sum.
pub const DEFAULT_L_LIM: usize = 100;
/// Default cap on `N * N * (2 l_lim + 1)`.
pub const DEFAULT_MAX_WORK: f64 = 6.0e10;
/// Default cap on the bytes held by the matrix entries.
pub const DEFAULT_MAX_BYTES: usize = 3 << 30;

const MAGIC: &[u8; 4] = b"RFM1";
const FORMAT_VERSION: u32 = 1;
const SCALED_BIT: u32 = 1 << 8;
/// Header size in bytes: magic, version, n, kind tag, then alpha, gamma, L and l_lim.
pub const HEADER_BYTES: usize = 16 + 28;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense `N x N` operator matrix in row-major order. Rows are nodes `j`,
/// columns are coefficient storage slots.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub l_scale: f64,
    pub l_lim: usize,
    pub n: usize,
    /// Whether the `1/L^alpha` scaling and the phase multipliers were applied.
    pub scaled: bool,
    pub entries: Vec<Complex64>,
}

/// How the base matrix is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fill {
    /// Positive modes and the first half of the rows; the rest by conjugation.
    #[default]
    Symmetric,
    /// Every column from its own series and every row from the transform.
    Direct,
}

/// Configures and builds the base matrix (fractional Laplacian, `L = 1`).
#[derive(Debug, Clone)]
pub struct MatrixBuilder {
    alpha: f64,
    n: usize,
    l_lim: usize,
    fill: Fill,
    max_work: f64,
    max_bytes: usize,
}

impl MatrixBuilder {
    pub fn new(alpha: f64, n: usize) -> Self {
        MatrixBuilder {
            alpha,
            n,
            l_lim: DEFAULT_L_LIM,
            fill: Fill::Symmetric,
            max_work: DEFAULT_MAX_WORK,
            max_bytes: DEFAULT_MAX_BYTES,
        }
    }

    pub fn l_lim(mut self, l_lim: usize) -> Self {
        self.l_lim = l_lim;
        self
    }

    pub fn fill(mut self, fill: Fill) -> Self {
        self.fill = fill;
        self
    }

    pub fn max_work(mut self, max_work: f64) -> Self {
        self.max_work = max_work;
        self
    }

    pub fn max_bytes(mut self, max_bytes: usize) -> Self {
        self.max_bytes = max_bytes;
        self
    }

    /// Work units `N * N * (2 l_lim + 1)` this build would spend.
    pub fn work_units(&self) -> f64 {
        let n = self.n as f64;
        n * n * (2 * self.l_lim + 1) as f64
    }

    pub fn build(&self) -> Result<OperatorMatrix> {
        let (alpha, n) = (self.alpha, self.n);
        if !(alpha > 0.0 && alpha < 2.0) {
            return domain(format!("order alpha = {alpha} must lie in (0, 2)"));
        }
        if n < 2 {
            return domain(format!("matrix needs N >= 2, got {n}"));
        }
        if alpha != 1.0 && self.l_lim < 1 {
            return domain("l_lim must be at least 1");
        }
        let bytes = n
            .checked_mul(n)
            .and_then(|m| m.checked_mul(std::mem::size_of::<Complex64>()))
            .ok_or_else(|| Error::Budget(format!("N = {n} overflows the address space")))?;
        if bytes > self.max_bytes {
            return Err(Error::Budget(format!(
                "N = {n} needs {bytes} bytes of matrix storage, limit is {}",
                self.max_bytes
            )));
        }
        if alpha != 1.0 && self.work_units() > self.max_work {
            return Err(Error::Budget(format!(
                "N = {n}, l_lim = {} needs {:.3e} work units, limit is {:.3e}",
                self.l_lim,
                self.work_units(),
                self.max_work
            )));
        }
        let columns = if alpha == 1.0 {
            alpha_one_columns(n, self.fill)
        } else {
            series_columns(alpha, n, self.l_lim, self.fill)?
        };
        let mut entries = vec![ZERO; n * n];
        for (slot, col) in columns {
            for (j, v) in col.into_iter().enumerate() {
                entries[j * n + slot] = v;
            }
        }
        if self.fill == Fill::Symmetric {
            mirror_fill(&mut entries, n);
        }
        Ok(OperatorMatrix {
            kind: OperatorKind::FracLaplacian,
            alpha,
            l_scale: 1.0,
            l_lim: self.l_lim,
            n,
            scaled: false,
            entries,
        })
    }
}

/// Base matrix with the default symmetric fill and budgets.
pub fn build_base_matrix(alpha: f64, n: usize, l_lim: usize) -> Result<OperatorMatrix> {
    MatrixBuilder::new(alpha, n).l_lim(l_lim).build()
}

fn node(j: usize, n: usize) -> f64 {
    PI * (2 * j + 1) as f64 / (2 * n) as f64
}

/// Modes whose columns are computed; the others are zero or filled by conjugation.
fn computed_modes(n: usize, fill: Fill) -> Vec<i64> {
    let (lo, hi) = mode_range(n);
    let mut ks: Vec<i64> = (1..=hi).collect();
    if fill == Fill::Direct {
        // -N/2 stays zero for even N
        let start = if n.is_multiple_of(2) { lo + 1 } else { lo };
        ks.extend(start..=-1);
    }
    ks
}

fn alpha_one_columns(n: usize, fill: Fill) -> Vec<(usize, Vec<Complex64>)> {
    computed_modes(n, fill)
        .into_iter()
        .map(|k| {
            let col = (0..n)
                .map(|j| {
                    let s = node(j, n);
                    let sin_s = s.sin();
                    Complex64::cis(2.0 * k as f64 * s)
                        * (2.0 * k.unsigned_abs() as f64 * sin_s * sin_s)
                })
                .collect();
            (ModeIndex(k).slot(n), col)
        })
        .collect()
}

fn series_columns(
    alpha: f64,
    n: usize,
    l_lim: usize,
    fill: Fill,
) -> Result<Vec<(usize, Vec<Complex64>)>> {
    let half_down = n / 2;
    let v1 = ratio_table(alpha, RatioKind::V1, l_lim * n + half_down)?;
    let v2 = ratio_table(alpha, RatioKind::V2, l_lim * n + n - 1 + half_down)?;
    let prefactor = c_alpha(alpha)? / (2.0 * (alpha * FRAC_PI_2).tan());
    let row_scale: Vec<f64> = (0..n)
        .map(|j| prefactor * node(j, n).sin().powf(alpha - 1.0))
        .collect();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let (lo, hi) = mode_range(n);
    let nn = n as i64;
    let lim = l_lim as i64;

    let ks = computed_modes(n, fill);
    let columns = ks
        .par_iter()
        .map(|&k| {
            let kf = k as f64;
            let quad = (1.0 - alpha) * kf * kf;
            let mut buf = vec![ZERO; n];
            // any complete residue set works for l2; negative modes use the
            // mirrored one so their truncation matches the positive modes
            let (a, b) = if k > 0 { (lo, hi) } else { (-hi, -lo) };
            for l2 in a..=b {
                let mut acc = 0.0;
                for l1 in -lim..=lim {
                    let l = l1 * nn + l2;
                    let term = v1.get(l.unsigned_abs() as usize)
                        * (quad - 2.0 * kf * l as f64)
                        * v2.get((k - l).unsigned_abs() as usize);
                    if l1 % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                let slot = l2.rem_euclid(nn) as usize;
                buf[slot] = Complex64::cis(PI * l2 as f64 / n as f64) * acc;
            }
            ifft.process(&mut buf);
            for (v, r) in buf.iter_mut().zip(&row_scale) {
                *v *= *r;
            }
            (ModeIndex(k).slot(n), buf)
        })
        .collect();
    Ok(columns)
}

/// Negative-mode columns by conjugation, then the lower rows by conjugating the upper ones.
fn mirror_fill(entries: &mut [Complex64], n: usize) {
    let (_, hi) = mode_range(n);
    for k in 1..=hi {
        let p = ModeIndex(k).slot(n);
        let m = ModeIndex(-k).slot(n);
        for j in 0..n {
            entries[j * n + m] = entries[j * n + p].conj();
        }
    }
    for j in n.div_ceil(2)..n {
        let src = n - 1 - j;
        for c in 0..n {
            entries[j * n + c] = entries[src * n + c].conj();
        }
    }
    if n % 2 == 1 {
        // the middle node is s = pi/2, where every entry is real
        let mid = n / 2;
        for c in 0..n {
            entries[mid * n + c].im = 0.0;
        }
    }
}

impl OperatorMatrix {
    #[inline]
    pub fn get(&self, row: usize, slot: usize) -> Complex64 {
        self.entries[row * self.n + slot]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn column(&self, slot: usize) -> Vec<Complex64> {
        (0..self.n).map(|j| self.get(j, slot)).collect()
    }

    pub fn gamma(&self) -> f64 {
        self.kind.gamma()
    }

    /// Converts the base matrix into `kind` on the map scale `l_scale`.
    pub fn scale_to_operator(&self, kind: OperatorKind, l_scale: f64) -> Result<OperatorMatrix> {
        if self.scaled || self.kind != OperatorKind::FracLaplacian {
            return Err(Error::State(format!(
                "matrix for {} at L = {} is already scaled",
                self.kind, self.l_scale
            )));
        }
        if !(l_scale > 0.0 && l_scale.is_finite()) {
            return domain(format!("map scale L must be positive, got {l_scale}"));
        }
        kind.validate(self.alpha)?;
        let n = self.n;
        let factors = column_factors(kind, self.alpha, l_scale, n);
        let mut entries = self.entries.clone();
        for row in entries.chunks_mut(n) {
            for (v, f) in row.iter_mut().zip(&factors) {
                *v *= *f;
            }
        }
        Ok(OperatorMatrix {
            kind,
            alpha: self.alpha,
            l_scale,
            l_lim: self.l_lim,
            n,
            scaled: true,
            entries,
        })
    }

    /// Matrix-vector product with a coefficient vector.
    pub fn apply(&self, coeffs: &CoeffVector) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.n {
            return domain(format!(
                "matrix is {0}x{0} but got {1} coefficients",
                self.n,
                coeffs.len()
            ));
        }
        Ok(self.matvec(&coeffs.coeffs))
    }

    /// Applies the base matrix as if it had been scaled to `kind` and `l_scale`,
    /// by moving the column multipliers onto the coefficients.
    pub fn apply_as(
        &self,
        kind: OperatorKind,
        l_scale: f64,
        coeffs: &CoeffVector,
    ) -> Result<Vec<Complex64>> {
        if self.scaled {
            return Err(Error::State(
                "apply_as needs an unscaled base matrix".into(),
            ));
        }
        if coeffs.len() != self.n {
            return domain(format!(
                "matrix is {0}x{0} but got {1} coefficients",
                self.n,
                coeffs.len()
            ));
        }
        kind.validate(self.alpha)?;
        let factors = column_factors(kind, self.alpha, l_scale, self.n);
        let v: Vec<Complex64> = coeffs
            .coeffs
            .iter()
            .zip(&factors)
            .map(|(c, f)| c * f)
            .collect();
        Ok(self.matvec(&v))
    }

    fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let nz: Vec<(usize, Complex64)> = v
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, c)| *c != ZERO)
            .collect();
        let row_dot = |row: &[Complex64]| nz.iter().fold(ZERO, |acc, (i, c)| acc + row[*i] * c);
        if n >= 256 {
            self.entries.par_chunks(n).map(row_dot).collect()
        } else {
            self.entries.chunks(n).map(row_dot).collect()
        }
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        if self.n != other.n {
            return domain("matrices differ in size");
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Bytes taken by [`OperatorMatrix::write_to`].
    pub fn serialized_len(&self) -> usize {
        HEADER_BYTES + self.n * self.n * 16
    }

    pub fn write_to<W: Write>(&self, mut sink: W) -> Result<()> {
        let n = u32::try_from(self.n).map_err(|_| Error::Format("N too large".into()))?;
        let l_lim =
            u32::try_from(self.l_lim).map_err(|_| Error::Format("l_lim too large".into()))?;
        let mut tag = u32::from(self.kind.tag());
        if self.scaled {
            tag |= SCALED_BIT;
        }
        let mut header = Vec::with_capacity(HEADER_BYTES);
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        header.extend_from_slice(&n.to_le_bytes());
        header.extend_from_slice(&tag.to_le_bytes());
        header.extend_from_slice(&self.alpha.to_le_bytes());
        header.extend_from_slice(&self.gamma().to_le_bytes());
        header.extend_from_slice(&self.l_scale.to_le_bytes());
        header.extend_from_slice(&l_lim.to_le_bytes());
        sink.write_all(&header)?;
        let mut row_buf = Vec::with_capacity(self.n * 16);
        for row in self.entries.chunks(self.n) {
            row_buf.clear();
            for v in row {
                row_buf.extend_from_slice(&v.re.to_le_bytes());
                row_buf.extend_from_slice(&v.im.to_le_bytes());
            }
            sink.write_all(&row_buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut source: R) -> Result<Self> {
        let mut header = [0u8; HEADER_BYTES];
        read_exact(&mut source, &mut header, "header")?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format(
                "bad magic, not an operator matrix file".into(),
            ));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}"
            )));
        }
        let n = u32_at(8) as usize;
        let tag = u32_at(12);
        let (alpha, gamma, l_scale) = (f64_at(16), f64_at(24), f64_at(32));
        let l_lim = u32_at(40) as usize;
        if n < 2 {
            return Err(Error::Format(format!("invalid size N = {n}")));
        }
        if tag & !(SCALED_BIT | 0xff) != 0 {
            return Err(Error::Format(format!("invalid kind tag {tag:#x}")));
        }
        let kind = OperatorKind::from_tag((tag & 0xff) as u8, gamma)?;
        let count = n
            .checked_mul(n)
            .ok_or_else(|| Error::Format("size overflow".into()))?;
        let mut entries = Vec::with_capacity(count);
        let mut row_buf = vec![0u8; n * 16];
        for _ in 0..n {
            read_exact(&mut source, &mut row_buf, "payload")?;
            for pair in row_buf.chunks_exact(16) {
                let re = f64::from_le_bytes(pair[0..8].try_into().unwrap());
                let im = f64::from_le_bytes(pair[8..16].try_into().unwrap());
                entries.push(Complex64::new(re, im));
            }
        }
        Ok(OperatorMatrix {
            kind,
            alpha,
            l_scale,
            l_lim,
            n,
            scaled: tag & SCALED_BIT != 0,
            entries,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn read_exact<R: Read>(source: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    source.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}

/// Per-slot multipliers: the phase for the mode sign divided by `L^alpha`.
fn column_factors(kind: OperatorKind, alpha: f64, l_scale: f64, n: usize) -> Vec<Complex64> {
    let rule = kind.phase_rule(alpha);
    let inv = l_scale.powf(-alpha);
    (0..n)
        .map(|slot| {
            let k = ModeIndex::from_slot(slot, n).0;
            match kind {
                // no phase; keeps the zero columns zero as well
                OperatorKind::FracLaplacian => Complex64::new(inv, 0.0),
                _ if k == 0 => Complex64::new(inv, 0.0),
                _ => rule.factor(k) * inv,
            }
        })
        .collect()
}

/// L-infinity distance between the base matrices at `l_lim` and `2 l_lim`.
pub fn l_lim_diagnostic(alpha: f64, n: usize, l_lim: usize) -> Result<f64> {
    let a = build_base_matrix(alpha, n, l_lim)?;
    let b = build_base_matrix(alpha, n, 2 * l_lim)?;
    a.max_abs_diff(&b)
}
