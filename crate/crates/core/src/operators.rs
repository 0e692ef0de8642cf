//! Applying an operator to a function on the real line: sampling on the
//! mapped grid, the coefficient transform, the matrix product, and the
//! auxiliary-function split for functions with different limits at +-inf.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{make_grid, SpectralGrid, SpectralTransform, KRASNY_EPS};
use crate::closedform::{ClosedFormFunction, OperatorKind};
use crate::error::{domain, Error, Result};
use crate::opmatrix::{MatrixBuilder, OperatorMatrix, DEFAULT_L_LIM};

/// A real function on the real line, optionally with known operator values.
pub trait LineFunction: Send + Sync {
    fn value(&self, x: f64) -> f64;

    /// Exact value of `kind` applied to the function at `x`, if known.
    fn exact_operator(&self, _kind: OperatorKind, _alpha: f64, _x: f64) -> Option<Result<f64>> {
        None
    }

    fn label(&self) -> String {
        "u".to_string()
    }
}

impl LineFunction for ClosedFormFunction {
    fn value(&self, x: f64) -> f64 {
        ClosedFormFunction::value(self, x)
    }

    fn exact_operator(&self, kind: OperatorKind, alpha: f64, x: f64) -> Option<Result<f64>> {
        Some(self.reference_operator(kind, alpha, x))
    }

    fn label(&self) -> String {
        self.code().to_string()
    }
}

/// A plain closure as a [`LineFunction`] without ground truth.
pub struct FnLine<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> LineFunction for FnLine<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// A function whose operator values are known in closed form.
pub trait AuxFunction: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn operator(&self, kind: OperatorKind, alpha: f64, x: f64) -> Result<f64>;
}

impl AuxFunction for ClosedFormFunction {
    fn value(&self, x: f64) -> f64 {
        ClosedFormFunction::value(self, x)
    }

    fn operator(&self, kind: OperatorKind, alpha: f64, x: f64) -> Result<f64> {
        self.reference_operator(kind, alpha, x)
    }
}

type OperatorFn = dyn Fn(OperatorKind, f64, f64) -> Result<f64> + Send + Sync;

/// User-supplied auxiliary function together with all its operator values.
pub struct CustomAux {
    pub value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub operator: Box<OperatorFn>,
}

impl AuxFunction for CustomAux {
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    fn operator(&self, kind: OperatorKind, alpha: f64, x: f64) -> Result<f64> {
        (self.operator)(kind, alpha, x)
    }
}

/// The split `u = w + (offset + scale * v)` with `w` having equal limits at +-inf.
#[derive(Clone)]
pub struct AuxDecomposition {
    pub aux: Arc<dyn AuxFunction>,
    pub scale: f64,
    pub offset: f64,
    pub description: String,
}

impl fmt::Debug for AuxDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AuxDecomposition")
            .field("scale", &self.scale)
            .field("offset", &self.offset)
            .field("description", &self.description)
            .finish()
    }
}

/// Where the limit check of [`AuxDecomposition::validate`] is made.
pub const AUX_CHECK_X: f64 = 1e8;
/// Allowed mismatch of the limits of `w`.
pub const AUX_CHECK_TOL: f64 = 1e-6;

impl AuxDecomposition {
    pub fn new(
        aux: Arc<dyn AuxFunction>,
        scale: f64,
        offset: f64,
        description: impl Into<String>,
    ) -> Self {
        AuxDecomposition {
            aux,
            scale,
            offset,
            description: description.into(),
        }
    }

    /// `erf = w + (2/pi) arctan`.
    pub fn erf_arctan() -> Self {
        Self::new(
            Arc::new(ClosedFormFunction::Arctan),
            2.0 / std::f64::consts::PI,
            0.0,
            "(2/pi) arctan(x)",
        )
    }

    /// Picks `offset + scale * arctan` matching the limits `(lo, hi)` of a function.
    pub fn arctan_for_limits(lo: f64, hi: f64) -> Self {
        let scale = (hi - lo) / std::f64::consts::PI;
        let offset = 0.5 * (hi + lo);
        Self::new(
            Arc::new(ClosedFormFunction::Arctan),
            scale,
            offset,
            format!("{offset} + {scale} arctan(x)"),
        )
    }

    /// The part carried by the closed form.
    pub fn aux_value(&self, x: f64) -> f64 {
        self.offset + self.scale * self.aux.value(x)
    }

    /// `w(x) = u(x) - aux_value(x)`.
    pub fn remainder(&self, u: &dyn LineFunction, x: f64) -> f64 {
        u.value(x) - self.aux_value(x)
    }

    /// Exact operator value of the auxiliary part; constants are annihilated.
    pub fn aux_operator(&self, kind: OperatorKind, alpha: f64, x: f64) -> Result<f64> {
        Ok(self.scale * self.aux.operator(kind, alpha, x)?)
    }

    /// Checks that the remainder has matching limits at `+-1e8`.
    pub fn validate(&self, u: &dyn LineFunction) -> Result<()> {
        let lo = self.remainder(u, -AUX_CHECK_X);
        let hi = self.remainder(u, AUX_CHECK_X);
        if !(lo.is_finite() && hi.is_finite()) || (hi - lo).abs() > AUX_CHECK_TOL {
            return domain(format!(
                "remainder after subtracting {} has limits {lo} and {hi}",
                self.description
            ));
        }
        Ok(())
    }
}

/// Nodal output of one operator application.
#[derive(Debug, Clone)]
pub struct ApplyReport {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub grid: SpectralGrid,
    pub approx: Vec<Complex64>,
    pub exact: Option<Vec<f64>>,
    pub linf_error: Option<f64>,
}

impl ApplyReport {
    /// Largest imaginary part of the approximation.
    pub fn max_imag(&self) -> f64 {
        self.approx.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Writes `x,approx_re,approx_im,exact_re,exact_im,abs_err`, one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,approx_re,approx_im,exact_re,exact_im,abs_err")?;
        for (j, (x, a)) in self.grid.x_nodes.iter().zip(&self.approx).enumerate() {
            match &self.exact {
                Some(e) => {
                    let err = (a - Complex64::new(e[j], 0.0)).norm();
                    writeln!(
                        w,
                        "{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{err:.16e}",
                        a.re, a.im, e[j], 0.0
                    )?;
                }
                None => writeln!(w, "{x:.16e},{:.16e},{:.16e},,,", a.re, a.im)?,
            }
        }
        Ok(())
    }
}

fn linf(approx: &[Complex64], exact: &[f64]) -> f64 {
    approx
        .iter()
        .zip(exact)
        .map(|(a, e)| (a - Complex64::new(*e, 0.0)).norm())
        .fold(0.0, f64::max)
}

/// Transform, Krasny filter and matrix product for `pi`-periodic samples.
pub fn apply_periodic(
    samples: &[Complex64],
    matrix: &OperatorMatrix,
    grid: &SpectralGrid,
) -> Result<Vec<Complex64>> {
    check_pairing(matrix, grid)?;
    let t = SpectralTransform::new(grid.n)?;
    let c = t.analyze(samples, KRASNY_EPS)?;
    matrix.apply(&c)
}

fn check_pairing(matrix: &OperatorMatrix, grid: &SpectralGrid) -> Result<()> {
    if matrix.n != grid.n {
        return domain(format!(
            "matrix has N = {} but grid has N = {}",
            matrix.n, grid.n
        ));
    }
    let l = if matrix.scaled { matrix.l_scale } else { 1.0 };
    if (l - grid.l_scale).abs() > 1e-15 * l {
        return Err(Error::State(format!(
            "matrix is scaled for L = {l} but grid has L = {}",
            grid.l_scale
        )));
    }
    Ok(())
}

/// A ready-to-use operator: grid, cached transform and scaled matrix.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    pub grid: SpectralGrid,
    pub matrix: OperatorMatrix,
    pub krasny_eps: f64,
    transform: SpectralTransform,
}

impl SpectralOperator {
    /// Builds the base matrix and scales it to `kind` on `L = l_scale`.
    pub fn new(
        kind: OperatorKind,
        alpha: f64,
        n: usize,
        l_scale: f64,
        l_lim: usize,
    ) -> Result<Self> {
        kind.validate(alpha)?;
        let base = MatrixBuilder::new(alpha, n).l_lim(l_lim).build()?;
        Self::from_matrix(base.scale_to_operator(kind, l_scale)?)
    }

    /// Same as [`SpectralOperator::new`] with the default `l_lim`.
    pub fn with_defaults(kind: OperatorKind, alpha: f64, n: usize, l_scale: f64) -> Result<Self> {
        Self::new(kind, alpha, n, l_scale, DEFAULT_L_LIM)
    }

    pub fn from_matrix(matrix: OperatorMatrix) -> Result<Self> {
        let l = if matrix.scaled { matrix.l_scale } else { 1.0 };
        let grid = make_grid(matrix.n, l)?;
        let transform = SpectralTransform::new(matrix.n)?;
        Ok(SpectralOperator {
            grid,
            matrix,
            krasny_eps: KRASNY_EPS,
            transform,
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.matrix.kind
    }

    pub fn alpha(&self) -> f64 {
        self.matrix.alpha
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    /// Operator values at the nodes from nodal samples of a periodic function.
    pub fn apply_samples(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = self.transform.analyze(samples, self.krasny_eps)?;
        self.matrix.apply(&c)
    }

    /// Real-sample convenience wrapper of [`SpectralOperator::apply_samples`].
    pub fn apply_real(&self, samples: &[f64]) -> Result<Vec<Complex64>> {
        let s: Vec<Complex64> = samples.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.apply_samples(&s)
    }

    /// Applies the operator to `u`, splitting off `decomp` when given, and
    /// fills in the error against the ground truth of `u` when it is known.
    pub fn apply_with_aux(
        &self,
        u: &dyn LineFunction,
        decomp: Option<&AuxDecomposition>,
    ) -> Result<ApplyReport> {
        let kind = self.kind();
        let alpha = self.alpha();
        let xs = &self.grid.x_nodes;
        let mut approx = match decomp {
            Some(d) => {
                d.validate(u)?;
                let w: Vec<f64> = xs.iter().map(|x| d.remainder(u, *x)).collect();
                self.apply_real(&w)?
            }
            None => self.apply_real(&xs.iter().map(|x| u.value(*x)).collect::<Vec<_>>())?,
        };
        if let Some(d) = decomp {
            for (a, x) in approx.iter_mut().zip(xs) {
                a.re += d.aux_operator(kind, alpha, *x)?;
            }
        }
        let exact = xs
            .iter()
            .map(|x| u.exact_operator(kind, alpha, *x))
            .collect::<Option<Result<Vec<f64>>>>()
            .transpose()?;
        let linf_error = exact.as_ref().map(|e| linf(&approx, e));
        Ok(ApplyReport {
            kind,
            alpha,
            grid: self.grid.clone(),
            approx,
            exact,
            linf_error,
        })
    }
}

/// L-infinity errors over a grid of `(L, N)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid {
    pub n_list: Vec<usize>,
    pub l_list: Vec<f64>,
    /// `errors[i][m]` is the error for `l_list[i]` and `n_list[m]`.
    pub errors: Vec<Vec<f64>>,
}

impl ErrorGrid {
    /// Smallest error for a given `N`, with the `L` achieving it.
    pub fn best_for_n(&self, n: usize) -> Option<(f64, f64)> {
        let m = self.n_list.iter().position(|v| *v == n)?;
        self.l_list
            .iter()
            .zip(&self.errors)
            .map(|(l, row)| (*l, row[m]))
            .filter(|(_, e)| e.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// CSV with one row per `L` and one column per `N`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "L")?;
        for n in &self.n_list {
            write!(w, ",N={n}")?;
        }
        writeln!(w)?;
        for (l, row) in self.l_list.iter().zip(&self.errors) {
            write!(w, "{l:.16e}")?;
            for e in row {
                write!(w, ",{e:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Inclusive arithmetic range `start, start + step, ..., <= stop`, computed
/// as `start + i * step` to avoid drift.
pub fn l_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(start > 0.0) || stop < start {
        return domain(format!("invalid L range {start}:{stop}:{step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// L-infinity error of `kind` applied to `u` for every `(N, L)` pair. The
/// base matrix is built once per `N` and reused for every `L`.
pub fn sweep_errors(
    u: &dyn LineFunction,
    decomp: Option<&AuxDecomposition>,
    kind: OperatorKind,
    alpha: f64,
    n_list: &[usize],
    l_list: &[f64],
    l_lim: usize,
) -> Result<ErrorGrid> {
    kind.validate(alpha)?;
    if let Some(d) = decomp {
        d.validate(u)?;
    }
    if l_list.is_empty() || n_list.is_empty() {
        return domain("sweep needs at least one N and one L");
    }
    let mut columns = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let base = MatrixBuilder::new(alpha, n).l_lim(l_lim).build()?;
        let transform = SpectralTransform::new(n)?;
        let col = l_list
            .par_iter()
            .map(|&l| -> Result<f64> {
                let grid = make_grid(n, l)?;
                let xs = &grid.x_nodes;
                let w: Vec<Complex64> = xs
                    .iter()
                    .map(|x| {
                        let v = match decomp {
                            Some(d) => d.remainder(u, *x),
                            None => u.value(*x),
                        };
                        Complex64::new(v, 0.0)
                    })
                    .collect();
                let c = transform.analyze(&w, KRASNY_EPS)?;
                let approx = base.apply_as(kind, l, &c)?;
                let mut err: f64 = 0.0;
                for (a, x) in approx.iter().zip(xs) {
                    let aux = match decomp {
                        Some(d) => d.aux_operator(kind, alpha, *x)?,
                        None => 0.0,
                    };
                    let exact = u.exact_operator(kind, alpha, *x).ok_or_else(|| {
                        Error::State(format!("no ground truth registered for {}", u.label()))
                    })??;
                    let e = (a + Complex64::new(aux - exact, 0.0)).norm();
                    err = if e.is_nan() { f64::NAN } else { err.max(e) };
                }
                Ok(err)
            })
            .collect::<Result<Vec<f64>>>()?;
        columns.push(col);
    }
    let errors = (0..l_list.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(ErrorGrid {
        n_list: n_list.to_vec(),
        l_list: l_list.to_vec(),
        errors,
    })
}
