//! Reference values by adaptive quadrature of the singular integrals that
//! define each operator. Slow, independent of the spectral path, and meant
//! for tests and spot checks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::basis::lambda_k;
use crate::closedform::{ClosedFormFunction, OperatorKind};
use crate::error::{domain, Error, Result};
use crate::specfun::{c_alpha, gamma, rf_coeffs};

/// A function with its first two derivatives.
pub trait Differentiable: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
}

impl Differentiable for ClosedFormFunction {
    fn value(&self, x: f64) -> f64 {
        ClosedFormFunction::value(self, x)
    }
    fn d1(&self, x: f64) -> f64 {
        ClosedFormFunction::d1(self, x)
    }
    fn d2(&self, x: f64) -> f64 {
        ClosedFormFunction::d2(self, x)
    }
}

/// Real or imaginary part of the Higgins function `lambda_k(x)` on scale `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HigginsPart {
    pub k: i64,
    pub l_scale: f64,
    pub imag: bool,
}

impl HigginsPart {
    pub fn re(k: i64, l_scale: f64) -> Self {
        HigginsPart {
            k,
            l_scale,
            imag: false,
        }
    }

    pub fn im(k: i64, l_scale: f64) -> Self {
        HigginsPart {
            k,
            l_scale,
            imag: true,
        }
    }

    fn pick(&self, z: num_complex::Complex64) -> f64 {
        if self.imag {
            z.im
        } else {
            z.re
        }
    }
}

impl Differentiable for HigginsPart {
    fn value(&self, x: f64) -> f64 {
        self.pick(lambda_k(x, self.k, self.l_scale))
    }

    // d/dx atan2(L, x) = -L / (x^2 + L^2)
    fn d1(&self, x: f64) -> f64 {
        let l = self.l_scale;
        let r = x * x + l * l;
        let lam = lambda_k(x, self.k, l);
        let c = num_complex::Complex64::new(0.0, -2.0 * self.k as f64 * l / r);
        self.pick(c * lam)
    }

    fn d2(&self, x: f64) -> f64 {
        let l = self.l_scale;
        let r = x * x + l * l;
        let k = self.k as f64;
        let lam = lambda_k(x, self.k, l);
        let i = num_complex::Complex64::i();
        let dlam = -i * (2.0 * k * l / r) * lam;
        let d2 = -i * (2.0 * k * l) * (dlam / r - lam * (2.0 * x / (r * r)));
        self.pick(d2)
    }
}

/// Tolerances and splitting for [`quad_operator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// `[0, split]` carries the singular weight, `[split, tail]` the rest.
    pub split_point: f64,
    /// Upper truncation. `None` maps `[split, inf)` onto `(0, 1]` instead.
    pub tail_cut: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            split_point: 1.0,
            tail_cut: None,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.split_point > 0.0) {
            return domain("quadrature tolerances and split point must be positive");
        }
        if let Some(t) = self.tail_cut {
            if !(t > self.split_point) {
                return domain(format!("tail cut {t} must exceed the split point"));
            }
        }
        Ok(())
    }

    /// Truncation `T = (20 sup|u| / (alpha abs_tol))^(1/alpha)`, which bounds
    /// the dropped part of a difference-form integral by `abs_tol / 10`.
    pub fn tail_cut_for(sup_u: f64, alpha: f64, abs_tol: f64) -> f64 {
        (20.0 * sup_u / (alpha * abs_tol)).powf(1.0 / alpha)
    }
}

/// Result of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod 15-point estimate and its difference from the embedded Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration on `[a, b]`: the panel with
/// the largest error estimate is bisected until the total error satisfies
/// `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    integrate_panels(f, &[a, b], abs_tol, rel_tol, max_subdivisions)
}

/// [`integrate`] starting from the panels between consecutive `breaks`.
/// Seeding panels keeps narrow features from hiding between the nodes of
/// a single wide panel.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    let mut evals = 0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (v, e) = gk15(&f, a, b);
        total += v;
        err += e;
        evals += 15;
        heap.push(Panel {
            a,
            b,
            value: v,
            error: e,
        });
    }
    if heap.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut splits = 0;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        if splits >= max_subdivisions {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // The panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        evals += 30;
        splits += 1;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
    // Resum to shed the drift of the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value,
        error,
        evaluations: evals,
    })
}

/// `int_0^inf g(z) z^(-q) dz` for `q < 1`.
///
/// The head `[0, split]` uses `z = t^(1/(1-q))`, which absorbs the weight.
/// The tail uses `z = split t^(-1/q_t)` with `q_t = max(q, 1/2)`, turning
/// `[split, inf)` into `(0, 1]`; the integrand must decay at least like
/// `z^(q - 1 - q_t)`.
fn weighted_half_line<G: Fn(f64) -> f64>(
    g: G,
    q: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let a = cfg.split_point;
    let (abs_tol, rel) = (0.5 * cfg.abs_tol, cfg.rel_tol);
    let head = if q == 0.0 {
        integrate(&g, 0.0, a, abs_tol, rel, cfg.max_subdivisions)?
    } else {
        let e = 1.0 / (1.0 - q);
        let r = integrate(
            |t: f64| g(t.powf(e)),
            0.0,
            a.powf(1.0 - q),
            abs_tol * (1.0 - q),
            rel,
            cfg.max_subdivisions,
        )?;
        QuadResult {
            value: r.value * e,
            error: r.error * e,
            ..r
        }
    };
    let tail = match cfg.tail_cut {
        Some(t) => {
            // z = e^y with unit panels in y
            let (y0, y1) = (a.ln(), t.ln());
            let n = (y1 - y0).ceil().max(1.0) as usize;
            let breaks: Vec<f64> = (0..=n)
                .map(|i| y0 + (y1 - y0) * i as f64 / n as f64)
                .collect();
            integrate_panels(
                |y: f64| {
                    let z = y.exp();
                    g(z) * z.powf(1.0 - q)
                },
                &breaks,
                abs_tol,
                rel,
                cfg.max_subdivisions,
            )?
        }
        None => {
            let p = q.max(0.5);
            let scale = a.powf(-p) / p;
            let mut breaks: Vec<f64> = (0..12).map(|i| 0.5f64.powi(12 - i)).collect();
            breaks.insert(0, 0.0);
            breaks.push(1.0);
            let r = integrate_panels(
                |t: f64| {
                    let z = a * t.powf(-1.0 / p);
                    let v = g(z) * z.powf(1.0 + p - q);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                },
                &breaks,
                abs_tol / scale,
                rel,
                cfg.max_subdivisions,
            )?;
            QuadResult {
                value: r.value * scale,
                error: r.error * scale,
                ..r
            }
        }
    };
    Ok(QuadResult {
        value: head.value + tail.value,
        error: head.error + tail.error,
        evaluations: head.evaluations + tail.evaluations,
    })
}

/// Below this `z` the difference quotients switch to a mean-value form to
/// avoid cancellation.
const DIFF_SWITCH: f64 = 1e-3;

/// `(u(x + s z) - u(x)) / z` for `s = +-1`.
fn first_quotient(u: &dyn Differentiable, x: f64, s: f64, z: f64) -> f64 {
    if z < DIFF_SWITCH {
        s * u.d1(x + 0.5 * s * z)
    } else {
        (u.value(x + s * z) - u.value(x)) / z
    }
}

/// `(u(x + s z) - u(x) - s z u'(x)) / z^2` for `s = +-1`.
fn second_quotient(u: &dyn Differentiable, x: f64, s: f64, z: f64) -> f64 {
    if z < DIFF_SWITCH {
        0.5 * u.d2(x + s * z / 3.0)
    } else {
        (u.value(x + s * z) - u.value(x) - s * z * u.d1(x)) / (z * z)
    }
}

fn need_range(kind: OperatorKind, alpha: f64, lo: f64, hi: f64) -> Result<()> {
    if !(alpha > lo && alpha < hi) {
        return domain(format!(
            "{kind} quadrature form needs alpha in ({lo}, {hi}), got {alpha}"
        ));
    }
    Ok(())
}

/// Which side a Weyl-Marchaud difference form looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `D^alpha`, integrating `u(x - z) - u(x)`.
    Right,
    /// Minus the left derivative, integrating `u(x + z) - u(x)`.
    LeftNeg,
}

/// Weyl-Marchaud derivative of order `alpha` in `(0, 1)` through the
/// difference quotient `(u(x -+ z) - u(x)) / z^(1+alpha)`, with no derivative
/// of `u` away from `z = 0`.
pub fn weyl_difference(
    u: &dyn Differentiable,
    alpha: f64,
    x: f64,
    side: Side,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.check()?;
    need_range(OperatorKind::WeylRight, alpha, 0.0, 1.0)?;
    let s = match side {
        Side::Right => -1.0,
        Side::LeftNeg => 1.0,
    };
    let r = weighted_half_line(|z| first_quotient(u, x, s, z), alpha, cfg)?;
    let g = gamma(-alpha)?;
    Ok(match side {
        Side::Right => r.value / g,
        Side::LeftNeg => -r.value / g,
    })
}

/// `d/dx` of the order `alpha - 1` Weyl-Marchaud derivative, `alpha` in
/// `(1, 2)`, through `(u(x -+ z) - u(x) +- u'(x) z) / z^(1+alpha)`.
pub fn dx_weyl_difference(
    u: &dyn Differentiable,
    alpha: f64,
    x: f64,
    side: Side,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.check()?;
    need_range(OperatorKind::DxWeylRight, alpha, 1.0, 2.0)?;
    let s = match side {
        Side::Right => -1.0,
        Side::LeftNeg => 1.0,
    };
    let r = weighted_half_line(|z| second_quotient(u, x, s, z), alpha - 1.0, cfg)?;
    // 1 / Gamma(-1 - beta) with beta = alpha - 1
    let g = gamma(-alpha)?;
    Ok(match side {
        Side::Right => r.value / g,
        Side::LeftNeg => r.value / g,
    })
}

/// Value of `kind` applied to `u` at `x` by quadrature of its integral form.
///
/// Weyl-type kinds and the fractional Laplacian use the derivative forms;
/// Riesz-Feller uses the difference forms with `c1` and `c2`, and at
/// `alpha = 1` the combination of the half Laplacian and `u'`.
pub fn quad_operator(
    kind: OperatorKind,
    alpha: f64,
    u: &dyn Differentiable,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.check()?;
    kind.validate(alpha)?;
    match kind {
        OperatorKind::WeylRight => {
            need_range(kind, alpha, 0.0, 1.0)?;
            let r = weighted_half_line(|z| u.d1(x - z), alpha, cfg)?;
            Ok(r.value / gamma(1.0 - alpha)?)
        }
        OperatorKind::WeylLeftNeg => {
            need_range(kind, alpha, 0.0, 1.0)?;
            let r = weighted_half_line(|z| u.d1(x + z), alpha, cfg)?;
            Ok(r.value / gamma(1.0 - alpha)?)
        }
        OperatorKind::DxWeylRight => {
            need_range(kind, alpha, 1.0, 2.0)?;
            let r = weighted_half_line(|z| u.d2(x - z), alpha - 1.0, cfg)?;
            Ok(r.value / gamma(2.0 - alpha)?)
        }
        OperatorKind::DxWeylLeftNeg => {
            need_range(kind, alpha, 1.0, 2.0)?;
            let r = weighted_half_line(|z| u.d2(x + z), alpha - 1.0, cfg)?;
            Ok(r.value / gamma(2.0 - alpha)?)
        }
        OperatorKind::FracLaplacian => frac_laplacian(u, alpha, x, cfg),
        OperatorKind::RieszFeller { gamma: g } => {
            if alpha == 1.0 {
                let (s, c) = (g * std::f64::consts::FRAC_PI_2).sin_cos();
                return Ok(-c * frac_laplacian(u, 1.0, x, cfg)? + s * u.d1(x));
            }
            let co = rf_coeffs(alpha, g)?;
            let r = if alpha < 1.0 {
                weighted_half_line(
                    |z| {
                        co.c1 * first_quotient(u, x, -1.0, z) + co.c2 * first_quotient(u, x, 1.0, z)
                    },
                    alpha,
                    cfg,
                )?
            } else {
                weighted_half_line(
                    |z| {
                        co.c1 * second_quotient(u, x, -1.0, z)
                            + co.c2 * second_quotient(u, x, 1.0, z)
                    },
                    alpha - 1.0,
                    cfg,
                )?
            };
            Ok(r.value)
        }
    }
}

fn frac_laplacian(
    u: &dyn Differentiable,
    alpha: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if alpha == 1.0 {
        let r = weighted_half_line(
            |z| {
                if z < DIFF_SWITCH {
                    -2.0 * u.d2(x)
                } else {
                    (u.d1(x - z) - u.d1(x + z)) / z
                }
            },
            0.0,
            cfg,
        )?;
        return Ok(r.value / std::f64::consts::PI);
    }
    let ca = c_alpha(alpha)?;
    if alpha < 1.0 {
        let r = weighted_half_line(|z| u.d1(x - z) - u.d1(x + z), alpha, cfg)?;
        Ok(ca / alpha * r.value)
    } else {
        let r = weighted_half_line(|z| u.d2(x - z) + u.d2(x + z), alpha - 1.0, cfg)?;
        Ok(ca / (alpha * (1.0 - alpha)) * r.value)
    }
}
