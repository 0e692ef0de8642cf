//! Real and complex special functions used by the operator formulas.
//!
//! Everything here is pure. Sums are accumulated in ascending index order so
//! repeated runs are bit-identical.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(pi * x)` with exact argument reduction.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r.abs() == 0.5 {
        return r.signum();
    }
    (PI * r).sin()
}

fn lanczos_sum(xm1: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (xm1 + i as f64);
    }
    acc
}

/// Gamma function without the pole check. Returns a non-finite value at poles.
pub(crate) fn gamma_raw(x: f64) -> f64 {
    if x < 0.5 {
        PI / (sin_pi(x) * gamma_raw(1.0 - x))
    } else {
        if x > 171.7 {
            return f64::INFINITY;
        }
        if x == x.floor() && x <= 30.0 {
            return (2..x as u32).fold(1.0, |acc, k| acc * f64::from(k));
        }
        let xm1 = x - 1.0;
        let t = xm1 + LANCZOS_G + 0.5;
        // split the power to avoid premature overflow near the top of the range
        let half = t.powf(0.5 * (xm1 + 0.5));
        SQRT_2PI * half * (half * (-t).exp()) * lanczos_sum(xm1)
    }
}

/// Gamma function on the real line.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("gamma of non-finite argument {x}"));
    }
    if is_nonpositive_integer(x) {
        return domain(format!("gamma has a pole at {x}"));
    }
    Ok(gamma_raw(x))
}

/// `1 / Gamma(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma_raw(x)
    }
}

/// `log|Gamma(x)|` together with the sign of `Gamma(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogGamma {
    pub log_abs: f64,
    pub sign: i8,
}

impl SignedLogGamma {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }
}

fn ln_gamma_positive(x: f64) -> f64 {
    // x >= 0.5
    if x < 15.0 {
        return gamma_raw(x).ln();
    }
    // Stirling series; x >= 15 keeps the truncation below 1e-17
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// Signed logarithm of the gamma function.
pub fn ln_gamma_signed(x: f64) -> Result<SignedLogGamma> {
    if !x.is_finite() || is_nonpositive_integer(x) {
        return domain(format!("log-gamma undefined at {x}"));
    }
    if x >= 0.5 {
        return Ok(SignedLogGamma {
            log_abs: ln_gamma_positive(x),
            sign: 1,
        });
    }
    let s = sin_pi(x);
    Ok(SignedLogGamma {
        log_abs: PI.ln() - s.abs().ln() - ln_gamma_positive(1.0 - x),
        sign: if s > 0.0 { 1 } else { -1 },
    })
}

/// Rising factorial `(z)_n`.
pub fn pochhammer(z: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..n {
        acc *= z + f64::from(i);
    }
    acc
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("order alpha = {alpha} must lie in (0, 2)"));
    }
    Ok(())
}

/// Normalisation constant of the singular-integral fractional Laplacian.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    Ok(
        alpha * 2f64.powf(alpha - 1.0) * gamma_raw(0.5 + 0.5 * alpha)
            / (PI.sqrt() * gamma_raw(1.0 - 0.5 * alpha)),
    )
}

/// Largest admissible skewness for order `alpha`.
pub fn max_skewness(alpha: f64) -> f64 {
    alpha.min(2.0 - alpha)
}

/// Checks `|gamma| <= min(alpha, 2 - alpha)` with a few ulps of slack.
pub fn check_skewness(alpha: f64, gamma: f64) -> Result<()> {
    check_order(alpha)?;
    let bound = max_skewness(alpha);
    if !gamma.is_finite() || gamma.abs() > bound + 1e-12 {
        return domain(format!(
            "skewness |gamma| = {} exceeds min(alpha, 2 - alpha) = {bound}",
            gamma.abs()
        ));
    }
    Ok(())
}

/// Weights of the one-sided integrals in the Riesz-Feller representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszFellerCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub gamma: f64,
}

pub fn rf_coeffs(alpha: f64, gamma: f64) -> Result<RieszFellerCoeffs> {
    check_skewness(alpha, gamma)?;
    let g = gamma_raw(1.0 + alpha) / PI;
    let (c1, c2) = if gamma == 0.0 {
        let c = g * (alpha * PI / 2.0).sin();
        (c, c)
    } else {
        (
            g * ((alpha - gamma) * PI / 2.0).sin(),
            g * ((alpha + gamma) * PI / 2.0).sin(),
        )
    };
    Ok(RieszFellerCoeffs {
        c1,
        c2,
        alpha,
        gamma,
    })
}

/// `2F1(-m, b; c; z)` as the terminating finite sum, ascending in `n`.
pub fn hyp2f1_neg_int(m: u32, b: f64, c: f64, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mf = f64::from(m);
    for n in 0..m {
        let nf = f64::from(n);
        let ratio = (nf - mf) * (b + nf) / ((c + nf) * (nf + 1.0));
        term = term * ratio * z;
        sum += term;
    }
    sum
}

/// `2F1(-m, 1 + alpha; 2; z)`.
pub fn hyp2f1_terminating(m: u32, alpha: f64, z: Complex64) -> Complex64 {
    hyp2f1_neg_int(m, 1.0 + alpha, 2.0, z)
}

const KUMMER_MAX_TERMS: usize = 20_000;
const KUMMER_ASYMPTOTIC_FROM: f64 = 60.0;

fn kummer_series(a: f64, b: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..KUMMER_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * x / (nf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // past the peak the tail is bounded by a geometric series
        if nf > x.abs() && term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        routine: "kummer_1f1 series",
        terms: KUMMER_MAX_TERMS,
    })
}

fn kummer_asymptotic_negative(a: f64, b: f64, y: f64) -> Result<f64> {
    // 1F1(a; b; -y) ~ Gamma(b)/Gamma(b-a) y^-a sum (a)_s (a-b+1)_s / s! y^-s
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for s in 0..KUMMER_MAX_TERMS {
        let sf = s as f64;
        term *= (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * y);
        if term.abs() > prev {
            break;
        }
        sum += term;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            return Ok(gamma_raw(b) * rgamma(b - a) * y.powf(-a) * sum);
        }
        prev = term.abs();
    }
    Err(Error::NonConvergence {
        routine: "kummer_1f1 asymptotic",
        terms: KUMMER_MAX_TERMS,
    })
}

/// Kummer's confluent hypergeometric function `1F1(a; b; x)` for real arguments.
///
/// Negative arguments go through the Kummer transformation
/// `1F1(a; b; x) = e^x 1F1(b - a; b; -x)`, and through the large-argument
/// expansion once `-x` is past the point where `e^x` stops being representable
/// with useful accuracy.
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return domain(format!("1F1 undefined for b = {b}"));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if a == b {
        return Ok(x.exp());
    }
    if x >= -1.0 {
        return kummer_series(a, b, x);
    }
    let y = -x;
    let terminates = is_nonpositive_integer(b - a);
    if terminates || y <= KUMMER_ASYMPTOTIC_FROM {
        if terminates && y > 700.0 {
            return Ok(0.0);
        }
        return Ok(x.exp() * kummer_series(b - a, b, y)?);
    }
    kummer_asymptotic_negative(a, b, y)
}

/// Which of the two gamma-ratio sequences a [`RatioTable`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    /// `Gamma((-1 + alpha)/2 + p) / Gamma((3 - alpha)/2 + p)`
    V1,
    /// `Gamma((-1 - alpha)/2 + p) / Gamma((3 + alpha)/2 + p)`
    V2,
}

impl RatioKind {
    /// Numerator and denominator arguments at `p = 0`.
    pub fn offsets(self, alpha: f64) -> (f64, f64) {
        match self {
            RatioKind::V1 => ((-1.0 + alpha) / 2.0, (3.0 - alpha) / 2.0),
            RatioKind::V2 => ((-1.0 - alpha) / 2.0, (3.0 + alpha) / 2.0),
        }
    }
}

/// Precomputed gamma ratios indexed by `p >= 0`, filled by the recurrence
/// `values[p + 1] = values[p] * (num + p) / (den + p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub alpha: f64,
    pub kind: RatioKind,
    pub values: Vec<f64>,
}

impl RatioTable {
    #[inline]
    pub fn get(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn ratio_table(alpha: f64, kind: RatioKind, p_max: usize) -> Result<RatioTable> {
    check_order(alpha)?;
    if alpha == 1.0 {
        return domain("ratio tables are undefined at alpha = 1");
    }
    let (num, den) = kind.offsets(alpha);
    let mut values = Vec::with_capacity(p_max + 1);
    let mut v = gamma(num)? / gamma(den)?;
    values.push(v);
    for p in 0..p_max {
        let pf = p as f64;
        v *= (num + pf) / (den + pf);
        values.push(v);
    }
    Ok(RatioTable {
        alpha,
        kind,
        values,
    })
}
