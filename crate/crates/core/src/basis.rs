//! Higgins and Christov functions, the cotangent map, collocation grids and
//! the DFT analysis/synthesis pair.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};

/// Default Krasny filter threshold, `2^-52`.
pub const KRASNY_EPS: f64 = f64::EPSILON;

/// Collocation nodes `s_j = pi (2j + 1) / (2N)` and their images `x_j = L cot s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub n: usize,
    pub l_scale: f64,
    pub s_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
}

pub fn make_grid(n: usize, l_scale: f64) -> Result<SpectralGrid> {
    if n < 2 {
        return domain(format!("grid needs at least 2 nodes, got {n}"));
    }
    if !(l_scale > 0.0 && l_scale.is_finite()) {
        return domain(format!("map scale L must be positive, got {l_scale}"));
    }
    let nf = n as f64;
    let s_nodes: Vec<f64> = (0..n)
        .map(|j| PI * (2 * j + 1) as f64 / (2.0 * nf))
        .collect();
    // first half directly, second half mirrored so the node set is exactly antisymmetric
    let mut x_nodes = vec![0.0; n];
    for j in 0..n / 2 {
        let x = l_scale / s_nodes[j].tan();
        x_nodes[j] = x;
        x_nodes[n - 1 - j] = -x;
    }
    Ok(SpectralGrid {
        n,
        l_scale,
        s_nodes,
        x_nodes,
    })
}

impl SpectralGrid {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Inverse of the map, `s = arccot(x / L)` on the `(0, pi)` branch.
    pub fn s_of_x(&self, x: f64) -> f64 {
        s_of_x(x, self.l_scale)
    }

    /// Samples `f` at the mapped nodes.
    pub fn sample<F: FnMut(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.x_nodes.iter().copied().map(f).collect()
    }
}

/// `arccot(x / L)` on `(0, pi)`, computed as `pi/2 - arctan(x / L)`.
pub fn s_of_x(x: f64, l_scale: f64) -> f64 {
    PI / 2.0 - (x / l_scale).atan()
}

/// A Fourier mode `k` in `[-floor(N/2), ceil(N/2) - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex(pub i64);

impl ModeIndex {
    pub fn new(k: i64, n: usize) -> Result<Self> {
        let (lo, hi) = mode_range(n);
        if k < lo || k > hi {
            return domain(format!("mode {k} outside [{lo}, {hi}] for N = {n}"));
        }
        Ok(ModeIndex(k))
    }

    /// Mode held by storage slot `slot` in DFT ordering.
    pub fn from_slot(slot: usize, n: usize) -> Self {
        let k = slot as i64;
        if slot < n.div_ceil(2) {
            ModeIndex(k)
        } else {
            ModeIndex(k - n as i64)
        }
    }

    pub fn slot(self, n: usize) -> usize {
        if self.0 >= 0 {
            self.0 as usize
        } else {
            (self.0 + n as i64) as usize
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Inclusive range of representable modes for `n` nodes.
pub fn mode_range(n: usize) -> (i64, i64) {
    (-((n / 2) as i64), n.div_ceil(2) as i64 - 1)
}

/// `lambda_{k,L}(x) = ((i x - L)/(i x + L))^k`, evaluated in polar form as
/// `exp(2 i k arg(x + i L))`.
pub fn lambda_k(x: f64, k: i64, l_scale: f64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::cis(2.0 * k as f64 * l_scale.atan2(x))
}

/// Christov-type function `phi_k(x) = exp(i k arccot x)`; `phi_{2k} = lambda_k`.
pub fn phi_k(x: f64, k: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::cis(k as f64 * 1f64.atan2(x))
}

/// Complex Christov function `mu_k = (lambda_k - lambda_{k+1}) / 2`.
pub fn mu_k(x: f64, k: i64) -> Complex64 {
    (lambda_k(x, k, 1.0) - lambda_k(x, k + 1, 1.0)) * 0.5
}

/// Fourier coefficients in DFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub coeffs: Vec<Complex64>,
}

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        CoeffVector {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, k: ModeIndex) -> Complex64 {
        self.coeffs[k.slot(self.len())]
    }

    pub fn set(&mut self, k: ModeIndex, value: Complex64) {
        let n = self.len();
        self.coeffs[k.slot(n)] = value;
    }

    /// `(mode, coefficient)` pairs in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        let n = self.len();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(slot, c)| (ModeIndex::from_slot(slot, n), *c))
    }

    /// Zeroes every coefficient with modulus at most `eps`.
    pub fn krasny_filter(&mut self, eps: f64) {
        for c in &mut self.coeffs {
            if c.norm() <= eps {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Cached FFT plans for one grid size.
#[derive(Clone)]
pub struct SpectralTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // e^{-i pi k / N} per storage slot
    twiddle: Vec<Complex64>,
}

impl fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralTransform")
            .field("n", &self.n)
            .finish()
    }
}

impl SpectralTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("transform needs at least 2 nodes, got {n}"));
        }
        let mut planner = FftPlanner::new();
        let nf = n as f64;
        let twiddle = (0..n)
            .map(|slot| Complex64::cis(-PI * ModeIndex::from_slot(slot, n).0 as f64 / nf))
            .collect();
        Ok(SpectralTransform {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twiddle,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodal samples to coefficients, followed by the Krasny filter.
    pub fn analyze(&self, samples: &[Complex64], krasny_eps: f64) -> Result<CoeffVector> {
        if samples.len() != self.n {
            return domain(format!(
                "expected {} samples, got {}",
                self.n,
                samples.len()
            ));
        }
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        for (c, t) in buf.iter_mut().zip(&self.twiddle) {
            *c = *c * *t * inv_n;
        }
        let mut out = CoeffVector { coeffs: buf };
        out.krasny_filter(krasny_eps);
        Ok(out)
    }

    /// Coefficients to values at the grid nodes.
    pub fn synthesize_nodes(&self, coeffs: &CoeffVector) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.n {
            return domain(format!(
                "expected {} coefficients, got {}",
                self.n,
                coeffs.len()
            ));
        }
        let mut buf: Vec<Complex64> = coeffs
            .coeffs
            .iter()
            .zip(&self.twiddle)
            .map(|(c, t)| c * t.conj())
            .collect();
        self.inverse.process(&mut buf);
        Ok(buf)
    }
}

/// Analysis without a cached plan; see [`SpectralTransform::analyze`].
pub fn analyze(samples: &[Complex64], grid: &SpectralGrid, krasny_eps: f64) -> Result<CoeffVector> {
    SpectralTransform::new(grid.n)?.analyze(samples, krasny_eps)
}

/// Evaluates `sum_k c_k e^{2iks}` at an arbitrary `s`.
pub fn synthesize(coeffs: &CoeffVector, s: f64) -> Complex64 {
    coeffs
        .modes()
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .fold(Complex64::new(0.0, 0.0), |acc, (k, c)| {
            acc + c * Complex64::cis(2.0 * k.0 as f64 * s)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn naive_analyze(samples: &[Complex64]) -> Vec<Complex64> {
        let n = samples.len();
        let nf = n as f64;
        (0..n)
            .map(|slot| {
                let k = ModeIndex::from_slot(slot, n).0 as f64;
                let sum: Complex64 = samples
                    .iter()
                    .enumerate()
                    .map(|(j, u)| u * Complex64::cis(-2.0 * PI * j as f64 * k / nf))
                    .sum();
                sum * Complex64::cis(-PI * k / nf) / nf
            })
            .collect()
    }

    fn pseudo_random(seed: u64, n: usize) -> Vec<Complex64> {
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn tiny_grids() {
        let g = make_grid(2, 1.0).unwrap();
        assert!((g.s_nodes[0] - PI / 4.0).abs() < 1e-15);
        assert!((g.s_nodes[1] - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((g.x_nodes[0] - 1.0).abs() < 1e-15);
        assert!((g.x_nodes[1] + 1.0).abs() < 1e-15);
        let g = make_grid(4, 1.0).unwrap();
        assert!((g.s_nodes[0] - PI / 8.0).abs() < 1e-16);
        assert!(make_grid(1, 1.0).is_err());
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
    }

    #[test]
    fn grid_invariants() {
        for (n, l) in [(7, 0.5), (256, 1.1), (301, 30.0)] {
            let g = make_grid(n, l).unwrap();
            assert!(g.s_nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(g.x_nodes.windows(2).all(|w| w[0] > w[1]));
            assert!(g.s_nodes[0] > 0.0 && g.s_nodes[n - 1] < PI);
            for j in 0..n {
                assert!((g.x_nodes[n - 1 - j] + g.x_nodes[j]).abs() <= 1e-12);
                assert!(
                    (g.x_nodes[j] - l / g.s_nodes[j].tan()).abs()
                        <= 1e-12 * (1.0 + g.x_nodes[j].abs())
                );
            }
        }
    }

    #[test]
    fn lambda_on_the_map_is_a_fourier_mode() {
        let l = 1.7;
        for k in [-40, -3, 0, 1, 5, 129] {
            for s in [0.01, 0.7, 1.5, 2.9, 3.1] {
                let x = l / f64::tan(s);
                let v = lambda_k(x, k, l);
                assert!(
                    close(v, Complex64::cis(2.0 * k as f64 * s), 1e-12),
                    "k={k} s={s}"
                );
            }
        }
    }

    #[test]
    fn lambda_matches_rational_definition() {
        let i = Complex64::i();
        for (x, k, l) in [(0.7, 3, 1.0), (-2.5, 4, 0.3), (10.0, -2, 2.0)] {
            let base = (i * x - l) / (i * x + l);
            assert!(close(lambda_k(x, k, l), base.powi(k as i32), 1e-13));
        }
        assert_eq!(lambda_k(0.3, 0, 1.0), Complex64::new(1.0, 0.0));
        assert!(close(
            lambda_k(0.7, -3, 1.0),
            lambda_k(0.7, 3, 1.0).conj(),
            1e-15
        ));
    }

    #[test]
    fn phi_and_mu_relations() {
        for k in -5..=5 {
            for x in [-3.2, -0.4, 0.0, 0.9, 12.0] {
                assert!(close(phi_k(x, 2 * k), lambda_k(x, k, 1.0), 1e-14));
            }
        }
        for x in [-1.0, 0.25, 4.0] {
            let m0 = (Complex64::new(1.0, 0.0) - lambda_k(x, 1, 1.0)) * 0.5;
            assert!(close(mu_k(x, 0), m0, 1e-15));
        }
        for s in [0.1, 1.0, 3.0] {
            assert!(close(phi_k(1.0 / f64::tan(s), 1), Complex64::cis(s), 1e-14));
        }
    }

    #[test]
    fn mode_index_slots() {
        assert_eq!(mode_range(8), (-4, 3));
        assert_eq!(mode_range(7), (-3, 3));
        for n in [7usize, 8] {
            for slot in 0..n {
                assert_eq!(ModeIndex::from_slot(slot, n).slot(n), slot);
            }
        }
        assert_eq!(ModeIndex::from_slot(4, 8).0, -4);
        assert_eq!(ModeIndex::from_slot(4, 7).0, -3);
        assert!(ModeIndex::new(4, 8).is_err());
        assert!(ModeIndex::new(-4, 8).is_ok());
    }

    #[test]
    fn analyze_constant_and_single_mode() {
        let g = make_grid(16, 1.0).unwrap();
        let c = Complex64::new(0.3, -1.2);
        let coeffs = analyze(&vec![c; 16], &g, KRASNY_EPS).unwrap();
        assert!(close(coeffs.coeffs[0], c, 1e-15));
        assert!(coeffs.coeffs[1..].iter().all(|v| v.norm() == 0.0));

        let samples: Vec<_> = g.s_nodes.iter().map(|s| Complex64::cis(2.0 * s)).collect();
        let coeffs = analyze(&samples, &g, KRASNY_EPS).unwrap();
        for (k, v) in coeffs.modes() {
            let expect = if k.0 == 1 { 1.0 } else { 0.0 };
            assert!(close(v, Complex64::new(expect, 0.0), 1e-14), "k = {k}");
        }
        assert!(analyze(&samples[..5], &g, KRASNY_EPS).is_err());
    }

    #[test]
    fn fft_matches_naive_dft() {
        for n in [8usize, 9, 64, 100] {
            let g = make_grid(n, 1.0).unwrap();
            let samples = pseudo_random(n as u64, n);
            let fast = analyze(&samples, &g, 0.0).unwrap();
            let slow = naive_analyze(&samples);
            for (a, b) in fast.coeffs.iter().zip(&slow) {
                assert!(close(*a, *b, 1e-14));
            }
        }
    }

    #[test]
    fn real_samples_give_hermitian_coefficients() {
        for n in [16usize, 17] {
            let g = make_grid(n, 1.0).unwrap();
            let samples: Vec<_> = pseudo_random(3, n)
                .iter()
                .map(|z| Complex64::new(z.re, 0.0))
                .collect();
            let c = analyze(&samples, &g, 0.0).unwrap();
            let (lo, hi) = mode_range(n);
            for k in 1..=hi.min(-lo) {
                if -k < lo {
                    continue;
                }
                let a = c.get(ModeIndex(k));
                let b = c.get(ModeIndex(-k));
                assert!(close(b, a.conj(), 1e-12));
            }
            if n % 2 == 0 {
                // the unpaired Nyquist mode carries the phase e^{i pi/2}
                let nyq = c.get(ModeIndex(lo));
                assert!(nyq.re.abs() <= 1e-12, "{nyq}");
            }
        }
    }

    #[test]
    fn synthesize_basics() {
        let mut c = CoeffVector::zeros(8);
        c.coeffs[0] = Complex64::new(1.0, 0.0);
        assert!(close(synthesize(&c, 0.37), Complex64::new(1.0, 0.0), 1e-15));
        let mut c = CoeffVector::zeros(8);
        c.set(ModeIndex(1), Complex64::new(1.0, 0.0));
        assert!(close(synthesize(&c, 0.37), Complex64::cis(0.74), 1e-15));
    }

    #[test]
    fn synthesis_at_nodes_reproduces_samples() {
        let n = 33;
        let g = make_grid(n, 2.0).unwrap();
        let samples = pseudo_random(11, n);
        let c = analyze(&samples, &g, 0.0).unwrap();
        for (s, u) in g.s_nodes.iter().zip(&samples) {
            assert!(close(synthesize(&c, *s), *u, 1e-13));
        }
    }

    #[test]
    fn lambda_orthogonality() {
        let n = 24;
        let g = make_grid(n, 1.3).unwrap();
        let (lo, hi) = mode_range(n);
        for k in (lo + 1)..=hi {
            for m in (lo + 1)..=hi {
                let ip: Complex64 = g
                    .x_nodes
                    .iter()
                    .map(|x| lambda_k(*x, k, 1.3) * lambda_k(*x, m, 1.3).conj())
                    .sum::<Complex64>()
                    / n as f64;
                let expect = if k == m { 1.0 } else { 0.0 };
                assert!(close(ip, Complex64::new(expect, 0.0), 1e-12), "k={k} m={m}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn roundtrip_identities(n in 8usize..=1024, seed in any::<u64>()) {
                let t = SpectralTransform::new(n).unwrap();
                let samples = pseudo_random(seed, n);
                let c = t.analyze(&samples, 0.0).unwrap();
                let back = t.synthesize_nodes(&c).unwrap();
                for (a, b) in back.iter().zip(&samples) {
                    prop_assert!((a - b).norm() <= 1e-12);
                }
                let coeffs = CoeffVector { coeffs: pseudo_random(seed ^ 0x5a5a, n) };
                let nodal = t.synthesize_nodes(&coeffs).unwrap();
                let again = t.analyze(&nodal, 0.0).unwrap();
                for (a, b) in again.coeffs.iter().zip(&coeffs.coeffs) {
                    prop_assert!((a - b).norm() <= 1e-12);
                }
            }
        }
    }
}
