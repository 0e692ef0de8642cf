//! Fractional Fisher equation `u_t = D_gamma^alpha u + u (1 - u)` on the real
//! line: RK4 in time, front tracking, and the exponential-speed fit.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{synthesize, CoeffVector};
use crate::closedform::OperatorKind;
use crate::error::{domain, Error, Result};
use crate::operators::{AuxDecomposition, SpectralOperator};
use crate::opmatrix::{OperatorMatrix, DEFAULT_L_LIM};

/// Parameters of one evolution run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub n: usize,
    pub l_scale: f64,
    pub l_lim: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between snapshots.
    pub snapshot_stride: usize,
}

impl EvolutionConfig {
    /// A reduced run that fits in minutes on one core.
    pub fn scaled() -> Self {
        EvolutionConfig {
            alpha: 1.37,
            gamma: -0.63,
            n: 2048,
            l_scale: 300.0,
            l_lim: DEFAULT_L_LIM,
            dt: 0.05,
            t_end: 12.0,
            snapshot_stride: 10,
        }
    }

    /// The large configuration: `N = 16384`, `L = 2100`, `t` up to 22. Needs
    /// about 4.3 GB for the matrix and hours of compute.
    pub fn full() -> Self {
        EvolutionConfig {
            n: 16384,
            l_scale: 2100.0,
            t_end: 22.0,
            ..Self::scaled()
        }
    }

    pub fn kind(&self) -> OperatorKind {
        OperatorKind::RieszFeller { gamma: self.gamma }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind().validate(self.alpha)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0) {
            return domain(format!("end time must be nonnegative, got {}", self.t_end));
        }
        if !(self.l_scale > 0.0) || self.n < 2 || self.snapshot_stride == 0 {
            return domain("need L > 0, N >= 2 and a positive snapshot stride");
        }
        Ok(())
    }

    /// Number of RK4 steps, rounding `t_end / dt` to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// `u(x, 0) = (1/2 - x / (2 sqrt(1 + x^2)))^(alpha/2)`.
pub fn initial_condition(x: f64, alpha: f64) -> f64 {
    // 1/2 - x/(2 sqrt(1+x^2)) rewritten without cancellation for large x
    let r = (1.0 + x * x).sqrt();
    let base = if x > 0.0 {
        0.5 / (r * (r + x))
    } else {
        0.5 - x / (2.0 * r)
    };
    base.powf(0.5 * alpha)
}

/// Crossing of `level` by the initial profile, solved in closed form.
pub fn initial_crossing(alpha: f64, level: f64) -> f64 {
    let r = 1.0 - 2.0 * level.powf(2.0 / alpha);
    r / (1.0 - r * r).sqrt()
}

/// The reaction term `f(u) = u (1 - u)`.
pub fn fisher_reaction(u: f64) -> f64 {
    u * (1.0 - u)
}

/// Operator, auxiliary split and reaction term for one evolution.
#[derive(Debug, Clone)]
pub struct FisherProblem {
    pub config: EvolutionConfig,
    pub op: SpectralOperator,
    pub decomp: AuxDecomposition,
    pub reaction: fn(f64) -> f64,
    aux_nodes: Vec<f64>,
    aux_op_nodes: Vec<f64>,
}

impl FisherProblem {
    /// Builds the operator matrix for the configuration, with far-field
    /// values 1 at `-inf` and 0 at `+inf`.
    pub fn new(config: EvolutionConfig) -> Result<Self> {
        config.validate()?;
        let op = SpectralOperator::new(
            config.kind(),
            config.alpha,
            config.n,
            config.l_scale,
            config.l_lim,
        )?;
        Self::with_operator(config, op, (1.0, 0.0))
    }

    /// Uses a prebuilt scaled matrix.
    pub fn from_matrix(config: EvolutionConfig, matrix: OperatorMatrix) -> Result<Self> {
        config.validate()?;
        if matrix.kind != config.kind() || matrix.alpha != config.alpha || matrix.n != config.n {
            return domain("matrix does not match the evolution configuration");
        }
        if !matrix.scaled || matrix.l_scale != config.l_scale {
            return Err(Error::State(
                "matrix must be scaled to the configured L".into(),
            ));
        }
        Self::with_operator(config, SpectralOperator::from_matrix(matrix)?, (1.0, 0.0))
    }

    /// Same problem for states with limits `far_field = (u(-inf), u(+inf))`.
    /// With `(1, 0)` the split uses `v = 1/2 - arctan(x)/pi`.
    pub fn with_far_field(mut self, far_field: (f64, f64)) -> Result<Self> {
        let op = self.op.clone();
        self = Self::with_operator(self.config, op, far_field)?;
        Ok(self)
    }

    fn with_operator(
        config: EvolutionConfig,
        op: SpectralOperator,
        far_field: (f64, f64),
    ) -> Result<Self> {
        let decomp = AuxDecomposition::arctan_for_limits(far_field.0, far_field.1);
        let xs = &op.grid.x_nodes;
        let aux_nodes = xs.iter().map(|x| decomp.aux_value(*x)).collect();
        let aux_op_nodes = xs
            .iter()
            .map(|x| {
                if decomp.scale == 0.0 {
                    Ok(0.0)
                } else {
                    decomp.aux_operator(config.kind(), config.alpha, *x)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(FisherProblem {
            config,
            op,
            decomp,
            reaction: fisher_reaction,
            aux_nodes,
            aux_op_nodes,
        })
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.op.grid.x_nodes
    }

    /// Initial profile sampled at the nodes.
    pub fn initial_state(&self) -> Vec<f64> {
        self.x_nodes()
            .iter()
            .map(|x| initial_condition(*x, self.config.alpha))
            .collect()
    }

    /// Coefficients of the periodic remainder `w = u - v`.
    pub fn remainder_coeffs(&self, u: &[f64]) -> Result<CoeffVector> {
        if u.len() != self.config.n {
            return domain(format!(
                "state has {} nodes, expected {}",
                u.len(),
                self.config.n
            ));
        }
        let w: Vec<Complex64> = u
            .iter()
            .zip(&self.aux_nodes)
            .map(|(a, b)| Complex64::new(a - b, 0.0))
            .collect();
        self.op.transform().analyze(&w, self.op.krasny_eps)
    }

    /// `D u + f(u)` at the nodes. `t` only labels divergence errors.
    pub fn rhs(&self, u: &[f64], t: f64) -> Result<Vec<f64>> {
        if let Some(node) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Divergence { node, time: t });
        }
        let c = self.remainder_coeffs(u)?;
        let d = self.op.matrix.apply(&c)?;
        let out: Vec<f64> = d
            .iter()
            .zip(&self.aux_op_nodes)
            .zip(u)
            .map(|((dw, dv), uj)| dw.re + dv + (self.reaction)(*uj))
            .collect();
        if let Some(node) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Divergence { node, time: t });
        }
        Ok(out)
    }

    /// One classical fourth-order Runge-Kutta step.
    pub fn rk4_step(&self, u: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
        let axpy =
            |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };
        let k1 = self.rhs(u, t)?;
        let k2 = self.rhs(&axpy(0.5 * dt, &k1), t + 0.5 * dt)?;
        let k3 = self.rhs(&axpy(0.5 * dt, &k2), t + 0.5 * dt)?;
        let k4 = self.rhs(&axpy(dt, &k3), t + dt)?;
        Ok((0..u.len())
            .map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect())
    }

    /// Position where `u` crosses `level`; see [`front_position`].
    pub fn front_position(&self, u: &[f64], level: f64) -> Result<f64> {
        front_position(u, self, level)
    }
}

/// State at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub u: Vec<f64>,
    pub x_half: f64,
}

impl Snapshot {
    /// `x,u` rows, one per node.
    pub fn write_csv<W: Write>(&self, x_nodes: &[f64], mut w: W) -> Result<()> {
        writeln!(w, "x,u")?;
        for (x, u) in x_nodes.iter().zip(&self.u) {
            writeln!(w, "{x:.16e},{u:.16e}")?;
        }
        Ok(())
    }
}

/// Front positions over time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub x_half: Vec<f64>,
}

impl FrontTrace {
    pub fn push(&mut self, t: f64, x: f64) {
        self.times.push(t);
        self.x_half.push(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x_half")?;
        for (t, x) in self.times.iter().zip(&self.x_half) {
            writeln!(w, "{t:.16e},{x:.16e}")?;
        }
        Ok(())
    }
}

/// Limits on an evolution run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunLimits {
    /// Wall-clock deadline checked between steps.
    pub deadline: Option<Instant>,
    /// Front-crossing level.
    pub level: Option<f64>,
}

/// Outcome of [`rk4_evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub trace: FrontTrace,
}

/// Integrates from `u0` up to `config.t_end`. Every `snapshot_stride` steps
/// (and at the start and end) the front is located and `on_snapshot` is
/// called.
pub fn rk4_evolve<F>(
    problem: &FisherProblem,
    u0: Vec<f64>,
    limits: RunLimits,
    mut on_snapshot: F,
) -> Result<Evolution>
where
    F: FnMut(&Snapshot) -> Result<()>,
{
    let cfg = problem.config;
    let level = limits.level.unwrap_or(0.5);
    let steps = cfg.steps();
    let mut u = u0;
    let mut trace = FrontTrace::default();
    let mut record = |step: usize, u: &[f64], trace: &mut FrontTrace| -> Result<()> {
        let time = step as f64 * cfg.dt;
        let x_half = problem.front_position(u, level)?;
        trace.push(time, x_half);
        on_snapshot(&Snapshot {
            step,
            time,
            u: u.to_vec(),
            x_half,
        })
    };
    record(0, &u, &mut trace)?;
    for step in 1..=steps {
        if let Some(d) = limits.deadline {
            if Instant::now() > d {
                return Err(Error::Budget(format!(
                    "wall-time budget exhausted at t = {}",
                    (step - 1) as f64 * cfg.dt
                )));
            }
        }
        u = problem.rk4_step(&u, (step - 1) as f64 * cfg.dt, cfg.dt)?;
        if step % cfg.snapshot_stride == 0 || step == steps {
            record(step, &u, &mut trace)?;
        }
    }
    Ok(Evolution {
        final_state: u,
        final_time: steps as f64 * cfg.dt,
        trace,
    })
}

const FRONT_S_TOL: f64 = 1e-14;

/// Rightmost `x` where `u` crosses `level`.
///
/// Nodes are scanned from the largest `x` down for a sign change of
/// `u - level`; the bracket is then refined by bisection in `s` on the
/// spectral interpolant of `w` plus the closed-form auxiliary part.
pub fn front_position(u: &[f64], problem: &FisherProblem, level: f64) -> Result<f64> {
    let grid = &problem.op.grid;
    if let Some(j) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Tracking(format!("non-finite state at node {j}")));
    }
    // x_j decreases with j
    let mut bracket = None;
    for j in 0..u.len() {
        let d = u[j] - level;
        if d == 0.0 {
            return Ok(grid.x_nodes[j]);
        }
        if j + 1 < u.len() && (d > 0.0) != (u[j + 1] - level > 0.0) {
            bracket = Some(j);
            break;
        }
    }
    let j = bracket
        .ok_or_else(|| Error::Tracking(format!("no crossing of {level} between the nodes")))?;
    let c = problem.remainder_coeffs(u)?;
    let l = grid.l_scale;
    let eval = |s: f64| {
        let x = l / s.tan();
        synthesize(&c, s).re + problem.decomp.aux_value(x) - level
    };
    let (mut a, mut b) = (grid.s_nodes[j], grid.s_nodes[j + 1]);
    let mut fa = u[j] - level;
    while b - a > FRONT_S_TOL {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(m);
        if fm == 0.0 {
            return Ok(l / m.tan());
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let s = 0.5 * (a + b);
    Ok(l / s.tan())
}

/// Least-squares fit of `ln x_half` against `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_rho: f64,
    pub samples: usize,
}

/// Fits `ln x_half = intercept + slope t` over `t0 <= t <= t1`.
pub fn fit_exponential(trace: &FrontTrace, window: (f64, f64)) -> Result<RegressionResult> {
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.x_half)
        .filter(|(t, _)| **t >= window.0 - 1e-12 && **t <= window.1 + 1e-12)
        .map(|(t, x)| (*t, *x))
        .collect();
    if pts.len() < 3 {
        return domain(format!(
            "need at least 3 samples in the fit window, found {}",
            pts.len()
        ));
    }
    if let Some((t, x)) = pts.iter().find(|(_, x)| !(*x > 0.0)) {
        return domain(format!("front position {x} at t = {t} is not positive"));
    }
    let n = pts.len() as f64;
    let (mt, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, x)| (a + t / n, b + x.ln() / n));
    let (mut stt, mut syy, mut sty) = (0.0, 0.0, 0.0);
    for (t, x) in &pts {
        let (dt, dy) = (t - mt, x.ln() - my);
        stt += dt * dt;
        syy += dy * dy;
        sty += dt * dy;
    }
    let slope = sty / stt;
    let rho = if syy == 0.0 {
        1.0
    } else {
        (sty / (stt * syy).sqrt()).clamp(-1.0, 1.0)
    };
    Ok(RegressionResult {
        slope,
        intercept: my - slope * mt,
        pearson_rho: rho,
        samples: pts.len(),
    })
}

/// Run-level summary written next to the snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub alpha: f64,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l_scale: f64,
    pub l_lim: usize,
    pub dt: f64,
    pub t_end: f64,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub pearson_rho: f64,
    pub samples: usize,
    pub trace: FrontTrace,
}

impl RunSummary {
    pub fn new(
        cfg: &EvolutionConfig,
        window: (f64, f64),
        fit: &RegressionResult,
        trace: FrontTrace,
    ) -> Self {
        RunSummary {
            alpha: cfg.alpha,
            gamma: cfg.gamma,
            n: cfg.n,
            l_scale: cfg.l_scale,
            l_lim: cfg.l_lim,
            dt: cfg.dt,
            t_end: cfg.t_end,
            window,
            slope: fit.slope,
            intercept: fit.intercept,
            pearson_rho: fit.pearson_rho,
            samples: fit.samples,
            trace,
        }
    }
}
