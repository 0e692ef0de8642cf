//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Set `RF_SPECTRAL_FULL=1` to also run the large front-speed configuration
//! (N = 16384, several GB, hours).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use rf_spectral::basis::{make_grid, ModeIndex, SpectralTransform};
use rf_spectral::closedform::{
    frac_lap_lambda, weyl_phi_at_zero, ClosedFormFunction, OperatorKind,
};
use rf_spectral::evolve::{fit_exponential, rk4_evolve, EvolutionConfig, FisherProblem, RunLimits};
use rf_spectral::operators::{l_range, sweep_errors, AuxDecomposition, SpectralOperator};
use rf_spectral::opmatrix::{build_base_matrix, MatrixBuilder};
use rf_spectral::oracle::{
    dx_weyl_difference, quad_operator, weyl_difference, QuadratureConfig, Side,
};
use rf_spectral::specfun::{c_alpha, gamma, rf_coeffs};

const ERF_TOL: f64 = 1e-12;
const ERF_TIME: Duration = Duration::from_secs(30);
const LOG_TOL: f64 = 1.2e-3;
const LOG_TIME: Duration = Duration::from_secs(30);
const SWEEP_TOL: f64 = 1e-12;
const SWEEP_TIME: Duration = Duration::from_secs(120);
const SLOPE_TOL: f64 = 5e-3;
const RHO_TOL: f64 = 1e-4;
const FISHER_TIME: Duration = Duration::from_secs(600);
const FULL_SLOPE_TOL: f64 = 1e-4;
const FULL_RHO_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-12;
const COLUMN_TOL: f64 = 1e-10;
const PROP_CASES: u32 = 128;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, Box<dyn Fn() -> Outcome>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn erf_battery() -> Outcome {
    let (alpha, g, n, l) = (0.62, 0.49, 256, 1.1);
    let start = Instant::now();
    let base = MatrixBuilder::new(alpha, n)
        .l_lim(100)
        .build()
        .map_err(|e| e.to_string())?;
    let decomp = AuxDecomposition::erf_arctan();
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for kind in [
        OperatorKind::WeylRight,
        OperatorKind::WeylLeftNeg,
        OperatorKind::RieszFeller { gamma: g },
        OperatorKind::FracLaplacian,
    ] {
        let m = base.scale_to_operator(kind, l).map_err(|e| e.to_string())?;
        let op = SpectralOperator::from_matrix(m).map_err(|e| e.to_string())?;
        let r = op
            .apply_with_aux(&ClosedFormFunction::Erf, Some(&decomp))
            .map_err(|e| e.to_string())?;
        let e = r.linf_error.unwrap_or(f64::INFINITY);
        worst = worst.max(e);
        parts.push(format!("{}={e:.2e}", kind.code()));
    }
    let t = start.elapsed();
    check(
        worst <= ERF_TOL && t <= ERF_TIME,
        format!("{} (tol {ERF_TOL:.0e}), {t:.1?}", parts.join(" ")),
    )
}

fn log_battery() -> Outcome {
    let (alpha, g, n, l) = (1.12, 0.83, 256, 30.0);
    let start = Instant::now();
    let base = MatrixBuilder::new(alpha, n)
        .l_lim(100)
        .build()
        .map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for kind in [
        OperatorKind::DxWeylRight,
        OperatorKind::DxWeylLeftNeg,
        OperatorKind::RieszFeller { gamma: g },
        OperatorKind::FracLaplacian,
    ] {
        let m = base.scale_to_operator(kind, l).map_err(|e| e.to_string())?;
        let op = SpectralOperator::from_matrix(m).map_err(|e| e.to_string())?;
        let r = op
            .apply_with_aux(&ClosedFormFunction::Log1pSq, None)
            .map_err(|e| e.to_string())?;
        let e = r.linf_error.unwrap_or(f64::INFINITY);
        worst = worst.max(e);
        parts.push(format!("{}={e:.3e}", kind.code()));
    }
    let t = start.elapsed();
    check(
        worst <= LOG_TOL && t <= LOG_TIME,
        format!("{} (tol {LOG_TOL:.1e}), {t:.1?}", parts.join(" ")),
    )
}

fn sweep() -> Outcome {
    let start = Instant::now();
    let ls = l_range(0.5, 5.0, 0.5).map_err(|e| e.to_string())?;
    let grid = sweep_errors(
        &ClosedFormFunction::Erf,
        Some(&AuxDecomposition::erf_arctan()),
        OperatorKind::RieszFeller { gamma: 0.58 },
        1.37,
        &[128],
        &ls,
        100,
    )
    .map_err(|e| e.to_string())?;
    let (l, e) = grid.best_for_n(128).ok_or("no finite error")?;
    let t = start.elapsed();
    check(
        e <= SWEEP_TOL && t <= SWEEP_TIME,
        format!("N=128 best L={l} error={e:.2e} (tol {SWEEP_TOL:.0e}), {t:.1?}"),
    )
}

fn front_speed(
    cfg: EvolutionConfig,
    window: (f64, f64),
    slope_tol: f64,
    rho_tol: f64,
    budget: Option<Duration>,
) -> Outcome {
    let start = Instant::now();
    let problem = FisherProblem::new(cfg).map_err(|e| e.to_string())?;
    let run = rk4_evolve(
        &problem,
        problem.initial_state(),
        RunLimits::default(),
        |_| Ok(()),
    )
    .map_err(|e| e.to_string())?;
    let fit = fit_exponential(&run.trace, window).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let d = (fit.slope - 1.0 / cfg.alpha).abs();
    let one_minus_rho = 1.0 - fit.pearson_rho;
    // front position is nondecreasing after t = 1
    let monotone = run
        .trace
        .times
        .iter()
        .zip(run.trace.x_half.windows(2))
        .filter(|(t, _)| **t >= 1.0)
        .all(|(_, w)| w[1] >= w[0]);
    let in_time = budget.is_none_or(|b| t <= b);
    check(
        d <= slope_tol && one_minus_rho <= rho_tol && monotone && in_time,
        format!(
            "N={} L={} slope={:.6} |slope-1/alpha|={d:.2e} (tol {slope_tol:.0e}) 1-rho={one_minus_rho:.2e} (tol {rho_tol:.0e}) monotone={monotone}, {t:.1?}",
            cfg.n, cfg.l_scale, fit.slope
        ),
    )
}

fn oracle_suite() -> Outcome {
    let cfg = QuadratureConfig::default();
    let u = ClosedFormFunction::Erf;
    let mut worst: f64 = 0.0;
    for (alpha, g, l) in [(0.4, 0.2, 1.1), (1.37, -0.63, 2.5)] {
        let kind = OperatorKind::RieszFeller { gamma: g };
        let op = SpectralOperator::new(kind, alpha, 256, l, 100).map_err(|e| e.to_string())?;
        let r = op
            .apply_with_aux(&u, Some(&AuxDecomposition::erf_arctan()))
            .map_err(|e| e.to_string())?;
        for i in 1..=5 {
            let j = i * 256 / 6;
            let x = r.grid.x_nodes[j];
            let q = quad_operator(kind, alpha, &u, x, &cfg).map_err(|e| e.to_string())?;
            worst = worst.max((r.approx[j].re - q).abs());
        }
    }
    // equivalent representations: difference vs derivative forms
    let mut rep: f64 = 0.0;
    for x in [-1.0, 0.0, 2.0] {
        let pairs = [
            (
                weyl_difference(&u, 0.4, x, Side::Right, &cfg),
                quad_operator(OperatorKind::WeylRight, 0.4, &u, x, &cfg),
            ),
            (
                weyl_difference(&u, 0.4, x, Side::LeftNeg, &cfg),
                quad_operator(OperatorKind::WeylLeftNeg, 0.4, &u, x, &cfg),
            ),
            (
                dx_weyl_difference(&u, 1.37, x, Side::Right, &cfg),
                quad_operator(OperatorKind::DxWeylRight, 1.37, &u, x, &cfg),
            ),
            (
                dx_weyl_difference(&u, 1.37, x, Side::LeftNeg, &cfg),
                quad_operator(OperatorKind::DxWeylLeftNeg, 1.37, &u, x, &cfg),
            ),
        ];
        for (a, b) in pairs {
            rep = rep.max((a.map_err(|e| e.to_string())? - b.map_err(|e| e.to_string())?).abs());
        }
        // Riesz-Feller as a combination of the one-sided operators
        let co = rf_coeffs(0.4, 0.2).map_err(|e| e.to_string())?;
        let wr =
            quad_operator(OperatorKind::WeylRight, 0.4, &u, x, &cfg).map_err(|e| e.to_string())?;
        let wl = quad_operator(OperatorKind::WeylLeftNeg, 0.4, &u, x, &cfg)
            .map_err(|e| e.to_string())?;
        let rf = quad_operator(OperatorKind::RieszFeller { gamma: 0.2 }, 0.4, &u, x, &cfg)
            .map_err(|e| e.to_string())?;
        let g = gamma(-0.4).map_err(|e| e.to_string())?;
        rep = rep.max((g * (co.c1 * wr - co.c2 * wl) - rf).abs());
        let co = rf_coeffs(1.37, -0.63).map_err(|e| e.to_string())?;
        let dr = quad_operator(OperatorKind::DxWeylRight, 1.37, &u, x, &cfg)
            .map_err(|e| e.to_string())?;
        let dl = quad_operator(OperatorKind::DxWeylLeftNeg, 1.37, &u, x, &cfg)
            .map_err(|e| e.to_string())?;
        let rf = quad_operator(
            OperatorKind::RieszFeller { gamma: -0.63 },
            1.37,
            &u,
            x,
            &cfg,
        )
        .map_err(|e| e.to_string())?;
        let g = gamma(-1.37).map_err(|e| e.to_string())?;
        rep = rep.max((g * (co.c1 * dr + co.c2 * dl) - rf).abs());
    }
    check(
        worst <= ORACLE_TOL && rep <= ORACLE_TOL,
        format!(
            "spectral vs quadrature {worst:.2e}, representations {rep:.2e} (tol {ORACLE_TOL:.0e})"
        ),
    )
}

fn identities() -> Outcome {
    let g = |x: f64| gamma(x).map_err(|e| e.to_string());
    let mut refl: f64 = 0.0;
    let mut dup: f64 = 0.0;
    let mut calpha: f64 = 0.0;
    for i in 1..40 {
        let w = i as f64 / 40.0;
        refl = refl.max(rel(g(w)? * g(1.0 - w)?, PI / (PI * w).sin()));
        let a = 2.0 * w;
        dup = dup.max(rel(
            g(w)? * g(w + 0.5)?,
            2f64.powf(1.0 - 2.0 * w) * PI.sqrt() * g(2.0 * w)?,
        ));
        let c1 = rf_coeffs(a, 0.0).map_err(|e| e.to_string())?.c1;
        calpha = calpha.max(rel(c1, c_alpha(a).map_err(|e| e.to_string())?));
    }
    // operator matrix columns against the terminating hypergeometric form
    let n = 32;
    let m = build_base_matrix(0.62, n, 100).map_err(|e| e.to_string())?;
    let grid = make_grid(n, 1.0).map_err(|e| e.to_string())?;
    let mut col: f64 = 0.0;
    for k in 1..=8i64 {
        for j in 0..n {
            let e = frac_lap_lambda(0.62, k, grid.x_nodes[j]).map_err(|e| e.to_string())?;
            col = col.max((m.get(j, k as usize) - e).norm());
            col = col.max((m.get(j, ModeIndex(-k).slot(n)) - e.conj()).norm());
        }
    }
    // x = 0 values for phi_1 against the Gamma-sum evaluation
    let mut anchor: f64 = 0.0;
    for a in [0.1, 0.3, 0.5, 0.62, 0.9] {
        let v = weyl_phi_at_zero(a, 1).map_err(|e| e.to_string())?;
        let den = PI.sqrt() * g(1.0 - a)?;
        let re = g(1.0 + a / 2.0)? * g((1.0 - a) / 2.0)? / den;
        let im = g(1.0 - a / 2.0)? * g((1.0 + a) / 2.0)? / den;
        let right = Complex64::new(re, im);
        anchor = anchor.max((v.weyl_right - right).norm() / right.norm());
        anchor = anchor.max((v.weyl_left_neg - right.conj()).norm() / right.norm());
        let lap = 2f64.powf(a) * g((1.0 + a) / 2.0)?.powi(2) / PI;
        anchor = anchor.max((v.frac_lap - Complex64::new(0.0, lap)).norm() / lap);
    }
    check(
        refl <= IDENTITY_TOL && dup <= IDENTITY_TOL && calpha <= IDENTITY_TOL && col <= COLUMN_TOL && anchor <= IDENTITY_TOL,
        format!(
            "reflection {refl:.1e} duplication {dup:.1e} c1=c_alpha {calpha:.1e} (tol {IDENTITY_TOL:.0e}); columns {col:.1e} (tol {COLUMN_TOL:.0e}); anchors {anchor:.1e} (tol {IDENTITY_TOL:.0e})"
        ),
    )
}

fn real_samples(seed: u64, n: usize) -> Vec<Complex64> {
    let mut s = seed | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            Complex64::new((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5, 0.0)
        })
        .collect()
}

fn structural() -> Outcome {
    let cfg = Config {
        cases: PROP_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut results = Vec::new();

    let mut runner = TestRunner::new(cfg.clone());
    results.push((
        "zero columns",
        runner
            .run(&(0.05f64..1.95, 4usize..48), |(alpha, n)| {
                let m = build_base_matrix(alpha, n, 20).unwrap();
                prop_assert!(m.column(0).iter().all(|v| v.norm() == 0.0));
                if n % 2 == 0 {
                    prop_assert!(m.column(n / 2).iter().all(|v| v.norm() == 0.0));
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    ));

    let mut runner = TestRunner::new(cfg.clone());
    results.push((
        "conjugate fills",
        runner
            .run(&(0.05f64..1.95, 4usize..40), |(alpha, n)| {
                let m = build_base_matrix(alpha, n, 20).unwrap();
                let (lo, hi) = rf_spectral::basis::mode_range(n);
                for j in 0..n {
                    for k in lo..=hi {
                        let slot = ModeIndex(k).slot(n);
                        prop_assert_eq!(m.get(n - 1 - j, slot), m.get(j, slot).conj());
                        if k > 0 && -k >= lo {
                            let neg = ModeIndex(-k).slot(n);
                            prop_assert_eq!(m.get(j, neg), m.get(j, slot).conj());
                        }
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    ));

    let mut runner = TestRunner::new(cfg.clone());
    results.push((
        "hermitian coefficients",
        runner
            .run(&(2usize..512, any::<u64>()), |(n, seed)| {
                let t = SpectralTransform::new(n).unwrap();
                let c = t.analyze(&real_samples(seed, n), 0.0).unwrap();
                let (lo, hi) = rf_spectral::basis::mode_range(n);
                for k in 1..=hi {
                    if -k >= lo {
                        let d = c.get(ModeIndex(-k)) - c.get(ModeIndex(k)).conj();
                        prop_assert!(d.norm() <= 1e-14);
                    }
                }
                prop_assert!(c.get(ModeIndex(0)).im.abs() <= 1e-15);
                if n % 2 == 0 {
                    prop_assert!(c.get(ModeIndex(lo)).re.abs() <= 1e-14);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    ));

    let mut runner = TestRunner::new(cfg);
    results.push((
        "roundtrip",
        runner
            .run(&(2usize..1024, any::<u64>()), |(n, seed)| {
                let t = SpectralTransform::new(n).unwrap();
                let u = real_samples(seed, n);
                let back = t.synthesize_nodes(&t.analyze(&u, 0.0).unwrap()).unwrap();
                for (a, b) in back.iter().zip(&u) {
                    prop_assert!((a - b).norm() <= 1e-13);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    ));

    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    if failed.is_empty() {
        Ok(format!(
            "{} x {PROP_CASES} cases: {}",
            names.len(),
            names.join(", ")
        ))
    } else {
        Err(failed.join("; "))
    }
}

fn main() {
    let full = std::env::var("RF_SPECTRAL_FULL").is_ok_and(|v| v == "1");
    let criteria: Vec<Criterion> = vec![
        ("1", "erf operator battery", Box::new(erf_battery)),
        ("2", "log growth battery", Box::new(log_battery)),
        ("3", "L sweep at N=128", Box::new(sweep)),
        (
            "4",
            "front speed, reduced run",
            Box::new(|| {
                front_speed(
                    EvolutionConfig::scaled(),
                    (8.0, 11.5),
                    SLOPE_TOL,
                    RHO_TOL,
                    Some(FISHER_TIME),
                )
            }),
        ),
        ("5", "quadrature oracle", Box::new(oracle_suite)),
        ("6", "closed-form identities", Box::new(identities)),
        ("7", "structural invariants", Box::new(structural)),
    ];
    let mut failures = 0;
    for (id, name, f) in &criteria {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(d) => println!("PASS {id} {name}: {d}"),
            Err(d) => {
                failures += 1;
                println!("FAIL {id} {name}: {d}");
            }
        }
    }
    if full {
        match front_speed(
            EvolutionConfig::full(),
            (15.0, 21.0),
            FULL_SLOPE_TOL,
            FULL_RHO_TOL,
            None,
        ) {
            Ok(d) => println!("PASS 4-full front speed, large run: {d}"),
            Err(d) => {
                failures += 1;
                println!("FAIL 4-full front speed, large run: {d}");
            }
        }
    } else {
        println!("SKIP 4-full front speed, large run: set RF_SPECTRAL_FULL=1");
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
