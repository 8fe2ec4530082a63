//! Self-certifying invariant battery with fixed per-check seeds.

use qentropy::asymptotics::{high_temp_escort, high_temp_linear, ThermoState};
use qentropy::entropy::inequality_chain;
use qentropy::lambert::{w0, w_minus1, BRANCH_POINT};
use qentropy::majorization::{psi_roots, random_simplex, schur_concavity_probe, trial_rng, PSI_GRID_POINTS};
use qentropy::maxent::solve;
use qentropy::multifractal::{cascade_generate, legendre, tau_regress, CascadeSpec};
use qentropy::par::map_indexed;
use qentropy::{
    ConstraintKind, EnergySpectrum, EntropyKind, EntropyOrder, Execution, MaxEntProblem, ProbDist, SolverOptions,
};
use rand::Rng;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub filter: Option<String>,
    /// Replace every tolerance by zero.
    pub inject_fault: bool,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub group: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation; the check passes when it is within tolerance.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub filter: Option<String>,
    pub fault_injected: bool,
    pub passed: bool,
    pub first_failure: Option<String>,
    pub checks: Vec<CheckOutcome>,
}

struct Measured {
    metric: f64,
    tolerance: f64,
    detail: String,
}

type CheckFn = fn(u64) -> Measured;

const CHECKS: [(&str, &str, CheckFn); 11] = [
    ("chain", "inequality_chain", chain),
    ("lambert", "w_residual", w_residual),
    ("lambert", "branch_meet", branch_meet),
    ("schur", "renyi_schur_concave", |s| schur(EntropyKind::Renyi, 2.0, s)),
    ("schur", "thc_schur_concave", |s| schur(EntropyKind::Thc, 2.0, s)),
    ("schur", "hybrid_schur_concave", |s| schur(EntropyKind::Hybrid, 0.75, s)),
    ("schur", "psi_root_structure", psi_structure),
    ("cascade", "binomial_tau", cascade),
    ("solver", "gibbs_limit", gibbs_limit),
    ("solver", "stationarity_and_dominance", solver_dominance),
    ("asymptotics", "high_temperature", high_temperature),
];

/// Names of all checks as `group/name`.
pub fn check_names() -> Vec<String> {
    CHECKS.iter().map(|(g, n, _)| format!("{g}/{n}")).collect()
}

fn case_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs the selected checks. Checks are independent and may run in
/// parallel; the report keeps the fixed check order.
pub fn verify_suite(opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let selected: Vec<usize> = (0..CHECKS.len())
        .filter(|&k| {
            let (g, n, _) = CHECKS[k];
            opts.filter.as_deref().is_none_or(|f| g.contains(f) || n.contains(f))
        })
        .collect();
    if selected.is_empty() {
        return Err(CliError::Usage(format!(
            "--filter {:?} matches no check; available: {}",
            opts.filter.as_deref().unwrap_or(""),
            check_names().join(", ")
        )));
    }
    let checks: Vec<CheckOutcome> = map_indexed(opts.exec, selected.len(), |j| {
        let k = selected[j];
        let (group, name, f) = CHECKS[k];
        let m = f(case_seed(opts.seed, k));
        let tolerance = if opts.inject_fault { 0.0 } else { m.tolerance };
        CheckOutcome {
            group,
            name,
            passed: m.metric <= tolerance,
            metric: m.metric,
            tolerance,
            detail: m.detail,
        }
    });
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| format!("{}/{}", c.group, c.name));
    Ok(VerifyReport {
        seed: opts.seed,
        filter: opts.filter.clone(),
        fault_injected: opts.inject_fault,
        passed: first_failure.is_none(),
        first_failure,
        checks,
    })
}

fn order(q: f64) -> EntropyOrder {
    EntropyOrder::new(q).expect("fixed orders are valid")
}

fn chain(seed: u64) -> Measured {
    let qs = [0.7, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0, 5.0];
    let mut worst: f64 = 0.0;
    for t in 0..2000 {
        let mut r = trial_rng(seed, t);
        let n = r.gen_range(2..=64);
        let p = random_simplex(&mut r, n);
        for &q in &qs {
            let report = inequality_chain(&p, order(q), 0.0).expect("orders are positive");
            for link in &report.links {
                if -link.slack > worst {
                    worst = -link.slack;
                }
            }
        }
    }
    Measured {
        metric: worst,
        tolerance: 1e-10,
        detail: format!("2000 distributions x {} orders, largest negative slack {worst:e}", qs.len()),
    }
}

fn w_residual(seed: u64) -> Measured {
    let mut worst: f64 = 0.0;
    let mut r = trial_rng(seed, 0);
    for _ in 0..10_000 {
        let x0 = BRANCH_POINT + r.gen::<f64>() * (1.0 - BRANCH_POINT) * 10f64.powi(r.gen_range(0..6));
        let v = w0(x0).expect("in domain");
        worst = worst.max((v.w * v.w.exp() - x0).abs() / x0.abs().max(1.0));
        let x1 = BRANCH_POINT * r.gen::<f64>().powi(r.gen_range(1..40)).max(1e-300);
        let x1 = x1.clamp(BRANCH_POINT, -f64::MIN_POSITIVE);
        let v = w_minus1(x1).expect("in domain");
        worst = worst.max((v.w * v.w.exp() - x1).abs() / x1.abs().max(1.0));
    }
    Measured {
        metric: worst,
        tolerance: 1e-13,
        detail: format!("10000 points per branch, max scaled residual {worst:e}"),
    }
}

fn branch_meet(_: u64) -> Measured {
    let a = (w0(BRANCH_POINT).expect("branch point").w + 1.0).abs();
    let b = (w_minus1(BRANCH_POINT).expect("branch point").w + 1.0).abs();
    Measured {
        metric: a.max(b),
        tolerance: 1e-12,
        detail: format!("|W0(-1/e) + 1| = {a:e}, |W-1(-1/e) + 1| = {b:e}"),
    }
}

fn schur(kind: EntropyKind, q: f64, seed: u64) -> Measured {
    let r = schur_concavity_probe(kind, order(q), 5, 2000, seed, Execution::Sequential).expect("valid probe");
    Measured {
        metric: r.violations as f64,
        tolerance: 0.0,
        detail: format!("{} at q = {q}, n = 5: {} violations in {} trials", kind.name(), r.violations, r.trials),
    }
}

fn psi_structure(_: u64) -> Measured {
    let below = psi_roots(0.49, 1e-6, 1e6, PSI_GRID_POINTS).expect("valid order");
    let above = psi_roots(0.75, 1e-6, 1e6, PSI_GRID_POINTS).expect("valid order");
    let mismatch = below.roots.len().abs_diff(3) + above.roots.len().abs_diff(1);
    Measured {
        metric: mismatch as f64,
        tolerance: 0.0,
        detail: format!("{} roots at q = 0.49, {} at q = 0.75", below.roots.len(), above.roots.len()),
    }
}

fn cascade(_: u64) -> Measured {
    let series: Vec<_> = (6..=12)
        .map(|k| cascade_generate(&CascadeSpec::new(vec![0.3, 0.7], k).expect("valid cascade")))
        .collect();
    let q_grid: Vec<f64> = (0..=20).map(|k| -5.0 + 0.5 * k as f64).collect();
    let spec = tau_regress(&series, &q_grid, Execution::Sequential)
        .and_then(legendre)
        .expect("cascade spectrum");
    let mut worst: f64 = 0.0;
    for (q, tau) in spec.q_grid.iter().zip(&spec.tau) {
        let exact = -(0.3f64.powf(*q) + 0.7f64.powf(*q)).log2();
        worst = worst.max(if exact.abs() > 1e-12 { (tau / exact - 1.0).abs() } else { tau.abs() });
    }
    if !spec.concave {
        worst = worst.max(f64::INFINITY);
    }
    Measured {
        metric: worst,
        tolerance: 0.01,
        detail: format!("max relative tau error {worst:e} on q in [-5, 5], concave f(a): {}", spec.concave),
    }
}

fn gibbs_limit(seed: u64) -> Measured {
    let mut r = trial_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for omega in [0.1, 1.0, 5.0] {
        let e: Vec<f64> = (0..8).map(|_| r.gen_range(0.0..2.0)).collect();
        let e_min = e.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = e.iter().map(|x| (-omega * (x - e_min)).exp()).collect();
        let z: f64 = w.iter().sum();
        for q in [1.0 - 1e-6, 1.0 + 1e-6] {
            for kind in [ConstraintKind::Escort, ConstraintKind::Linear] {
                let pr = MaxEntProblem::new(EnergySpectrum::new(e.clone()).expect("finite"), q, omega, kind)
                    .expect("valid problem");
                let sol = solve(&pr, &SolverOptions::default()).expect("solver runs");
                let d = sol.p.probs().iter().zip(&w).map(|(p, w)| (p - w / z).abs()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
    }
    Measured {
        metric: worst,
        tolerance: 1e-4,
        detail: format!("q = 1 +/- 1e-6, 12 solves, max L-inf to Gibbs {worst:e}"),
    }
}

fn solver_dominance(seed: u64) -> Measured {
    let mut worst: f64 = 0.0;
    let (mut unconverged, mut loose) = (0, 0);
    for t in 0..24 {
        let mut r = trial_rng(seed, t);
        let n = r.gen_range(2..=6);
        let e: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
        let q = if r.gen_bool(0.4) { r.gen_range(0.55..0.97) } else { r.gen_range(1.03..3.0) };
        let omega = r.gen_range(0.0..3.0);
        let kind = if t % 2 == 0 { ConstraintKind::Escort } else { ConstraintKind::Linear };
        let pr = MaxEntProblem::new(EnergySpectrum::new(e).expect("finite"), q, omega, kind).expect("valid");
        let sol = solve(&pr, &SolverOptions::default()).expect("solver runs");
        if !sol.converged {
            unconverged += 1;
            continue;
        }
        if sol.stationarity_residual > 1e-8 {
            loose += 1;
        }
        let best = pr.objective(&sol.p);
        for _ in 0..100 {
            let other = random_simplex(&mut r, n);
            let s = 10f64.powi(-r.gen_range(1..5));
            let mixed: Vec<f64> = sol.p.probs().iter().zip(other.probs()).map(|(a, b)| (1.0 - s) * a + s * b).collect();
            let candidate = ProbDist::normalized(mixed).expect("convex mixture");
            worst = worst.max(pr.objective(&candidate) - best);
        }
    }
    if unconverged + loose > 0 {
        worst = f64::INFINITY;
    }
    Measured {
        metric: worst,
        tolerance: 1e-12,
        detail: format!(
            "24 random problems, {unconverged} unconverged, {loose} with residual above 1e-8, max objective gain under perturbation {worst:e}"
        ),
    }
}

fn high_temperature(seed: u64) -> Measured {
    let mut r = trial_rng(seed, 0);
    let mut worst: f64 = 0.0;
    let mut scored = 0;
    for q in [0.6, 0.8, 1.3, 2.0] {
        for kind in [ConstraintKind::Escort, ConstraintKind::Linear] {
            let n = r.gen_range(2..=8);
            let e: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
            let s = EnergySpectrum::new(e).expect("finite");
            let sol = solve(
                &MaxEntProblem::new(s.clone(), q, 1e-3, kind).expect("valid"),
                &SolverOptions::default(),
            )
            .expect("solver runs");
            let st = ThermoState::from_solution(&sol);
            let ht = match kind {
                ConstraintKind::Escort => high_temp_escort(&s, order(q), 1e-3, &st),
                ConstraintKind::Linear => high_temp_linear(&s, order(q), 1e-3, &st),
            }
            .expect("high-temperature form");
            if ht.in_regime {
                scored += 1;
                let d = ht.p.probs().iter().zip(sol.p.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
    }
    Measured {
        metric: worst,
        tolerance: 1e-4,
        detail: format!("Omega = 1e-3, {scored} in-regime cases, max L-inf {worst:e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(filter: Option<&str>, fault: bool) -> VerifyOptions {
        VerifyOptions {
            seed: 0,
            filter: filter.map(str::to_string),
            inject_fault: fault,
            exec: Execution::default(),
        }
    }

    #[test]
    fn filter_selects_group() {
        let r = verify_suite(&opts(Some("schur"), false)).unwrap();
        assert!(r.checks.iter().all(|c| c.group == "schur"));
        assert_eq!(r.checks.len(), 4);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn unmatched_filter_is_a_usage_error() {
        assert!(matches!(verify_suite(&opts(Some("nothing"), false)), Err(CliError::Usage(_))));
    }

    #[test]
    fn fault_names_the_failing_check() {
        let r = verify_suite(&opts(Some("lambert"), true)).unwrap();
        assert!(!r.passed);
        assert_eq!(r.first_failure.as_deref(), Some("lambert/w_residual"));
    }
}
