//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{linf, oracle_maxent, ref_gibbs, ref_shannon};
use qentropy::asymptotics::{high_temp_escort, high_temp_linear, low_temp_escort, LevelPart, LowTempConfig, ThermoState};
use qentropy::entropy::{hybrid_dq, inequality_chain, q_log};
use qentropy::lambert::{w0, w_minus1, BRANCH_POINT};
use qentropy::majorization::{psi_roots, psi_transition, random_simplex, two_event_curve, PSI_GRID_POINTS};
use qentropy::maxent::solve;
use qentropy::multifractal::{cascade_generate, default_q_grid, legendre, tau_regress, CascadeSpec};
use qentropy::par::{map_indexed, Execution};
use qentropy::{
    ConstraintKind, EnergySpectrum, EntropyKind, EntropyOrder, MaxEntProblem, ProbDist, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn order(q: f64) -> EntropyOrder {
    EntropyOrder::new(q).unwrap()
}

/// Mix of flat and sharply peaked distributions.
fn sample_dist(r: &mut ChaCha8Rng, n: usize) -> ProbDist {
    let base = random_simplex(r, n);
    let sharpen: f64 = r.gen_range(0.2..6.0);
    ProbDist::normalized(base.probs().iter().map(|p| p.powf(sharpen).max(1e-300)).collect()).unwrap()
}

fn inequality_chain_criterion() -> Outcome {
    let qs = [0.5, 0.7, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0, 5.0];
    let start = Instant::now();
    let violations: Vec<(f64, String)> = map_indexed(Execution::default(), 10_000, |t| {
        let mut r = rng(1, t as u64);
        let n = r.gen_range(2..=64);
        let p = sample_dist(&mut r, n);
        qs.iter()
            .flat_map(|&q| {
                let report = inequality_chain(&p, order(q), 1e-10).unwrap();
                report.violations().map(|l| (q, format!("{} <= {}", l.lower, l.upper))).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let secs = start.elapsed().as_secs_f64();
    let mut by_case = std::collections::BTreeMap::<String, usize>::new();
    for (q, link) in &violations {
        *by_case.entry(format!("q={q} {link}")).or_default() += 1;
    }
    let breakdown: Vec<String> = by_case.iter().map(|(k, c)| format!("{k}: {c}")).collect();
    Outcome {
        pass: violations.is_empty() && secs < 10.0,
        detail: format!(
            "90000 chains, {} violations [{}], {secs:.2} s",
            violations.len(),
            breakdown.join("; ")
        ),
    }
}

fn lambert_criterion() -> Outcome {
    let start = Instant::now();
    let per_branch = 100_000;
    let principal = map_indexed(Execution::default(), per_branch, |k| {
        let t = (k as f64 + 0.5) / per_branch as f64;
        let x = match k % 3 {
            0 => BRANCH_POINT * (1.0 - t),
            1 => (t * 700.0 - 350.0).exp(),
            _ => BRANCH_POINT + t * t * 1e-6,
        };
        let v = w0(x).unwrap();
        (v.w * v.w.exp() - x).abs() / x.abs().max(1.0)
    });
    let minus_one = map_indexed(Execution::default(), per_branch, |k| {
        let t = (k as f64 + 0.5) / per_branch as f64;
        let x = match k % 2 {
            0 => BRANCH_POINT * (1.0 - t),
            _ => -(-690.0 * t).exp() / std::f64::consts::E,
        };
        let v = w_minus1(x).unwrap();
        (v.w * v.w.exp() - x).abs() / x.abs().max(1.0)
    });
    let worst0 = principal.iter().copied().fold(0.0, f64::max);
    let worst1 = minus_one.iter().copied().fold(0.0, f64::max);
    let meet0 = (w0(BRANCH_POINT).unwrap().w + 1.0).abs();
    let meet1 = (w_minus1(BRANCH_POINT).unwrap().w + 1.0).abs();
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst0 <= 1e-13 && worst1 <= 1e-13 && meet0 <= 1e-12 && meet1 <= 1e-12 && secs < 5.0,
        detail: format!(
            "max scaled residual W0 {worst0:.1e}, W-1 {worst1:.1e}; branch meet {meet0:.1e}/{meet1:.1e}; {secs:.2} s"
        ),
    }
}

fn gibbs_criterion() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(3, 0);
    for omega in [0.1, 1.0, 5.0] {
        for _ in 0..4 {
            let e: Vec<f64> = (0..8).map(|_| r.gen_range(0.0..2.0)).collect();
            let g = ref_gibbs(&e, omega);
            for q in [1.0 - 1e-6, 1.0 + 1e-6] {
                for kind in [ConstraintKind::Escort, ConstraintKind::Linear] {
                    let pr = MaxEntProblem::new(EnergySpectrum::new(e.clone()).unwrap(), q, omega, kind).unwrap();
                    let sol = solve(&pr, &SolverOptions::default()).unwrap();
                    worst = worst.max(linf(sol.p.probs(), &g));
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-4,
        detail: format!("48 solves, max L-inf to Gibbs {worst:.2e}"),
    }
}

fn oracle_criterion() -> Outcome {
    let cases: Vec<(ConstraintKind, u64)> = [ConstraintKind::Escort, ConstraintKind::Linear]
        .into_iter()
        .flat_map(|k| (0..50).map(move |i| (k, i)))
        .collect();
    let results = map_indexed(Execution::default(), cases.len(), |c| {
        let (kind, i) = cases[c];
        let mut r = rng(4, i + if kind == ConstraintKind::Linear { 1000 } else { 0 });
        let n = r.gen_range(2..=4);
        let e: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
        let q = if r.gen_bool(0.4) { r.gen_range(0.55..0.97) } else { r.gen_range(1.03..3.0) };
        let omega = r.gen_range(0.0..3.0);
        let pr = MaxEntProblem::new(EnergySpectrum::new(e.clone()).unwrap(), q, omega, kind).unwrap();
        let sol = solve(&pr, &SolverOptions::default()).unwrap();
        let oracle = oracle_maxent(&e, q, omega, kind == ConstraintKind::Linear);
        let residual_ok = !sol.converged || sol.stationarity_residual <= 1e-8;
        (linf(sol.p.probs(), &oracle), residual_ok, sol.converged)
    });
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let bad_residual = results.iter().filter(|r| !r.1).count();
    let converged = results.iter().filter(|r| r.2).count();
    Outcome {
        pass: worst <= 1e-5 && bad_residual == 0,
        detail: format!(
            "100 cases, max L-inf {worst:.2e}, {converged} converged, {bad_residual} residuals above 1e-8"
        ),
    }
}

/// Real `x^(1/m)` for odd `m`.
fn odd_root(x: f64, m: f64) -> f64 {
    x.signum() * x.abs().powf(1.0 / m)
}

fn low_temperature_criterion() -> Outcome {
    let (kappa, phi, q, omega) = (0.01, -0.68, 30.0, 0.5);
    let grid: Vec<f64> = (0..=200).map(|k| -0.5 + k as f64 * 0.005).collect();
    let s = EnergySpectrum::new(grid.clone()).unwrap();
    let d = low_temp_escort(&s, order(q), omega, &ThermoState::supplied(kappa, phi), &LowTempConfig::default())
        .unwrap();
    let total: f64 = d.p.iter().sum();

    let left: Vec<(f64, f64)> = (0..grid.len())
        .filter(|&i| d.parts[i] == LevelPart::Boltzmann)
        .map(|i| (grid[i], d.p[i].ln()))
        .collect();
    let slope = {
        let n = left.len() as f64;
        let mx = left.iter().map(|v| v.0).sum::<f64>() / n;
        let my = left.iter().map(|v| v.1).sum::<f64>() / n;
        left.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum::<f64>() / left.iter().map(|v| (v.0 - mx).powi(2)).sum::<f64>()
    };
    let expected_slope = -omega / phi.abs();
    let slope_err = (slope / expected_slope - 1.0).abs();

    let log_arg = (kappa * (q - 1.0) / (phi.abs() * q) * ((q - 1.0) / q).exp()).ln();
    let z2 = odd_root(q / (kappa * (q - 1.0)) * log_arg, q - 1.0);
    let omega_star = omega / phi.abs() / log_arg;
    let disb = |de: f64| odd_root(1.0 - (1.0 - q) * omega_star * de, 1.0 - q) / z2;
    let right: Vec<usize> = (0..grid.len()).filter(|&i| d.parts[i] == LevelPart::HeavyTail).collect();
    let right_err = right
        .iter()
        .map(|&i| (d.p[i] / (d.scale * disb(grid[i])) - 1.0).abs())
        .fold(0.0, f64::max);

    Outcome {
        pass: (total - 1.0).abs() <= 1e-6
            && left.len() >= 2
            && slope_err <= 0.01
            && !right.is_empty()
            && right_err <= 1e-9,
        detail: format!(
            "mass {total:.12}, left flank {} levels slope {slope:.6} (target {expected_slope:.6}), right flank {} levels max rel dev {right_err:.1e}, {} sewn",
            left.len(),
            right.len(),
            d.sew.gap_levels.len()
        ),
    }
}

fn schur_boundary_criterion() -> Outcome {
    let q_star = psi_transition(0.49, 0.51, 1e-4).unwrap();
    let below = psi_roots(0.49, 1e-6, 1e6, PSI_GRID_POINTS).unwrap();
    let above = psi_roots(0.51, 1e-6, 1e6, PSI_GRID_POINTS).unwrap();
    let symmetric = below.roots.len() == 3
        && below.roots[1] == 1.0
        && (below.roots[0] * below.roots[2] - 1.0).abs() <= 1e-9;
    let curve = two_event_curve(EntropyKind::Hybrid, order(0.4), 1001).unwrap();
    let (p_max, _) = curve.iter().copied().fold((0.5, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    let offset = (p_max - 0.5).abs();
    Outcome {
        pass: (q_star - 0.5).abs() <= 0.005 && symmetric && above.roots.len() == 1 && offset >= 1e-3,
        detail: format!(
            "q* = {q_star:.5}, roots at 0.49: {:?}, at 0.51: {:?}, D_0.4 argmax offset {offset:.3}",
            below.roots,
            above.roots
        ),
    }
}

fn cascade_criterion() -> Outcome {
    let start = Instant::now();
    let series: Vec<_> = (6..=14)
        .map(|k| cascade_generate(&CascadeSpec::new(vec![0.3, 0.7], k).unwrap()))
        .collect();
    let spec = legendre(tau_regress(&series, &default_q_grid(), Execution::default()).unwrap()).unwrap();
    let analytic = |q: f64| -(0.3f64.powf(q) + 0.7f64.powf(q)).log2();
    let mut worst: f64 = 0.0;
    let mut tau_one = f64::NAN;
    let mut fixed_point = f64::NAN;
    for (i, &q) in spec.q_grid.iter().enumerate() {
        let exact = analytic(q);
        if exact.abs() > 1e-12 {
            worst = worst.max((spec.tau[i] / exact - 1.0).abs());
        }
        if (q - 1.0).abs() < 1e-12 {
            tau_one = spec.tau[i].abs();
            fixed_point = (spec.f[i] - spec.a[i]).abs();
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 0.01 && tau_one <= 1e-6 && spec.concave && fixed_point <= 1e-3 && secs < 30.0,
        detail: format!(
            "max rel tau error {worst:.1e}, |tau(1)| {tau_one:.1e}, f concave {}, |f(a(1)) - a(1)| {fixed_point:.1e}, {secs:.2} s",
            spec.concave
        ),
    }
}

fn asymptotic_criterion() -> Outcome {
    let mut worst: f64 = 0.0;
    let (mut scored, mut outside) = (0, 0);
    let mut r = rng(8, 0);
    for q in [0.6, 0.8, 1.3, 2.0, 3.0] {
        for kind in [ConstraintKind::Escort, ConstraintKind::Linear] {
            for _ in 0..3 {
                let n = r.gen_range(2..=16);
                let e: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
                let s = EnergySpectrum::new(e).unwrap();
                let sol = solve(&MaxEntProblem::new(s.clone(), q, 1e-3, kind).unwrap(), &SolverOptions::default())
                    .unwrap();
                let st = ThermoState::from_solution(&sol);
                let ht = match kind {
                    ConstraintKind::Escort => high_temp_escort(&s, order(q), 1e-3, &st),
                    ConstraintKind::Linear => high_temp_linear(&s, order(q), 1e-3, &st),
                }
                .unwrap();
                if ht.in_regime {
                    scored += 1;
                    worst = worst.max(linf(ht.p.probs(), sol.p.probs()));
                } else {
                    outside += 1;
                }
            }
        }
    }
    let mut star: f64 = 0.0;
    let s = EnergySpectrum::new(vec![0.0, 0.4, 1.0, 1.5]).unwrap();
    for q in [1.0 - 1e-4, 1.0 + 1e-4] {
        for omega in [0.5, 1.0, 2.0] {
            for kind in [ConstraintKind::Escort, ConstraintKind::Linear] {
                let sol =
                    solve(&MaxEntProblem::new(s.clone(), q, omega, kind).unwrap(), &SolverOptions::default()).unwrap();
                let st = ThermoState::from_solution(&sol);
                let ht = match kind {
                    ConstraintKind::Escort => high_temp_escort(&s, order(q), omega, &st),
                    ConstraintKind::Linear => high_temp_linear(&s, order(q), omega, &st),
                }
                .unwrap();
                let d = ht.params.omega_star - omega;
                star = star.max(d.abs()).max((d / omega).abs());
            }
        }
    }
    Outcome {
        pass: worst <= 1e-4 && scored >= 20 && star <= 1e-3,
        detail: format!(
            "high-T max L-inf {worst:.2e} over {scored} in-regime solves ({outside} outside the high-temperature regime); max |Omega* - Omega| {star:.2e} at q = 1 +/- 1e-4"
        ),
    }
}

fn property_battery_criterion() -> Outcome {
    let trials = 1000;
    let results = map_indexed(Execution::default(), trials, |t| {
        let mut r = rng(9, t as u64);
        let n = r.gen_range(2..=32);
        let p = sample_dist(&mut r, n);
        let q = r.gen_range(0.5..5.0);
        let dq = |p: &ProbDist, q: f64| hybrid_dq(p, order(q)).unwrap();
        let v = dq(&p, q);

        let delta = ProbDist::delta(n, r.gen_range(0..n)).unwrap();
        let decisive = dq(&delta, q).abs() <= 1e-12;
        let nonneg = v >= 0.0;
        let shannon = (dq(&p, 1.0) - ref_shannon(p.probs())).abs() <= 1e-12;
        let mut perm = p.probs().to_vec();
        for i in (1..n).rev() {
            perm.swap(i, r.gen_range(0..=i));
        }
        let symmetric = (dq(&ProbDist::new(perm).unwrap(), q) - v).abs() <= 1e-12 * v.max(1.0);
        let bounded = v <= q_log(n as f64, order(q)).unwrap() + 1e-12;
        let expansible = (dq(&p.expanded(), q) - v).abs() <= 1e-12 * v.max(1.0);
        let q2 = q + r.gen_range(0.01..3.0);
        let monotone = dq(&p, q2) <= v + 1e-12;
        [decisive, nonneg, shannon, symmetric, bounded, expansible, monotone]
    });
    let names = ["decisivity", "non-negativity", "Shannon collapse", "symmetry", "boundedness", "expansibility", "q-monotonicity"];
    let counts: Vec<usize> = (0..names.len()).map(|k| results.iter().filter(|r| !r[k]).count()).collect();
    let summary: Vec<String> = names.iter().zip(&counts).map(|(n, c)| format!("{n} {c}")).collect();
    Outcome {
        pass: counts.iter().all(|&c| c == 0),
        detail: format!("violations over {trials} distributions: {}", summary.join(", ")),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("inequality chain", inequality_chain_criterion),
        ("Lambert W certification", lambert_criterion),
        ("Gibbs limit", gibbs_criterion),
        ("solver oracle equivalence", oracle_criterion),
        ("low-temperature piecewise distribution", low_temperature_criterion),
        ("Schur boundary", schur_boundary_criterion),
        ("binomial cascade spectrum", cascade_criterion),
        ("asymptotic agreement", asymptotic_criterion),
        ("property battery", property_battery_criterion),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!("{} {}. {name}: {}", if out.pass { "PASS" } else { "FAIL" }, k + 1, out.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
