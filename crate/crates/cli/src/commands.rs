//! Subcommand implementations. Each returns its primary output as text and
//! writes any requested side files.

use std::path::Path;

use qentropy::asymptotics::{
    high_temp_escort, high_temp_linear, low_temp_escort, low_temp_linear, LowTempConfig, ThermoState,
};
use qentropy::entropy::{hybrid_dq, inequality_chain};
use qentropy::lambert::lambert_w;
use qentropy::majorization::{
    exp_neg_qmean_concavity_check, psi, psi_roots, schur_concavity_probe, two_event_curve, SegmentSampler,
};
use qentropy::maxent::solve;
use qentropy::multifractal::{box_count, legendre, tau_regress, WeightedPoints};
use qentropy::{
    ConstraintKind, EnergySpectrum, EntropyKind, EntropyOrder, Execution, MaxEntProblem, ProbDist, SolverOptions,
};
use serde::Serialize;

use crate::config::{
    AsymptoteArgs, Command, EntropyArgs, MaxentArgs, MfaArgs, ProbeArgs, PsiArgs, RegimeArg, RunConfig, SegmentArg,
    VerifyArgs, WArgs, MAX_ITER_ENV,
};
use crate::error::CliError;
use crate::io::{read_column, read_points, to_json, to_tsv, write_file, Cell};
use crate::verify::{verify_suite, VerifyOptions};

/// Result of a run: the primary output and, when the computation itself
/// failed, the reason (exit code 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, failure: None }
    }
}

/// Solver options with the iteration cap taken from the environment.
pub fn solver_options_from_env() -> Result<SolverOptions, CliError> {
    let mut opts = SolverOptions::default();
    if let Ok(raw) = std::env::var(MAX_ITER_ENV) {
        opts.max_iter = raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{MAX_ITER_ENV} must be a positive integer, got `{raw}`")))?;
    }
    Ok(opts)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Entropy(a) => entropy(a),
        Command::Maxent(a) => maxent(a),
        Command::Asymptote(a) => asymptote(a),
        Command::Probe(a) => probe(a, cfg.seed),
        Command::PsiRoots(a) => psi_command(a),
        Command::Mfa(a) => mfa(a),
        Command::W(a) => w(a),
        Command::Verify(a) => verify(a, cfg.seed),
    }
}

fn order(q: f64) -> Result<EntropyOrder, CliError> {
    Ok(EntropyOrder::new(q)?)
}

#[derive(Serialize)]
struct EntropyRecord {
    name: &'static str,
    q: f64,
    value: f64,
}

#[derive(Serialize)]
struct EntropyReport {
    n: usize,
    records: Vec<EntropyRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<qentropy::entropy::ChainReport>,
}

fn entropy(a: &EntropyArgs) -> Result<Outcome, CliError> {
    let probs = match (&a.probs, &a.input) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => read_column(path)?,
        (None, None) => return Err(CliError::Usage("either --probs or --input is required".into())),
    };
    let p = ProbDist::new(probs)?;
    let q = order(a.q)?;
    let records = a
        .kind
        .kinds()
        .into_iter()
        .map(|kind| {
            let value = match kind {
                EntropyKind::Hybrid if !a.relaxed => hybrid_dq(&p, q)?,
                _ => kind.evaluate(&p, q),
            };
            Ok(EntropyRecord {
                name: kind.name(),
                q: a.q,
                value,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let chain = if a.chain { Some(inequality_chain(&p, q, 1e-10)?) } else { None };
    let failure = chain
        .as_ref()
        .filter(|c| !c.passed())
        .map(|_| "entropy inequality chain violated".to_string());
    Ok(Outcome {
        output: to_json(&EntropyReport {
            n: p.len(),
            records,
            chain,
        }),
        failure,
    })
}

fn spectrum(path: &Path) -> Result<EnergySpectrum, CliError> {
    Ok(EnergySpectrum::new(read_column(path)?)?)
}

#[derive(Serialize)]
struct SolutionRecord<'a> {
    constraint: &'static str,
    q: f64,
    omega: f64,
    p: &'a [f64],
    phi: f64,
    kappa: f64,
    mean_energy: f64,
    dq_max: f64,
    zero_levels: &'a [usize],
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn maxent(a: &MaxentArgs) -> Result<Outcome, CliError> {
    let kind = ConstraintKind::from(a.constraint);
    let problem = MaxEntProblem::new(spectrum(&a.energies)?, a.q, a.omega, kind)?;
    let mut opts = solver_options_from_env()?;
    opts.branch = a.branch;
    if let Some(d) = a.damping {
        opts.damping = d;
    }
    let sol = solve(&problem, &opts)?;
    let output = to_json(&SolutionRecord {
        constraint: kind.name(),
        q: a.q,
        omega: a.omega,
        p: sol.p.probs(),
        phi: sol.phi,
        kappa: sol.kappa,
        mean_energy: sol.mean_energy,
        dq_max: sol.dq_max,
        zero_levels: &sol.zero_levels,
        residual: sol.stationarity_residual,
        iterations: sol.iterations,
        converged: sol.converged,
    });
    let failure = (!sol.converged).then(|| {
        format!(
            "solver did not converge after {} iterations (residual {:e})",
            sol.iterations, sol.stationarity_residual
        )
    });
    Ok(Outcome { output, failure })
}

#[derive(Clone, Copy, Serialize)]
struct AsymptoteMeta {
    constraint: &'static str,
    q: f64,
    omega: f64,
    state_source: &'static str,
    state: ThermoState,
    solver_converged: Option<bool>,
}

#[derive(Serialize)]
struct AsymptoteReport<T: Serialize> {
    regime: &'static str,
    #[serde(flatten)]
    meta: AsymptoteMeta,
    result: T,
}

fn asymptote_json<T: Serialize>(regime: &'static str, meta: AsymptoteMeta, result: T) -> String {
    to_json(&AsymptoteReport { regime, meta, result })
}

fn asymptote(a: &AsymptoteArgs) -> Result<Outcome, CliError> {
    let s = spectrum(&a.energies)?;
    let kind = ConstraintKind::from(a.constraint);
    let q = order(a.q)?;
    let (state, source, converged) = match (a.kappa, a.phi) {
        (Some(k), Some(phi)) => (ThermoState::supplied(k, phi), "supplied", None),
        _ => {
            let problem = MaxEntProblem::new(s.clone(), a.q, a.omega, kind)?;
            let sol = solve(&problem, &solver_options_from_env()?)?;
            (ThermoState::from_solution(&sol), "solver", Some(sol.converged))
        }
    };
    let cfg = LowTempConfig {
        exclusion_half_width: a.exclusion,
        branch: a.branch,
        ..LowTempConfig::default()
    };
    let meta = AsymptoteMeta {
        constraint: kind.name(),
        q: a.q,
        omega: a.omega,
        state_source: source,
        state,
        solver_converged: converged,
    };
    let levels = s.levels();
    let (output, rows): (String, Vec<Vec<Cell>>) = match (a.regime, kind) {
        (RegimeArg::High, _) => {
            let r = match kind {
                ConstraintKind::Escort => high_temp_escort(&s, q, a.omega, &state)?,
                ConstraintKind::Linear => high_temp_linear(&s, q, a.omega, &state)?,
            };
            let rows = levels
                .iter()
                .zip(r.p.probs())
                .map(|(&e, &p)| vec![e.into(), (e - state.mean_energy).into(), p.into(), "high".into()])
                .collect();
            (asymptote_json("high", meta, r), rows)
        }
        (RegimeArg::Low, ConstraintKind::Escort) => {
            let r = low_temp_escort(&s, q, a.omega, &state, &cfg)?;
            let rows = (0..levels.len())
                .map(|i| {
                    vec![
                        levels[i].into(),
                        r.delta_e[i].into(),
                        r.p[i].into(),
                        format!("{:?}", r.parts[i]).as_str().into(),
                    ]
                })
                .collect();
            (asymptote_json("low", meta, r), rows)
        }
        (RegimeArg::Low, ConstraintKind::Linear) => {
            let r = low_temp_linear(&s, q, a.omega, &state, &cfg)?;
            let p = r.normalized();
            let rows = (0..levels.len())
                .map(|i| {
                    vec![
                        levels[i].into(),
                        r.delta_e[i].into(),
                        p[i].into(),
                        format!("{:?}", r.status[i]).as_str().into(),
                    ]
                })
                .collect();
            (asymptote_json("low", meta, r), rows)
        }
    };
    if let Some(path) = &a.grid {
        write_file(path, &to_tsv(&["energy", "delta_e", "p", "part"], &rows))?;
    }
    Ok(Outcome::ok(output))
}

#[derive(Serialize)]
struct ProbeOutput {
    schur: qentropy::majorization::SchurProbeReport,
    violation_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    concavity: Option<qentropy::majorization::ConcavityReport>,
}

fn probe(a: &ProbeArgs, seed: u64) -> Result<Outcome, CliError> {
    let q = order(a.q)?;
    let kind = EntropyKind::from(a.entropy);
    let exec = Execution::default();
    let schur = schur_concavity_probe(kind, q, a.n, a.trials, seed, exec)?;
    let concavity = a
        .segments
        .map(|seg| {
            let sampler = match seg {
                SegmentArg::Interior => SegmentSampler::Interior,
                SegmentArg::NearBoundary => SegmentSampler::NearBoundary,
            };
            exp_neg_qmean_concavity_check(q, a.n, a.trials, seed, sampler, exec)
        })
        .transpose()?;
    if let Some(path) = &a.curve {
        let curve = two_event_curve(kind, q, a.curve_points)?;
        let rows: Vec<Vec<Cell>> = curve.iter().map(|&(p, v)| vec![p.into(), v.into()]).collect();
        write_file(path, &to_tsv(&["p", kind.name()], &rows))?;
    }
    Ok(Outcome::ok(to_json(&ProbeOutput {
        violation_rate: schur.violation_rate(),
        schur,
        concavity,
    })))
}

fn psi_command(a: &PsiArgs) -> Result<Outcome, CliError> {
    if a.y_min >= a.y_max {
        return Err(CliError::Usage(format!(
            "--y-min ({}) must be below --y-max ({})",
            a.y_min, a.y_max
        )));
    }
    let report = psi_roots(a.q, a.y_min, a.y_max, a.grid_points)?;
    if let Some(path) = &a.curve {
        let m = a.curve_points.max(2);
        let (lo, hi) = (a.y_min.ln(), a.y_max.ln());
        let rows = (0..m)
            .map(|k| {
                let y = (lo + (hi - lo) * k as f64 / (m - 1) as f64).exp();
                Ok(vec![y.into(), psi(a.q, y)?.into()])
            })
            .collect::<Result<Vec<Vec<Cell>>, CliError>>()?;
        write_file(path, &to_tsv(&["y", "psi"], &rows))?;
    }
    Ok(Outcome::ok(to_json(&report)))
}

fn mfa(a: &MfaArgs) -> Result<Outcome, CliError> {
    if !(a.q_min < a.q_max) {
        return Err(CliError::Usage(format!("--q-min ({}) must be below --q-max ({})", a.q_min, a.q_max)));
    }
    let steps = ((a.q_max - a.q_min) / a.q_step + 1e-9).floor() as usize;
    if steps < 2 {
        return Err(CliError::Usage("the q grid needs at least 3 points".into()));
    }
    let q_grid: Vec<f64> = (0..=steps).map(|k| a.q_min + k as f64 * a.q_step).collect();
    let mut eps = a.eps_list.clone();
    eps.sort_by(|x, y| y.total_cmp(x));
    eps.dedup();
    let table = read_points(&a.input, a.weighted)?;
    let samples = match table.weights {
        Some(w) => WeightedPoints::new(table.dim, table.coords, w)?,
        None => WeightedPoints::unweighted(table.dim, table.coords)?,
    };
    let exec = Execution::default();
    let counted = box_count(&samples, &eps, exec)?;
    if counted.degenerate {
        return Err(CliError::Numeric("the sample is a single point; the spectrum is degenerate".into()));
    }
    let spec = legendre(tau_regress(&counted.measures, &q_grid, exec)?)?;
    let rows: Vec<Vec<Cell>> = (0..spec.q_grid.len())
        .map(|k| {
            vec![
                spec.q_grid[k].into(),
                spec.tau[k].into(),
                spec.a[k].into(),
                spec.f[k].into(),
                spec.r2[k].into(),
                spec.a_mean[k].into(),
                spec.delta_a[k].into(),
            ]
        })
        .collect();
    if !spec.poor_fit.is_empty() {
        eprintln!("warning: r2 below 0.99 at {} orders", spec.poor_fit.len());
    }
    if !spec.concave {
        eprintln!("warning: f(a) is not concave on this grid");
    }
    Ok(Outcome::ok(to_tsv(&["q", "tau", "a", "f", "r2", "a_mean", "delta_a"], &rows)))
}

fn w(a: &WArgs) -> Result<Outcome, CliError> {
    let v = lambert_w(a.branch, a.x)?;
    let failure = (!v.is_certified()).then(|| format!("residual {:e} exceeds the certification bound", v.residual));
    Ok(Outcome {
        output: to_json(&v),
        failure,
    })
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<Outcome, CliError> {
    let report = verify_suite(&VerifyOptions {
        seed,
        filter: a.filter.clone(),
        inject_fault: a.inject_fault,
        exec: Execution::default(),
    })?;
    let failure = report.first_failure.clone().map(|name| format!("invariant failed: {name}"));
    Ok(Outcome {
        output: to_json(&report),
        failure,
    })
}
