//! Maximum-entropy distributions of the hybrid entropy under an energy
//! constraint.
//!
//! The functional maximized is `L = D_q(P) − Ω⟨E⟩_r − Φ Σ p_k` with either the
//! escort moment (`r = q`) or the linear moment (`r = 1`). Stationary points
//! are written in closed form through the Lambert W function, which turns the
//! problem into a self-consistency loop on `κ = Σ p_k^q`, `⟨ln P⟩_q` and
//! `⟨E⟩_r`.
//!
//! [`solve`] runs that loop with damping, polishes the iterate by Newton's
//! method on the stationarity system and certifies the result by its
//! stationarity residual. For the linear moment with `q > 1` the maximizer can
//! leave the highest levels empty; those levels are reported in
//! [`MaxEntSolution::zero_levels`].

use serde::Serialize;

use crate::entropy::{hybrid_dq_relaxed, EntropyOrder, ProbDist};
use crate::error::{Error, Result};
use crate::lambert::{w0_exp, w_minus1, Branch, BRANCH_POINT};

/// Orders closer to 1 than this are solved as the Gibbs limit.
pub const Q_CROSSOVER: f64 = 1e-7;

/// Default stationarity certificate.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Default L∞ change between sweeps regarded as converged.
pub const CHANGE_TOLERANCE: f64 = 1e-12;

const MIN_DAMPING: f64 = 1e-3;
const NEWTON_STEPS: usize = 80;
const ASCENT_STEPS: usize = 4000;

/// Energy levels `E_1, …, E_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "an energy spectrum needs at least 2 levels, got {}",
                levels.len()
            )));
        }
        if let Some(e) = levels.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidInput(format!("energy level {e} is not finite")));
        }
        Ok(EnergySpectrum { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The same spectrum with every level moved by `c`.
    pub fn shifted(&self, c: f64) -> EnergySpectrum {
        EnergySpectrum {
            levels: self.levels.iter().map(|e| e + c).collect(),
        }
    }

    /// Level indices sorted by increasing energy (stable for ties).
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.levels[a].total_cmp(&self.levels[b]));
        idx
    }
}

/// Which energy moment is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConstraintKind {
    /// `⟨E⟩_q`, averaged with escort weights.
    Escort,
    /// `⟨E⟩_1 = Σ p_k E_k`.
    Linear,
}

impl ConstraintKind {
    /// The moment order `r`.
    pub fn moment_order(self, q: f64) -> f64 {
        match self {
            ConstraintKind::Escort => q,
            ConstraintKind::Linear => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Escort => "escort",
            ConstraintKind::Linear => "linear",
        }
    }
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "escort" => Ok(ConstraintKind::Escort),
            "linear" => Ok(ConstraintKind::Linear),
            _ => Err(Error::InvalidInput(format!(
                "unknown constraint {s:?} (expected escort or linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntProblem {
    pub spectrum: EnergySpectrum,
    pub q: EntropyOrder,
    pub omega: f64,
    pub kind: ConstraintKind,
}

impl MaxEntProblem {
    /// Validates `q >= 1/2` and a finite `Ω`.
    pub fn new(spectrum: EnergySpectrum, q: f64, omega: f64, kind: ConstraintKind) -> Result<Self> {
        let q = EntropyOrder::strict(q)?;
        if !omega.is_finite() {
            return Err(Error::domain("omega", omega, "finite"));
        }
        Ok(MaxEntProblem {
            spectrum,
            q,
            omega,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.spectrum.len()
    }

    /// `⟨E⟩_r` of `p`.
    pub fn mean_energy(&self, p: &[f64]) -> f64 {
        moment(p, self.spectrum.levels(), self.kind.moment_order(self.q.value()))
    }

    /// The objective `D_q(P) − Ω⟨E⟩_r` on the simplex.
    pub fn objective(&self, p: &ProbDist) -> f64 {
        hybrid_dq_relaxed(p, self.q) - self.omega * self.mean_energy(p.probs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Initial damping of the fixed-point sweep (halved whenever the sweep
    /// change grows).
    pub damping: f64,
    pub max_iter: usize,
    /// Lambert branch used where the W argument is negative.
    pub branch: Branch,
    pub change_tol: f64,
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            damping: 0.5,
            max_iter: 10_000,
            branch: Branch::Principal,
            change_tol: CHANGE_TOLERANCE,
            residual_tol: RESIDUAL_TOLERANCE,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::domain("damping", self.damping, "0 < damping <= 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntSolution {
    pub p: ProbDist,
    /// Normalization multiplier `Φ = −exp((q−1)⟨ln P⟩_q)`.
    pub phi: f64,
    pub kappa: f64,
    /// `⟨E⟩_r` at the solution.
    pub mean_energy: f64,
    /// `D_q` at the solution, equal to `(Φ + 1)/(q − 1)`.
    pub dq_max: f64,
    pub zero_levels: Vec<usize>,
    pub stationarity_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// The shifted energies `𝓔_i = 1 − q⟨ln P⟩_q − (qΩ/Φ)(E_i − ⟨E⟩_q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalEnergy {
    pub cal_e: Vec<f64>,
}

impl CalEnergy {
    pub fn new(spectrum: &EnergySpectrum, q: EntropyOrder, omega: f64, phi: f64, mean_energy: f64) -> Self {
        let q = q.value();
        let a = (-phi).ln() / (q - 1.0);
        let cal_e = spectrum
            .levels()
            .iter()
            .map(|e| 1.0 - q * a - q * omega / phi * (e - mean_energy))
            .collect();
        CalEnergy { cal_e }
    }

    /// Levels meeting the necessary condition `𝓔_i >= κ`.
    pub fn meets_kappa(&self, kappa: f64) -> Vec<bool> {
        self.cal_e.iter().map(|&c| c >= kappa).collect()
    }
}

/// Split of the levels into those admitting a stationary occupation in
/// `(0, 1]` and those forced to zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityPartition {
    pub feasible: Vec<usize>,
    pub zero_levels: Vec<usize>,
}

/// Canonical distribution `e^{−βE_i}/Z`.
pub fn gibbs(spectrum: &EnergySpectrum, beta: f64) -> Result<ProbDist> {
    if !beta.is_finite() {
        return Err(Error::domain("beta", beta, "finite"));
    }
    let e = spectrum.levels();
    let shift = if beta >= 0.0 {
        e.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        e.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    ProbDist::normalized(e.iter().map(|x| (-beta * (x - shift)).exp()).collect())
}

/// Largest absolute stationarity defect of `p` over its occupied levels,
/// with `Φ` given.
pub fn stationarity_residual(p: &ProbDist, problem: &MaxEntProblem, phi: f64) -> f64 {
    let q = problem.q.value();
    let r = problem.kind.moment_order(q);
    let e = problem.spectrum.levels();
    let p = p.probs();
    let kappa = power_sum(p, q);
    let a = log_mean(p, q, kappa);
    let pr = power_sum(p, r);
    let u_r = moment(p, e, r);
    let scale = ((q - 1.0) * a).exp();
    p.iter()
        .zip(e)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &ei)| {
            let entropy = scale * (q * (a - pi.ln()) - 1.0) * pi.powf(q - 1.0) / kappa;
            let energy = r * problem.omega * (ei - u_r) * pi.powf(r - 1.0) / pr;
            (entropy - energy - phi).abs()
        })
        .fold(0.0, f64::max)
}

/// Classifies levels for given `κ`, `Φ` and `⟨E⟩_r`: a level is feasible when
/// its W argument lies in the domain of the selected branch and the resulting
/// occupation lies in `(0, 1]`.
pub fn feasibility_scan(
    problem: &MaxEntProblem,
    kappa: f64,
    phi: f64,
    mean_energy: f64,
) -> Result<FeasibilityPartition> {
    if !(kappa > 0.0) {
        return Err(Error::domain("kappa", kappa, "kappa > 0"));
    }
    if !(phi < 0.0) {
        return Err(Error::domain("phi", phi, "phi < 0"));
    }
    let q = problem.q.value();
    if (q - 1.0).abs() < Q_CROSSOVER {
        return Ok(FeasibilityPartition {
            feasible: (0..problem.n()).collect(),
            zero_levels: Vec::new(),
        });
    }
    let a = (-phi).ln() / (q - 1.0);
    let mut out = FeasibilityPartition {
        feasible: Vec::new(),
        zero_levels: Vec::new(),
    };
    for (i, &e) in problem.spectrum.levels().iter().enumerate() {
        let ok = match problem.kind {
            ConstraintKind::Escort => {
                let cal = 1.0 - q * a - q * problem.omega / phi * (e - mean_energy);
                escort_roots(q, kappa, cal).iter().any(|&p| p > 0.0 && p <= 1.0 + 1e-12)
            }
            ConstraintKind::Linear => {
                let s = 1.0 + problem.omega / phi * (e - mean_energy);
                let x = -kappa * (q - 1.0) / (phi * q) * ((q - 1.0) / q).exp() * s;
                if q > 1.0 {
                    x > 0.0
                } else {
                    x >= BRANCH_POINT
                }
            }
        };
        if ok {
            out.feasible.push(i);
        } else {
            out.zero_levels.push(i);
        }
    }
    Ok(out)
}

// Both real solutions of κ p^{1−q} = q ln p + 𝓔, when they exist.
fn escort_roots(q: f64, kappa: f64, cal: f64) -> Vec<f64> {
    let ln_x = (kappa * (q - 1.0) / q).abs().ln() + (q - 1.0) * cal / q;
    let mut roots = Vec::new();
    if q > 1.0 {
        roots.push((w0_exp(ln_x) / (q - 1.0) - cal / q).exp());
    } else {
        let x = -ln_x.exp();
        if x >= BRANCH_POINT {
            for w in [w_principal(x), w_minus1(x).map(|v| v.w).unwrap_or(f64::NAN)] {
                roots.push((w / (q - 1.0) - cal / q).exp());
            }
        }
    }
    roots
}

fn w_principal(x: f64) -> f64 {
    crate::lambert::w0(x).map(|v| v.w).unwrap_or(f64::NAN)
}

/// Solves an escort-constrained problem.
pub fn solve_escort(problem: &MaxEntProblem, opts: &SolverOptions) -> Result<MaxEntSolution> {
    if problem.kind != ConstraintKind::Escort {
        return Err(Error::InvalidInput("solve_escort needs an escort constraint".into()));
    }
    solve(problem, opts)
}

/// Solves a linear-moment problem.
pub fn solve_linear(problem: &MaxEntProblem, opts: &SolverOptions) -> Result<MaxEntSolution> {
    if problem.kind != ConstraintKind::Linear {
        return Err(Error::InvalidInput("solve_linear needs a linear constraint".into()));
    }
    solve(problem, opts)
}

/// Solves either constraint kind, dispatching to [`gibbs`] for `|q − 1| < 1e−7`.
pub fn solve(problem: &MaxEntProblem, opts: &SolverOptions) -> Result<MaxEntSolution> {
    opts.validate()?;
    let q = problem.q.value();
    if (q - 1.0).abs() < Q_CROSSOVER {
        return gibbs_solution(problem);
    }
    let n = problem.n();
    let order = problem.spectrum.ascending_order();
    let supports: Vec<Vec<usize>> = if problem.kind == ConstraintKind::Linear && q > 1.0 && problem.omega != 0.0 {
        let mut s: Vec<Vec<usize>> = (1..=n)
            .map(|m| {
                let mut idx = order[..m].to_vec();
                if problem.omega < 0.0 {
                    idx = order[n - m..].to_vec();
                }
                idx.sort_unstable();
                idx
            })
            .collect();
        s.reverse();
        s
    } else {
        vec![(0..n).collect()]
    };

    let mut best: Option<Candidate> = None;
    for support in supports {
        for cand in solve_on_support(problem, opts, &support) {
            if !excluded_levels_admissible(problem, &cand) {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => match (cand.certified, b.certified) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => cand.objective > b.objective + 1e-12,
                },
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let best = best.ok_or_else(|| Error::InvalidInput("no candidate stationary point".into()))?;
    finish(problem, best)
}

struct Candidate {
    p: Vec<f64>,
    support: Vec<usize>,
    iterations: usize,
    residual: f64,
    certified: bool,
    objective: f64,
}

fn gibbs_solution(problem: &MaxEntProblem) -> Result<MaxEntSolution> {
    let p = gibbs(&problem.spectrum, problem.omega)?;
    let mean_energy = problem.mean_energy(p.probs());
    let dq_max = hybrid_dq_relaxed(&p, problem.q);
    let residual = stationarity_residual(&p, problem, -1.0);
    Ok(MaxEntSolution {
        kappa: power_sum(p.probs(), problem.q.value()),
        p,
        phi: -1.0,
        mean_energy,
        dq_max,
        zero_levels: Vec::new(),
        stationarity_residual: residual,
        iterations: 0,
        converged: true,
    })
}

fn finish(problem: &MaxEntProblem, c: Candidate) -> Result<MaxEntSolution> {
    let q = problem.q.value();
    let p = ProbDist::normalized(c.p)?;
    let kappa = power_sum(p.probs(), q);
    let a = log_mean(p.probs(), q, kappa);
    let phi = -((q - 1.0) * a).exp();
    let zero_levels = (0..problem.n()).filter(|i| !c.support.contains(i)).collect();
    Ok(MaxEntSolution {
        mean_energy: problem.mean_energy(p.probs()),
        dq_max: hybrid_dq_relaxed(&p, problem.q),
        stationarity_residual: stationarity_residual(&p, problem, phi),
        p,
        phi,
        kappa,
        zero_levels,
        iterations: c.iterations,
        converged: c.certified && c.residual.is_finite(),
    })
}

// For the linear moment an empty level is optimal only when its W argument is
// non-positive, i.e. Ω(E_i − ⟨E⟩) >= −Φ.
fn excluded_levels_admissible(problem: &MaxEntProblem, c: &Candidate) -> bool {
    if c.support.len() == problem.n() {
        return true;
    }
    let q = problem.q.value();
    let sub: Vec<f64> = c.support.iter().map(|&i| c.p[i]).collect();
    let kappa = power_sum(&sub, q);
    let phi = -((q - 1.0) * log_mean(&sub, q, kappa)).exp();
    let u = moment(&c.p, problem.spectrum.levels(), 1.0);
    (0..problem.n())
        .filter(|i| !c.support.contains(i))
        .all(|i| problem.omega * (problem.spectrum.levels()[i] - u) >= -phi)
}

fn solve_on_support(problem: &MaxEntProblem, opts: &SolverOptions, support: &[usize]) -> Vec<Candidate> {
    let n = problem.n();
    let energies: Vec<f64> = support.iter().map(|&i| problem.spectrum.levels()[i]).collect();
    let sub = SubProblem {
        e: energies,
        q: problem.q.value(),
        omega: problem.omega,
        kind: problem.kind,
    };
    let embed = |ps: &[f64]| {
        let mut p = vec![0.0; n];
        for (&i, &v) in support.iter().zip(ps) {
            p[i] = v;
        }
        p
    };
    let make = |ps: Vec<f64>, iterations: usize| {
        let residual = sub.residual(&ps);
        let certified = residual <= opts.residual_tol && ps.iter().all(|&v| v > 0.0);
        let p = embed(&ps);
        let objective = problem.objective(&ProbDist::normalized(p.clone()).expect("positive weights"));
        Candidate {
            p,
            support: support.to_vec(),
            iterations,
            residual,
            certified,
            objective,
        }
    };

    if support.len() == 1 {
        return vec![make(vec![1.0], 0)];
    }

    let mut out = Vec::new();
    let (fp, iters, done) = sub.fixed_point(opts);
    if fp.iter().all(|v| v.is_finite() && *v > 0.0) {
        if done {
            out.push(make(fp, iters));
        } else if let Some((ps, k)) = sub.newton(&fp) {
            out.push(make(ps, iters + k));
        } else {
            out.push(make(fp, iters));
        }
    }
    if opts.branch == Branch::Principal {
        let seed = sub.ascent();
        if let Some((ps, k)) = sub.newton(&seed) {
            out.push(make(ps, k));
        }
    }
    if !out.iter().any(|c| c.certified) {
        if let Some((ps, k)) = sub.continuation(opts) {
            out.push(make(ps, k));
        }
    }
    out
}

#[derive(Clone)]
struct SubProblem {
    e: Vec<f64>,
    q: f64,
    omega: f64,
    kind: ConstraintKind,
}

struct Stats {
    kappa: f64,
    a: f64,
    u: f64,
}

impl SubProblem {
    fn stats(&self, p: &[f64]) -> Stats {
        let kappa = power_sum(p, self.q);
        Stats {
            kappa,
            a: log_mean(p, self.q, kappa),
            u: moment(p, &self.e, self.kind.moment_order(self.q)),
        }
    }

    // One sweep of the closed-form W update; returns unnormalized weights.
    fn sweep(&self, p: &[f64], branch: Branch) -> Vec<f64> {
        let q = self.q;
        let s = self.stats(p);
        let phi = -((q - 1.0) * s.a).exp();
        self.e
            .iter()
            .map(|&ei| match self.kind {
                ConstraintKind::Escort => {
                    let cal = 1.0 - q * s.a - q * self.omega / phi * (ei - s.u);
                    let ln_x = (s.kappa * (q - 1.0) / q).abs().ln() + (q - 1.0) * cal / q;
                    let w = if q > 1.0 {
                        w0_exp(ln_x)
                    } else {
                        lambert_clamped(-ln_x.exp(), branch)
                    };
                    (w / (q - 1.0) - cal / q).exp()
                }
                ConstraintKind::Linear => {
                    let x = -s.kappa * (q - 1.0) / (phi * q)
                        * ((q - 1.0) / q).exp()
                        * (1.0 + self.omega / phi * (ei - s.u));
                    let w = if x > 0.0 {
                        w0_exp(x.ln())
                    } else {
                        lambert_clamped(x, branch)
                    };
                    (s.a - 1.0 / q + w / (q - 1.0)).exp()
                }
            })
            .collect()
    }

    fn fixed_point(&self, opts: &SolverOptions) -> (Vec<f64>, usize, bool) {
        let n = self.e.len();
        let mut p = vec![1.0 / n as f64; n];
        let mut damping = opts.damping;
        let mut prev = f64::INFINITY;
        for k in 1..=opts.max_iter {
            let raw = self.sweep(&p, opts.branch);
            let total: f64 = raw.iter().sum();
            if !(total.is_finite() && total > 0.0) {
                return (p, k, false);
            }
            let mut change: f64 = 0.0;
            for (pi, ri) in p.iter().zip(&raw) {
                change = change.max((ri / total - pi).abs());
            }
            if change > prev {
                damping = (damping * 0.5).max(MIN_DAMPING);
            }
            prev = change;
            for (pi, ri) in p.iter_mut().zip(&raw) {
                *pi = (1.0 - damping) * *pi + damping * ri / total;
            }
            if change <= opts.change_tol {
                let done = self.residual(&p) <= opts.residual_tol;
                return (p, k, done);
            }
        }
        (p, opts.max_iter, false)
    }

    fn residual(&self, p: &[f64]) -> f64 {
        let g = self.system(p, None);
        g[..p.len()].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    // Stationarity equations in u = ln p plus normalization. With `phi` absent
    // the multiplier is taken from its closed form.
    fn system(&self, p: &[f64], phi: Option<f64>) -> Vec<f64> {
        let q = self.q;
        let s = self.stats(p);
        let phi = phi.unwrap_or_else(|| -((q - 1.0) * s.a).exp());
        let scale = ((q - 1.0) * s.a).exp();
        let mut out: Vec<f64> = p
            .iter()
            .zip(&self.e)
            .map(|(&pi, &ei)| {
                let pq1 = pi.powf(q - 1.0);
                let t = scale * (q * (s.a - pi.ln()) - 1.0) * pq1 / s.kappa;
                let c = match self.kind {
                    ConstraintKind::Escort => q * self.omega * (ei - s.u) * pq1 / s.kappa,
                    ConstraintKind::Linear => self.omega * (ei - s.u),
                };
                t - c - phi
            })
            .collect();
        out.push(p.iter().sum::<f64>() - 1.0);
        out
    }

    fn jacobian(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let q = self.q;
        let n = p.len();
        let s = self.stats(p);
        let u: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        let rho: Vec<f64> = p.iter().map(|v| v.powf(q) / s.kappa).collect();
        let da: Vec<f64> = (0..n).map(|j| rho[j] * (1.0 + q * (u[j] - s.a))).collect();
        let scale = ((q - 1.0) * s.a).exp();
        let mut jac = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..n {
            let m = scale * p[i].powf(q - 1.0) / s.kappa;
            let b = q * (s.a - u[i]) - 1.0;
            for j in 0..n {
                let mut v = m * ((b * (q - 1.0) + q) * da[j] - b * q * rho[j]);
                v -= match self.kind {
                    ConstraintKind::Escort => {
                        let c = q * self.omega * (self.e[i] - s.u) * p[i].powf(q - 1.0) / s.kappa;
                        let du = q * rho[j] * (self.e[j] - s.u);
                        -q * self.omega * p[i].powf(q - 1.0) / s.kappa * du - c * q * rho[j]
                            + if i == j { (q - 1.0) * c } else { 0.0 }
                    }
                    ConstraintKind::Linear => -self.omega * p[j] * self.e[j],
                };
                if i == j {
                    v += m * ((q - 1.0) * b - q);
                }
                jac[i][j] = v;
            }
            jac[i][n] = -1.0;
            jac[n][i] = p[i];
        }
        jac
    }

    // Newton iteration on (ln p, Φ) with backtracking.
    fn newton(&self, start: &[f64]) -> Option<(Vec<f64>, usize)> {
        let n = start.len();
        let mut p: Vec<f64> = start.to_vec();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        let mut phi = -((self.q - 1.0) * self.stats(&p).a).exp();
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut r = self.system(&p, Some(phi));
        let mut iterations = 0;
        for _ in 0..NEWTON_STEPS {
            let rn = norm(&r);
            if !rn.is_finite() {
                return None;
            }
            if rn < 1e-14 {
                break;
            }
            iterations += 1;
            let jac = self.jacobian(&p);
            let step = solve_dense(jac, r.iter().map(|v| -v).collect())?;
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-10 {
                let trial: Vec<f64> = p.iter().zip(&step).map(|(pi, d)| pi * (t * d).exp()).collect();
                let trial_phi = phi + t * step[n];
                let tr = self.system(&trial, Some(trial_phi));
                if tr.iter().all(|v| v.is_finite()) && norm(&tr) < rn {
                    p = trial;
                    phi = trial_phi;
                    r = tr;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        Some((p, iterations))
    }

    // Homotopy in Ω: solve at a weak coupling, then raise Ω geometrically,
    // seeding Newton with the previous solution.
    fn continuation(&self, opts: &SolverOptions) -> Option<(Vec<f64>, usize)> {
        let n = self.e.len() as f64;
        let phi_uniform = (-(self.q - 1.0) * n.ln()).exp();
        let weak = 0.5 * phi_uniform / (self.q - 1.0).abs().max(1e-3);
        if self.omega.abs() <= weak {
            return None;
        }
        let at = |omega: f64| SubProblem { omega, ..self.clone() };
        let mut omega = weak * self.omega.signum();
        let (mut p, mut iterations, _) = at(omega).fixed_point(opts);
        let mut factor = 1.5;
        while omega != self.omega {
            let next = if (omega * factor).abs() >= self.omega.abs() { self.omega } else { omega * factor };
            let stage = at(next);
            match stage.newton(&p) {
                Some((ps, k)) if stage.residual(&ps) <= opts.residual_tol && ps.iter().all(|&v| v > 0.0) => {
                    p = ps;
                    omega = next;
                    iterations += k;
                }
                _ => {
                    factor = 1.0 + 0.5 * (factor - 1.0);
                    if factor < 1.0 + 1e-4 {
                        return None;
                    }
                }
            }
            if iterations > opts.max_iter {
                return None;
            }
        }
        Some((p, iterations))
    }

    fn objective(&self, p: &[f64]) -> f64 {
        let q = self.q;
        let kappa = power_sum(p, q);
        let a = log_mean(p, q, kappa);
        let dq = ((q - 1.0) * a).exp_m1() / (1.0 - q);
        dq - self.omega * moment(p, &self.e, self.kind.moment_order(q))
    }

    // Gradient ascent of the objective in softmax coordinates.
    fn ascent(&self) -> Vec<f64> {
        let n = self.e.len();
        let softmax = |z: &[f64]| {
            let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
            let t: f64 = w.iter().sum();
            w.into_iter().map(|v| v / t).collect::<Vec<f64>>()
        };
        let mut z = vec![0.0; n];
        let mut eta = 1.0;
        for _ in 0..ASCENT_STEPS {
            let p = softmax(&z);
            let obj = self.objective(&p);
            let g = self.gradient(&p);
            let mean: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
            let d: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi * (gi - mean)).collect();
            let dd: f64 = d.iter().map(|v| v * v).sum();
            if d.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-13 {
                break;
            }
            let mut moved = false;
            while eta > 1e-12 {
                let zn: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + eta * b).collect();
                let on = self.objective(&softmax(&zn));
                if on.is_finite() && on >= obj + 1e-4 * eta * dd {
                    z = zn;
                    moved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !moved {
                break;
            }
            eta *= 2.0;
        }
        softmax(&z)
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let q = self.q;
        let s = self.stats(p);
        let scale = ((q - 1.0) * s.a).exp();
        p.iter()
            .zip(&self.e)
            .map(|(&pi, &ei)| {
                let pq1 = pi.powf(q - 1.0);
                let t = scale * pq1 * (q * (s.a - pi.ln()) - 1.0) / s.kappa;
                t - match self.kind {
                    ConstraintKind::Escort => q * self.omega * pq1 * (ei - s.u) / s.kappa,
                    ConstraintKind::Linear => self.omega * ei,
                }
            })
            .collect()
    }
}

fn lambert_clamped(x: f64, branch: Branch) -> f64 {
    let x = x.max(BRANCH_POINT);
    let v = match branch {
        Branch::MinusOne if x < 0.0 => w_minus1(x),
        _ => crate::lambert::w0(x),
    };
    v.map(|v| v.w).unwrap_or(-1.0)
}

// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[piv][col].abs() > 1e-300) || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn power_sum(p: &[f64], q: f64) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|v| v.powf(q)).sum()
}

fn log_mean(p: &[f64], q: f64, kappa: f64) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v.powf(q) * v.ln())
        .sum::<f64>()
        / kappa
}

fn moment(p: &[f64], e: &[f64], r: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&pi, &ei) in p.iter().zip(e) {
        if pi > 0.0 {
            let w = pi.powf(r);
            num += w * ei;
            den += w;
        }
    }
    num / den
}
