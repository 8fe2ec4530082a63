//! Majorization, Schur-concavity probes and the two-event analysis that
//! locates the `q = 1/2` boundary of the hybrid entropy.
//!
//! `P ≺ Q` when the decreasingly sorted partial sums of `P` never exceed
//! those of `Q`. A Schur-concave entropy satisfies `F(P) >= F(Q)` whenever
//! `P ≺ Q`. Comparable pairs are produced by T-transforms (Robin Hood
//! moves), each of which pulls two coordinates towards their mean and so
//! yields a distribution majorized by its input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::entropy::{qlog_mean, EntropyKind, EntropyOrder, ProbDist};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// Slack on partial sums when comparing distributions.
pub const PARTIAL_SUM_TOLERANCE: f64 = 1e-12;

/// Default number of log-spaced grid points for [`psi_roots`].
pub const PSI_GRID_POINTS: usize = 10_000;

const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    /// `P ≺ Q`.
    PMajorizedByQ,
    /// `Q ≺ P`.
    QMajorizedByP,
    /// Both orderings hold: equal up to permutation.
    Equivalent,
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationPair {
    pub p: ProbDist,
    pub q: ProbDist,
    pub relation: Relation,
}

impl MajorizationPair {
    pub fn new(p: ProbDist, q: ProbDist) -> Result<Self> {
        let relation = majorizes(&p, &q)?;
        Ok(MajorizationPair { p, q, relation })
    }
}

fn sorted_desc(p: &ProbDist) -> Vec<f64> {
    let mut v = p.probs().to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Majorization relation between two distributions of equal length.
pub fn majorizes(p: &ProbDist, q: &ProbDist) -> Result<Relation> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let (a, b) = (sorted_desc(p), sorted_desc(q));
    let (mut sa, mut sb) = (0.0, 0.0);
    let (mut p_below, mut q_below) = (true, true);
    for j in 0..a.len().saturating_sub(1) {
        sa += a[j];
        sb += b[j];
        p_below &= sa <= sb + PARTIAL_SUM_TOLERANCE;
        q_below &= sb <= sa + PARTIAL_SUM_TOLERANCE;
    }
    Ok(match (p_below, q_below) {
        (true, true) => Relation::Equivalent,
        (true, false) => Relation::PMajorizedByQ,
        (false, true) => Relation::QMajorizedByP,
        (false, false) => Relation::Incomparable,
    })
}

/// Applies a T-transform mixing coordinates `i` and `j` with weight `lambda`.
pub fn t_transform(p: &ProbDist, i: usize, j: usize, lambda: f64) -> Result<ProbDist> {
    if i >= p.len() || j >= p.len() {
        return Err(Error::InvalidInput(format!("index out of range for n = {}", p.len())));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain("lambda", lambda, "0 <= lambda <= 1"));
    }
    let mut v = p.probs().to_vec();
    let (a, b) = (v[i], v[j]);
    v[i] = lambda * a + (1.0 - lambda) * b;
    v[j] = lambda * b + (1.0 - lambda) * a;
    ProbDist::normalized(v)
}

/// Uniform sample from the simplex (normalized exponentials).
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> ProbDist {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    ProbDist::normalized(w).expect("positive weights")
}

/// Independent, reproducible stream for trial `trial` of a seeded run.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurWitness {
    /// The majorized distribution.
    pub p: ProbDist,
    pub q: ProbDist,
    pub f_p: f64,
    pub f_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurProbeReport {
    pub kind: EntropyKind,
    pub q: f64,
    pub n: usize,
    pub trials: usize,
    pub violations: usize,
    pub witnesses: Vec<SchurWitness>,
}

impl SchurProbeReport {
    pub fn violation_rate(&self) -> f64 {
        self.violations as f64 / self.trials as f64
    }
}

/// Samples `trials` comparable pairs `P ≺ Q` and counts `F(P) < F(Q)`.
pub fn schur_concavity_probe(
    kind: EntropyKind,
    q: EntropyOrder,
    n: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SchurProbeReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("n must be at least 2".into()));
    }
    let outcomes = map_indexed(exec, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let upper = random_simplex(&mut rng, n);
        let mut lower = upper.clone();
        for _ in 0..rng.gen_range(1..=3) {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            lower = t_transform(&lower, i, j, rng.gen::<f64>()).expect("valid indices");
        }
        let f_p = kind.evaluate(&lower, q);
        let f_q = kind.evaluate(&upper, q);
        let slack = 1e-12 * f_q.abs().max(1.0);
        (f_p < f_q - slack).then_some(SchurWitness {
            p: lower,
            q: upper,
            f_p,
            f_q,
        })
    });
    let violations = outcomes.iter().filter(|w| w.is_some()).count();
    Ok(SchurProbeReport {
        kind,
        q: q.value(),
        n,
        trials,
        violations,
        witnesses: outcomes.into_iter().flatten().take(MAX_WITNESSES).collect(),
    })
}

/// `Ψ_q(y) = q ln y − (1 − y^{q−1} + y^q − y^{2q−1})/(y^q + y^{q−1})`.
pub fn psi(q: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain("y", y, "y > 0"));
    }
    if !(q > 0.0) {
        return Err(Error::domain("q", q, "q > 0"));
    }
    Ok(psi_unchecked(q, y))
}

fn psi_unchecked(q: f64, y: f64) -> f64 {
    if y < 1.0 {
        return -psi_unchecked(q, 1.0 / y);
    }
    let r = 1.0 / y;
    q * y.ln() - (y.powf(-q) - r + 1.0 - y.powf(q - 1.0)) / (1.0 + r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RootKind {
    /// `p = y/(1+y)` is a local maximum of the two-event `D_q`.
    ArgMax,
    /// `p = y/(1+y)` is an interior local minimum.
    InteriorMinimum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiRootReport {
    pub q: f64,
    pub roots: Vec<f64>,
    pub kinds: Vec<RootKind>,
    /// A near-zero of `|Ψ|` without sign change was seen on the grid.
    pub multiplicity_warning: bool,
}

/// Roots of `Ψ_q` on `[y_lo, y_hi]` by sign-change bracketing on a log grid
/// over `(1, y_hi]`, bisection and reflection `y → 1/y`.
pub fn psi_roots(q: f64, y_lo: f64, y_hi: f64, grid_points: usize) -> Result<PsiRootReport> {
    if !(q > 0.0) {
        return Err(Error::domain("q", q, "q > 0"));
    }
    if !(y_lo > 0.0 && y_lo < 1.0 && y_hi > 1.0) {
        return Err(Error::InvalidInput(format!(
            "search interval [{y_lo}, {y_hi}] must satisfy 0 < y_lo < 1 < y_hi"
        )));
    }
    if grid_points < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points".into()));
    }
    let top = y_hi.ln().max(-y_lo.ln());
    let step = top / grid_points as f64;
    let f = |y: f64| psi_unchecked(q, y);
    let mut upper = Vec::new();
    let mut warning = false;
    let mut prev_y = step.exp();
    let mut prev_v = f(prev_y);
    let mut prev_abs = [f64::INFINITY, prev_v.abs()];
    for k in 2..=grid_points {
        let y = (k as f64 * step).exp();
        let v = f(y);
        if v == 0.0 {
            upper.push(y);
        } else if prev_v != 0.0 && (v > 0.0) != (prev_v > 0.0) {
            upper.push(bisect(&f, prev_y, y));
        } else if prev_abs[1] < prev_abs[0] && prev_abs[1] < v.abs() && prev_abs[1] < 1e-10 {
            warning = true;
        }
        prev_abs = [prev_abs[1], v.abs()];
        prev_y = y;
        prev_v = v;
    }
    let mut roots: Vec<f64> = vec![1.0];
    for &r in &upper {
        if r <= y_hi {
            roots.push(r);
        }
        if 1.0 / r >= y_lo {
            roots.push(1.0 / r);
        }
    }
    roots.sort_by(f64::total_cmp);
    let kinds = roots.iter().map(|&y| classify_root(q, y)).collect();
    Ok(PsiRootReport {
        q,
        roots,
        kinds,
        multiplicity_warning: warning,
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The two-event hybrid entropy `D_q({p, 1−p})`.
pub fn two_event_dq(q: f64, p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let order = EntropyOrder::new(q).expect("q > 0");
    EntropyKind::Hybrid.evaluate(&ProbDist::two_event(p).expect("p in (0,1)"), order)
}

fn classify_root(q: f64, y: f64) -> RootKind {
    let p = y / (1.0 + y);
    let h = 1e-4 * p.min(1.0 - p);
    let d2 = two_event_dq(q, p + h) - 2.0 * two_event_dq(q, p) + two_event_dq(q, p - h);
    if d2 < 0.0 {
        RootKind::ArgMax
    } else {
        RootKind::InteriorMinimum
    }
}

/// Locates the order where the root count of `Ψ_q` changes, by bisection on
/// `[q_lo, q_hi]` (which must bracket the change).
pub fn psi_transition(q_lo: f64, q_hi: f64, tol: f64) -> Result<f64> {
    let count = |q: f64| psi_roots(q, 1e-6, 1e6, PSI_GRID_POINTS).map(|r| r.roots.len());
    let (mut lo, mut hi) = (q_lo, q_hi);
    let (c_lo, c_hi) = (count(lo)?, count(hi)?);
    if c_lo == c_hi {
        return Err(Error::InvalidInput(format!(
            "root count {c_lo} is the same at both ends of [{q_lo}, {q_hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if count(mid)? == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples `(p, F({p, 1−p}))` on a uniform grid of `p ∈ [0, 1]`; endpoint
/// values are 0.
pub fn two_event_curve(kind: EntropyKind, q: EntropyOrder, grid_size: usize) -> Result<Vec<(f64, f64)>> {
    if grid_size < 3 {
        return Err(Error::InvalidInput("grid_size must be at least 3".into()));
    }
    let last = (grid_size - 1) as f64;
    Ok((0..grid_size)
        .map(|k| {
            let p = k as f64 / last;
            let v = if k == 0 || k == grid_size - 1 {
                0.0
            } else {
                kind.evaluate(&ProbDist::two_event(p).expect("p in (0,1)"), q)
            };
            (p, v)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SegmentSampler {
    /// Endpoints uniform on the simplex.
    Interior,
    /// Endpoints with one coordinate pushed towards 0.
    NearBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub q: f64,
    pub n: usize,
    pub trials: usize,
    pub violations: usize,
    pub worst_defect: f64,
    pub counterexample: Option<(ProbDist, ProbDist)>,
}

/// Midpoint concavity of `P ↦ exp(−⟨ln P⟩_q)` along random segments:
/// `f((P+Q)/2) >= (f(P) + f(Q))/2 − 1e−10`.
pub fn exp_neg_qmean_concavity_check(
    q: EntropyOrder,
    n: usize,
    trials: usize,
    seed: u64,
    sampler: SegmentSampler,
    exec: Execution,
) -> Result<ConcavityReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("n must be at least 2".into()));
    }
    let f = |p: &ProbDist| (-qlog_mean(p, q)).exp();
    let outcomes = map_indexed(exec, trials, |t| {
        let mut rng = trial_rng(seed, t);
        let (a, b) = match sampler {
            SegmentSampler::Interior => (random_simplex(&mut rng, n), random_simplex(&mut rng, n)),
            SegmentSampler::NearBoundary => {
                let k = rng.gen_range(0..n);
                let base = random_simplex(&mut rng, n);
                let pinch = |rng: &mut ChaCha8Rng| {
                    let mut v = base.probs().to_vec();
                    v[k] = 10f64.powf(-rng.gen_range(2.0..9.0));
                    ProbDist::normalized(v).expect("positive weights")
                };
                (pinch(&mut rng), pinch(&mut rng))
            }
        };
        let mid = ProbDist::normalized(a.probs().iter().zip(b.probs()).map(|(x, y)| 0.5 * (x + y)).collect())
            .expect("positive weights");
        let defect = 0.5 * (f(&a) + f(&b)) - f(&mid);
        (defect, a, b)
    });
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut counterexample = None;
    for (defect, a, b) in outcomes {
        if defect > 1e-10 {
            violations += 1;
            if defect > worst {
                counterexample = Some((a, b));
            }
        }
        worst = worst.max(defect);
    }
    Ok(ConcavityReport {
        q: q.value(),
        n,
        trials,
        violations,
        worst_defect: worst,
        counterexample,
    })
}
