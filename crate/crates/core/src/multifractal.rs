//! Box counting, partition functions and multifractal spectra.
//!
//! A measure sampled on `[0,1]^d` is paved with boxes of side `ε`; the
//! partition function `Z(q, ε) = Σ p_i(ε)^q` scales as `ε^{τ(q)}`. The
//! singularity spectrum `f(a)` follows from `τ` by Legendre transform.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::entropy::{hybrid_dq_relaxed, shannon, EntropyOrder, ProbDist};
use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};

/// Fits with `r² < POOR_FIT_R2` are reported as poor.
pub const POOR_FIT_R2: f64 = 0.99;
/// Largest number of boxes a cascade may enumerate.
pub const MAX_CASCADE_BOXES: usize = 1 << 26;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;
const CONCAVITY_TOLERANCE: f64 = 1e-6;

/// Weighted points in the unit cube, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPoints {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedPoints {
    /// Weights are normalized to sum 1.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                left: coords.len(),
                right: dim * weights.len(),
            });
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("no sample points".into()));
        }
        if let Some(&x) = coords.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::domain("coordinate", x, "0 <= x <= 1"));
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::domain("weight", w, "finite and > 0"));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(WeightedPoints { dim, coords, weights })
    }

    /// Equal-weight points.
    pub fn unweighted(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let n = coords.len() / dim.max(1);
        Self::new(dim, coords, vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All points coincide.
    pub fn is_degenerate(&self) -> bool {
        let first = self.point(0);
        (1..self.len()).all(|i| self.point(i) == first)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxedMeasure {
    pub eps: f64,
    pub box_probs: Vec<f64>,
}

impl BoxedMeasure {
    pub fn new(eps: f64, box_probs: Vec<f64>) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain("eps", eps, "0 < eps < 1"));
        }
        if box_probs.is_empty() {
            return Err(Error::InvalidDistribution("no occupied boxes".into()));
        }
        if let Some(&p) = box_probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidDistribution(format!("box probability {p} is not positive")));
        }
        let total: f64 = box_probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("box probabilities sum to {total}")));
        }
        Ok(BoxedMeasure { eps, box_probs })
    }

    pub fn occupied(&self) -> usize {
        self.box_probs.len()
    }

    pub fn distribution(&self) -> ProbDist {
        ProbDist::normalized(self.box_probs.clone()).expect("validated box probabilities")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountReport {
    pub measures: Vec<BoxedMeasure>,
    /// The sample set is a single point.
    pub degenerate: bool,
}

/// Integrated probability per occupied box for each `ε`.
pub fn box_count(samples: &WeightedPoints, eps_grid: &[f64], exec: Execution) -> Result<BoxCountReport> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidInput("empty eps grid".into()));
    }
    if let Some(&e) = eps_grid.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::domain("eps", e, "0 < eps < 1"));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps grid must be strictly decreasing".into()));
    }
    let measures = map_slice(exec, eps_grid, |&eps| {
        let cells = (1.0 / eps - 1e-9).ceil() as u64;
        let mut acc: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (i, &w) in samples.weights().iter().enumerate() {
            let key = samples
                .point(i)
                .iter()
                .map(|&x| ((x / eps) as u64).min(cells - 1))
                .collect();
            *acc.entry(key).or_insert(0.0) += w;
        }
        let probs: Vec<f64> = acc.into_values().collect();
        let total: f64 = probs.iter().sum();
        BoxedMeasure {
            eps,
            box_probs: probs.into_iter().map(|p| p / total).collect(),
        }
    });
    Ok(BoxCountReport {
        measures,
        degenerate: samples.is_degenerate(),
    })
}

/// `ln Σ p_i^q`, evaluated with a shifted exponent sum.
pub fn ln_partition_function(bm: &BoxedMeasure, q: f64) -> f64 {
    let logs = bm.box_probs.iter().map(|p| q * p.ln());
    let max = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    max + logs.map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// `Z(q) = Σ p_i^q` over occupied boxes.
pub fn partition_function(bm: &BoxedMeasure, q: f64) -> f64 {
    if q == 0.0 {
        bm.occupied() as f64
    } else if q == 1.0 {
        bm.box_probs.iter().sum()
    } else {
        ln_partition_function(bm, q).exp()
    }
}

/// Escort mean and variance of `ln p` at order `q`.
fn escort_log_moments(bm: &BoxedMeasure, q: f64) -> (f64, f64) {
    let ln_z = ln_partition_function(bm, q);
    let rho = |p: f64| (q * p.ln() - ln_z).exp();
    let m1: f64 = bm.box_probs.iter().map(|&p| rho(p) * p.ln()).sum();
    let var: f64 = bm.box_probs.iter().map(|&p| rho(p) * (p.ln() - m1).powi(2)).sum();
    (m1, var.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultifractalSpectrum {
    pub q_grid: Vec<f64>,
    pub tau: Vec<f64>,
    /// `a(q) = τ'(q)`; empty until [`legendre`] runs.
    pub a: Vec<f64>,
    /// `f = q·a − τ`; empty until [`legendre`] runs.
    pub f: Vec<f64>,
    pub r2: Vec<f64>,
    /// `⟨a⟩_q` at the finest scale.
    pub a_mean: Vec<f64>,
    /// `Δa` at the finest scale.
    pub delta_a: Vec<f64>,
    /// Orders whose regression has `r² < 0.99`.
    pub poor_fit: Vec<f64>,
    pub concave: bool,
}

impl MultifractalSpectrum {
    /// Tangent extrapolation of `f(a) = 0` from both ends of the grid,
    /// using `f'(a) = q`. Returns `(a_-, a_+)`.
    pub fn f_zeros(&self) -> Option<(f64, f64)> {
        if self.a.is_empty() {
            return None;
        }
        let lo = argmin(&self.q_grid);
        let hi = argmax(&self.q_grid);
        let (q_lo, q_hi) = (self.q_grid[lo], self.q_grid[hi]);
        if !(q_lo < 0.0 && q_hi > 0.0) {
            return None;
        }
        let a_minus = self.a[hi] - self.f[hi] / q_hi;
        let a_plus = self.a[lo] - self.f[lo] / q_lo;
        Some((a_minus, a_plus))
    }
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&i, &j| v[i].total_cmp(&v[j])).expect("non-empty")
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).expect("non-empty")
}

/// `[−5, 5]` in steps of `0.1`.
pub fn default_q_grid() -> Vec<f64> {
    (-50..=50).map(|k| k as f64 / 10.0).collect()
}

/// Least-squares slope and `r²` of `y` against `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= f64::EPSILON * (1.0 + my * my) * n {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    (slope, intercept, r2)
}

/// `τ(q)` as the slope of `ln Z(q, ε)` against `ln ε`.
pub fn tau_regress(series: &[BoxedMeasure], q_grid: &[f64], exec: Execution) -> Result<MultifractalSpectrum> {
    if series.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 scales, got {}", series.len())));
    }
    if q_grid.is_empty() {
        return Err(Error::InvalidInput("empty q grid".into()));
    }
    let ln_eps: Vec<f64> = series.iter().map(|b| b.eps.ln()).collect();
    let fits = map_slice(exec, q_grid, |&q| {
        let ln_z: Vec<f64> = series.iter().map(|b| ln_partition_function(b, q)).collect();
        let (slope, _, r2) = ols(&ln_eps, &ln_z);
        slope
            .is_finite()
            .then_some((slope, r2))
            .ok_or_else(|| Error::InvalidInput("scales must be distinct".into()))
    });
    let (tau, r2): (Vec<f64>, Vec<f64>) = fits.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let finest = series
        .iter()
        .min_by(|a, b| a.eps.total_cmp(&b.eps))
        .expect("non-empty series");
    let (a_mean, delta_a) = q_grid.iter().map(|&q| curdling_at(finest, q)).unzip();
    let poor_fit = q_grid
        .iter()
        .zip(&r2)
        .filter(|(_, r)| **r < POOR_FIT_R2)
        .map(|(q, _)| *q)
        .collect();
    Ok(MultifractalSpectrum {
        q_grid: q_grid.to_vec(),
        tau,
        a: Vec::new(),
        f: Vec::new(),
        r2,
        a_mean,
        delta_a,
        poor_fit,
        concave: true,
    })
}

/// Fills `a = τ'` by central differences (one-sided at the ends) and
/// `f = q·a − τ`, then checks discrete concavity of `f(a)`.
pub fn legendre(mut spec: MultifractalSpectrum) -> Result<MultifractalSpectrum> {
    let (q, tau) = (&spec.q_grid, &spec.tau);
    let n = q.len();
    if n < 3 {
        return Err(Error::InvalidInput("need at least 3 orders for differences".into()));
    }
    if q.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("q grid must be strictly increasing".into()));
    }
    let a: Vec<f64> = (0..n)
        .map(|i| {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (tau[r] - tau[l]) / (q[r] - q[l])
        })
        .collect();
    let f: Vec<f64> = (0..n).map(|i| q[i] * a[i] - tau[i]).collect();
    spec.concave = is_concave(&a, &f);
    spec.a = a;
    spec.f = f;
    Ok(spec)
}

/// Discrete concavity of the curve `(x_i, y_i)` after sorting by `x`.
pub fn is_concave(x: &[f64], y: &[f64]) -> bool {
    let mut pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);
    pts.windows(3).all(|w| {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        let h = 0.5 * (w[2].0 - w[0].0);
        (s2 - s1) * h <= CONCAVITY_TOLERANCE
    })
}

fn curdling_at(bm: &BoxedMeasure, q: f64) -> (f64, f64) {
    let ln_eps = bm.eps.ln();
    let (mean, var) = escort_log_moments(bm, q);
    (mean / ln_eps, var.sqrt() / ln_eps.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurdlingStats {
    pub q_grid: Vec<f64>,
    pub eps: Vec<f64>,
    /// `a_mean[s][k]` is `⟨a⟩_q` for scale `s` and order `q_grid[k]`.
    pub a_mean: Vec<Vec<f64>>,
    pub delta_a: Vec<Vec<f64>>,
}

impl CurdlingStats {
    /// `Δa·√(−ln ε)` per scale and order.
    pub fn scaled_spread(&self) -> Vec<Vec<f64>> {
        self.eps
            .iter()
            .zip(&self.delta_a)
            .map(|(e, row)| row.iter().map(|d| d * (-e.ln()).sqrt()).collect())
            .collect()
    }
}

/// `⟨a⟩_q` and `Δa` from the first two `q`-derivatives of `ln Z`, which are
/// the escort mean and variance of `ln p`.
pub fn curdling_stats(series: &[BoxedMeasure], q_grid: &[f64]) -> CurdlingStats {
    let (a_mean, delta_a) = series
        .iter()
        .map(|bm| q_grid.iter().map(|&q| curdling_at(bm, q)).unzip())
        .unzip();
    CurdlingStats {
        q_grid: q_grid.to_vec(),
        eps: series.iter().map(|b| b.eps).collect(),
        a_mean,
        delta_a,
    }
}

/// Coarse-grained `D_q = (Σ_k p_k^q / Σ_{k∈N(a)} p_k − 1)/(1 − q)` where
/// `N(a)` holds boxes whose exponent `ln p/ln ε` lies within `a_halfwidth`
/// of `a_target`. Defaults: `⟨a⟩_q` and `1/√(−ln ε)`.
pub fn dq_coarse(bm: &BoxedMeasure, q: EntropyOrder, a_target: Option<f64>, a_halfwidth: Option<f64>) -> Result<f64> {
    let ln_eps = bm.eps.ln();
    let half = a_halfwidth.unwrap_or(1.0 / (-ln_eps).sqrt());
    if !(half > 0.0) {
        return Err(Error::domain("a_halfwidth", half, "a_halfwidth > 0"));
    }
    let target = a_target.unwrap_or_else(|| curdling_at(bm, q.value()).0);
    let covered: f64 = bm
        .box_probs
        .iter()
        .filter(|p| (p.ln() / ln_eps - target).abs() <= half)
        .sum();
    if covered == 0.0 {
        return Err(Error::InvalidInput(format!(
            "no boxes with exponent within {half} of {target}"
        )));
    }
    let all_covered = (covered - 1.0).abs() <= NORMALIZATION_TOLERANCE;
    if all_covered {
        return Ok(hybrid_dq_relaxed(&bm.distribution(), q));
    }
    if q.is_one() {
        return Err(Error::domain("q", 1.0, "q != 1 unless every box lies in N(a)"));
    }
    let z = partition_function(bm, q.value());
    Ok((z / covered - 1.0) / (1.0 - q.value()))
}

/// Shannon entropy of the box distribution.
pub fn box_shannon(bm: &BoxedMeasure) -> f64 {
    shannon(&bm.distribution())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProfileVariant {
    /// Centered on the escort mean `⟨a⟩_q`.
    Escort,
    /// Centered on `⟨a⟩_1`.
    Linear,
}

/// Unnormalized `P(a) = [1 − (1−q)(a − ā)²/(2Δa²)]^{1/(1−q)}`, clipped at 0
/// where the bracket vanishes, and Gaussian at `q = 1`. `a_mean` is the
/// center appropriate to `variant`.
pub fn p_of_a_profile(
    q: EntropyOrder,
    a_mean: f64,
    delta_a: f64,
    a_grid: &[f64],
    variant: ProfileVariant,
) -> Result<Vec<f64>> {
    if !(delta_a > 0.0) {
        return Err(Error::domain("delta_a", delta_a, "delta_a > 0"));
    }
    let _ = variant;
    let q = q.value();
    Ok(a_grid
        .iter()
        .map(|&a| {
            let x = (a - a_mean).powi(2) / (2.0 * delta_a * delta_a);
            if (q - 1.0).abs() < 1e-12 {
                (-x).exp()
            } else {
                let bracket = 1.0 - (1.0 - q) * x;
                if bracket <= 0.0 {
                    0.0
                } else {
                    bracket.powf(1.0 / (1.0 - q))
                }
            }
        })
        .collect())
}

/// Half-width of the `q < 1` profile support.
pub fn profile_support_halfwidth(q: f64, delta_a: f64) -> Option<f64> {
    (q < 1.0).then(|| delta_a * (2.0 / (1.0 - q)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeSpec {
    pub weights: Vec<f64>,
    pub depth: u32,
}

impl CascadeSpec {
    pub fn new(weights: Vec<f64>, depth: u32) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidInput("a cascade needs at least 2 multipliers".into()));
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::domain("weight", w, "finite and > 0"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("multipliers sum to {total}")));
        }
        if depth == 0 {
            return Err(Error::InvalidInput("depth must be at least 1".into()));
        }
        let boxes = (weights.len() as f64).powi(depth as i32);
        if boxes > MAX_CASCADE_BOXES as f64 {
            return Err(Error::InvalidInput(format!(
                "{} boxes exceeds the limit of {MAX_CASCADE_BOXES}",
                boxes
            )));
        }
        Ok(CascadeSpec { weights, depth })
    }

    pub fn base(&self) -> usize {
        self.weights.len()
    }

    pub fn eps(&self) -> f64 {
        (self.base() as f64).powi(-(self.depth as i32))
    }

    /// Analytic `τ(q) = −log_b Σ m^q`.
    pub fn tau(&self, q: f64) -> f64 {
        -self.weights.iter().map(|m| m.powf(q)).sum::<f64>().ln() / (self.base() as f64).ln()
    }

    /// Analytic `⟨a⟩_q = −Σ m^q log_b m / Σ m^q`.
    pub fn a_mean(&self, q: f64) -> f64 {
        let lb = (self.base() as f64).ln();
        let z: f64 = self.weights.iter().map(|m| m.powf(q)).sum();
        -self.weights.iter().map(|m| m.powf(q) * m.ln() / lb).sum::<f64>() / z
    }
}

/// Enumerates all `b^k` boxes; the first multiplier index is the most
/// significant digit of the box position.
pub fn cascade_generate(spec: &CascadeSpec) -> BoxedMeasure {
    let mut probs = vec![1.0];
    for _ in 0..spec.depth {
        probs = probs
            .iter()
            .flat_map(|p| spec.weights.iter().map(move |w| p * w))
            .collect();
    }
    BoxedMeasure {
        eps: spec.eps(),
        box_probs: probs,
    }
}

/// Box-center points of a one-dimensional cascade, weighted by box mass.
pub fn cascade_points(spec: &CascadeSpec) -> WeightedPoints {
    let bm = cascade_generate(spec);
    let n = bm.box_probs.len() as f64;
    let coords = (0..bm.box_probs.len()).map(|i| (i as f64 + 0.5) / n).collect();
    WeightedPoints::new(1, coords, bm.box_probs).expect("cascade boxes are valid")
}
