//! High- and low-temperature closed forms of the MaxEnt distributions.
//!
//! All forms take the self-consistent data `κ`, `Φ` and `⟨E⟩_r` as input,
//! either from a prior [`solve`](crate::maxent::solve) or supplied directly.
//! The regime is measured by `ρ = Ω|q − 1|/|Φ|`: small `ρ` is the
//! high-temperature side, large `ρ` the low-temperature side.

use std::f64::consts::E;

use serde::Serialize;

use crate::entropy::{EntropyOrder, ProbDist};
use crate::error::{Error, Result};
use crate::lambert::{w0, Branch};
use crate::maxent::{ConstraintKind, EnergySpectrum, MaxEntSolution, Q_CROSSOVER};

/// `ρ` below which the high-temperature forms are admissible.
pub const HIGH_TEMP_RATIO: f64 = 0.1;

/// `ρ` above which the low-temperature forms are admissible.
pub const LOW_TEMP_RATIO: f64 = 10.0;

/// Self-consistent data the closed forms are evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoState {
    pub kappa: f64,
    pub phi: f64,
    pub mean_energy: f64,
}

impl ThermoState {
    pub fn from_solution(sol: &MaxEntSolution) -> Self {
        ThermoState {
            kappa: sol.kappa,
            phi: sol.phi,
            mean_energy: sol.mean_energy,
        }
    }

    /// Exogenous `κ` and `Φ`; energies are then read as `ΔE` directly.
    pub fn supplied(kappa: f64, phi: f64) -> Self {
        ThermoState {
            kappa,
            phi,
            mean_energy: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::domain("kappa", self.kappa, "kappa > 0"));
        }
        if !(self.phi < 0.0 && self.phi.is_finite()) {
            return Err(Error::domain("phi", self.phi, "phi < 0"));
        }
        if !self.mean_energy.is_finite() {
            return Err(Error::domain("mean_energy", self.mean_energy, "finite"));
        }
        Ok(())
    }

    fn delta(&self, spectrum: &EnergySpectrum) -> Vec<f64> {
        spectrum.levels().iter().map(|e| e - self.mean_energy).collect()
    }
}

/// `ρ = Ω|q − 1|/|Φ|`.
pub fn regime_ratio(q: f64, omega: f64, phi: f64) -> f64 {
    omega.abs() * (q - 1.0).abs() / phi.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticParams {
    pub kappa: f64,
    pub phi: f64,
    pub q: f64,
    pub omega: f64,
    pub omega_star: f64,
    /// The W argument `x` the expansion is built around.
    pub x_arg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighTempResult {
    pub p: ProbDist,
    pub params: AsymptoticParams,
    /// Normalization as the sum of the unnormalized profile.
    pub z_sum: f64,
    /// Closed form `[qW(x)/(κ(q−1))]^{1/(q−1)}`.
    pub z_closed: f64,
    /// Levels whose bracket `1 − (1−q)Ω*ΔE` was negative and clipped to 0.
    pub clipped_levels: Vec<usize>,
    pub regime_ratio: f64,
    pub in_regime: bool,
}

/// Escort-moment high-temperature distribution
/// `p_i ∝ [1 − (1−q)Ω*ΔE_i]^{1/(1−q)}` with `Ω* = −Ω/(Φ(W(x)+1))`.
pub fn high_temp_escort(
    spectrum: &EnergySpectrum,
    q: EntropyOrder,
    omega: f64,
    state: &ThermoState,
) -> Result<HighTempResult> {
    high_temp(spectrum, q, omega, state, ConstraintKind::Escort)
}

/// Linear-moment high-temperature distribution with
/// `Ω* = −ΩW(x)/((q−1)Φ(W(x)+1))`.
pub fn high_temp_linear(
    spectrum: &EnergySpectrum,
    q: EntropyOrder,
    omega: f64,
    state: &ThermoState,
) -> Result<HighTempResult> {
    high_temp(spectrum, q, omega, state, ConstraintKind::Linear)
}

fn high_temp(
    spectrum: &EnergySpectrum,
    q: EntropyOrder,
    omega: f64,
    state: &ThermoState,
    kind: ConstraintKind,
) -> Result<HighTempResult> {
    state.validate()?;
    if !omega.is_finite() {
        return Err(Error::domain("omega", omega, "finite"));
    }
    let qv = q.value();
    let (kappa, phi) = (state.kappa, state.phi);
    let near_one = (qv - 1.0).abs() < Q_CROSSOVER;
    let x = -kappa * (qv - 1.0) / (phi * qv) * ((qv - 1.0) / qv).exp();
    let (omega_star, z_closed) = if near_one {
        (omega / phi.abs(), f64::NAN)
    } else {
        let w = w0(x)?.w;
        let omega_star = match kind {
            ConstraintKind::Escort => -omega / (phi * (w + 1.0)),
            ConstraintKind::Linear => -omega * w / ((qv - 1.0) * phi * (w + 1.0)),
        };
        let z_closed = (qv * w / (kappa * (qv - 1.0))).powf(1.0 / (qv - 1.0));
        (omega_star, z_closed)
    };
    let delta = state.delta(spectrum);
    let mut clipped_levels = Vec::new();
    let weights: Vec<f64> = delta
        .iter()
        .enumerate()
        .map(|(i, &de)| {
            if near_one {
                return (-omega_star * de).exp();
            }
            let base = 1.0 - (1.0 - qv) * omega_star * de;
            if base <= 0.0 {
                clipped_levels.push(i);
                0.0
            } else {
                (base.ln() / (1.0 - qv)).exp()
            }
        })
        .collect();
    let z_sum: f64 = weights.iter().sum();
    let ratio = regime_ratio(qv, omega, phi);
    Ok(HighTempResult {
        p: ProbDist::normalized(weights)?,
        params: AsymptoticParams {
            kappa,
            phi,
            q: qv,
            omega,
            omega_star,
            x_arg: x,
        },
        z_sum,
        z_closed,
        clipped_levels,
        regime_ratio: ratio,
        in_regime: ratio < HIGH_TEMP_RATIO,
    })
}

/// Low-temperature case of a level, split by the sign of `q − 1` and of `ΔE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LowTempCase {
    /// `q > 1`, `ΔE < 0`.
    A1,
    /// `q > 1`, `ΔE >= 0`.
    A2,
    /// `q < 1`, `ΔE < 0`.
    B1,
    /// `q < 1`, `ΔE >= 0`.
    B2,
}

impl LowTempCase {
    pub fn classify(q: f64, delta_e: f64) -> Self {
        match (q > 1.0, delta_e < 0.0) {
            (true, true) => LowTempCase::A1,
            (true, false) => LowTempCase::A2,
            (false, true) => LowTempCase::B1,
            (false, false) => LowTempCase::B2,
        }
    }

    /// Whether the escort stationarity equation has a real solution there
    /// at low temperature.
    pub fn escort_solvable(self) -> bool {
        self != LowTempCase::B1
    }

    /// Whether the linear stationarity equation admits the logarithmic
    /// asymptotic form (the W argument is large and positive).
    pub fn linear_solvable(self) -> bool {
        matches!(self, LowTempCase::A1 | LowTempCase::B2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowTempConfig {
    /// Largest `|z|` for which `W(z) ≈ z` is used.
    pub boltzmann_max_arg: f64,
    /// Smallest `z` for which `W(z) ≈ ln z` is used.
    pub heavy_tail_min_arg: f64,
    /// Levels with `|ΔE|` below this are always interpolated.
    pub exclusion_half_width: f64,
    /// Branch used in case b2.
    pub branch: Branch,
}

impl Default for LowTempConfig {
    fn default() -> Self {
        LowTempConfig {
            boltzmann_max_arg: 1.0 / E,
            heavy_tail_min_arg: E,
            exclusion_half_width: 0.0,
            branch: Branch::Principal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LevelPart {
    Boltzmann,
    HeavyTail,
    Interpolated,
    NoSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SewReport {
    pub gap_levels: Vec<usize>,
    pub interpolation_used: bool,
    /// `|Σ p − 1|` before the global renormalization.
    pub normalization_defect: f64,
    /// L∞ change of the distribution when the exclusion half-width is widened.
    pub sensitivity: f64,
}

/// Low-temperature escort distribution: Boltzmann flank, heavy-tail flank and
/// the interpolated gap between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseDist {
    pub delta_e: Vec<f64>,
    pub cases: Vec<LowTempCase>,
    pub parts: Vec<LevelPart>,
    /// Flank values before renormalization (`NaN` in the gap).
    pub raw: Vec<f64>,
    pub p: Vec<f64>,
    /// Factor applied to raw and interpolated values to reach unit mass.
    pub scale: f64,
    pub z1: f64,
    /// Heavy-tail normalization; `None` when its closed form has no real value.
    pub z2: Option<f64>,
    pub params: AsymptoticParams,
    pub sew: SewReport,
    /// Levels whose raw value exceeds 1.
    pub over_one: Vec<usize>,
    pub regime_ratio: f64,
    pub in_regime: bool,
}

impl PiecewiseDist {
    pub fn mass_of(&self, part: LevelPart) -> f64 {
        self.p
            .iter()
            .zip(&self.parts)
            .filter(|(_, &k)| k == part)
            .map(|(v, _)| v)
            .sum()
    }
}

/// Low-temperature escort distribution on `spectrum`.
pub fn low_temp_escort(
    spectrum: &EnergySpectrum,
    q: EntropyOrder,
    omega: f64,
    state: &ThermoState,
    cfg: &LowTempConfig,
) -> Result<PiecewiseDist> {
    state.validate()?;
    let qv = q.value();
    if (qv - 1.0).abs() < Q_CROSSOVER {
        return Err(Error::domain("q", qv, "q != 1 in the low-temperature regime"));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain("omega", omega, "omega > 0"));
    }
    let delta = state.delta(spectrum);
    let base = sew(&delta, qv, omega, state, cfg, cfg.exclusion_half_width)?;
    let span = delta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - delta.iter().copied().fold(f64::INFINITY, f64::min);
    let wider = cfg.exclusion_half_width + cfg.exclusion_half_width.max(0.05 * span);
    let sensitivity = match sew(&delta, qv, omega, state, cfg, wider) {
        Ok(alt) => base.p.iter().zip(&alt.p).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        Err(_) => f64::NAN,
    };
    let mut out = base;
    out.sew.sensitivity = sensitivity;
    Ok(out)
}

fn sew(
    delta: &[f64],
    q: f64,
    omega: f64,
    state: &ThermoState,
    cfg: &LowTempConfig,
    half_width: f64,
) -> Result<PiecewiseDist> {
    let (kappa, phi) = (state.kappa, state.phi);
    let abs_phi = phi.abs();
    // ln |z_i| = l0 + (q−1)ΩΔE_i/|Φ|
    let l0 = (kappa * (q - 1.0).abs() / (abs_phi * q)).ln() + (q - 1.0) / q;
    let ln_scale = abs_phi.ln() / (q - 1.0) - 1.0 / q;
    let boltzmann = |de: f64| (ln_scale - omega * de / abs_phi).exp();
    let heavy = |ln_z: f64| (q * ln_z / (kappa * (q - 1.0))).powf(1.0 / (1.0 - q));

    let n = delta.len();
    let mut cases = Vec::with_capacity(n);
    let mut parts = Vec::with_capacity(n);
    let mut raw = vec![f64::NAN; n];
    for (i, &de) in delta.iter().enumerate() {
        let case = LowTempCase::classify(q, de);
        let ln_z = l0 + (q - 1.0) * omega * de / abs_phi;
        let excluded = de.abs() < half_width;
        let part = match case {
            LowTempCase::B1 => LevelPart::NoSolution,
            _ if excluded => LevelPart::Interpolated,
            LowTempCase::A1 if ln_z <= cfg.boltzmann_max_arg.ln() => LevelPart::Boltzmann,
            LowTempCase::A2 if ln_z >= cfg.heavy_tail_min_arg.ln() => LevelPart::HeavyTail,
            LowTempCase::B2 if ln_z <= cfg.boltzmann_max_arg.ln() => match cfg.branch {
                Branch::Principal => LevelPart::Boltzmann,
                Branch::MinusOne => LevelPart::HeavyTail,
            },
            _ => LevelPart::Interpolated,
        };
        raw[i] = match part {
            LevelPart::Boltzmann => boltzmann(de),
            LevelPart::HeavyTail => heavy(ln_z),
            LevelPart::NoSolution => 0.0,
            LevelPart::Interpolated => f64::NAN,
        };
        cases.push(case);
        parts.push(part);
    }

    let mut knots: Vec<(f64, f64)> = (0..n)
        .filter(|&i| matches!(parts[i], LevelPart::Boltzmann | LevelPart::HeavyTail) && raw[i] > 0.0)
        .map(|i| (delta[i], raw[i].ln()))
        .collect();
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    knots.dedup_by(|a, b| a.0 == b.0);
    let gap_levels: Vec<usize> = (0..n).filter(|&i| parts[i] == LevelPart::Interpolated).collect();
    if !gap_levels.is_empty() && knots.is_empty() {
        return Err(Error::InvalidInput(
            "no admissible low-temperature level to sew from".into(),
        ));
    }
    let interp = MonotoneCubic::new(&knots);
    let mut p: Vec<f64> = (0..n)
        .map(|i| match parts[i] {
            LevelPart::Interpolated => interp.eval(delta[i]).exp(),
            _ => raw[i],
        })
        .collect();
    let total: f64 = p.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidInput(format!("low-temperature mass {total} cannot be normalized")));
    }
    p.iter_mut().for_each(|v| *v /= total);

    let z1 = (-ln_scale).exp();
    let z2_base = q * l0 / (kappa * (q - 1.0));
    let z2 = (l0 != 0.0).then(|| signed_pow(z2_base, 1.0 / (q - 1.0))).filter(|v| v.is_finite());
    let over_one = (0..n).filter(|&i| raw[i] > 1.0).collect();
    let ratio = regime_ratio(q, omega, phi);
    Ok(PiecewiseDist {
        delta_e: delta.to_vec(),
        cases,
        parts,
        raw,
        p,
        scale: 1.0 / total,
        z1,
        z2,
        params: AsymptoticParams {
            kappa,
            phi,
            q,
            omega,
            omega_star: omega / (abs_phi * l0),
            x_arg: l0.exp() * (q - 1.0).signum(),
        },
        sew: SewReport {
            interpolation_used: !gap_levels.is_empty(),
            gap_levels,
            normalization_defect: (total - 1.0).abs(),
            sensitivity: 0.0,
        },
        over_one,
        regime_ratio: ratio,
        in_regime: ratio > LOW_TEMP_RATIO,
    })
}

// Real power of a possibly negative base, defined when the exponent is the
// reciprocal of an odd integer.
fn signed_pow(base: f64, exponent: f64) -> f64 {
    if base >= 0.0 {
        return base.powf(exponent);
    }
    let inv = 1.0 / exponent;
    if (inv - inv.round()).abs() < 1e-9 && inv.round() as i64 % 2 != 0 {
        -(-base).powf(exponent)
    } else {
        f64::NAN
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolant, constant beyond the
/// outermost knots.
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    fn new(knots: &[(f64, f64)]) -> Self {
        let x: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let y: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let n = x.len();
        let mut m = vec![0.0; n];
        if n >= 2 {
            let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
            m[0] = d[0];
            m[n - 1] = d[n - 2];
            for i in 1..n - 1 {
                m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
            }
            for i in 0..n - 1 {
                if d[i] == 0.0 {
                    m[i] = 0.0;
                    m[i + 1] = 0.0;
                    continue;
                }
                let a = m[i] / d[i];
                let b = m[i + 1] / d[i];
                let s = a * a + b * b;
                if s > 9.0 {
                    let t = 3.0 / s.sqrt();
                    m[i] = t * a * d[i];
                    m[i + 1] = t * b * d[i];
                }
            }
        }
        MonotoneCubic { x, y, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if n == 1 || t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[k]
            + (s3 - 2.0 * s2 + s) * h * self.m[k]
            + (-2.0 * s3 + 3.0 * s2) * self.y[k + 1]
            + (s3 - s2) * h * self.m[k + 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LinearLevel {
    Asymptotic,
    /// The W argument is negative and large: no real solution.
    NoSolution,
    /// W argument too small for the logarithmic form.
    OutOfRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowTempLinear {
    pub delta_e: Vec<f64>,
    /// Unnormalized `p_i` (`NaN` where not defined).
    pub p: Vec<f64>,
    pub status: Vec<LinearLevel>,
    pub x_args: Vec<f64>,
    pub over_one: Vec<usize>,
    pub regime_ratio: f64,
    pub in_regime: bool,
}

impl LowTempLinear {
    /// Renormalized values over the asymptotic levels.
    pub fn normalized(&self) -> Vec<f64> {
        let kept: Vec<f64> = self
            .p
            .iter()
            .zip(&self.status)
            .map(|(&v, &s)| if s == LinearLevel::Asymptotic { v } else { 0.0 })
            .collect();
        let t: f64 = kept.iter().sum();
        kept.into_iter().map(|v| v / t).collect()
    }
}

/// Low-temperature linear-moment distribution
/// `p_i = {κ(q−1)/q · s_i / ln(c·s_i)}^{1/(q−1)}` with `s_i = 1 + ΩΔE_i/Φ` and
/// `c = −κ(q−1)e^{(q−1)/q}/(qΦ)`.
pub fn low_temp_linear(
    spectrum: &EnergySpectrum,
    q: EntropyOrder,
    omega: f64,
    state: &ThermoState,
    cfg: &LowTempConfig,
) -> Result<LowTempLinear> {
    state.validate()?;
    let qv = q.value();
    if (qv - 1.0).abs() < Q_CROSSOVER {
        return Err(Error::domain("q", qv, "q != 1 in the low-temperature regime"));
    }
    let (kappa, phi) = (state.kappa, state.phi);
    let c = -kappa * (qv - 1.0) * ((qv - 1.0) / qv).exp() / (qv * phi);
    let delta = state.delta(spectrum);
    let mut status = Vec::with_capacity(delta.len());
    let mut p = Vec::with_capacity(delta.len());
    let mut x_args = Vec::with_capacity(delta.len());
    for &de in &delta {
        let s = 1.0 + omega * de / phi;
        let x = c * s;
        x_args.push(x);
        if x <= 0.0 {
            status.push(LinearLevel::NoSolution);
            p.push(f64::NAN);
            continue;
        }
        let v = (kappa * (qv - 1.0) / qv * s / x.ln()).powf(1.0 / (qv - 1.0));
        status.push(if x >= cfg.heavy_tail_min_arg && v.is_finite() {
            LinearLevel::Asymptotic
        } else {
            LinearLevel::OutOfRegime
        });
        p.push(v);
    }
    let over_one = (0..p.len()).filter(|&i| p[i] > 1.0).collect();
    let ratio = regime_ratio(qv, omega, phi);
    Ok(LowTempLinear {
        delta_e: delta,
        p,
        status,
        x_args,
        over_one,
        regime_ratio: ratio,
        in_regime: ratio > LOW_TEMP_RATIO,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    HighTemperature,
    LowTemperature,
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub ratio: f64,
    pub regime: Regime,
    /// `Ω = 0`: the exact answer is the uniform distribution.
    pub exact_uniform: bool,
    pub cases: Vec<LowTempCase>,
    /// Per level: whether a real solution exists in the low-temperature limit.
    pub solvable: Vec<bool>,
    pub admissible: Vec<&'static str>,
}

/// Classifies `(q, Ω, Φ)` and, per `ΔE`, the low-temperature case.
pub fn regime_probe(q: f64, omega: f64, phi: f64, delta_e: &[f64], kind: ConstraintKind) -> RegimeReport {
    let ratio = regime_ratio(q, omega, phi);
    let regime = if ratio < HIGH_TEMP_RATIO {
        Regime::HighTemperature
    } else if ratio > LOW_TEMP_RATIO {
        Regime::LowTemperature
    } else {
        Regime::Intermediate
    };
    let cases: Vec<LowTempCase> = delta_e.iter().map(|&d| LowTempCase::classify(q, d)).collect();
    let solvable = cases
        .iter()
        .map(|c| match kind {
            ConstraintKind::Escort => c.escort_solvable(),
            ConstraintKind::Linear => c.linear_solvable(),
        })
        .collect();
    let admissible = match (regime, kind) {
        (Regime::HighTemperature, ConstraintKind::Escort) => vec!["high_temp_escort"],
        (Regime::HighTemperature, ConstraintKind::Linear) => vec!["high_temp_linear"],
        (Regime::LowTemperature, ConstraintKind::Escort) => vec!["low_temp_escort"],
        (Regime::LowTemperature, ConstraintKind::Linear) => vec!["low_temp_linear"],
        (Regime::Intermediate, _) => Vec::new(),
    };
    RegimeReport {
        ratio,
        regime,
        exact_uniform: omega == 0.0,
        cases,
        solvable,
        admissible,
    }
}
