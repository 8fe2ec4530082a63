//! Real Lambert W function on both real branches.
//!
//! `W_0` is defined on `[−1/e, ∞)` with `W_0 >= −1`, `W_{−1}` on `[−1/e, 0)`
//! with `W_{−1} <= −1`; the two meet at `(−1/e, −1)`. Every evaluation is
//! refined by Halley iteration and carries its absolute residual
//! `|w·e^w − x|` so callers can propagate the accuracy they relied on.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};

/// `−1/e`, the common end point of both real branches.
pub const BRANCH_POINT: f64 = -1.0 / E;

/// Arguments this far below [`BRANCH_POINT`] are clamped onto it.
pub const BRANCH_SLACK: f64 = 1e-15;

/// Radius of convergence of the Taylor series of `W_0` at the origin.
pub const SERIES_RADIUS: f64 = 1.0 / E;

/// Residual certificate: `|w·e^w − x| <= RESIDUAL_BOUND·max(1, |x|)`.
pub const RESIDUAL_BOUND: f64 = 1e-13;

const MAX_HALLEY_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Principal,
    MinusOne,
}

impl Branch {
    pub fn index(self) -> i32 {
        match self {
            Branch::Principal => 0,
            Branch::MinusOne => -1,
        }
    }
}

impl TryFrom<i32> for Branch {
    type Error = Error;

    fn try_from(k: i32) -> Result<Self> {
        match k {
            0 => Ok(Branch::Principal),
            -1 => Ok(Branch::MinusOne),
            _ => Err(Error::InvalidInput(format!("no real Lambert W branch {k}"))),
        }
    }
}

/// A Lambert W evaluation tagged with its branch and residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WBranchValue {
    pub branch: Branch,
    pub x: f64,
    pub w: f64,
    pub residual: f64,
}

impl WBranchValue {
    fn certify(branch: Branch, x: f64, w: f64) -> Self {
        WBranchValue {
            branch,
            x,
            w,
            residual: (w * w.exp() - x).abs(),
        }
    }

    /// Whether the stored residual meets [`RESIDUAL_BOUND`].
    pub fn is_certified(&self) -> bool {
        self.residual <= RESIDUAL_BOUND * self.x.abs().max(1.0)
    }
}

/// Evaluates the requested branch.
pub fn lambert_w(branch: Branch, x: f64) -> Result<WBranchValue> {
    match branch {
        Branch::Principal => w0(x),
        Branch::MinusOne => w_minus1(x),
    }
}

fn clamp_branch_point(x: f64) -> Result<Option<f64>> {
    if x.is_nan() {
        return Err(Error::domain("x", x, "x is not a number"));
    }
    if x < BRANCH_POINT - BRANCH_SLACK {
        return Err(Error::domain("x", x, "x >= -1/e"));
    }
    if x <= BRANCH_POINT {
        return Ok(None);
    }
    Ok(Some(x))
}

/// Principal branch `W_0(x)`, `x >= −1/e`.
pub fn w0(x: f64) -> Result<WBranchValue> {
    let Some(x) = clamp_branch_point(x)? else {
        return Ok(WBranchValue::certify(Branch::Principal, BRANCH_POINT, -1.0));
    };
    if x.is_infinite() {
        return Err(Error::domain("x", x, "x finite"));
    }
    if x == 0.0 {
        return Ok(WBranchValue::certify(Branch::Principal, x, 0.0));
    }
    let w = if x > E {
        refine_log_form(x, initial_large(x), Branch::Principal)
    } else {
        refine_halley(x, initial_principal(x))
    };
    Ok(WBranchValue::certify(Branch::Principal, x, w))
}

/// Lower branch `W_{−1}(x)`, `−1/e <= x < 0`.
pub fn w_minus1(x: f64) -> Result<WBranchValue> {
    let Some(x) = clamp_branch_point(x)? else {
        return Ok(WBranchValue::certify(Branch::MinusOne, BRANCH_POINT, -1.0));
    };
    if x >= 0.0 {
        return Err(Error::domain("x", x, "-1/e <= x < 0"));
    }
    let w = if x < -0.25 {
        refine_halley(x, branch_point_series(x, -1.0))
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        refine_log_form(x, l1 - l2 + l2 / l1, Branch::MinusOne)
    };
    Ok(WBranchValue::certify(Branch::MinusOne, x, w))
}

/// `W_0(e^{ln_x})` for arguments given by their logarithm, so that values of
/// `x` beyond the floating-point range remain usable.
pub fn w0_exp(ln_x: f64) -> f64 {
    if ln_x < 700.0 {
        return w0(ln_x.exp()).map(|v| v.w).unwrap_or(f64::NAN);
    }
    let mut w = ln_x - ln_x.ln();
    for _ in 0..MAX_HALLEY_STEPS {
        let step = (w + w.ln() - ln_x) / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

/// Partial sum `Σ_{n=1}^{terms} (−1)^{n−1} n^{n−2}/(n−1)! · x^n` of the
/// Taylor series of `W_0`, valid for `|x| < 1/e`.
pub fn w_series(x: f64, terms: usize) -> Result<f64> {
    if !(x.abs() < SERIES_RADIUS) {
        return Err(Error::domain("x", x, "|x| < 1/e for the series"));
    }
    let mut sum = 0.0;
    for n in 1..=terms {
        let nf = n as f64;
        let coef = ((nf - 2.0) * nf.ln() - ln_factorial(n - 1)).exp();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * coef * x.powi(n as i32);
    }
    Ok(sum)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln x − ln ln x`, the leading large-argument behaviour of `W_0`.
pub fn w_log_asymptotic(x: f64) -> Result<f64> {
    if !(x > E) || !x.is_finite() {
        return Err(Error::domain("x", x, "x > e"));
    }
    let l = x.ln();
    Ok(l - l.ln())
}

/// `ln(−x) − ln(−ln(−x))`, the behaviour of `W_{−1}` as `x → 0⁻`.
pub fn w_minus1_log_asymptotic(x: f64) -> Result<f64> {
    if !(x < 0.0 && x > -1.0 / E) {
        return Err(Error::domain("x", x, "-1/e < x < 0"));
    }
    let l = (-x).ln();
    Ok(l - (-l).ln())
}

// Expansion in p = sqrt(2(e x + 1)) around the branch point; `sign` selects
// the branch (+1 principal, −1 lower).
fn branch_point_series(x: f64, sign: f64) -> f64 {
    let p = sign * (2.0 * (E * x + 1.0)).max(0.0).sqrt();
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

fn initial_principal(x: f64) -> f64 {
    if x < -0.32 {
        branch_point_series(x, 1.0)
    } else if x.abs() < 0.05 {
        x * (1.0 - x * (1.0 - 1.5 * x))
    } else {
        // Padé-type starter valid on (−0.32, e]
        x * (1.0 + 4.0 / 3.0 * x) / (1.0 + 7.0 / 3.0 * x + 5.0 / 6.0 * x * x)
    }
}

fn initial_large(x: f64) -> f64 {
    let l1 = x.ln();
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn refine_halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 || f == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            break;
        }
    }
    w
}

// Halley on g(w) = w + ln|w| − ln|x|, which avoids overflow of e^w for large
// arguments and underflow as x → 0⁻ on the lower branch.
fn refine_log_form(x: f64, mut w: f64, branch: Branch) -> f64 {
    let target = x.abs().ln();
    for _ in 0..MAX_HALLEY_STEPS {
        let g = w + w.abs().ln() - target;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let denom = g1 - g * g2 / (2.0 * g1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = g / denom;
        let mut next = w - step;
        if branch == Branch::MinusOne && next > -1.0 {
            next = 0.5 * (w - 1.0);
        }
        w = next;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bisect(x: f64, mut lo: f64, mut hi: f64) -> f64 {
        let f = |w: f64| w * w.exp() - x;
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn principal_examples() {
        assert_eq!(w0(0.0).unwrap().w, 0.0);
        assert_relative_eq!(w0(E).unwrap().w, 1.0, epsilon = 1e-15);
        let bp = w0(-1.0 / E).unwrap();
        assert_eq!(bp.w, -1.0);
        assert!(bp.is_certified());
        assert_eq!(w0(BRANCH_POINT - 0.5e-15).unwrap().w, -1.0);
        assert!(w0(BRANCH_POINT - 1e-12).is_err());
        assert!(w0(f64::NAN).is_err());
    }

    #[test]
    fn lower_examples() {
        assert_eq!(w_minus1(-1.0 / E).unwrap().w, -1.0);
        // 40-digit golden: W_{-1}(-0.1) = -3.577152063957297218...
        let w = w_minus1(-0.1).unwrap();
        assert_relative_eq!(w.w, -3.577_152_063_957_297, epsilon = 1e-14);
        assert_relative_eq!(w.w, bisect(-0.1, -10.0, -1.0), epsilon = 1e-13);
        assert!(w_minus1(0.0).is_err());
        assert!(w_minus1(0.5).is_err());
        assert!(w_minus1(-0.5).is_err());
    }

    #[test]
    fn lower_branch_log_asymptotics() {
        let z = -1e-6;
        let w = w_minus1(z).unwrap().w;
        let approx = w_minus1_log_asymptotic(z).unwrap();
        assert!(((approx - w) / w).abs() < 0.02);
    }

    #[test]
    fn series_examples() {
        assert_eq!(w_series(0.0, 12).unwrap(), 0.0);
        let x: f64 = 0.01;
        assert_relative_eq!(w_series(x, 3).unwrap(), x - x * x + 1.5 * x.powi(3), epsilon = 1e-18);
        assert_relative_eq!(w_series(0.1, 20).unwrap(), w0(0.1).unwrap().w, epsilon = 1e-12);
        assert_relative_eq!(w_series(-0.1, 40).unwrap(), w0(-0.1).unwrap().w, epsilon = 1e-12);
        assert!(w_series(0.5, 10).is_err());
    }

    #[test]
    fn small_argument_matches_series() {
        for &x in &[-9.9e-5, -3e-5, 1e-7, 4e-5, 9.9e-5] {
            let s = w_series(x, 8).unwrap();
            assert!((s - w0(x).unwrap().w).abs() <= 1e-12);
        }
    }

    #[test]
    fn log_asymptotic_examples() {
        let ten: f64 = 10.0;
        assert_relative_eq!(w_log_asymptotic(10.0).unwrap(), ten.ln() - ten.ln().ln(), epsilon = 1e-15);
        let rel = |x: f64| {
            let w = w0(x).unwrap().w;
            ((w_log_asymptotic(x).unwrap() - w) / w).abs()
        };
        assert!(rel(1e6) <= 0.05);
        assert!(rel(1e12) < rel(1e6));
        assert!(w_log_asymptotic(E).is_err());
    }

    #[test]
    fn log_argument_form() {
        assert_relative_eq!(w0_exp(2.0), w0(2f64.exp()).unwrap().w, epsilon = 1e-14);
        let w = w0_exp(1000.0);
        assert_relative_eq!(w + w.ln(), 1000.0, epsilon = 1e-12);
    }

    #[test]
    fn large_and_tiny_arguments() {
        for &x in &[1e3, 1e50, 1e300] {
            assert!(w0(x).unwrap().is_certified());
        }
        for &x in &[-1e-30, -1e-300] {
            let v = w_minus1(x).unwrap();
            assert!(v.is_certified() && v.w < -1.0);
        }
    }
}
