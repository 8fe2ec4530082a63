//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

/// Direct `ln_q exp(−⟨ln P⟩_q)` with `0^q := 0`.
pub fn ref_dq(p: &[f64], q: f64) -> f64 {
    let kept: Vec<f64> = p.iter().copied().filter(|&v| v > 0.0).collect();
    let z: f64 = kept.iter().map(|v| v.powf(q)).sum();
    let mean: f64 = kept.iter().map(|v| v.powf(q) * v.ln()).sum::<f64>() / z;
    if (q - 1.0).abs() < 1e-12 {
        return -mean;
    }
    ((-(1.0 - q) * mean).exp() - 1.0) / (1.0 - q)
}

pub fn ref_shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

pub fn ref_gibbs(e: &[f64], beta: f64) -> Vec<f64> {
    let m = e.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - m)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Nelder-Mead minimization.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[d] - vals[0]).abs() <= 1e-16 * (1.0 + vals[0].abs()) {
            let spread = (1..=d)
                .flat_map(|k| (0..d).map(move |j| (k, j)))
                .fold(0.0f64, |m, (k, j)| m.max((simplex[k][j] - simplex[0][j]).abs()));
            if spread < 1e-12 {
                break;
            }
        }
        let centroid: Vec<f64> = (0..d).map(|j| simplex[..d].iter().map(|x| x[j]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|j| centroid[j] + t * (simplex[d][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[d] = xe;
                vals[d] = fe;
            } else {
                simplex[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            simplex[d] = xr;
            vals[d] = fr;
        } else {
            let (xc, fc) = if fr < vals[d] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < vals[d].min(fr) {
                simplex[d] = xc;
                vals[d] = fc;
            } else {
                for k in 1..=d {
                    simplex[k] = (0..d).map(|j| 0.5 * (simplex[0][j] + simplex[k][j])).collect();
                    vals[k] = f(&simplex[k]);
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best].clone(), vals[best])
}

fn softmax(u: &[f64]) -> Vec<f64> {
    let mut full = u.to_vec();
    full.push(0.0);
    let m = full.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = full.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// `D_q(p) − Ω⟨E⟩_r` with `r = q` (escort) or `r = 1` (linear).
pub fn ref_objective(p: &[f64], e: &[f64], q: f64, omega: f64, linear: bool) -> f64 {
    let r = if linear { 1.0 } else { q };
    let w: Vec<f64> = p.iter().map(|&v| if v > 0.0 { v.powf(r) } else { 0.0 }).collect();
    let z: f64 = w.iter().sum();
    let mean: f64 = w.iter().zip(e).map(|(a, b)| a * b).sum::<f64>() / z;
    ref_dq(p, q) - omega * mean
}

/// Brute-force maximizer of the MaxEnt objective: grid seeding on the
/// simplex followed by Nelder-Mead restarts in softmax coordinates.
pub fn oracle_maxent(e: &[f64], q: f64, omega: f64, linear: bool) -> Vec<f64> {
    let n = e.len();
    let obj = |u: &[f64]| -ref_objective(&softmax(u), e, q, omega, linear);
    let grid = 12usize;
    let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut counts = vec![0usize; n];
    fn walk(k: usize, left: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k + 1 == counts.len() {
            counts[k] = left;
            out.push(counts.clone());
            return;
        }
        for c in 1..left {
            counts[k] = c;
            walk(k + 1, left - c, counts, out);
        }
    }
    let mut compositions = Vec::new();
    walk(0, grid, &mut counts, &mut compositions);
    for c in compositions {
        let last = c[n - 1] as f64;
        let u: Vec<f64> = c[..n - 1].iter().map(|&v| (v as f64 / last).ln()).collect();
        seeds.push((obj(&u), u));
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (_, u0) in seeds.iter().take(4) {
        let (mut u, mut v) = nelder_mead(&obj, u0, 0.3, 20_000);
        for step in [0.1, 0.01, 1e-3, 1e-4] {
            let (u2, v2) = nelder_mead(&obj, &u, step, 20_000);
            if v2 <= v {
                u = u2;
                v = v2;
            }
        }
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((u, v));
        }
    }
    softmax(&best.unwrap().0)
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
