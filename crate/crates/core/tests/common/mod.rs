//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ldp_core::bl::bl_distance;
use ldp_core::entropy::relative_entropy_integral;
use ldp_core::{FiniteMeasure, MetricSpace, Point};

/// Dense tableau simplex for `max cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, with
/// `b ≥ 0`. Bland's rule; returns the optimal value.
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let (rows, cols) = (a.len(), c.len());
    let width = cols + rows + 1;
    let mut t = vec![vec![0.0; width]; rows + 1];
    for i in 0..rows {
        t[i][..cols].copy_from_slice(&a[i]);
        t[i][cols + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..cols {
        t[rows][j] = -c[j];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    while let Some(enter) = (0..width - 1).find(|&j| t[rows][j] < -1e-12) {
        let mut leave = None;
        let mut best = f64::INFINITY;
        for i in 0..rows {
            if t[i][enter] > 1e-12 {
                let ratio = t[i][width - 1] / t[i][enter];
                if ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave.is_some_and(|l: usize| basis[i] < basis[l])) {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let r = leave.expect("bounded problem");
        let pivot = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[enter] != 0.0 {
                let factor = row[enter];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        basis[r] = enter;
    }
    t[rows][width - 1]
}

/// `d_BL` as the primal program over `g = f + 1 ∈ [0, 2]` with all pairwise
/// Lipschitz constraints.
pub fn bl_by_simplex(nu: &FiniteMeasure<f64>, mu: &FiniteMeasure<f64>, space: &MetricSpace<f64>) -> f64 {
    let aligned = nu.align(mu);
    let n = aligned.len();
    let delta: Vec<f64> = aligned.iter().map(|a| a.1 - a.2).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                row[j] = -1.0;
                a.push(row);
                b.push(space.distance(&aligned[i].0, &aligned[j].0).unwrap());
            }
        }
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        a.push(row);
        b.push(2.0);
    }
    simplex_max(&a, &b, &delta)
}

pub fn binary_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Minimum of `H(σ|μ_m)` over the BL ball, for at most four positive tags.
///
/// A coarse simplex grid finds a point `q` well inside the ball. The
/// minimum of a convex function whose free minimizer `μ_m` lies outside a
/// convex set is attained on its boundary, and every boundary point is the
/// exit point of a ray from `q`; exit points are found by bisection and the
/// entropy along them is scanned densely over directions, then refined.
pub fn grid_ball_inf(center: &FiniteMeasure<f64>, mu_m: &FiniteMeasure<f64>, radius: f64, space: &MetricSpace<f64>) -> f64 {
    let tags: Vec<Point<f64>> = mu_m.iter().filter(|(_, w)| *w > 0.0).map(|(p, _)| *p).collect();
    let base: Vec<f64> = mu_m.iter().filter(|(_, w)| *w > 0.0).map(|(_, w)| w).collect();
    let k = tags.len();
    assert!((1..=4).contains(&k));
    let dims = k - 1;
    let to_measure = |x: &[f64]| {
        let last = 1.0 - x.iter().sum::<f64>();
        let mut w: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        w.push(last.max(0.0));
        FiniteMeasure::normalized(tags.clone(), w).unwrap()
    };
    let dist = |x: &[f64]| bl_distance(&to_measure(x), center, space).unwrap();
    let entropy = |x: &[f64]| relative_entropy_integral(&to_measure(x), mu_m);
    let free = &base[..dims];
    if dist(free) <= radius + 1e-9 {
        return 0.0;
    }
    if dims == 0 {
        return f64::INFINITY;
    }

    let coarse = 40usize;
    let mut q: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; dims];
    loop {
        if idx.iter().sum::<usize>() <= coarse {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 / coarse as f64).collect();
            let d = dist(&x);
            if q.as_ref().is_none_or(|b| d < b.0) {
                q = Some((d, x));
            }
        }
        let Some(pos) = (0..dims).find(|&d| idx[d] < coarse) else { break };
        idx[pos] += 1;
        for d in idx.iter_mut().take(pos) {
            *d = 0;
        }
    }
    let (dq, q) = q.unwrap();
    if dq > radius + 1e-9 {
        return f64::INFINITY;
    }

    let exit = |u: &[f64]| -> f64 {
        // Largest t keeping q + t·u in the simplex.
        let mut t_max = f64::INFINITY;
        for (qi, ui) in q.iter().zip(u) {
            if *ui < 0.0 {
                t_max = t_max.min(-qi / ui);
            }
        }
        let su: f64 = u.iter().sum();
        if su > 0.0 {
            t_max = t_max.min((1.0 - q.iter().sum::<f64>()) / su);
        }
        let at = |t: f64| -> Vec<f64> { q.iter().zip(u).map(|(a, b)| a + t * b).collect() };
        if dist(&at(t_max)) <= radius + 1e-9 {
            return entropy(&at(t_max));
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if dist(&at(mid)) <= radius + 1e-9 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        entropy(&at(lo))
    };

    let tau = std::f64::consts::TAU;
    match dims {
        1 => exit(&[1.0]).min(exit(&[-1.0])),
        2 => scan_min(&|t: f64| exit(&[t.cos(), t.sin()]), 0.0, tau, 720, true),
        _ => {
            let ring = |a: f64| scan_min(&|b: f64| exit(&[a.sin() * b.cos(), a.sin() * b.sin(), a.cos()]), 0.0, tau, 96, true);
            scan_min(&ring, 0.0, std::f64::consts::PI, 48, false)
        }
    }
}

/// Scans `f` on `n` points of `[lo, hi]` and refines every local minimum
/// by golden section.
fn scan_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, n: usize, periodic: bool) -> f64 {
    let step = (hi - lo) / if periodic { n } else { n - 1 } as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(lo + step * i as f64)).collect();
    let mut best = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    for i in 0..n {
        let prev = if i > 0 {
            vals[i - 1]
        } else if periodic {
            vals[n - 1]
        } else {
            f64::INFINITY
        };
        let next = if i + 1 < n {
            vals[i + 1]
        } else if periodic {
            vals[0]
        } else {
            f64::INFINITY
        };
        if vals[i] <= prev && vals[i] <= next {
            let t = lo + step * i as f64;
            let (a, b) = if periodic { (t - step, t + step) } else { ((t - step).max(lo), (t + step).min(hi)) };
            best = best.min(golden(f, a, b));
        }
    }
    best
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-11 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}
