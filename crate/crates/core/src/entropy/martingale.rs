use serde::Serialize;

use super::{format_value, relative_entropy_weights};
use crate::error::{Error, Result};
use crate::measure::Discretize;
use crate::partition::PartitionSequence;
use crate::scalar::{compensated_sum, wide, xlogx, ExactScalar, Real};
use crate::space::Point;

/// `S_m = (dν^m/dμ^m) ∘ π^m`, stored per cell, with its moments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleTrace<T> {
    pub depths: Vec<usize>,
    /// `S_m` on each depth-`m` cell; zero on `μ`-null cells.
    pub s_values: Vec<Vec<T>>,
    /// `E_μ[S_m]`.
    pub means: Vec<T>,
    /// `E_μ[S_m log S_m]`.
    pub entropies: Vec<T>,
    /// `H(ν^m|μ^m)` computed independently.
    pub ladder: Vec<T>,
    /// `sup_m E_μ[S_m log S_m]`.
    pub ui_bound: T,
    /// Largest `|E_μ[S_{m+1} 1_A] − E_μ[S_m 1_A]|` over depth-`m` cells `A`.
    pub tower_residuals: Vec<T>,
}

impl<T: Real> MartingaleTrace<T> {
    /// CSV with header `m,H_m,E_S_log_S`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,H_m,E_S_log_S\n");
        for ((m, h), e) in self.depths.iter().zip(&self.ladder).zip(&self.entropies) {
            out.push_str(&format!("{m},{},{}\n", format_value(wide(*h)), format_value(wide(*e))));
        }
        out
    }
}

/// Builds the martingale trace; fails when `ν` charges a `μ`-null cell.
pub fn martingale_trace<T, N, M>(nu: &N, mu: &M, seq: &PartitionSequence<T>) -> Result<MartingaleTrace<T>>
where
    T: Real,
    N: Discretize<T> + ?Sized,
    M: Discretize<T> + ?Sized,
{
    let mut trace = MartingaleTrace {
        depths: Vec::new(),
        s_values: Vec::new(),
        means: Vec::new(),
        entropies: Vec::new(),
        ladder: Vec::new(),
        ui_bound: T::zero(),
        tower_residuals: Vec::new(),
    };
    let mut previous: Option<(Vec<T>, Vec<T>)> = None;
    for (i, p) in seq.partitions().iter().enumerate() {
        let m = i + 1;
        let (nu_m, mu_m) = (nu.cell_masses(p)?, mu.cell_masses(p)?);
        if let Some(k) = (0..p.len()).find(|&k| nu_m[k] > T::zero() && mu_m[k] <= T::zero()) {
            return Err(Error::Domain(format!("infinite entropy: ν charges μ-null cell ({m},{k})")));
        }
        let s: Vec<T> = nu_m.iter().zip(&mu_m).map(|(&a, &b)| if b > T::zero() { a / b } else { T::zero() }).collect();
        trace.means.push(compensated_sum(mu_m.iter().zip(&s).map(|(&w, &x)| w * x)));
        let e = compensated_sum(mu_m.iter().zip(&s).map(|(&w, &x)| w * xlogx(x)));
        trace.entropies.push(e);
        trace.ladder.push(relative_entropy_weights(&nu_m, &mu_m));
        trace.ui_bound = trace.ui_bound.max(e);
        if let Some((prev_s, prev_mu)) = previous.take() {
            let mut integrals = vec![T::zero(); prev_s.len()];
            for (cell, (&w, &x)) in p.cells().iter().zip(mu_m.iter().zip(&s)) {
                let parent = cell.parent.ok_or_else(|| Error::Internal(format!("cell ({m},{}) has no parent", cell.index)))?;
                integrals[parent] = integrals[parent] + w * x;
            }
            let residual = integrals.iter().zip(prev_s.iter().zip(&prev_mu)).map(|(&int, (&x, &w))| (int - w * x).abs()).fold(T::zero(), T::max);
            trace.tower_residuals.push(residual);
        }
        trace.depths.push(m);
        trace.s_values.push(s.clone());
        previous = Some((s, mu_m));
    }
    Ok(trace)
}

/// Checks `E_μ[S_{m+1} | F_m] = S_m` on every cell of every consecutive
/// depth pair in exact arithmetic.
///
/// `nu` and `mu` give exact weights for the `atoms`. Entry `m − 1` of the
/// result refers to the pair `(m, m + 1)`.
pub fn tower_property_exact<T: Real, S: ExactScalar>(seq: &PartitionSequence<T>, atoms: &[Point<T>], nu: &[S], mu: &[S]) -> Result<Vec<bool>> {
    if atoms.len() != nu.len() || atoms.len() != mu.len() {
        return Err(Error::Argument("atoms and weights differ in length".into()));
    }
    let masses = |depth: usize, w: &[S]| -> Result<Vec<S>> {
        let p = seq.at(depth)?;
        let mut out = vec![S::zero(); p.len()];
        for (a, x) in atoms.iter().zip(w) {
            let k = p.locate(a)?;
            out[k] = out[k].clone() + x.clone();
        }
        Ok(out)
    };
    let density = |n: &S, m: &S, depth: usize, k: usize| -> Result<S> {
        if *m > S::zero() {
            Ok(n.clone() / m.clone())
        } else if *n > S::zero() {
            Err(Error::Domain(format!("infinite entropy: ν charges μ-null cell ({depth},{k})")))
        } else {
            Ok(S::zero())
        }
    };
    let mut out = Vec::new();
    for m in 1..seq.max_depth() {
        let (nu_c, mu_c) = (masses(m, nu)?, masses(m, mu)?);
        let (nu_f, mu_f) = (masses(m + 1, nu)?, masses(m + 1, mu)?);
        let mut conditional = vec![S::zero(); nu_c.len()];
        for (k, cell) in seq.at(m + 1)?.cells().iter().enumerate() {
            let parent = cell.parent.ok_or_else(|| Error::Internal(format!("cell ({},{k}) has no parent", m + 1)))?;
            let s = density(&nu_f[k], &mu_f[k], m + 1, k)?;
            conditional[parent] = conditional[parent].clone() + mu_f[k].clone() * s;
        }
        let mut holds = true;
        for k in 0..nu_c.len() {
            let s_m = density(&nu_c[k], &mu_c[k], m, k)?;
            if mu_c[k] > S::zero() && conditional[k].clone() / mu_c[k].clone() != s_m {
                holds = false;
            }
        }
        out.push(holds);
    }
    Ok(out)
}
