//! Bounded-Lipschitz distance between finitely supported measures.
//!
//! `d_BL(ν, μ) = sup { ∫f d(ν − μ) : |f| ≤ 1, f 1-Lipschitz }`. A function
//! is feasible iff (after centering) it is 1-Lipschitz for the truncated
//! metric `d ∧ 2`, so the supremum equals the optimal transport cost of
//! `(ν − μ)^+` onto `(ν − μ)^-` under `d ∧ 2`. The transport problem is
//! solved exactly by successive shortest paths; its potentials yield an
//! explicit feasible `f` whose value certifies the optimum.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::partition::TaggedPartition;
use crate::scalar::{compensated_sum, lit, Real};
use crate::space::{MetricSpace, Point};

/// Slack added to the radius in closed-ball membership.
pub const BALL_SLACK: f64 = 1e-9;

/// `(ν − μ)` on the merged support with the pairwise metric.
#[derive(Clone, Debug, PartialEq)]
pub struct BlInstance<T> {
    pub support: Vec<Point<T>>,
    pub distances: Vec<Vec<T>>,
    pub delta: Vec<T>,
}

/// Optimal value with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlSolution<T> {
    /// Optimal transport cost, equal to `d_BL`.
    pub value: T,
    /// `∫f d(ν − μ)` for the witness below, a lower bound on `d_BL`.
    pub witness_value: T,
    /// `value − witness_value`.
    pub gap: T,
    pub support: Vec<Point<T>>,
    /// A feasible `f` on `support` with `|f| ≤ 1`.
    pub witness: Vec<T>,
}

impl<T: Real> BlInstance<T> {
    pub fn new(nu: &FiniteMeasure<T>, mu: &FiniteMeasure<T>, space: &MetricSpace<T>) -> Result<Self> {
        let aligned = nu.align(mu);
        let support: Vec<Point<T>> = aligned.iter().map(|a| a.0).collect();
        let delta = aligned.iter().map(|a| a.1 - a.2).collect();
        let mut distances = vec![vec![T::zero(); support.len()]; support.len()];
        for i in 0..support.len() {
            for j in i + 1..support.len() {
                let d = space.distance(&support[i], &support[j])?;
                distances[i][j] = d;
                distances[j][i] = d;
            }
        }
        Ok(BlInstance { support, distances, delta })
    }

    fn cost(&self, i: usize, j: usize) -> T {
        self.distances[i][j].min(lit(2.0))
    }

    pub fn solve(&self) -> Result<BlSolution<T>> {
        let n = self.support.len();
        let sources: Vec<usize> = (0..n).filter(|&i| self.delta[i] > T::zero()).collect();
        let sinks: Vec<usize> = (0..n).filter(|&i| self.delta[i] < T::zero()).collect();
        if sources.is_empty() || sinks.is_empty() {
            return Ok(BlSolution {
                value: T::zero(),
                witness_value: T::zero(),
                gap: T::zero(),
                support: self.support.clone(),
                witness: vec![T::zero(); n],
            });
        }
        let cost: Vec<Vec<T>> = sources.iter().map(|&i| sinks.iter().map(|&j| self.cost(i, j)).collect()).collect();
        let supply: Vec<T> = sources.iter().map(|&i| self.delta[i]).collect();
        let demand: Vec<T> = sinks.iter().map(|&j| -self.delta[j]).collect();
        let plan = transport(&cost, supply, demand)?;
        let value = compensated_sum(plan.flow.iter().zip(&cost).flat_map(|(row, c)| row.iter().zip(c).map(|(&x, &c)| x * c)));
        // c-transform of the sink potentials: f(z) = min_j ψ_j + c(z, y_j).
        let mut witness: Vec<T> =
            (0..n).map(|z| sinks.iter().zip(&plan.sink_potential).map(|(&j, &psi)| psi + self.cost(z, j)).fold(T::infinity(), T::min)).collect();
        let hi = witness.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = witness.iter().copied().fold(T::infinity(), T::min);
        let centre = lo + (hi - lo) / lit(2.0);
        for f in &mut witness {
            *f = (*f - centre).max(-T::one()).min(T::one());
        }
        let witness_value = compensated_sum(witness.iter().zip(&self.delta).map(|(&f, &d)| f * d));
        Ok(BlSolution { value, witness_value, gap: value - witness_value, support: self.support.clone(), witness })
    }
}

struct Plan<T> {
    flow: Vec<Vec<T>>,
    /// `ψ_j` with `φ_i − ψ_j ≤ c_ij` for the matching source potentials.
    sink_potential: Vec<T>,
}

/// Min-cost transport on a complete bipartite graph by successive shortest
/// paths with Dijkstra on reduced costs.
fn transport<T: Real>(cost: &[Vec<T>], mut supply: Vec<T>, mut demand: Vec<T>) -> Result<Plan<T>> {
    let (k, l) = (supply.len(), demand.len());
    let total: T = supply.iter().copied().sum();
    let tol = T::epsilon() * lit::<T>(8.0 * (k + l) as f64) * total.max(T::one());
    let mut flow = vec![vec![T::zero(); l]; k];
    let mut pot_s = vec![T::zero(); k];
    let mut pot_t = vec![T::zero(); l];
    let reduced = |c: T, ps: T, pt: T| (c + ps - pt).max(T::zero());
    let max_rounds = 4 * (k + l) * (k + l) + 16;
    for _ in 0..max_rounds {
        if supply.iter().all(|&s| s <= tol) || demand.iter().all(|&d| d <= tol) {
            let sink_potential = pot_t.iter().map(|&p| -p).collect();
            return Ok(Plan { flow, sink_potential });
        }
        // Nodes 0..k are sources, k..k+l sinks.
        let mut dist = vec![T::infinity(); k + l];
        let mut pred = vec![usize::MAX; k + l];
        let mut done = vec![false; k + l];
        for i in 0..k {
            if supply[i] > tol {
                dist[i] = T::zero();
            }
        }
        let target = loop {
            let u = (0..k + l)
                .filter(|&v| !done[v] && dist[v].is_finite())
                .min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap_or(Ordering::Equal))
                .ok_or_else(|| Error::Internal("transport: no augmenting path".into()))?;
            done[u] = true;
            if u >= k && demand[u - k] > tol {
                break u;
            }
            if u < k {
                for j in 0..l {
                    let nd = dist[u] + reduced(cost[u][j], pot_s[u], pot_t[j]);
                    if nd < dist[k + j] {
                        dist[k + j] = nd;
                        pred[k + j] = u;
                    }
                }
            } else {
                let j = u - k;
                for i in 0..k {
                    if flow[i][j] > T::zero() {
                        let nd = dist[u] + reduced(-cost[i][j], pot_t[j], pot_s[i]);
                        if nd < dist[i] {
                            dist[i] = nd;
                            pred[i] = u;
                        }
                    }
                }
            }
        };
        let dt = dist[target];
        for i in 0..k {
            pot_s[i] = pot_s[i] + dist[i].min(dt);
        }
        for j in 0..l {
            pot_t[j] = pot_t[j] + dist[k + j].min(dt);
        }
        let mut amount = demand[target - k];
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if v >= k {
                // Forward edge u → v: unbounded capacity.
            } else {
                amount = amount.min(flow[v][u - k]);
            }
            v = u;
        }
        amount = amount.min(supply[v]);
        let start = v;
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if v >= k {
                flow[u][v - k] = flow[u][v - k] + amount;
            } else {
                flow[v][u - k] = flow[v][u - k] - amount;
            }
            v = u;
        }
        supply[start] = supply[start] - amount;
        demand[target - k] = demand[target - k] - amount;
    }
    Err(Error::Internal("transport did not terminate".into()))
}

/// Exact `d_BL(ν, μ)` with its primal/dual certificate.
///
/// The pair is put in a canonical order first, so swapping the arguments
/// yields bit-identical results.
pub fn bl_solution<T: Real>(nu: &FiniteMeasure<T>, mu: &FiniteMeasure<T>, space: &MetricSpace<T>) -> Result<BlSolution<T>> {
    let swap = nu.align(mu).iter().map(|a| a.1.partial_cmp(&a.2).unwrap_or(Ordering::Equal)).find(|o| *o != Ordering::Equal) == Some(Ordering::Less);
    let (a, b) = if swap { (mu, nu) } else { (nu, mu) };
    let mut sol = BlInstance::new(a, b, space)?.solve()?;
    if swap {
        for f in &mut sol.witness {
            *f = -*f;
        }
    }
    Ok(sol)
}

/// `d_BL(ν, μ)`.
pub fn bl_distance<T: Real>(nu: &FiniteMeasure<T>, mu: &FiniteMeasure<T>, space: &MetricSpace<T>) -> Result<T> {
    bl_solution(nu, mu, space).map(|s| s.value)
}

/// `Σ w_i (d(x_i, y_i) ∧ 2)`, an upper bound on `d_BL` of the marginals.
pub fn coupling_bound<T: Real>(pairs: &[(Point<T>, Point<T>, T)], space: &MetricSpace<T>) -> Result<T> {
    if pairs.iter().any(|p| !(p.2 >= T::zero())) {
        return Err(Error::Argument("coupling weights must be nonnegative".into()));
    }
    let total = compensated_sum(pairs.iter().map(|p| p.2));
    let tol = T::mass_tolerance().max(lit::<T>(4.0 * pairs.len() as f64) * T::epsilon());
    if (total - T::one()).abs() > tol {
        return Err(Error::Argument(format!("coupling weights sum to {total}, expected 1")));
    }
    let terms = pairs.iter().map(|(x, y, w)| space.distance(x, y).map(|d| *w * d.min(lit(2.0)))).collect::<Result<Vec<T>>>()?;
    Ok(compensated_sum(terms))
}

/// Weighted pairs `(x, y, w)` of a finitely supported coupling.
pub type Coupling<T> = Vec<(Point<T>, Point<T>, T)>;

/// The coupling `(X, π^m(X))` for `X ~ σ`.
pub fn projection_coupling<T: Real>(sigma: &FiniteMeasure<T>, partition: &TaggedPartition<T>) -> Result<Coupling<T>> {
    sigma.iter().map(|(x, w)| partition.project(x).map(|t| (*x, t, w))).collect()
}

/// Coupling bound on `d_BL(σ, σ^m)` through the projection coupling.
pub fn projection_coupling_bound<T: Real>(sigma: &FiniteMeasure<T>, partition: &TaggedPartition<T>, space: &MetricSpace<T>) -> Result<T> {
    coupling_bound(&projection_coupling(sigma, partition)?, space)
}

/// `1/m + 2α/θ + 2e^{−m²−1+θ}/(mθ)`, the bound on `d_BL(σ^m, σ)` when
/// `H(σ|μ) ≤ α` and the exhaustion tails obey `μ(K_m^∁) ≤ e^{−m²−1}/m`.
pub fn projection_distance_bound(alpha: f64, m: usize, theta: f64) -> f64 {
    let m = m as f64;
    1.0 / m + 2.0 * alpha / theta + 2.0 * (-m * m - 1.0 + theta).exp() / (m * theta)
}

/// `d_BL(σ, center) ≤ radius + 1e-9`.
pub fn in_ball<T: Real>(sigma: &FiniteMeasure<T>, center: &FiniteMeasure<T>, radius: T, space: &MetricSpace<T>) -> Result<bool> {
    if !(radius >= T::zero()) {
        return Err(Error::Argument(format!("radius must be nonnegative, got {radius}")));
    }
    if radius >= lit(2.0) {
        return Ok(true);
    }
    Ok(bl_distance(sigma, center, space)? <= radius + lit(BALL_SLACK))
}
