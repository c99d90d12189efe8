use serde::Serialize;

use crate::bl::{bl_solution, BALL_SLACK};
use crate::entropy::relative_entropy_weights;
use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::scalar::{compensated_sum, lit, log_sum_exp, wide, Real};
use crate::space::{MetricSpace, Point};

const MAX_CUTS: usize = 400;
const MAX_NEWTON: usize = 500;

/// Minimizer of `H(σ|μ_m)` over the closed BL ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallInf<T> {
    /// `H(σ*|μ_m)`; `+∞` when the ball contains no measure on the tags.
    pub value: T,
    /// Dual lower bound on the infimum.
    pub lower_bound: T,
    /// `σ*`; `None` when infeasible.
    pub minimizer: Option<FiniteMeasure<T>>,
    /// `d_BL(σ*, center)`.
    pub distance: T,
    pub cuts: usize,
}

/// `inf { H(σ|μ_m) : σ on the tags, d_BL(σ, center) ≤ radius }`.
///
/// The ball is the intersection of the half-spaces `∫f d(σ − center) ≤ r`
/// over feasible `f`. Starting from `σ = μ_m`, the BL witness of the current
/// point is added as a cut, and the entropy projection onto the cuts is
/// recomputed through its concave dual in the multipliers. The loop stops
/// once the current point lies in the ball up to `1e-9`.
pub fn ball_inf_entropy<T: Real>(center: &FiniteMeasure<T>, mu_m: &FiniteMeasure<T>, radius: T, space: &MetricSpace<T>) -> Result<BallInf<T>> {
    if !(radius >= T::zero()) {
        return Err(Error::Argument(format!("radius must be nonnegative, got {radius}")));
    }
    let atoms: Vec<(Point<T>, T)> = mu_m.iter().filter(|(_, w)| *w > T::zero()).map(|(p, w)| (*p, w)).collect();
    let tags: Vec<Point<T>> = atoms.iter().map(|a| a.0).collect();
    let mu: Vec<T> = atoms.iter().map(|a| a.1).collect();
    let mu_pos = FiniteMeasure::normalized(tags.clone(), mu.clone())?;
    let slack = lit::<T>(BALL_SLACK);

    // Cheapest transport of the center onto the tags bounds every σ.
    let mut nearest = Vec::with_capacity(center.len());
    for (y, _) in center.iter() {
        let mut best = T::infinity();
        for t in &tags {
            best = best.min(space.distance(t, y)?.min(lit(2.0)));
        }
        nearest.push(best);
    }
    let floor = compensated_sum(center.iter().zip(&nearest).map(|((_, w), &d)| w * d));
    if floor > radius + slack {
        return Ok(BallInf { value: T::infinity(), lower_bound: T::infinity(), minimizer: None, distance: floor, cuts: 0 });
    }

    let mut sigma = mu_pos.clone();
    let mut cuts: Vec<Vec<T>> = Vec::new();
    let mut offsets: Vec<T> = Vec::new();
    let mut eta: Vec<T> = Vec::new();
    let mut lower = T::zero();
    for _ in 0..=MAX_CUTS {
        let sol = bl_solution(&sigma, center, space)?;
        if sol.value <= radius + slack {
            let value = relative_entropy_weights(sigma.weights(), mu_pos.weights());
            return Ok(BallInf { value, lower_bound: lower.min(value), minimizer: Some(sigma), distance: sol.value, cuts: cuts.len() });
        }
        if cuts.len() == MAX_CUTS {
            return Err(Error::OptimizerFailure { iterations: cuts.len(), residual: wide(sol.value - radius) });
        }
        // Witness values on the tags, and ∫f dcenter folded into the offset.
        let f_at = |p: &Point<T>| sol.support.iter().position(|q| q == p).map(|i| sol.witness[i]).unwrap_or(T::zero());
        let row: Vec<T> = tags.iter().map(f_at).collect();
        let centre_mean = compensated_sum(center.iter().map(|(p, w)| w * f_at(p)));
        cuts.push(row);
        offsets.push(radius + centre_mean);
        eta.push(T::zero());
        lower = maximize_dual(&mu, &cuts, &offsets, &mut eta)?;
        let weights = tilt(&mu, &cuts, &eta);
        sigma = FiniteMeasure::normalized(tags.clone(), weights)?;
    }
    Err(Error::Internal("cutting-plane loop exited without a verdict".into()))
}

/// `σ_η ∝ μ exp(−Σ_j η_j f_j)`.
fn tilt<T: Real>(mu: &[T], cuts: &[Vec<T>], eta: &[T]) -> Vec<T> {
    let logs: Vec<T> = (0..mu.len()).map(|i| mu[i].ln() - cuts.iter().zip(eta).map(|(c, &e)| e * c[i]).sum::<T>()).collect();
    let z = log_sum_exp(&logs);
    logs.iter().map(|&l| (l - z).exp()).collect()
}

/// `D(η) = −log Σ μ e^{−Σ η_j f_j} − Σ η_j b_j`.
fn dual<T: Real>(mu: &[T], cuts: &[Vec<T>], offsets: &[T], eta: &[T]) -> T {
    let logs: Vec<T> = (0..mu.len()).map(|i| mu[i].ln() - cuts.iter().zip(eta).map(|(c, &e)| e * c[i]).sum::<T>()).collect();
    -(log_sum_exp(&logs) - log_sum_exp(&mu.iter().map(|w| w.ln()).collect::<Vec<_>>()))
        - compensated_sum(eta.iter().zip(offsets).map(|(&e, &b)| e * b))
}

/// Projected Newton ascent on `D` over `η ≥ 0`; returns the final value.
fn maximize_dual<T: Real>(mu: &[T], cuts: &[Vec<T>], offsets: &[T], eta: &mut [T]) -> Result<T> {
    let j = cuts.len();
    let mut value = dual(mu, cuts, offsets, eta);
    for _ in 0..MAX_NEWTON {
        let sigma = tilt(mu, cuts, eta);
        let means: Vec<T> = cuts.iter().map(|c| compensated_sum(c.iter().zip(&sigma).map(|(&f, &s)| f * s))).collect();
        let grad: Vec<T> = means.iter().zip(offsets).map(|(&m, &b)| m - b).collect();
        let free: Vec<usize> = (0..j).filter(|&a| eta[a] > T::zero() || grad[a] > T::zero()).collect();
        let pg: T = free.iter().map(|&a| grad[a] * grad[a]).sum::<T>().sqrt();
        if pg <= lit(1e-13) || free.is_empty() {
            break;
        }
        // −∇²D = Cov_σ(f_a, f_b) on the free block, lightly regularized.
        let mut h = vec![vec![T::zero(); free.len()]; free.len()];
        for (x, &a) in free.iter().enumerate() {
            for (y, &b) in free.iter().enumerate() {
                let cov = compensated_sum(sigma.iter().enumerate().map(|(i, &s)| s * (cuts[a][i] - means[a]) * (cuts[b][i] - means[b])));
                h[x][y] = cov;
            }
        }
        let trace: T = (0..free.len()).map(|x| h[x][x]).sum();
        let ridge = (trace * lit(1e-12)).max(lit(1e-15));
        for (x, row) in h.iter_mut().enumerate() {
            row[x] = row[x] + ridge;
        }
        let rhs: Vec<T> = free.iter().map(|&a| grad[a]).collect();
        let step = solve_dense(h, rhs).ok_or_else(|| Error::Internal("singular Newton system".into()))?;
        let mut t = T::one();
        let mut improved = false;
        for _ in 0..60 {
            let mut trial = eta.to_vec();
            for (x, &a) in free.iter().enumerate() {
                trial[a] = (eta[a] + t * step[x]).max(T::zero());
            }
            let gain: T = free.iter().map(|&a| grad[a] * (trial[a] - eta[a])).sum();
            let tv = dual(mu, cuts, offsets, &trial);
            if tv >= value + lit::<T>(1e-4) * gain && tv >= value {
                eta.copy_from_slice(&trial);
                improved = tv > value;
                value = tv;
                break;
            }
            t = t / lit(2.0);
        }
        if !improved {
            break;
        }
    }
    Ok(value)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[pivot][col].abs() <= T::min_positive_value() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let factor = a[row][col] / pivot_row[col];
            for (x, &p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = *x - factor * p;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Point<f64> {
        Point::Real(x)
    }

    fn two(a: f64) -> FiniteMeasure<f64> {
        FiniteMeasure::new(vec![r(0.0), r(1.0)], vec![a, 1.0 - a]).unwrap()
    }

    #[test]
    fn centre_at_reference_is_free() {
        let s = MetricSpace::real_line();
        let mu = two(0.5);
        assert_eq!(ball_inf_entropy(&mu, &mu, 0.0, &s).unwrap().value, 0.0);
        assert_eq!(ball_inf_entropy(&two(0.9), &mu, 2.0, &s).unwrap().value, 0.0);
    }

    #[test]
    fn two_tag_instance() {
        let s = MetricSpace::real_line();
        let out = ball_inf_entropy(&two(0.9), &two(0.5), 0.1, &s).unwrap();
        // Binary KL of 0.8 against 0.5.
        assert!((out.value - 0.1927447570217575).abs() < 1e-9, "{}", out.value);
        assert!(out.lower_bound <= out.value + 1e-12 && out.value - out.lower_bound < 1e-8);
    }

    #[test]
    fn unreachable_ball_is_infinite() {
        let s = MetricSpace::real_line();
        let out = ball_inf_entropy(&FiniteMeasure::dirac(r(5.0)), &two(0.5), 0.5, &s).unwrap();
        assert!(out.value.is_infinite());
        assert!(out.minimizer.is_none());
    }
}
