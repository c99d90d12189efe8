//! Relative entropy in integral and variational form, the discretized
//! entropy ladder, and the Radon–Nikodym martingale over a partition
//! sequence.

mod martingale;
mod variational;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::measure::{Discretize, FiniteMeasure, SourceMeasure};
use crate::partition::PartitionSequence;
use crate::scalar::{compensated_sum, lit, log_sum_exp, wide, xlogx, Real};
use crate::space::Point;
use crate::special::adaptive_simpson;

pub use martingale::{martingale_trace, tower_property_exact, MartingaleTrace};
pub use variational::{relative_entropy_variational, variational_maximizer, VariationalSolution};

/// `μ φ(ν/μ)` with `φ(r) = r log r − r + 1 ≥ 0`; `+∞` when `ν > 0 = μ`.
///
/// Summed over a pair of probability vectors this equals `Σ ν log(ν/μ)`,
/// and every term is nonnegative, so the total is too.
fn divergence_term<T: Real>(nu: T, mu: T) -> T {
    if mu <= T::zero() {
        return if nu > T::zero() { T::infinity() } else { T::zero() };
    }
    if nu <= T::zero() {
        return mu;
    }
    let r = nu / mu;
    // ln_1p only pays off near r = 1; far below it `r − 1` rounds to −1.
    let r_log_r = if r < lit(0.5) { xlogx(r) } else { r * (r - T::one()).ln_1p() };
    (mu * (r_log_r - (r - T::one()))).max(T::zero())
}

/// `H(ν|μ)` for aligned weight vectors.
pub fn relative_entropy_weights<T: Real>(nu: &[T], mu: &[T]) -> T {
    let terms: Vec<T> = nu.iter().zip(mu).map(|(&a, &b)| divergence_term(a, b)).collect();
    if terms.iter().any(|t| t.is_infinite()) {
        return T::infinity();
    }
    compensated_sum(terms)
}

/// `H(ν|μ) = Σ ν(a) log(ν(a)/μ(a))` with `0 log 0 = 0`; `+∞` iff `ν`
/// charges a `μ`-null point.
pub fn relative_entropy_integral<T: Real>(nu: &FiniteMeasure<T>, mu: &FiniteMeasure<T>) -> T {
    let aligned = nu.align(mu);
    let (a, b): (Vec<T>, Vec<T>) = aligned.iter().map(|&(_, x, y)| (x, y)).unzip();
    relative_entropy_weights(&a, &b)
}

/// Slack in `∫f dν ≤ H(ν|μ) + log ∫e^f dμ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyInequality<T> {
    pub slack: T,
    pub holds: bool,
}

/// Evaluates the entropy inequality for `f`; passes at slack `≥ −1e-9`.
pub fn entropy_inequality_check<T: Real, F: Fn(&Point<T>) -> T>(f: F, nu: &FiniteMeasure<T>, mu: &FiniteMeasure<T>) -> EntropyInequality<T> {
    let h = relative_entropy_integral(nu, mu);
    if h.is_infinite() {
        return EntropyInequality { slack: T::infinity(), holds: true };
    }
    let log_mgf = log_sum_exp(&mu.iter().filter(|(_, w)| *w > T::zero()).map(|(p, w)| f(p) + w.ln()).collect::<Vec<_>>());
    let mean = compensated_sum(nu.iter().map(|(p, w)| if w > T::zero() { w * f(p) } else { T::zero() }));
    let slack = h + log_mgf - mean;
    EntropyInequality { slack, holds: slack >= lit(-1e-9) }
}

/// `H(ν^m|μ^m)` for `m = 1..=M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyLadder<T> {
    pub depths: Vec<usize>,
    pub values: Vec<T>,
    /// Largest value; the best available estimate of `H(ν|μ)`.
    pub limit_estimate: T,
}

impl<T: Real> EntropyLadder<T> {
    /// Values never drop by more than `tol`.
    pub fn is_monotone(&self, tol: T) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - tol || (w[0].is_infinite() && w[1].is_infinite()))
    }

    /// CSV with header `m,H_m`; infinite values print as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,H_m\n");
        for (m, v) in self.depths.iter().zip(&self.values) {
            let _ = writeln!(out, "{m},{}", format_value(wide(*v)));
        }
        out
    }
}

pub(crate) fn format_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

/// Discretized entropies along a partition sequence.
pub fn entropy_ladder<T, N, M>(nu: &N, mu: &M, seq: &PartitionSequence<T>) -> Result<EntropyLadder<T>>
where
    T: Real,
    N: Discretize<T> + ?Sized,
    M: Discretize<T> + ?Sized,
{
    let mut depths = Vec::with_capacity(seq.max_depth());
    let mut values = Vec::with_capacity(seq.max_depth());
    for (i, p) in seq.partitions().iter().enumerate() {
        depths.push(i + 1);
        values.push(relative_entropy_weights(&nu.cell_masses(p)?, &mu.cell_masses(p)?));
    }
    let limit_estimate = values.iter().copied().fold(T::zero(), T::max);
    Ok(EntropyLadder { depths, values, limit_estimate })
}

/// `∫ ν log(ν/μ) dx` over `[lo, hi]` by adaptive Simpson quadrature, for
/// two atomless measures.
pub fn kl_quadrature(nu: &SourceMeasure<f64>, mu: &SourceMeasure<f64>, lo: f64, hi: f64, tol: f64) -> f64 {
    let integrand = |x: f64| {
        let p = nu.density(x).unwrap_or(0.0);
        let q = mu.density(x).unwrap_or(0.0);
        if p <= 0.0 {
            0.0
        } else if q <= 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    };
    adaptive_simpson(integrand, lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_sequence;
    use crate::space::{build_exhaustion, MetricSpace};

    fn r(x: f64) -> Point<f64> {
        Point::Real(x)
    }

    fn pair(a: f64, b: f64) -> FiniteMeasure<f64> {
        FiniteMeasure::new(vec![r(0.0), r(1.0)], vec![a, b]).unwrap()
    }

    #[test]
    fn vanishing_weight_keeps_its_term() {
        let tiny = 1e-17;
        let h = relative_entropy_weights(&[tiny, 1.0 - tiny], &[0.5, 0.5]);
        assert!((h - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn integral_examples() {
        let mu = pair(0.5, 0.5);
        assert_eq!(relative_entropy_integral(&mu, &mu), 0.0);
        assert!((relative_entropy_integral(&FiniteMeasure::dirac(r(0.0)), &mu) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(relative_entropy_integral(&FiniteMeasure::dirac(r(2.0)), &mu).is_infinite());
        // 0.75 log 1.5 + 0.25 log 0.5
        let kl = relative_entropy_integral(&pair(0.75, 0.25), &mu);
        assert!((kl - 0.13081203594113697).abs() < 1e-15);
    }

    #[test]
    fn inequality_constant_f_gives_entropy() {
        let (nu, mu) = (pair(0.75, 0.25), pair(0.5, 0.5));
        let out = entropy_inequality_check(|_| 3.0, &nu, &mu);
        assert!((out.slack - relative_entropy_integral(&nu, &mu)).abs() < 1e-14);
        let tight = entropy_inequality_check(|p| (nu.mass_at(p) / mu.mass_at(p)).ln(), &nu, &mu);
        assert!(tight.slack.abs() < 1e-15 && tight.holds);
    }

    #[test]
    fn gaussian_quadrature_oracle() {
        let nu = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let mu = SourceMeasure::gaussian(1.0, 1.0).unwrap();
        assert!((kl_quadrature(&nu, &mu, -40.0, 40.0, 1e-10) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn lossless_ladder_is_constant() {
        let space = MetricSpace::interval(0.0, 1.0).unwrap();
        let mu = FiniteMeasure::new(vec![r(0.1), r(0.6), r(0.9)], vec![0.2, 0.3, 0.5]).unwrap();
        let nu = FiniteMeasure::new(vec![r(0.1), r(0.6), r(0.9)], vec![0.5, 0.25, 0.25]).unwrap();
        let ex = build_exhaustion(&SourceMeasure::uniform(0.0, 1.0).unwrap(), &space, 4).unwrap();
        let seq = build_sequence(&space, &ex, 4).unwrap();
        let ladder = entropy_ladder(&nu, &mu, &seq).unwrap();
        let h = relative_entropy_integral(&nu, &mu);
        assert!(ladder.is_monotone(0.0));
        assert!(ladder.values[1..].iter().all(|&v| (v - h).abs() < 1e-15));
        assert!(ladder.values[0] < h);
        assert_eq!(ladder.to_csv().lines().next(), Some("m,H_m"));
    }
}
