use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::scalar::{lit, wide, Real};

/// Largest number of type classes enumerated.
pub const TYPES_GUARD: u64 = 10_000_000;

/// Exact probability of an event about `L_n` on a finite alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypesProbability {
    pub probability: f64,
    pub log_probability: f64,
    pub types_enumerated: u64,
    pub types_hit: u64,
}

/// Number of compositions of `n` into `k` parts, saturating above the guard.
pub fn type_count(n: usize, k: usize) -> u64 {
    if k == 0 {
        return u64::from(n == 0);
    }
    // C(n + k − 1, k − 1) built incrementally; each partial product is an
    // exact binomial coefficient.
    let (top, choose) = ((n + k - 1) as u128, (k - 1).min(n) as u128);
    let mut c: u128 = 1;
    for i in 0..choose {
        c = c * (top - i) / (i + 1);
        if c > u128::from(TYPES_GUARD) * 1000 {
            return u64::MAX;
        }
    }
    u64::try_from(c).unwrap_or(u64::MAX)
}

/// `ln k!` for `k = 0..=n`, accumulated with compensation.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    out.push(0.0);
    for k in 1..=n {
        let v = (k as f64).ln();
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
        out.push(sum + carry);
    }
    out
}

/// Streaming `log Σ exp(x_i)` with a compensated, rescaled accumulator.
struct LogSum {
    max: f64,
    sum: f64,
    carry: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            let scale = (self.max - x).exp();
            self.sum *= scale;
            self.carry *= scale;
            self.max = x;
        }
        let v = (x - self.max).exp();
        let t = self.sum + v;
        self.carry += if self.sum.abs() >= v.abs() { (self.sum - t) + v } else { (v - t) + self.sum };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + (self.sum + self.carry).ln()
        }
    }
}

/// Sums the multinomial probabilities of all count vectors accepted by
/// `predicate`. Probabilities are combined in log space.
pub fn types_probability_by_counts<P: FnMut(&[usize]) -> bool>(weights: &[f64], n: usize, mut predicate: P) -> Result<TypesProbability> {
    let mut out = types_events_by_counts(weights, n, 1, |c| u64::from(predicate(c)))?;
    Ok(out.remove(0))
}

/// Probabilities of up to 64 events at once. `classify` returns a bit mask
/// whose bit `e` marks membership in event `e`.
pub fn types_events_by_counts<P: FnMut(&[usize]) -> u64>(weights: &[f64], n: usize, events: usize, mut classify: P) -> Result<Vec<TypesProbability>> {
    let k = weights.len();
    if k == 0 {
        return Err(Error::Argument("alphabet is empty".into()));
    }
    if events == 0 || events > 64 {
        return Err(Error::Argument("between 1 and 64 events can be tracked".into()));
    }
    let total = type_count(n, k);
    if total > TYPES_GUARD {
        return Err(Error::Resource(format!("{n} samples over {k} symbols exceed the {TYPES_GUARD}-type guard")));
    }
    let lf = log_factorials(n);
    let log_w: Vec<f64> = weights.iter().map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect();
    let mut counts = vec![0usize; k];
    counts[k - 1] = n;
    let mut acc: Vec<LogSum> = (0..events).map(|_| LogSum::new()).collect();
    let mut hits = vec![0u64; events];
    let mut seen = 0u64;
    loop {
        seen += 1;
        let mask = classify(&counts);
        if mask != 0 {
            let mut lp = lf[n];
            for (&c, &lw) in counts.iter().zip(&log_w) {
                if c > 0 {
                    lp += c as f64 * lw - lf[c];
                }
            }
            for e in (0..events).filter(|&e| mask >> e & 1 == 1) {
                hits[e] += 1;
                acc[e].add(lp);
            }
        }
        // Next composition: move one unit from the tail into the rightmost
        // earlier position that has a nonempty tail, then reset that tail.
        let Some(i) = (0..k - 1).rev().find(|&i| counts[i + 1..].iter().sum::<usize>() > 0) else {
            break;
        };
        let tail: usize = counts[i + 1..].iter().sum();
        counts[i] += 1;
        for c in &mut counts[i + 1..] {
            *c = 0;
        }
        counts[k - 1] = tail - 1;
    }
    Ok(acc
        .iter()
        .zip(hits)
        .map(|(a, h)| {
            let log_probability = a.value();
            TypesProbability { probability: log_probability.exp(), log_probability, types_enumerated: seen, types_hit: h }
        })
        .collect())
}

/// `P(L_n ∈ S)` for i.i.d. draws from a finite `μ`, by enumerating type
/// classes. The predicate sees each type as a measure on the support of
/// `μ` (zero-weight atoms kept).
pub fn types_probability<T: Real, P: FnMut(&FiniteMeasure<T>) -> bool>(
    mu: &FiniteMeasure<T>,
    n: usize,
    mut predicate: P,
) -> Result<TypesProbability> {
    let mut out = types_events(mu, n, 1, |l| u64::from(predicate(l)))?;
    Ok(out.remove(0))
}

/// Measure-level form of [`types_events_by_counts`].
pub fn types_events<T: Real, P: FnMut(&FiniteMeasure<T>) -> u64>(
    mu: &FiniteMeasure<T>,
    n: usize,
    events: usize,
    mut classify: P,
) -> Result<Vec<TypesProbability>> {
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    let atoms: Vec<_> = mu.iter().filter(|(_, w)| *w > T::zero()).map(|(p, w)| (*p, wide(w))).collect();
    let points: Vec<_> = atoms.iter().map(|a| a.0).collect();
    let weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    let nf = lit::<T>(n as f64);
    let mut failure = None;
    let out = types_events_by_counts(&weights, n, events, |counts| {
        let w = counts.iter().map(|&c| lit::<T>(c as f64) / nf).collect();
        match FiniteMeasure::new(points.clone(), w) {
            Ok(l) => classify(&l),
            Err(e) => {
                failure.get_or_insert(e);
                0
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `inf { H(ν|μ) : Σ ν g ≥ t }` over measures on the support of `μ`, by
/// exponential tilting.
pub fn half_space_inf_entropy(mu: &[f64], g: &[f64], t: f64) -> f64 {
    let pairs: Vec<(f64, f64)> = mu.iter().zip(g).filter(|(&w, _)| w > 0.0).map(|(&w, &x)| (w, x)).collect();
    let mean: f64 = pairs.iter().map(|(w, x)| w * x).sum();
    if mean >= t {
        return 0.0;
    }
    let top = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if top < t {
        return f64::INFINITY;
    }
    if top == t {
        return -pairs.iter().filter(|p| p.1 == top).map(|p| p.0).sum::<f64>().ln();
    }
    // Tilted law ν_λ ∝ μ e^{λ g}; its mean increases in λ.
    let log_mgf = |lambda: f64| {
        let xs: Vec<f64> = pairs.iter().map(|(w, x)| w.ln() + lambda * x).collect();
        crate::scalar::log_sum_exp(&xs)
    };
    let tilted_mean = |lambda: f64| {
        let z = log_mgf(lambda);
        pairs.iter().map(|(w, x)| (w.ln() + lambda * x - z).exp() * x).sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while tilted_mean(hi) < t {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted_mean(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi * t - log_mgf(hi)
}
