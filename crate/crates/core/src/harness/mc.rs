use std::fmt::Write as _;

use serde::Serialize;

use super::ball::ball_inf_entropy;
use super::types::types_probability;
use crate::bl::{bl_distance, in_ball};
use crate::entropy::format_value;
use crate::error::{Error, Result};
use crate::measure::{EmpiricalMeasure, FiniteMeasure, SourceMeasure};
use crate::partition::PartitionSequence;
use crate::rng::stream_rng;
use crate::scalar::{compensated_sum, lit, wide, Real};
use crate::space::MetricSpace;

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Below this estimated probability a finite-alphabet estimate is replaced
/// by exact enumeration.
pub const CERTIFY_BELOW: f64 = 1e-4;

/// Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (hits as f64, trials as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Stream used for replicate `rep` at position `slot` of an experiment.
pub fn replicate_stream(slot: usize, rep: usize) -> u64 {
    ((slot as u64) << 32) | rep as u64
}

/// Draws replicate `rep` of `L_n`.
pub fn draw_replicate<T: Real>(mu: &SourceMeasure<T>, n: usize, seed: u64, stream: u64) -> Result<EmpiricalMeasure<T>> {
    let mut rng = stream_rng(seed, stream);
    EmpiricalMeasure::from_samples(mu.sampler().sample_n(n, &mut rng)?)
}

/// A closed BL ball `B̄_r(center)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSet<T> {
    pub center: FiniteMeasure<T>,
    pub radius: T,
}

/// Monte Carlo estimate of `P(L_n ∈ S)` at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub reps: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// `−(1/n) log p̂`; absent with zero hits.
    pub empirical_rate: Option<f64>,
    /// `−(1/n) log wilson_hi`, a one-sided bound valid also with zero hits.
    pub rate_lower_bound: f64,
    /// Exact probability from type enumeration, when certified.
    pub exact_probability: Option<f64>,
    pub exact_rate: Option<f64>,
    /// Best available rate minus the entropy rate.
    pub gap: Option<f64>,
}

/// Empirical decay rates against the entropy rate of the same set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub set: String,
    pub entropy_rate: f64,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_value).unwrap_or_default();
        let mut out =
            String::from("n,reps,hits,p_hat,wilson_lo,wilson_hi,empirical_rate,rate_lower_bound,exact_probability,exact_rate,entropy_rate,gap\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.reps,
                r.hits,
                format_value(r.p_hat),
                format_value(r.wilson_lo),
                format_value(r.wilson_hi),
                opt(r.empirical_rate),
                format_value(r.rate_lower_bound),
                opt(r.exact_probability),
                opt(r.exact_rate),
                format_value(self.entropy_rate),
                opt(r.gap),
            );
        }
        out
    }
}

/// Estimates `−(1/n) log P(L_n ∈ B̄_r(center))` for each `n`.
///
/// `reference` is the measure on which the entropy rate is minimized: `μ`
/// itself when finite, otherwise a discretization `μ^m`.
pub fn mc_rate<T: Real>(
    mu: &SourceMeasure<T>,
    reference: &FiniteMeasure<T>,
    space: &MetricSpace<T>,
    set: &BallSet<T>,
    n_list: &[usize],
    reps: usize,
    seed: u64,
) -> Result<RateReport> {
    if reps == 0 {
        return Err(Error::Argument("reps must be at least 1".into()));
    }
    if !(set.radius > T::zero()) {
        return Err(Error::Argument("radius must be positive".into()));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Argument("n_list must be nonempty with every n ≥ 1".into()));
    }
    let entropy_rate = wide(ball_inf_entropy(&set.center, reference, set.radius, space)?.value);
    let mut rows = Vec::with_capacity(n_list.len());
    for (slot, &n) in n_list.iter().enumerate() {
        let mut hits = 0;
        for rep in 0..reps {
            let l = draw_replicate(mu, n, seed, replicate_stream(slot, rep))?;
            if in_ball(l.measure(), &set.center, set.radius, space)? {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / reps as f64;
        let (wilson_lo, wilson_hi) = wilson_interval(hits, reps, WILSON_Z);
        let nf = n as f64;
        let empirical_rate = (hits > 0).then(|| -p_hat.ln() / nf);
        let mut exact_probability = None;
        if let Some(fm) = mu.as_finite() {
            if p_hat < CERTIFY_BELOW {
                match types_probability(fm, n, |l| in_ball(l, &set.center, set.radius, space).unwrap_or(false)) {
                    Ok(tp) => exact_probability = Some(tp.probability),
                    Err(Error::Resource(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        let exact_rate = exact_probability.map(|p| -p.ln() / nf);
        let best = exact_rate.or(empirical_rate);
        rows.push(RateRow {
            n,
            reps,
            hits,
            p_hat,
            wilson_lo,
            wilson_hi,
            empirical_rate,
            rate_lower_bound: -wilson_hi.ln() / nf,
            exact_probability,
            exact_rate,
            gap: best.filter(|b| b.is_finite() && entropy_rate.is_finite()).map(|b| b - entropy_rate),
        });
    }
    let set_desc = format!("closed BL ball of radius {} around {} atoms", set.radius, set.center.len());
    Ok(RateReport { set: set_desc, entropy_rate, rows })
}

/// Outcome of the exponential-equivalence experiment at one `(n, m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpEquivalenceReport {
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    /// Replicates where the projection coupling exceeded `1/m + 2·#bad/n`.
    pub inequality_violations: usize,
    /// Replicates with `d_BL(L_n, L_n^m) > 3/m`.
    pub events: usize,
    /// Replicates whose BL distance was solved exactly.
    pub exact_checks: usize,
    /// Exact solves exceeding the coupling bound (should be zero).
    pub coupling_violations: usize,
    pub max_coupling: f64,
    pub max_bad: usize,
    /// `e^{−mn}`.
    pub budget: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub passed: bool,
}

/// Replicates solved exactly regardless of the coupling bound.
pub const EXACT_SPOT_CHECKS: usize = 64;

/// Checks `d_BL(L_n, L_n^m) ≤ 1/m + (2/n)·#{i : X_i ∉ K_m}` per replicate
/// and counts `{d_BL(L_n, L_n^m) > 3/m}`.
pub fn exp_equivalence_check<T: Real>(
    mu: &SourceMeasure<T>,
    seq: &PartitionSequence<T>,
    n: usize,
    m: usize,
    reps: usize,
    seed: u64,
) -> Result<ExpEquivalenceReport> {
    if n == 0 || reps == 0 {
        return Err(Error::Argument("n and reps must be at least 1".into()));
    }
    let partition = seq.at(m)?;
    let space = seq.space();
    let sampler = mu.sampler();
    let (mf, nf) = (m as f64, n as f64);
    let two = lit::<T>(2.0);
    let mut report = ExpEquivalenceReport {
        n,
        m,
        reps,
        inequality_violations: 0,
        events: 0,
        exact_checks: 0,
        coupling_violations: 0,
        max_coupling: 0.0,
        max_bad: 0,
        budget: (-mf * nf).exp(),
        wilson_lo: 0.0,
        wilson_hi: 0.0,
        passed: false,
    };
    for rep in 0..reps {
        let mut rng = stream_rng(seed, replicate_stream(0, rep));
        let samples = sampler.sample_n(n, &mut rng)?;
        let mut bad = 0;
        let mut projected = Vec::with_capacity(n);
        let mut costs = Vec::with_capacity(n);
        for x in &samples {
            let k = partition.locate(x)?;
            if partition.is_bad_index(k) {
                bad += 1;
            }
            let tag = partition.cells()[k].tag;
            costs.push(space.distance(x, &tag)?.min(two));
            projected.push(tag);
        }
        let coupling = wide(compensated_sum(costs)) / nf;
        report.max_coupling = report.max_coupling.max(coupling);
        report.max_bad = report.max_bad.max(bad);
        if coupling > 1.0 / mf + 2.0 * bad as f64 / nf + 1e-12 {
            report.inequality_violations += 1;
        }
        let threshold = 3.0 / mf;
        if coupling > threshold || rep < EXACT_SPOT_CHECKS {
            let (l, lm) = (EmpiricalMeasure::from_samples(samples)?, EmpiricalMeasure::from_samples(projected)?);
            let exact = wide(bl_distance(l.measure(), lm.measure(), space)?);
            report.exact_checks += 1;
            if exact > coupling + 1e-9 {
                report.coupling_violations += 1;
            }
            if exact > threshold {
                report.events += 1;
            }
        }
    }
    let (lo, hi) = wilson_interval(report.events, reps, WILSON_Z);
    report.wilson_lo = lo;
    report.wilson_hi = hi;
    report.passed = report.inequality_violations == 0 && report.coupling_violations == 0 && lo <= report.budget;
    Ok(report)
}
