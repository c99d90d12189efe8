use serde::Serialize;

use super::ball::ball_inf_entropy;
use super::mc::{draw_replicate, replicate_stream, wilson_interval, WILSON_Z};
use super::types::types_events;
use crate::bl::{bl_distance, coupling_bound, BALL_SLACK};
use crate::entropy::{entropy_ladder, relative_entropy_integral};
use crate::error::{Error, Result};
use crate::measure::{discretize, discretize_empirical, FiniteMeasure, SourceMeasure};
use crate::partition::{PartitionSequence, TaggedPartition};
use crate::scalar::{wide, Real};
use crate::space::MetricSpace;

/// `inf_{σ ∈ B̄_{1/√m}(ν)} H(σ|μ^m)` for `m ≥ m0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupInfLadder {
    pub depths: Vec<usize>,
    pub values: Vec<f64>,
    pub running_sup: Vec<f64>,
    /// `H(ν|μ)` when `μ` is finite, else the entropy-ladder limit.
    pub entropy: f64,
    /// Every value is at most `entropy + 1e-6`.
    pub below_entropy: bool,
}

/// Sup-inf ladder of ball entropies at radius `1/√m`.
pub fn supinf_ladder<T: Real>(nu: &FiniteMeasure<T>, mu: &SourceMeasure<T>, seq: &PartitionSequence<T>, m0: usize) -> Result<SupInfLadder> {
    if m0 == 0 || m0 > seq.max_depth() {
        return Err(Error::Argument(format!("m0 = {m0} outside 1..={}", seq.max_depth())));
    }
    let entropy = match mu.as_finite() {
        Some(fm) => wide(relative_entropy_integral(nu, fm)),
        None => wide(entropy_ladder(nu, mu, seq)?.limit_estimate),
    };
    let mut out = SupInfLadder { depths: Vec::new(), values: Vec::new(), running_sup: Vec::new(), entropy, below_entropy: true };
    let mut sup = f64::NEG_INFINITY;
    for m in m0..=seq.max_depth() {
        let mu_m = discretize(mu, seq.at(m)?)?;
        let radius = T::one() / T::from(m).expect("depth fits").sqrt();
        let v = wide(ball_inf_entropy(nu, &mu_m, radius, seq.space())?.value);
        sup = sup.max(v);
        out.below_entropy &= v <= entropy + 1e-6;
        out.depths.push(m);
        out.values.push(v);
        out.running_sup.push(sup);
    }
    Ok(out)
}

/// Probabilities of the three events of one union-bound chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSide {
    /// Radius of the left event's ball.
    pub left_radius: f64,
    /// Radius of the ball in the right event.
    pub right_radius: f64,
    /// Threshold on `d_BL(L_n, L_n^m)`.
    pub threshold: f64,
    pub left_hits: usize,
    pub right_hits: usize,
    pub far_hits: usize,
    /// Replicates in the left event but in neither right event.
    pub containment_failures: usize,
    /// Wilson intervals `(lo, hi)` for the three events.
    pub left_interval: (f64, f64),
    pub right_interval: (f64, f64),
    pub far_interval: (f64, f64),
    /// Exact `(left, right, far)` probabilities from type enumeration.
    pub exact: Option<(f64, f64, f64)>,
    pub passed: bool,
}

/// Both union-bound chains at one `(n, ε, m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub reps: usize,
    /// `α = H(ν|μ)` used in `c = 3 + 2α`.
    pub alpha: f64,
    /// `P(L_n^m ∈ B_ε(ν^m)) ≤ P(L_n ∈ B̄_{ε+(3+c)/m}(ν)) + P(d_BL(L_n, L_n^m) > 3/m)`.
    pub upper: ChainSide,
    /// `P(L_n ∈ B_ε(ν)) ≤ P(L_n^m ∈ B̄_{ε+1/√m}(ν)) + P(d_BL(L_n, L_n^m) > 1/√m)`.
    pub lower: ChainSide,
    pub passed: bool,
}

struct Events {
    upper: (bool, bool, bool),
    lower: (bool, bool, bool),
}

struct ChainSetup<'a, T> {
    nu: &'a FiniteMeasure<T>,
    nu_m: FiniteMeasure<T>,
    partition: &'a TaggedPartition<T>,
    space: &'a MetricSpace<T>,
    eps: T,
    upper_radius: T,
    lower_radius: T,
    upper_threshold: T,
    lower_threshold: T,
}

impl<T: Real> ChainSetup<'_, T> {
    fn events(&self, l: &FiniteMeasure<T>, l_m: &FiniteMeasure<T>) -> Result<Events> {
        let slack = T::from(BALL_SLACK).expect("slack fits");
        let d_lm = bl_distance(l_m, &self.nu_m, self.space)?;
        let d_l = bl_distance(l, self.nu, self.space)?;
        let d_lm_nu = bl_distance(l_m, self.nu, self.space)?;
        // The projection coupling bounds d_BL(L_n, L_n^m) from above; solve
        // exactly only when it cannot settle both thresholds.
        let pairs: Vec<_> = l.iter().map(|(x, w)| self.partition.project(x).map(|t| (*x, t, w))).collect::<Result<_>>()?;
        let coupling = coupling_bound(&pairs, self.space)?;
        let gap = if coupling <= self.upper_threshold.min(self.lower_threshold) { coupling } else { bl_distance(l, l_m, self.space)? };
        Ok(Events {
            upper: (d_lm < self.eps, d_l <= self.upper_radius + slack, gap > self.upper_threshold),
            lower: (d_l < self.eps, d_lm_nu <= self.lower_radius + slack, gap > self.lower_threshold),
        })
    }
}

/// Monte Carlo (and, for finite `μ`, exact) check of the union bounds
/// behind the upper and lower rate comparisons, with per-replicate event
/// containment.
#[allow(clippy::too_many_arguments)]
pub fn proposition_chain_check<T: Real>(
    nu: &FiniteMeasure<T>,
    mu: &SourceMeasure<T>,
    seq: &PartitionSequence<T>,
    n: usize,
    eps: T,
    m: usize,
    reps: usize,
    seed: u64,
) -> Result<ChainReport> {
    if n == 0 || reps == 0 {
        return Err(Error::Argument("n and reps must be at least 1".into()));
    }
    if !(eps > T::zero()) {
        return Err(Error::Argument("eps must be positive".into()));
    }
    let partition = seq.at(m)?;
    let space = seq.space();
    let alpha = match mu.as_finite() {
        Some(fm) => relative_entropy_integral(nu, fm),
        None => entropy_ladder(nu, mu, seq)?.limit_estimate,
    };
    let mt = T::from(m).expect("depth fits");
    let c = T::from(3.0).expect("fits") + alpha + alpha;
    let setup = ChainSetup {
        nu,
        nu_m: discretize(nu, partition)?,
        partition,
        space,
        eps,
        upper_radius: eps + (T::from(3.0).expect("fits") + c) / mt,
        lower_radius: eps + T::one() / mt.sqrt(),
        upper_threshold: T::from(3.0).expect("fits") / mt,
        lower_threshold: T::one() / mt.sqrt(),
    };
    let mut tallies = [[0usize; 4]; 2];
    for rep in 0..reps {
        let l = draw_replicate(mu, n, seed, replicate_stream(0, rep))?;
        let l_m = discretize_empirical(&l, partition)?;
        let ev = setup.events(l.measure(), l_m.measure())?;
        for (t, (a, b, c)) in tallies.iter_mut().zip([ev.upper, ev.lower]) {
            t[0] += usize::from(a);
            t[1] += usize::from(b);
            t[2] += usize::from(c);
            t[3] += usize::from(a && !b && !c);
        }
    }
    let exact = match mu.as_finite() {
        Some(fm) => exact_chain(fm, n, &setup)?,
        None => None,
    };
    let side = |k: usize, left_radius: T, right_radius: T, threshold: T, exact: Option<(f64, f64, f64)>| {
        let t = tallies[k];
        let (li, ri, fi) = (wilson_interval(t[0], reps, WILSON_Z), wilson_interval(t[1], reps, WILSON_Z), wilson_interval(t[2], reps, WILSON_Z));
        let mc_ok = li.0 <= ri.1 + fi.1;
        let exact_ok = exact.is_none_or(|(a, b, c)| a <= b + c + 1e-12);
        ChainSide {
            left_radius: wide(left_radius),
            right_radius: wide(right_radius),
            threshold: wide(threshold),
            left_hits: t[0],
            right_hits: t[1],
            far_hits: t[2],
            containment_failures: t[3],
            left_interval: li,
            right_interval: ri,
            far_interval: fi,
            exact,
            passed: t[3] == 0 && mc_ok && exact_ok,
        }
    };
    let upper = side(0, eps, setup.upper_radius, setup.upper_threshold, exact.map(|e| e.0));
    let lower = side(1, eps, setup.lower_radius, setup.lower_threshold, exact.map(|e| e.1));
    Ok(ChainReport { n, m, eps: wide(eps), reps, alpha: wide(alpha), passed: upper.passed && lower.passed, upper, lower })
}

type Triple = (f64, f64, f64);

/// Exact event probabilities over type classes; `None` past the guard.
fn exact_chain<T: Real>(mu: &FiniteMeasure<T>, n: usize, setup: &ChainSetup<'_, T>) -> Result<Option<(Triple, Triple)>> {
    let mut failure = None;
    let out = types_events(mu, n, 6, |l| match discretize(l, setup.partition).and_then(|lm| setup.events(l, &lm)) {
        Ok(ev) => [ev.upper.0, ev.upper.1, ev.upper.2, ev.lower.0, ev.lower.1, ev.lower.2]
            .iter()
            .enumerate()
            .fold(0u64, |mask, (bit, &hit)| mask | (u64::from(hit) << bit)),
        Err(e) => {
            failure.get_or_insert(e);
            0
        }
    });
    let p = match out {
        Ok(p) => p,
        Err(Error::Resource(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Some(((p[0].probability, p[1].probability, p[2].probability), (p[3].probability, p[4].probability, p[5].probability))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_sequence;
    use crate::space::{build_exhaustion, Point};

    fn coin_setup(depth: usize) -> (SourceMeasure<f64>, PartitionSequence<f64>) {
        let space = MetricSpace::real_line();
        let coin = FiniteMeasure::uniform(vec![Point::Real(0.0), Point::Real(1.0)]).unwrap();
        let mu = SourceMeasure::Finite(coin);
        let ex = build_exhaustion(&mu, &space, depth).unwrap();
        (mu.clone(), build_sequence(&space, &ex, depth).unwrap())
    }

    #[test]
    fn coin_chain_holds_exactly() {
        let (mu, seq) = coin_setup(3);
        let nu = FiniteMeasure::new(vec![Point::Real(0.0), Point::Real(1.0)], vec![0.25, 0.75]).unwrap();
        let report = proposition_chain_check(&nu, &mu, &seq, 100, 0.05, 2, 200, 9).unwrap();
        assert!(report.passed, "{report:?}");
        let (a, b, c) = report.upper.exact.unwrap();
        assert!(a <= b + c);
        assert!(a > 0.0);
    }

    #[test]
    fn degenerate_chain_is_trivial() {
        let (mu, seq) = coin_setup(2);
        let nu = mu.as_finite().unwrap().clone();
        let report = proposition_chain_check(&nu, &mu, &seq, 20, 1.0, 2, 50, 1).unwrap();
        assert!(report.passed);
        assert_eq!(report.upper.right_hits, 50);
    }

    #[test]
    fn supinf_identity_and_singular_cases() {
        let (mu, seq) = coin_setup(4);
        let fm = mu.as_finite().unwrap().clone();
        let same = supinf_ladder(&fm, &mu, &seq, 1).unwrap();
        assert!(same.values.iter().all(|&v| v == 0.0));
        let nu = FiniteMeasure::new(vec![Point::Real(0.0), Point::Real(1.0)], vec![0.1, 0.9]).unwrap();
        let lad = supinf_ladder(&nu, &mu, &seq, 1).unwrap();
        assert!(lad.below_entropy);
        assert!(lad.values.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let off = FiniteMeasure::new(vec![Point::Real(0.0), Point::Real(3.0)], vec![0.5, 0.5]).unwrap();
        let singular = supinf_ladder(&off, &mu, &seq, 1).unwrap();
        assert!(singular.entropy.is_infinite());
        assert!(singular.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(singular.values.last().unwrap().is_infinite());
    }
}
