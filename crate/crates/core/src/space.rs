//! Metric ground spaces, regions, and compact exhaustions.
//!
//! Three concrete families are supported: a closed real interval (possibly
//! unbounded on either side), a finite point set with an explicit distance
//! matrix, and a finite point cloud in `R^d` under the Euclidean metric.
//! Points of the interval are reals; points of the two finite families are
//! indices into the space.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::SourceMeasure;
use crate::scalar::{lit, wide, Real};

/// A point of a [`MetricSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point<T> {
    /// A real number, for interval spaces.
    Real(T),
    /// An index into a finite space or point cloud.
    Id(usize),
}

impl<T: Real> Point<T> {
    /// Total order: reals by value, then ids. NaN never enters a space.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Real(a), Point::Real(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            (Point::Id(a), Point::Id(b)) => a.cmp(b),
            (Point::Real(_), Point::Id(_)) => Ordering::Less,
            (Point::Id(_), Point::Real(_)) => Ordering::Greater,
        }
    }

    pub fn as_real(&self) -> Option<T> {
        match *self {
            Point::Real(x) => Some(x),
            Point::Id(_) => None,
        }
    }

    pub fn as_id(&self) -> Option<usize> {
        match *self {
            Point::Id(i) => Some(i),
            Point::Real(_) => None,
        }
    }
}

impl<T: Real> fmt::Display for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Id(i) => write!(f, "#{i}"),
        }
    }
}

/// A real interval with explicit endpoint closedness. Infinite endpoints
/// are always open.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Real> Span<T> {
    pub fn new(lo: T, hi: T, lo_closed: bool, hi_closed: bool) -> Self {
        Span { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() }
    }

    /// `[lo, hi]`, open at infinite ends.
    pub fn closed(lo: T, hi: T) -> Self {
        Span::new(lo, hi, true, true)
    }

    pub fn contains(&self, x: T) -> bool {
        let above = x > self.lo || (self.lo_closed && x == self.lo);
        let below = x < self.hi || (self.hi_closed && x == self.hi);
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn diameter(&self) -> T {
        if self.is_empty() {
            T::zero()
        } else {
            self.hi - self.lo
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(Ordering::Greater) => (self.lo, self.lo_closed),
            Some(Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Less) => (self.hi, self.hi_closed),
            Some(Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        let span = Span { lo, hi, lo_closed, hi_closed };
        (!span.is_empty()).then_some(span)
    }

    /// Whether `self ⊆ other`. The empty span is a subset of everything.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = self.lo > other.lo || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok = self.hi < other.hi || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }
}

impl<T: Real> fmt::Display for Span<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// A measurable region of a space: an interval or a set of point ids.
#[derive(Clone, Debug, PartialEq)]
pub enum Region<T> {
    Span(Span<T>),
    /// Sorted, deduplicated point ids.
    Points(Vec<usize>),
}

impl<T: Real> Region<T> {
    pub fn points(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Region::Points(ids)
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        match (self, p) {
            (Region::Span(s), Point::Real(x)) => s.contains(*x),
            (Region::Points(ids), Point::Id(i)) => ids.binary_search(i).is_ok(),
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Span(s) => s.is_empty(),
            Region::Points(ids) => ids.is_empty(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        match (self, other) {
            (Region::Span(a), Region::Span(b)) => a.intersect(b).map(Region::Span),
            (Region::Points(a), Region::Points(b)) => {
                let ids: Vec<usize> = a.iter().copied().filter(|i| b.binary_search(i).is_ok()).collect();
                (!ids.is_empty()).then_some(Region::Points(ids))
            }
            _ => None,
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        match (self, other) {
            (Region::Span(a), Region::Span(b)) => a.is_subset_of(b),
            (Region::Points(a), Region::Points(b)) => a.iter().all(|i| b.binary_search(i).is_ok()),
            _ => self.is_empty(),
        }
    }

    pub fn diameter(&self, space: &MetricSpace<T>) -> T {
        match self {
            Region::Span(s) => s.diameter(),
            Region::Points(ids) => {
                let mut diam = T::zero();
                for (k, &i) in ids.iter().enumerate() {
                    for &j in &ids[k + 1..] {
                        diam = diam.max(space.id_distance(i, j));
                    }
                }
                diam
            }
        }
    }
}

impl<T: Real> fmt::Display for Region<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Span(s) => write!(f, "{s}"),
            Region::Points(ids) => write!(f, "{ids:?}"),
        }
    }
}

/// A concrete metric ground space.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricSpace<T> {
    /// Closed interval `[lo, hi]`; either end may be infinite.
    Interval { lo: T, hi: T },
    /// Finite point set `{0, …, n-1}` with a symmetric distance matrix.
    Finite { matrix: Vec<Vec<T>> },
    /// Finite point cloud in `R^d`, Euclidean metric.
    Cloud { points: Vec<Vec<T>> },
}

impl<T: Real> MetricSpace<T> {
    pub fn interval(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(Error::Argument(format!("interval bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        Ok(MetricSpace::Interval { lo, hi })
    }

    pub fn real_line() -> Self {
        MetricSpace::Interval { lo: T::neg_infinity(), hi: T::infinity() }
    }

    /// Validates the matrix as a metric: square, zero diagonal, symmetric,
    /// nonnegative, triangle inequality up to `1e-12` relative slack.
    pub fn finite(matrix: Vec<Vec<T>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Argument("finite space needs at least one point".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Argument(format!("distance matrix row {i} has length {}, expected {n}", row.len())));
            }
            if row[i] != T::zero() {
                return Err(Error::Argument(format!("distance matrix has nonzero diagonal at {i}")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < T::zero() {
                    return Err(Error::Argument(format!("distance ({i},{j}) = {d} is not a finite nonnegative number")));
                }
                if d != matrix[j][i] {
                    return Err(Error::Argument(format!("distance matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        let slack = lit::<T>(1e-12);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let bound = matrix[i][k] + matrix[k][j];
                    if matrix[i][j] > bound + slack * (T::one() + bound) {
                        return Err(Error::Argument(format!("triangle inequality fails for ({i},{j}) via {k}")));
                    }
                }
            }
        }
        Ok(MetricSpace::Finite { matrix })
    }

    pub fn cloud(points: Vec<Vec<T>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if points.is_empty() || dim == 0 {
            return Err(Error::Argument("point cloud needs at least one point of dimension ≥ 1".into()));
        }
        if let Some(i) = points.iter().position(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
            return Err(Error::Argument(format!("cloud point {i} has wrong dimension or non-finite coordinates")));
        }
        Ok(MetricSpace::Cloud { points })
    }

    /// Number of points for the finite families.
    pub fn point_count(&self) -> Option<usize> {
        match self {
            MetricSpace::Interval { .. } => None,
            MetricSpace::Finite { matrix } => Some(matrix.len()),
            MetricSpace::Cloud { points } => Some(points.len()),
        }
    }

    pub fn is_indexed(&self) -> bool {
        self.point_count().is_some()
    }

    /// The whole space as a region.
    pub fn full_region(&self) -> Region<T> {
        match self {
            MetricSpace::Interval { lo, hi } => Region::Span(Span::closed(*lo, *hi)),
            _ => Region::Points((0..self.point_count().unwrap_or(0)).collect()),
        }
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        match (self, p) {
            (MetricSpace::Interval { lo, hi }, Point::Real(x)) => x.is_finite() && *x >= *lo && *x <= *hi,
            (_, Point::Id(i)) => self.point_count().is_some_and(|n| *i < n),
            _ => false,
        }
    }

    /// Distance between two points of the space.
    pub fn distance(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        for p in [x, y] {
            if !self.contains(p) {
                return Err(Error::Domain(p.to_string()));
            }
        }
        Ok(match (x, y) {
            (Point::Real(a), Point::Real(b)) => (*a - *b).abs(),
            (Point::Id(i), Point::Id(j)) => self.id_distance(*i, *j),
            _ => unreachable!("membership checked above"),
        })
    }

    /// Distance between two in-range ids, without checks.
    pub(crate) fn id_distance(&self, i: usize, j: usize) -> T {
        match self {
            MetricSpace::Finite { matrix } => matrix[i][j],
            MetricSpace::Cloud { points } => points[i].iter().zip(&points[j]).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt(),
            MetricSpace::Interval { .. } => T::nan(),
        }
    }

    /// Origin of the dyadic grid used by partitions and exhaustions.
    pub fn grid_anchor(&self) -> T {
        match self {
            MetricSpace::Interval { lo, hi } => {
                if lo.is_finite() {
                    *lo
                } else if hi.is_finite() {
                    *hi
                } else {
                    T::zero()
                }
            }
            _ => T::zero(),
        }
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        match self {
            MetricSpace::Interval { lo, hi } => {
                let lo = if lo.is_finite() { wide(*lo) } else { -1e3 };
                let hi = if hi.is_finite() { wide(*hi) } else { 1e3 };
                Point::Real(lit(rng.random_range(lo..=hi)))
            }
            _ => Point::Id(rng.random_range(0..self.point_count().unwrap_or(1))),
        }
    }

    /// Samples `trials` random triples and checks the metric axioms with
    /// `1e-12` slack. Returns the first violating triple.
    pub fn check_metric_axioms<R: Rng + ?Sized>(&self, trials: usize, rng: &mut R) -> Result<(), String> {
        let slack = lit::<T>(1e-12);
        for _ in 0..trials {
            let (x, y, z) = (self.random_point(rng), self.random_point(rng), self.random_point(rng));
            let d = |a: &Point<T>, b: &Point<T>| self.distance(a, b).map_err(|e| e.to_string());
            let (xy, yx, xz, zy, xx) = (d(&x, &y)?, d(&y, &x)?, d(&x, &z)?, d(&z, &y)?, d(&x, &x)?);
            if xx != T::zero() || xy < T::zero() || xy != yx || xy > xz + zy + slack * (T::one() + xz + zy) {
                return Err(format!("metric axioms fail on ({x}, {y}, {z})"));
            }
        }
        Ok(())
    }
}

/// Upper bound on the mass outside the depth-`m` compact: `e^{-m²-1}/m`.
pub fn tail_budget(m: usize) -> f64 {
    let m = m as f64;
    (-m * m - 1.0).exp() / m
}

/// Fraction of the tail budget that quantile-based compacts aim for.
pub const TAIL_SAFETY: f64 = 0.99;

/// Nested compacts `K_1 ⊆ K_2 ⊆ …` with certified tail masses.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactExhaustion<T> {
    sets: Vec<Region<T>>,
    tail_bounds: Vec<T>,
}

impl<T: Real> CompactExhaustion<T> {
    /// Wraps precomputed sets; index 0 is depth 1.
    pub fn from_parts(sets: Vec<Region<T>>, tail_bounds: Vec<T>) -> Result<Self> {
        if sets.len() != tail_bounds.len() || sets.is_empty() {
            return Err(Error::Argument("exhaustion needs one tail bound per set and at least one set".into()));
        }
        Ok(CompactExhaustion { sets, tail_bounds })
    }

    pub fn depth(&self) -> usize {
        self.sets.len()
    }

    /// `K_m` for `1 ≤ m ≤ depth`.
    pub fn set(&self, m: usize) -> &Region<T> {
        &self.sets[m - 1]
    }

    /// Certified `μ(K_m^∁)`.
    pub fn tail_bound(&self, m: usize) -> T {
        self.tail_bounds[m - 1]
    }

    pub fn sets(&self) -> &[Region<T>] {
        &self.sets
    }

    pub fn tail_bounds(&self) -> &[T] {
        &self.tail_bounds
    }

    /// Whether every tail bound is within budget and the sets are nested.
    pub fn is_certified(&self) -> bool {
        let budgets = (1..=self.depth()).all(|m| wide(self.tail_bound(m)) <= tail_budget(m));
        budgets && self.sets.windows(2).all(|w| w[0].is_subset_of(&w[1]))
    }
}

fn round_down(x: f64, anchor: f64, unit: f64) -> f64 {
    anchor + ((x - anchor) / unit).floor() * unit
}

fn round_up(x: f64, anchor: f64, unit: f64) -> f64 {
    anchor + ((x - anchor) / unit).ceil() * unit
}

/// Grid unit the exhaustion endpoints are rounded to.
pub const EXHAUSTION_UNIT: f64 = 0.5;

/// Builds `K_1 ⊆ … ⊆ K_{m_max}` with `μ(K_m^∁) ≤ e^{-m²-1}/m`.
///
/// Interval spaces: compactly supported continuous measures use their
/// support hull for every `m`; otherwise `K_m` is the quantile interval at
/// `0.99` of the budget, rounded outward to multiples of ½ from the grid
/// anchor. Finite measures trim atoms from both ends. Indexed spaces drop the
/// lightest points while the dropped mass stays within the target.
pub fn build_exhaustion<T: Real>(mu: &SourceMeasure<T>, space: &MetricSpace<T>, m_max: usize) -> Result<CompactExhaustion<T>> {
    if m_max == 0 {
        return Err(Error::Argument("exhaustion depth must be at least 1".into()));
    }
    match space {
        MetricSpace::Interval { lo, hi } => interval_exhaustion(mu, wide(*lo), wide(*hi), space.grid_anchor(), m_max),
        _ => indexed_exhaustion(mu, space, m_max),
    }
}

fn interval_exhaustion<T: Real>(mu: &SourceMeasure<T>, space_lo: f64, space_hi: f64, anchor: T, m_max: usize) -> Result<CompactExhaustion<T>> {
    let (hull_lo, hull_hi) = mu.support_hull()?;
    let (hull_lo, hull_hi) = (wide(hull_lo), wide(hull_hi));
    if hull_lo < space_lo || hull_hi > space_hi {
        return Err(Error::UnsupportedMeasure(format!("support [{hull_lo}, {hull_hi}] is not contained in the space [{space_lo}, {space_hi}]")));
    }
    let anchor = wide(anchor);
    let compact_continuous = hull_lo.is_finite() && hull_hi.is_finite() && !mu.has_atoms();
    let mut sets = Vec::with_capacity(m_max);
    let mut tails = Vec::with_capacity(m_max);
    let mut prev: Option<(f64, f64)> = None;
    for m in 1..=m_max {
        let budget = tail_budget(m);
        let target = TAIL_SAFETY * budget;
        if !(target > 0.0) || lit::<T>(target) <= T::zero() {
            return Err(Error::UnsupportedMeasure(format!("tail budget at depth {m} underflows")));
        }
        let (mut lo, mut hi) = if compact_continuous {
            (hull_lo, hull_hi)
        } else {
            let (lower_share, upper_share) = match (hull_lo.is_finite(), hull_hi.is_finite()) {
                (true, false) => (0.0, target),
                (false, true) => (target, 0.0),
                _ => (target / 2.0, target / 2.0),
            };
            let lo = if lower_share > 0.0 { wide(mu.lower_quantile(lit(lower_share))?) } else { hull_lo };
            let hi = if upper_share > 0.0 { wide(mu.upper_quantile(lit(upper_share))?) } else { hull_hi };
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::UnsupportedMeasure(format!("no finite tail quantile at depth {m}")));
            }
            (round_down(lo, anchor, EXHAUSTION_UNIT).max(space_lo), round_up(hi, anchor, EXHAUSTION_UNIT).min(space_hi))
        };
        if let Some((plo, phi)) = prev {
            lo = lo.min(plo);
            hi = hi.max(phi);
        }
        prev = Some((lo, hi));
        let k = Span::closed(lit::<T>(lo), lit::<T>(hi));
        let tail =
            mu.mass_of_span(&Span::new(T::neg_infinity(), k.lo, false, false))? + mu.mass_of_span(&Span::new(k.hi, T::infinity(), false, false))?;
        if wide(tail) > budget {
            return Err(Error::UnsupportedMeasure(format!("cannot certify tail {} ≤ {budget:e} at depth {m}", tail)));
        }
        sets.push(Region::Span(k));
        tails.push(tail);
    }
    CompactExhaustion::from_parts(sets, tails)
}

fn indexed_exhaustion<T: Real>(mu: &SourceMeasure<T>, space: &MetricSpace<T>, m_max: usize) -> Result<CompactExhaustion<T>> {
    let n = space.point_count().unwrap_or(0);
    let SourceMeasure::Finite(fm) = mu else {
        return Err(Error::UnsupportedMeasure("indexed spaces require a finite measure".into()));
    };
    let mut mass = vec![T::zero(); n];
    for (p, w) in fm.iter() {
        match p {
            Point::Id(i) if *i < n => mass[*i] = mass[*i] + w,
            _ => return Err(Error::Domain(p.to_string())),
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mass[a].partial_cmp(&mass[b]).unwrap_or(Ordering::Equal).then(b.cmp(&a)));
    let mut sets = Vec::with_capacity(m_max);
    let mut tails = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let target = lit::<T>(TAIL_SAFETY * tail_budget(m));
        let mut dropped = T::zero();
        let mut cut = 0;
        for &i in &order {
            if dropped + mass[i] > target {
                break;
            }
            dropped = dropped + mass[i];
            cut += 1;
        }
        let mut kept: Vec<usize> = order[cut..].to_vec();
        if let Some(Region::Points(prev)) = sets.last() {
            kept.extend_from_slice(prev);
        }
        let kept = Region::points(kept);
        let tail = match &kept {
            Region::Points(ids) => (0..n).filter(|i| ids.binary_search(i).is_err()).map(|i| mass[i]).sum(),
            Region::Span(_) => unreachable!(),
        };
        sets.push(kept);
        tails.push(tail);
    }
    CompactExhaustion::from_parts(sets, tails)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteMeasure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interval_distance_and_domain() {
        let s = MetricSpace::interval(0.0f64, 1.0).unwrap();
        assert!((s.distance(&Point::Real(0.2), &Point::Real(0.7)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(s.distance(&Point::Real(0.3), &Point::Real(0.3)).unwrap(), 0.0);
        assert!(matches!(s.distance(&Point::Real(1.5), &Point::Real(0.0)), Err(Error::Domain(_))));
        assert!(matches!(s.distance(&Point::Id(0), &Point::Real(0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn finite_distance_is_matrix_lookup() {
        let s = MetricSpace::finite(vec![vec![0.0, 2.0, 3.0], vec![2.0, 0.0, 1.5], vec![3.0, 1.5, 0.0]]).unwrap();
        assert_eq!(s.distance(&Point::Id(1), &Point::Id(2)).unwrap(), 1.5);
        assert!(s.distance(&Point::Id(3), &Point::Id(0)).is_err());
    }

    #[test]
    fn finite_space_rejects_non_metrics() {
        assert!(MetricSpace::<f64>::finite(vec![]).is_err());
        assert!(MetricSpace::finite(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        let bad_triangle = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(MetricSpace::finite(bad_triangle).is_err());
    }

    #[test]
    fn metric_axioms_hold_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cloud = MetricSpace::cloud((0..20).map(|i| vec![i as f64 * 0.37, (i * i) as f64 * 0.01]).collect()).unwrap();
        for space in [MetricSpace::interval(-3.0, 4.0).unwrap(), MetricSpace::real_line(), cloud] {
            space.check_metric_axioms(10_000, &mut rng).unwrap();
        }
    }

    #[test]
    fn span_set_algebra() {
        let a = Span::new(0.0, 1.0, true, false);
        let b = Span::new(0.5, 2.0, true, true);
        let c = a.intersect(&b).unwrap();
        assert_eq!(c, Span::new(0.5, 1.0, true, false));
        assert!(c.is_subset_of(&a) && c.is_subset_of(&b));
        assert!(Span::new(1.0, 2.0, true, true).intersect(&a).is_none());
        assert!(!Span::new(0.0, 1.0, true, true).is_subset_of(&a));
    }

    #[test]
    fn uniform_exhaustion_is_the_support() {
        let mu = SourceMeasure::uniform(0.0, 1.0).unwrap();
        let space = MetricSpace::interval(0.0, 1.0).unwrap();
        let ex = build_exhaustion(&mu, &space, 6).unwrap();
        for m in 1..=6 {
            assert_eq!(ex.set(m), &Region::Span(Span::closed(0.0, 1.0)));
            assert_eq!(ex.tail_bound(m), 0.0);
        }
        assert!(ex.is_certified());
    }

    #[test]
    fn gaussian_depth_one_compact() {
        let mu = SourceMeasure::gaussian(0.0f64, 1.0).unwrap();
        let ex = build_exhaustion(&mu, &MetricSpace::real_line(), 8).unwrap();
        assert_eq!(ex.set(1), &Region::Span(Span::closed(-1.5, 1.5)));
        // 2(1 - Φ(1.5)) from an independent high-precision evaluation.
        assert!((ex.tail_bound(1) - 0.13361440253771614).abs() < 1e-12);
        assert!(ex.tail_bound(1) <= (-2.0f64).exp());
        assert_eq!(ex.set(2), &Region::Span(Span::closed(-3.0, 3.0)));
        assert!(ex.is_certified());
    }

    #[test]
    fn finite_measure_exhaustion_keeps_all_points() {
        let fm = FiniteMeasure::new(vec![Point::Id(0), Point::Id(1), Point::Id(2)], vec![0.2, 0.3, 0.5]).unwrap();
        let space = MetricSpace::finite(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
        let ex = build_exhaustion(&SourceMeasure::Finite(fm), &space, 5).unwrap();
        assert_eq!(ex.set(5), &Region::Points(vec![0, 1, 2]));
        assert_eq!(ex.tail_bound(5), 0.0);
    }

    #[test]
    fn exponential_is_one_sided() {
        let mu = SourceMeasure::exponential(1.0).unwrap();
        let space = MetricSpace::interval(0.0, f64::INFINITY).unwrap();
        let ex = build_exhaustion(&mu, &space, 4).unwrap();
        let Region::Span(k) = ex.set(4) else { panic!() };
        assert_eq!(k.lo, 0.0);
        assert!(ex.is_certified());
    }

    #[test]
    fn support_outside_space_is_unsupported() {
        let mu = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let space = MetricSpace::interval(-5.0, 5.0).unwrap();
        assert!(matches!(build_exhaustion(&mu, &space, 2), Err(Error::UnsupportedMeasure(_))));
        assert!(matches!(build_exhaustion(&mu, &MetricSpace::real_line(), 30), Err(Error::UnsupportedMeasure(_))));
    }
}
