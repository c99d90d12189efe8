use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, lit, Real};
use crate::space::Point;

/// A probability measure with finitely many atoms.
///
/// The support is kept sorted by [`Point::total_cmp`] with duplicates
/// merged, so two measures can be aligned atom by atom. Zero-weight atoms
/// are allowed and retained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteMeasure<T> {
    support: Vec<Point<T>>,
    weights: Vec<T>,
}

impl<T: Real> FiniteMeasure<T> {
    /// Builds a measure, merging repeated points. Weights must be finite,
    /// nonnegative and sum to one.
    pub fn new(points: Vec<Point<T>>, weights: Vec<T>) -> Result<Self> {
        let n = lit::<T>(points.len().max(1) as f64);
        let tol = T::mass_tolerance().max(n * T::epsilon() * lit(4.0));
        Self::with_tolerance(points, weights, tol)
    }

    /// As [`FiniteMeasure::new`] with an explicit tolerance on the total.
    pub fn with_tolerance(points: Vec<Point<T>>, weights: Vec<T>, tol: T) -> Result<Self> {
        let measure = Self::collect(points, weights)?;
        let total = measure.total_mass();
        if !((total - T::one()).abs() <= tol) {
            return Err(Error::Argument(format!("weights sum to {total}, expected 1")));
        }
        Ok(measure)
    }

    /// Builds a measure from nonnegative weights with positive total,
    /// dividing by the total.
    pub fn normalized(points: Vec<Point<T>>, weights: Vec<T>) -> Result<Self> {
        let mut measure = Self::collect(points, weights)?;
        let total = measure.total_mass();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::Argument("weights must have positive finite total".into()));
        }
        for w in &mut measure.weights {
            *w = *w / total;
        }
        Ok(measure)
    }

    fn collect(points: Vec<Point<T>>, weights: Vec<T>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Argument(format!("{} points but {} weights", points.len(), weights.len())));
        }
        if points.is_empty() {
            return Err(Error::Argument("a measure needs at least one atom".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < T::zero()) {
            return Err(Error::Argument(format!("weight {w} is not finite and nonnegative")));
        }
        if let Some(p) = points.iter().find(|p| p.as_real().is_some_and(|x| !x.is_finite())) {
            return Err(Error::Argument(format!("atom {p} is not finite")));
        }
        let mut pairs: Vec<(Point<T>, T)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<Point<T>> = Vec::with_capacity(pairs.len());
        let mut merged: Vec<T> = Vec::with_capacity(pairs.len());
        for (p, w) in pairs {
            if support.last().is_some_and(|q| q.total_cmp(&p) == Ordering::Equal) {
                let last = merged.last_mut().expect("parallel vectors");
                *last = *last + w;
            } else {
                support.push(p);
                merged.push(w);
            }
        }
        Ok(FiniteMeasure { support, weights: merged })
    }

    pub fn dirac(p: Point<T>) -> Self {
        FiniteMeasure { support: vec![p], weights: vec![T::one()] }
    }

    pub fn uniform(points: Vec<Point<T>>) -> Result<Self> {
        let w = vec![T::one(); points.len()];
        Self::normalized(points, w)
    }

    pub fn support(&self) -> &[Point<T>] {
        &self.support
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point<T>, T)> + '_ {
        self.support.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> T {
        compensated_sum(self.weights.iter().copied())
    }

    /// Mass of the atom at `p` (zero if absent).
    pub fn mass_at(&self, p: &Point<T>) -> T {
        self.support.binary_search_by(|q| q.total_cmp(p)).map(|i| self.weights[i]).unwrap_or_else(|_| T::zero())
    }

    /// Same measure without zero-weight atoms.
    pub fn positive_part(&self) -> Self {
        let (support, weights) = self.iter().filter(|(_, w)| *w > T::zero()).map(|(p, w)| (*p, w)).unzip();
        FiniteMeasure { support, weights }
    }

    /// Merged support of `self` and `other` with both weights per point.
    pub fn align(&self, other: &Self) -> Vec<(Point<T>, T, T)> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(self.len() + other.len());
        while i < self.len() || j < other.len() {
            let ord = match (self.support.get(i), other.support.get(j)) {
                (Some(a), Some(b)) => a.total_cmp(b),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push((self.support[i], self.weights[i], T::zero()));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((other.support[j], T::zero(), other.weights[j]));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.support[i], self.weights[i], other.weights[j]));
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Converts to another float type.
    pub fn cast<U: Real>(&self) -> FiniteMeasure<U> {
        let support = self
            .support
            .iter()
            .map(|p| match *p {
                Point::Real(x) => Point::Real(lit::<U>(crate::scalar::wide(x))),
                Point::Id(i) => Point::Id(i),
            })
            .collect();
        let weights = self.weights.iter().map(|&w| lit::<U>(crate::scalar::wide(w))).collect();
        FiniteMeasure { support, weights }
    }
}

/// Empirical measure `L_n = (1/n) Σ δ_{X_i}` with duplicate points merged.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure<T> {
    samples: Vec<Point<T>>,
    measure: FiniteMeasure<T>,
    counts: Vec<usize>,
}

impl<T: Real> EmpiricalMeasure<T> {
    pub fn from_samples(samples: Vec<Point<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Argument("an empirical measure needs n ≥ 1 samples".into()));
        }
        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut support: Vec<Point<T>> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for p in sorted {
            if support.last().is_some_and(|q| q.total_cmp(&p) == Ordering::Equal) {
                *counts.last_mut().expect("parallel vectors") += 1;
            } else {
                support.push(p);
                counts.push(1);
            }
        }
        let n = lit::<T>(samples.len() as f64);
        let weights = counts.iter().map(|&c| lit::<T>(c as f64) / n).collect();
        let measure = FiniteMeasure::new(support, weights)?;
        Ok(EmpiricalMeasure { samples, measure, counts })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Point<T>] {
        &self.samples
    }

    pub fn measure(&self) -> &FiniteMeasure<T> {
        &self.measure
    }

    /// Atom multiplicities, aligned with `measure().support()`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Point<f64> {
        Point::Real(x)
    }

    #[test]
    fn duplicates_merge_and_sort() {
        let m = FiniteMeasure::new(vec![r(2.0), r(1.0), r(2.0)], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(m.support(), &[r(1.0), r(2.0)]);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert_eq!(m.mass_at(&r(2.0)), 0.5);
        assert_eq!(m.mass_at(&r(3.0)), 0.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(FiniteMeasure::new(vec![r(0.0)], vec![0.9]).is_err());
        assert!(FiniteMeasure::new(vec![r(0.0), r(1.0)], vec![1.5, -0.5]).is_err());
        assert!(FiniteMeasure::<f64>::new(vec![], vec![]).is_err());
        assert!(FiniteMeasure::new(vec![r(f64::NAN)], vec![1.0]).is_err());
    }

    #[test]
    fn align_merges_supports() {
        let a = FiniteMeasure::new(vec![r(0.0), r(1.0)], vec![0.5, 0.5]).unwrap();
        let b = FiniteMeasure::new(vec![r(1.0), r(2.0)], vec![0.25, 0.75]).unwrap();
        let al = a.align(&b);
        assert_eq!(al, vec![(r(0.0), 0.5, 0.0), (r(1.0), 0.5, 0.25), (r(2.0), 0.0, 0.75)]);
    }

    #[test]
    fn empirical_atoms_are_multiples_of_one_over_n() {
        let l = EmpiricalMeasure::from_samples(vec![r(1.0), r(0.0), r(1.0), r(1.0)]).unwrap();
        assert_eq!(l.n(), 4);
        assert_eq!(l.counts(), &[1, 3]);
        assert_eq!(l.measure().weights(), &[0.25, 0.75]);
        assert!(EmpiricalMeasure::<f64>::from_samples(vec![]).is_err());
    }
}
