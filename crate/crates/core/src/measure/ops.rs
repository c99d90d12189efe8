use super::{EmpiricalMeasure, FiniteMeasure, Reweighted, SourceMeasure};
use crate::error::{Error, Result};
use crate::partition::TaggedPartition;
use crate::rng::stream_rng;
use crate::scalar::{lit, ExactScalar, Real};

/// Tolerance on the total pushforward mass of an analytic measure.
const ANALYTIC_MASS_TOLERANCE: f64 = 1e-9;

/// Measures whose cell masses `ν(A_{m,i})` can be computed.
pub trait Discretize<T: Real> {
    /// Mass of every cell, in cell order.
    fn cell_masses(&self, partition: &TaggedPartition<T>) -> Result<Vec<T>>;

    /// Whether the masses are exact sums of atoms.
    fn is_atomic(&self) -> bool;
}

impl<T: Real> Discretize<T> for FiniteMeasure<T> {
    fn cell_masses(&self, partition: &TaggedPartition<T>) -> Result<Vec<T>> {
        let cell_of = self.support().iter().map(|p| partition.locate(p)).collect::<Result<Vec<_>>>()?;
        Ok(pushforward_weights(self.weights(), &cell_of, partition.len()))
    }

    fn is_atomic(&self) -> bool {
        true
    }
}

impl<T: Real> Discretize<T> for EmpiricalMeasure<T> {
    /// Counts are summed per cell before dividing by `n`, so the result is
    /// bit-identical to the empirical measure of the projected samples.
    fn cell_masses(&self, partition: &TaggedPartition<T>) -> Result<Vec<T>> {
        let mut counts = vec![0usize; partition.len()];
        for (p, &c) in self.measure().support().iter().zip(self.counts()) {
            counts[partition.locate(p)?] += c;
        }
        let n = lit::<T>(self.n() as f64);
        Ok(counts.into_iter().map(|c| lit::<T>(c as f64) / n).collect())
    }

    fn is_atomic(&self) -> bool {
        true
    }
}

impl<T: Real> Discretize<T> for SourceMeasure<T> {
    fn cell_masses(&self, partition: &TaggedPartition<T>) -> Result<Vec<T>> {
        match self {
            SourceMeasure::Finite(fm) => fm.cell_masses(partition),
            _ => partition.cells().iter().map(|c| self.mass_of_region(&c.region)).collect(),
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, SourceMeasure::Finite(_))
    }
}

/// Pushforward `ν^m = ν ∘ (π^m)^{-1}` onto the tags of `partition`.
///
/// Every tag is kept, including those of zero mass.
pub fn discretize<T: Real, M: Discretize<T> + ?Sized>(nu: &M, partition: &TaggedPartition<T>) -> Result<FiniteMeasure<T>> {
    let masses = nu.cell_masses(partition)?;
    let n = lit::<T>(masses.len().max(1) as f64);
    let tol = if nu.is_atomic() { T::mass_tolerance().max(n * T::epsilon() * lit(4.0)) } else { lit(ANALYTIC_MASS_TOLERANCE) };
    FiniteMeasure::with_tolerance(partition.tags(), masses, tol).map_err(|e| match e {
        Error::Argument(msg) => Error::UnsupportedMeasure(format!("pushforward lost mass: {msg}")),
        other => other,
    })
}

/// `L_n` from `n` i.i.d. draws using stream 0 of `seed`.
pub fn sample_empirical<T: Real>(mu: &SourceMeasure<T>, n: usize, seed: u64) -> Result<EmpiricalMeasure<T>> {
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, 0);
    EmpiricalMeasure::from_samples(mu.sampler().sample_n(n, &mut rng)?)
}

/// `L_n^m`: the empirical measure of the projected samples `π^m(X_i)`.
pub fn discretize_empirical<T: Real>(l: &EmpiricalMeasure<T>, partition: &TaggedPartition<T>) -> Result<EmpiricalMeasure<T>> {
    let projected = l.samples().iter().map(|x| partition.project(x)).collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::from_samples(projected)
}

/// Cell masses `Σ_{x ∈ A_k} w(x)` from atom weights and cell indices.
pub fn pushforward_weights<S: ExactScalar>(weights: &[S], cell_of: &[usize], cells: usize) -> Vec<S> {
    let mut masses = vec![S::zero(); cells];
    for (w, &k) in weights.iter().zip(cell_of) {
        masses[k] = masses[k].clone() + w.clone();
    }
    masses
}

/// Atom weights `w(x) σ_k / w(A_k)` of the lift, `k` the cell of `x`.
pub fn lift_weights<S: ExactScalar>(weights: &[S], cell_of: &[usize], targets: &[S]) -> Result<Vec<S>> {
    let base = pushforward_weights(weights, cell_of, targets.len());
    if let Some(cell) = (0..base.len()).find(|&k| targets[k] > S::zero() && !(base[k] > S::zero())) {
        return Err(Error::InfeasibleLift { cell });
    }
    Ok(weights
        .iter()
        .zip(cell_of)
        .map(|(w, &k)| if targets[k] > S::zero() { w.clone() * targets[k].clone() / base[k].clone() } else { S::zero() })
        .collect())
}

/// Lifts `σ` on the tags to `ρ(F) = Σ_i μ(F | A_i) σ(a_i)`.
///
/// A finite `μ` yields an explicit finite measure; any other source yields
/// a cell-wise reweighting of `μ`.
pub fn lift<T: Real>(sigma: &FiniteMeasure<T>, mu: &SourceMeasure<T>, partition: &TaggedPartition<T>) -> Result<SourceMeasure<T>> {
    let targets: Vec<T> = partition.cells().iter().map(|c| sigma.mass_at(&c.tag)).collect();
    let placed: T = targets.iter().copied().sum();
    if (placed - sigma.total_mass()).abs() > T::mass_tolerance() {
        return Err(Error::Argument("sigma charges points that are not tags".into()));
    }
    match mu {
        SourceMeasure::Finite(fm) => {
            let cell_of = fm.support().iter().map(|p| partition.locate(p)).collect::<Result<Vec<_>>>()?;
            let weights = lift_weights(fm.weights(), &cell_of, &targets)?;
            let tol = T::mass_tolerance().max(lit::<T>(fm.len() as f64) * T::epsilon() * lit(8.0));
            Ok(SourceMeasure::Finite(FiniteMeasure::with_tolerance(fm.support().to_vec(), weights, tol)?))
        }
        _ => {
            let cells = partition.cells().iter().map(|c| c.region.clone()).collect();
            Ok(SourceMeasure::Reweighted(Box::new(Reweighted::new(mu.clone(), cells, targets)?)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{build_sequence, PartitionSequence};
    use crate::space::{build_exhaustion, MetricSpace, Point};
    use crate::special::normal_mass;

    fn sequence(mu: &SourceMeasure<f64>, space: &MetricSpace<f64>, m: usize) -> PartitionSequence<f64> {
        let ex = build_exhaustion(mu, space, m).unwrap();
        build_sequence(space, &ex, m).unwrap()
    }

    #[test]
    fn dirac_pushes_to_its_tag() {
        let mu = SourceMeasure::uniform(0.0, 1.0).unwrap();
        let seq = sequence(&mu, &MetricSpace::interval(0.0, 1.0).unwrap(), 2);
        let p = seq.at(2).unwrap();
        let d = discretize(&FiniteMeasure::dirac(Point::Real(0.3)), p).unwrap();
        assert_eq!(d.mass_at(&p.project(&Point::Real(0.3)).unwrap()), 1.0);
    }

    #[test]
    fn uniform_splits_evenly() {
        let mu = SourceMeasure::uniform(0.0, 1.0).unwrap();
        let seq = sequence(&mu, &MetricSpace::interval(0.0, 1.0).unwrap(), 1);
        let d = discretize(&mu, seq.at(1).unwrap()).unwrap();
        assert_eq!(d.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn gaussian_masses_are_cdf_increments() {
        let mu = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let seq = sequence(&mu, &MetricSpace::real_line(), 1);
        let p = seq.at(1).unwrap();
        let masses = mu.cell_masses(p).unwrap();
        let edges = [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
        for i in 0..6 {
            assert!((masses[i] - normal_mass(edges[i], edges[i + 1])).abs() < 1e-15);
        }
        let tail = 0.06680720126885806;
        assert!((masses[6] - tail).abs() < 1e-15);
        assert!((masses[7] - tail).abs() < 1e-15);
        let total: f64 = masses.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_sampling_is_reproducible() {
        let mu = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let a = sample_empirical(&mu, 100, 7).unwrap();
        let b = sample_empirical(&mu, 100, 7).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert!(sample_empirical(&mu, 0, 7).is_err());
    }

    #[test]
    fn coin_atoms_are_quarters() {
        let coin = FiniteMeasure::uniform(vec![Point::Real(0.0f64), Point::Real(1.0)]).unwrap();
        let l = sample_empirical(&SourceMeasure::Finite(coin), 4, 3).unwrap();
        for &w in l.measure().weights() {
            assert_eq!((w * 4.0).fract(), 0.0);
        }
    }

    #[test]
    fn empirical_discretization_commutes() {
        let mu = SourceMeasure::uniform(0.0, 1.0).unwrap();
        let seq = sequence(&mu, &MetricSpace::interval(0.0, 1.0).unwrap(), 3);
        let p = seq.at(3).unwrap();
        let l = sample_empirical(&mu, 100, 11).unwrap();
        let projected = discretize_empirical(&l, p).unwrap();
        let pushed = discretize(&l, p).unwrap();
        for (pt, w) in projected.measure().iter() {
            assert_eq!(pushed.mass_at(pt), w);
        }
        assert!((pushed.positive_part().total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lift_on_four_points() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.1]];
        let space = MetricSpace::cloud(pts).unwrap();
        let mu_f = FiniteMeasure::uniform((0..4).map(Point::Id).collect()).unwrap();
        let mu = SourceMeasure::Finite(mu_f);
        let seq = sequence(&mu, &space, 1);
        let p = seq.at(1).unwrap();
        assert_eq!(p.len(), 2);
        let sigma = FiniteMeasure::new(vec![p.cells()[0].tag, p.cells()[1].tag], vec![1.0, 0.0]).unwrap();
        let rho = lift(&sigma, &mu, p).unwrap();
        let rho = rho.as_finite().unwrap();
        assert_eq!(rho.mass_at(&Point::Id(0)), 0.5);
        assert_eq!(rho.mass_at(&Point::Id(1)), 0.5);
        assert_eq!(rho.mass_at(&Point::Id(2)), 0.0);
        assert_eq!(discretize(rho, p).unwrap(), sigma);
    }

    #[test]
    fn lift_of_pushforward_is_identity_on_gaussian() {
        let mu = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let seq = sequence(&mu, &MetricSpace::real_line(), 2);
        let p = seq.at(2).unwrap();
        let mu_m = discretize(&mu, p).unwrap();
        let rho = lift(&mu_m, &mu, p).unwrap();
        let back = discretize(&rho, p).unwrap();
        for ((_, a), (_, b)) in back.iter().zip(mu_m.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn lift_is_exact_in_rationals() {
        use num_rational::Ratio;
        let w: Vec<Ratio<i64>> = [1, 2, 3, 4].iter().map(|&k| Ratio::new(k, 10)).collect();
        let cell_of = [0, 0, 1, 1];
        let sigma = [Ratio::new(2, 7), Ratio::new(5, 7)];
        let rho = lift_weights(&w, &cell_of, &sigma).unwrap();
        assert_eq!(pushforward_weights(&rho, &cell_of, 2), sigma.to_vec());
    }

    #[test]
    fn lift_onto_null_cell_is_infeasible() {
        let mu = SourceMeasure::uniform(0.0, 1.0).unwrap();
        let space = MetricSpace::interval(-1.0, 1.0).unwrap();
        let seq = sequence(&mu, &space, 1);
        let p = seq.at(1).unwrap();
        let last = p.len() - 1;
        assert!(!p.cells()[last].is_good);
        let sigma = FiniteMeasure::dirac(p.cells()[last].tag);
        assert!(matches!(lift(&sigma, &mu, p), Err(Error::InfeasibleLift { cell }) if cell == last));
    }
}
