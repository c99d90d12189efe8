use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::FiniteMeasure;
use crate::error::{Error, Result};
use crate::scalar::{lit, wide, Real};
use crate::space::{Point, Region, Span};
use crate::special::{adaptive_simpson, normal_isf, normal_mass, normal_pdf};

/// A sampleable probability measure with cell-mass and tail-quantile access.
///
/// Analytic families are evaluated in `f64` internally and converted to `T`
/// at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceMeasure<T> {
    Finite(FiniteMeasure<T>),
    Uniform {
        lo: T,
        hi: T,
    },
    Gaussian {
        mean: T,
        sd: T,
    },
    Exponential {
        rate: T,
    },
    /// Convex combination `Σ w_k μ_k`.
    Mixture(Vec<(T, SourceMeasure<T>)>),
    /// A base measure with its density rescaled by a constant on each cell.
    Reweighted(Box<Reweighted<T>>),
}

/// `ρ(F) = Σ_i factor_i · base(F ∩ A_i)` over a partition `{A_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reweighted<T> {
    base: SourceMeasure<T>,
    cells: Vec<Region<T>>,
    factors: Vec<T>,
    cell_masses: Vec<T>,
}

impl<T: Real> Reweighted<T> {
    /// Rescales `base` so that cell `i` receives mass `cell_masses[i]`.
    pub fn new(base: SourceMeasure<T>, cells: Vec<Region<T>>, cell_masses: Vec<T>) -> Result<Self> {
        if cells.len() != cell_masses.len() {
            return Err(Error::Argument("one target mass per cell is required".into()));
        }
        let mut factors = Vec::with_capacity(cells.len());
        for (i, (cell, &target)) in cells.iter().zip(&cell_masses).enumerate() {
            let base_mass = base.mass_of_region(cell)?;
            if target > T::zero() && base_mass <= T::zero() {
                return Err(Error::InfeasibleLift { cell: i });
            }
            factors.push(if target > T::zero() { target / base_mass } else { T::zero() });
        }
        Ok(Reweighted { base, cells, factors, cell_masses })
    }

    pub fn base(&self) -> &SourceMeasure<T> {
        &self.base
    }

    pub fn cells(&self) -> &[Region<T>] {
        &self.cells
    }

    /// Density ratio against the base on each cell.
    pub fn factors(&self) -> &[T] {
        &self.factors
    }

    pub fn cell_masses(&self) -> &[T] {
        &self.cell_masses
    }
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Argument(msg.into()))
    }
}

impl<T: Real> SourceMeasure<T> {
    pub fn uniform(lo: T, hi: T) -> Result<Self> {
        check(lo.is_finite() && hi.is_finite() && lo < hi, "uniform needs finite lo < hi")?;
        Self::Uniform { lo, hi }.validated()
    }

    pub fn gaussian(mean: T, sd: T) -> Result<Self> {
        check(mean.is_finite() && sd.is_finite() && sd > T::zero(), "gaussian needs finite mean and sd > 0")?;
        Self::Gaussian { mean, sd }.validated()
    }

    pub fn exponential(rate: T) -> Result<Self> {
        check(rate.is_finite() && rate > T::zero(), "exponential needs rate > 0")?;
        Self::Exponential { rate }.validated()
    }

    pub fn mixture(components: Vec<(T, SourceMeasure<T>)>) -> Result<Self> {
        check(!components.is_empty(), "mixture needs at least one component")?;
        check(components.iter().all(|(w, _)| w.is_finite() && *w >= T::zero()), "mixture weights must be nonnegative")?;
        let total: T = components.iter().map(|(w, _)| *w).sum();
        check((total - T::one()).abs() <= T::mass_tolerance(), format!("mixture weights sum to {total}"))?;
        Self::Mixture(components).validated()
    }

    /// Checks that the density or mass function is normalized to within
    /// `1e-6` (Simpson quadrature over the central mass plus exact tails).
    fn validated(self) -> Result<Self> {
        let total = self.total_mass_by_quadrature()?;
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Argument(format!("measure integrates to {total}, expected 1")));
        }
        Ok(self)
    }

    fn total_mass_by_quadrature(&self) -> Result<f64> {
        Ok(match self {
            SourceMeasure::Finite(fm) => wide(fm.total_mass()),
            SourceMeasure::Mixture(parts) => {
                let mut total = 0.0;
                for (w, c) in parts {
                    total += wide(*w) * c.total_mass_by_quadrature()?;
                }
                total
            }
            SourceMeasure::Reweighted(rw) => rw.cell_masses.iter().map(|&m| wide(m)).sum(),
            _ => {
                let a = wide(self.lower_quantile(lit(1e-13))?);
                let b = wide(self.upper_quantile(lit(1e-13))?);
                let f = |x: f64| self.density(lit(x)).map(wide).unwrap_or(0.0);
                let body = adaptive_simpson(f, a, b, 1e-10);
                let tails = self.mass_of_span(&Span::new(T::neg_infinity(), lit(a), false, false))?
                    + self.mass_of_span(&Span::new(lit(b), T::infinity(), false, false))?;
                body + wide(tails)
            }
        })
    }

    /// Whether the measure has atoms (finite component anywhere).
    pub fn has_atoms(&self) -> bool {
        match self {
            SourceMeasure::Finite(_) => true,
            SourceMeasure::Mixture(parts) => parts.iter().any(|(_, c)| c.has_atoms()),
            SourceMeasure::Reweighted(rw) => rw.base.has_atoms(),
            _ => false,
        }
    }

    /// The finite measure, if this is one.
    pub fn as_finite(&self) -> Option<&FiniteMeasure<T>> {
        match self {
            SourceMeasure::Finite(fm) => Some(fm),
            _ => None,
        }
    }

    /// Smallest closed interval containing the support (ends may be infinite).
    pub fn support_hull(&self) -> Result<(T, T)> {
        match self {
            SourceMeasure::Finite(fm) => {
                let reals: Option<Vec<T>> = fm.support().iter().map(Point::as_real).collect();
                let reals = reals.ok_or_else(|| Error::UnsupportedMeasure("measure lives on an indexed space".into()))?;
                let lo = reals.iter().copied().fold(T::infinity(), T::min);
                let hi = reals.iter().copied().fold(T::neg_infinity(), T::max);
                Ok((lo, hi))
            }
            SourceMeasure::Uniform { lo, hi } => Ok((*lo, *hi)),
            SourceMeasure::Gaussian { .. } => Ok((T::neg_infinity(), T::infinity())),
            SourceMeasure::Exponential { .. } => Ok((T::zero(), T::infinity())),
            SourceMeasure::Mixture(parts) => {
                let mut lo = T::infinity();
                let mut hi = T::neg_infinity();
                for (w, c) in parts {
                    if *w > T::zero() {
                        let (a, b) = c.support_hull()?;
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
                Ok((lo, hi))
            }
            SourceMeasure::Reweighted(rw) => rw.base.support_hull(),
        }
    }

    /// Mass of an interval.
    pub fn mass_of_span(&self, span: &Span<T>) -> Result<T> {
        if span.is_empty() {
            return Ok(T::zero());
        }
        let (a, b) = (wide(span.lo), wide(span.hi));
        Ok(match self {
            SourceMeasure::Finite(fm) => {
                let mut total = T::zero();
                for (p, w) in fm.iter() {
                    match p {
                        Point::Real(x) => {
                            if span.contains(*x) {
                                total = total + w;
                            }
                        }
                        Point::Id(_) => return Err(Error::UnsupportedMeasure("interval mass of an indexed measure".into())),
                    }
                }
                total
            }
            SourceMeasure::Uniform { lo, hi } => {
                let (lo, hi) = (wide(*lo), wide(*hi));
                lit(((b.min(hi) - a.max(lo)) / (hi - lo)).max(0.0))
            }
            SourceMeasure::Gaussian { mean, sd } => {
                let (m, s) = (wide(*mean), wide(*sd));
                lit(normal_mass((a - m) / s, (b - m) / s))
            }
            SourceMeasure::Exponential { rate } => {
                let r = wide(*rate);
                let a = a.max(0.0);
                let mass = if b <= a {
                    0.0
                } else if r * a >= std::f64::consts::LN_2 {
                    (-r * a).exp() - (-r * b).exp()
                } else {
                    (-r * a).exp_m1() - (-r * b).exp_m1()
                };
                lit(mass.max(0.0))
            }
            SourceMeasure::Mixture(parts) => {
                let mut total = T::zero();
                for (w, c) in parts {
                    total = total + *w * c.mass_of_span(span)?;
                }
                total
            }
            SourceMeasure::Reweighted(rw) => rw.mass_of_region(&Region::Span(*span))?,
        })
    }

    /// Mass of a region (interval or set of point ids).
    pub fn mass_of_region(&self, region: &Region<T>) -> Result<T> {
        match region {
            Region::Span(s) => self.mass_of_span(s),
            Region::Points(ids) => match self {
                SourceMeasure::Finite(fm) => {
                    let mut total = T::zero();
                    for (p, w) in fm.iter() {
                        match p {
                            Point::Id(i) => {
                                if ids.binary_search(i).is_ok() {
                                    total = total + w;
                                }
                            }
                            Point::Real(_) => return Err(Error::UnsupportedMeasure("point-set mass of a real-line measure".into())),
                        }
                    }
                    Ok(total)
                }
                SourceMeasure::Mixture(parts) => {
                    let mut total = T::zero();
                    for (w, c) in parts {
                        total = total + *w * c.mass_of_region(region)?;
                    }
                    Ok(total)
                }
                SourceMeasure::Reweighted(rw) => rw.mass_of_region(region),
                _ => Err(Error::UnsupportedMeasure("continuous measure on an indexed space".into())),
            },
        }
    }

    /// Density with respect to Lebesgue measure, for atomless families.
    pub fn density(&self, x: T) -> Option<T> {
        let xf = wide(x);
        match self {
            SourceMeasure::Finite(_) => None,
            SourceMeasure::Uniform { lo, hi } => Some(if x >= *lo && x <= *hi { T::one() / (*hi - *lo) } else { T::zero() }),
            SourceMeasure::Gaussian { mean, sd } => {
                let (m, s) = (wide(*mean), wide(*sd));
                Some(lit(normal_pdf((xf - m) / s) / s))
            }
            SourceMeasure::Exponential { rate } => {
                let r = wide(*rate);
                Some(lit(if xf < 0.0 { 0.0 } else { r * (-r * xf).exp() }))
            }
            SourceMeasure::Mixture(parts) => {
                let mut total = T::zero();
                for (w, c) in parts {
                    total = total + *w * c.density(x)?;
                }
                Some(total)
            }
            SourceMeasure::Reweighted(rw) => {
                let base = rw.base.density(x)?;
                let cell = rw.cells.iter().position(|c| c.contains(&Point::Real(x)))?;
                Some(base * rw.factors[cell])
            }
        }
    }

    fn mass_below(&self, x: T) -> Result<T> {
        self.mass_of_span(&Span::new(T::neg_infinity(), x, false, false))
    }

    fn mass_above(&self, x: T) -> Result<T> {
        self.mass_of_span(&Span::new(x, T::infinity(), false, false))
    }

    /// Largest `L` with `μ((-∞, L)) ≤ p`.
    pub fn lower_quantile(&self, p: T) -> Result<T> {
        let pf = wide(p);
        if !(pf > 0.0 && pf < 1.0) {
            return Err(Error::Argument(format!("quantile level {pf} outside (0, 1)")));
        }
        match self {
            SourceMeasure::Gaussian { mean, sd } => Ok(lit(wide(*mean) - wide(*sd) * normal_isf(pf))),
            SourceMeasure::Exponential { rate } => Ok(lit(-(-pf).ln_1p() / wide(*rate))),
            SourceMeasure::Uniform { lo, hi } => Ok(*lo + p * (*hi - *lo)),
            SourceMeasure::Finite(fm) => {
                self.support_hull()?;
                let mut below = T::zero();
                for (q, w) in fm.iter() {
                    if below + w > p {
                        return Ok(q.as_real().expect("real support checked"));
                    }
                    below = below + w;
                }
                Ok(T::infinity())
            }
            _ => self.bisect_quantile(p, true),
        }
    }

    /// Smallest `H` with `μ((H, ∞)) ≤ p`.
    pub fn upper_quantile(&self, p: T) -> Result<T> {
        let pf = wide(p);
        if !(pf > 0.0 && pf < 1.0) {
            return Err(Error::Argument(format!("quantile level {pf} outside (0, 1)")));
        }
        match self {
            SourceMeasure::Gaussian { mean, sd } => Ok(lit(wide(*mean) + wide(*sd) * normal_isf(pf))),
            SourceMeasure::Exponential { rate } => Ok(lit(-pf.ln() / wide(*rate))),
            SourceMeasure::Uniform { lo, hi } => Ok(*hi - p * (*hi - *lo)),
            SourceMeasure::Finite(fm) => {
                self.support_hull()?;
                let mut above = T::zero();
                for (q, w) in fm.iter().collect::<Vec<_>>().into_iter().rev() {
                    if above + w > p {
                        return Ok(q.as_real().expect("real support checked"));
                    }
                    above = above + w;
                }
                Ok(T::neg_infinity())
            }
            _ => self.bisect_quantile(p, false),
        }
    }

    /// Bracketing bisection on the tail mass. Returns the conservative end
    /// of the final bracket.
    fn bisect_quantile(&self, p: T, lower: bool) -> Result<T> {
        let (hull_lo, hull_hi) = self.support_hull()?;
        // `inside(x)` holds when the tail beyond x is within p.
        let inside = |x: T| -> Result<bool> { Ok(if lower { self.mass_below(x)? <= p } else { self.mass_above(x)? <= p }) };
        let start = if hull_lo.is_finite() && hull_hi.is_finite() {
            (hull_lo + hull_hi) / lit(2.0)
        } else if hull_lo.is_finite() {
            hull_lo
        } else if hull_hi.is_finite() {
            hull_hi
        } else {
            T::zero()
        };
        let outward = if lower { -T::one() } else { T::one() };
        let (mut good, mut bad) = (start, start);
        let mut step = T::one();
        if inside(start)? {
            // Move inward until the tail exceeds p.
            for _ in 0..2000 {
                bad = bad - outward * step;
                if !inside(bad)? {
                    break;
                }
                good = bad;
                step = step * lit(2.0);
            }
        } else {
            for _ in 0..2000 {
                good = good + outward * step;
                if inside(good)? {
                    break;
                }
                bad = good;
                step = step * lit(2.0);
            }
        }
        if !inside(good)? {
            return Err(Error::UnsupportedMeasure("tail quantile bracket not found".into()));
        }
        for _ in 0..200 {
            let mid = (good + bad) / lit(2.0);
            if mid == good || mid == bad {
                break;
            }
            if inside(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    }

    /// Precomputes a sampler.
    pub fn sampler(&self) -> Sampler<T> {
        Sampler::new(self)
    }
}

impl<T: Real> Reweighted<T> {
    fn mass_of_region(&self, region: &Region<T>) -> Result<T> {
        let mut total = T::zero();
        for (cell, &f) in self.cells.iter().zip(&self.factors) {
            if f > T::zero() {
                if let Some(part) = cell.intersect(region) {
                    total = total + f * self.base.mass_of_region(&part)?;
                }
            }
        }
        Ok(total)
    }
}

/// Draws i.i.d. points from a [`SourceMeasure`].
#[derive(Clone, Debug)]
pub struct Sampler<T> {
    kind: SamplerKind<T>,
}

#[derive(Clone, Debug)]
enum SamplerKind<T> {
    Atoms { points: Vec<Point<T>>, cumulative: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
    Mixture { cumulative: Vec<f64>, parts: Vec<Sampler<T>> },
    Conditional { measure: Box<Reweighted<T>>, cumulative: Vec<f64> },
}

fn cumulative<I: IntoIterator<Item = f64>>(weights: I) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .into_iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn pick<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().unwrap_or(&0.0);
    let u = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len().saturating_sub(1))
}

impl<T: Real> Sampler<T> {
    fn new(mu: &SourceMeasure<T>) -> Self {
        let kind = match mu {
            SourceMeasure::Finite(fm) => {
                SamplerKind::Atoms { points: fm.support().to_vec(), cumulative: cumulative(fm.weights().iter().map(|&w| wide(w))) }
            }
            SourceMeasure::Uniform { lo, hi } => SamplerKind::Uniform { lo: wide(*lo), hi: wide(*hi) },
            SourceMeasure::Gaussian { mean, sd } => SamplerKind::Gaussian { mean: wide(*mean), sd: wide(*sd) },
            SourceMeasure::Exponential { rate } => SamplerKind::Exponential { rate: wide(*rate) },
            SourceMeasure::Mixture(parts) => SamplerKind::Mixture {
                cumulative: cumulative(parts.iter().map(|(w, _)| wide(*w))),
                parts: parts.iter().map(|(_, c)| Sampler::new(c)).collect(),
            },
            SourceMeasure::Reweighted(rw) => {
                SamplerKind::Conditional { cumulative: cumulative(rw.cell_masses.iter().map(|&w| wide(w))), measure: rw.clone() }
            }
        };
        Sampler { kind }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point<T>> {
        Ok(match &self.kind {
            SamplerKind::Atoms { points, cumulative } => points[pick(cumulative, rng)],
            SamplerKind::Uniform { lo, hi } => Point::Real(lit(lo + (hi - lo) * rng.random::<f64>())),
            SamplerKind::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                Point::Real(lit(mean + sd * z))
            }
            SamplerKind::Exponential { rate } => {
                let e: f64 = rng.sample(Exp1);
                Point::Real(lit(e / rate))
            }
            SamplerKind::Mixture { cumulative, parts } => parts[pick(cumulative, rng)].sample(rng)?,
            SamplerKind::Conditional { measure, cumulative } => {
                let cell = pick(cumulative, rng);
                conditional_draw(&measure.base, &measure.cells[cell], rng)?
            }
        })
    }

    /// `n` draws.
    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Point<T>>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Draw from `base` conditioned on `cell`, by inverting the cell-restricted
/// distribution function.
fn conditional_draw<T: Real, R: Rng + ?Sized>(base: &SourceMeasure<T>, cell: &Region<T>, rng: &mut R) -> Result<Point<T>> {
    match cell {
        Region::Points(ids) => {
            let masses: Vec<f64> = ids.iter().map(|&i| base.mass_of_region(&Region::Points(vec![i])).map(wide)).collect::<Result<_>>()?;
            Ok(Point::Id(ids[pick(&cumulative(masses), rng)]))
        }
        Region::Span(span) => {
            let total = base.mass_of_span(span)?;
            let target = total * lit(rng.random::<f64>());
            let below = |x: T| base.mass_of_span(&Span::new(span.lo, x, span.lo_closed, true));
            let mut lo = if span.lo.is_finite() { span.lo } else { span.hi.min(T::zero()) - T::one() };
            let mut hi = if span.hi.is_finite() { span.hi } else { span.lo.max(T::zero()) + T::one() };
            let mut width = T::one();
            while !span.lo.is_finite() && below(lo)? > target {
                lo = lo - width;
                width = width * lit(2.0);
            }
            width = T::one();
            while !span.hi.is_finite() && below(hi)? < target {
                hi = hi + width;
                width = width * lit(2.0);
            }
            for _ in 0..200 {
                let mid = (lo + hi) / lit(2.0);
                if mid == lo || mid == hi {
                    break;
                }
                if below(mid)? < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let x = if span.contains(hi) { hi } else { lo };
            if !span.contains(x) {
                return Err(Error::Internal(format!("conditional draw escaped cell {span}")));
            }
            Ok(Point::Real(x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn constructors_validate_parameters() {
        assert!(SourceMeasure::gaussian(0.0, 0.0).is_err());
        assert!(SourceMeasure::exponential(-1.0).is_err());
        assert!(SourceMeasure::uniform(1.0, 1.0).is_err());
        assert!(SourceMeasure::mixture(vec![(0.5, SourceMeasure::gaussian(0.0, 1.0).unwrap())]).is_err());
        assert!(SourceMeasure::<f64>::gaussian(3.0, 0.1).is_ok());
    }

    #[test]
    fn quantiles_invert_tails() {
        let g = SourceMeasure::gaussian(1.0f64, 2.0).unwrap();
        let h = g.upper_quantile(1e-20).unwrap();
        assert!((g.mass_above(h).unwrap() / 1e-20 - 1.0).abs() < 1e-8);
        let e = SourceMeasure::exponential(2.0).unwrap();
        assert!((e.upper_quantile(0.25).unwrap() - 4f64.ln() / 2.0).abs() < 1e-14);
        let mix = SourceMeasure::mixture(vec![(0.5, g.clone()), (0.5, e.clone())]).unwrap();
        let lo = mix.lower_quantile(1e-6).unwrap();
        assert!(mix.mass_below(lo).unwrap() <= 1e-6);
        assert!(mix.mass_below(lo + 1e-6).unwrap() > 0.99e-6);
    }

    #[test]
    fn finite_quantiles_trim_atoms() {
        let fm =
            FiniteMeasure::new(vec![Point::Real(-10.0), Point::Real(0.0), Point::Real(1.0), Point::Real(50.0)], vec![1e-9, 0.5, 0.5 - 2e-9, 1e-9])
                .unwrap();
        let mu = SourceMeasure::Finite(fm);
        assert_eq!(mu.lower_quantile(1e-8).unwrap(), 0.0);
        assert_eq!(mu.upper_quantile(1e-8).unwrap(), 1.0);
        assert_eq!(mu.upper_quantile(1e-10).unwrap(), 50.0);
    }

    #[test]
    fn gaussian_samples_center_on_the_mean() {
        let g = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let mut rng = stream_rng(11, 0);
        let xs = g.sampler().sample_n(10_000, &mut rng).unwrap();
        let mean: f64 = xs.iter().map(|p| p.as_real().unwrap()).sum::<f64>() / 1e4;
        assert!(mean.abs() < 4.0 / 100.0);
    }

    #[test]
    fn reweighted_sampling_respects_cells() {
        let g = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let cells = vec![
            Region::Span(Span::new(f64::NEG_INFINITY, 0.0, false, false)),
            Region::Span(Span::new(0.0, 1.0, true, false)),
            Region::Span(Span::new(1.0, f64::INFINITY, true, false)),
        ];
        let rw = Reweighted::new(g, cells, vec![0.0, 0.25, 0.75]).unwrap();
        let rho = SourceMeasure::Reweighted(Box::new(rw));
        let mut rng = stream_rng(5, 1);
        let xs = rho.sampler().sample_n(4000, &mut rng).unwrap();
        let above_one = xs.iter().filter(|p| p.as_real().unwrap() >= 1.0).count() as f64 / 4000.0;
        assert!(xs.iter().all(|p| p.as_real().unwrap() >= 0.0));
        assert!((above_one - 0.75).abs() < 0.04);
        assert!((rho.mass_of_span(&Span::closed(-5.0, 0.5)).unwrap() - 0.25 * normal_mass(0.0, 0.5) / normal_mass(0.0, 1.0)).abs() < 1e-14);
    }
}
