//! Experiment configuration: JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use ldp_core::{FiniteMeasure, MetricSpace, Point, SourceMeasure};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    RealLine,
    Interval { lo: f64, hi: f64 },
    Finite { matrix: Vec<Vec<f64>> },
    Cloud { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Atoms are reals on interval spaces and point indices otherwise.
    Finite {
        points: Vec<f64>,
        weights: Vec<f64>,
    },
    Mixture {
        components: Vec<Component>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub measure: MeasureSpec,
}

/// `{ "min": a, "max": b }` or a bare maximum depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DepthSpec {
    Max(usize),
    Range { min: usize, max: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: MeasureSpec,
    pub radius: f64,
}

/// The finite pair on which the exact-oracle checks run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteFixture {
    pub mu: MeasureSpec,
    pub nu: MeasureSpec,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub eps: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: Option<SpaceSpec>,
    pub mu: Option<MeasureSpec>,
    pub nu: Option<MeasureSpec>,
    pub depth: Option<DepthSpec>,
    pub n_list: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub reps: Option<usize>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub set: Option<BallSpec>,
    pub partition_file: Option<PathBuf>,
    pub finite: Option<FiniteFixture>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Flags that override the file when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            CliError::spec(&field, e.inner())
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let mut config = Self::parse(&text)?;
        if let Some(p) = &config.partition_file {
            if p.is_relative() {
                config.partition_file = Some(path.parent().unwrap_or(Path::new(".")).join(p));
            }
        }
        Ok(config)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if let Some(d) = o.depth {
            let min = self.depth.map(|d| d.range().0).unwrap_or(1).min(d);
            self.depth = Some(DepthSpec::Range { min, max: d });
        }
        if o.samples.is_some() {
            self.samples = o.samples;
        }
        if o.reps.is_some() {
            self.reps = o.reps;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        if o.format.is_some() {
            self.format = o.format;
        }
        self
    }

    pub fn space(&self) -> CliResult<MetricSpace<f64>> {
        self.space.as_ref().map_or(Ok(MetricSpace::real_line()), |s| s.build("space"))
    }

    pub fn depths(&self) -> CliResult<(usize, usize)> {
        let (min, max) = self.depth.ok_or_else(|| CliError::spec("depth", "missing"))?.range();
        if min == 0 || min > max {
            return Err(CliError::spec("depth", format!("range {min}..{max} must be nonempty, increasing and start at 1 or more")));
        }
        Ok((min, max))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::spec("seed", "required for Monte Carlo operations"))
    }

    pub fn reps(&self) -> CliResult<usize> {
        match self.reps {
            Some(0) => Err(CliError::spec("reps", "must be at least 1")),
            Some(r) => Ok(r),
            None => Err(CliError::spec("reps", "missing")),
        }
    }

    /// `n_list`, or the single `samples` value when given.
    pub fn n_list(&self) -> CliResult<Vec<usize>> {
        let list = match (self.samples, &self.n_list) {
            (Some(n), _) => vec![n],
            (None, Some(l)) => l.clone(),
            (None, None) => return Err(CliError::spec("n_list", "missing")),
        };
        if list.is_empty() || list.contains(&0) {
            return Err(CliError::spec("n_list", "sample sizes must be positive"));
        }
        Ok(list)
    }

    pub fn measure(&self, which: &str, space: &MetricSpace<f64>) -> CliResult<SourceMeasure<f64>> {
        let spec = match which {
            "mu" => &self.mu,
            "nu" => &self.nu,
            _ => unreachable!("known measure fields"),
        };
        spec.as_ref().ok_or_else(|| CliError::spec(which, "missing"))?.build(which, space)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

impl DepthSpec {
    pub fn range(self) -> (usize, usize) {
        match self {
            DepthSpec::Max(m) => (1, m),
            DepthSpec::Range { min, max } => (min, max),
        }
    }
}

impl SpaceSpec {
    pub fn build(&self, field: &str) -> CliResult<MetricSpace<f64>> {
        let built = match self {
            SpaceSpec::RealLine => Ok(MetricSpace::real_line()),
            SpaceSpec::Interval { lo, hi } => MetricSpace::interval(*lo, *hi),
            SpaceSpec::Finite { matrix } => MetricSpace::finite(matrix.clone()),
            SpaceSpec::Cloud { points } => MetricSpace::cloud(points.clone()),
        };
        built.map_err(|e| CliError::spec(field, e))
    }
}

impl MeasureSpec {
    pub fn build(&self, field: &str, space: &MetricSpace<f64>) -> CliResult<SourceMeasure<f64>> {
        let built = match self {
            MeasureSpec::Gaussian { mean, sd } => SourceMeasure::gaussian(*mean, *sd),
            MeasureSpec::Uniform { lo, hi } => SourceMeasure::uniform(*lo, *hi),
            MeasureSpec::Exponential { rate } => SourceMeasure::exponential(*rate),
            MeasureSpec::Finite { .. } => return self.build_finite(field, space).map(SourceMeasure::Finite),
            MeasureSpec::Mixture { components } => {
                let parts = components
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.measure.build(&format!("{field}.components[{i}].measure"), space).map(|m| (c.weight, m)))
                    .collect::<CliResult<Vec<_>>>()?;
                SourceMeasure::mixture(parts)
            }
        };
        let measure = built.map_err(|e| CliError::spec(field, e))?;
        if space.is_indexed() && !matches!(measure, SourceMeasure::Finite(_)) {
            return Err(CliError::spec(field, "indexed spaces carry finite measures only"));
        }
        Ok(measure)
    }

    pub fn build_finite(&self, field: &str, space: &MetricSpace<f64>) -> CliResult<FiniteMeasure<f64>> {
        let MeasureSpec::Finite { points, weights } = self else {
            return Err(CliError::spec(field, "expected a finite measure"));
        };
        let atoms = points
            .iter()
            .map(|&x| {
                let p = if space.is_indexed() {
                    if x < 0.0 || x.fract() != 0.0 {
                        return Err(CliError::spec(&format!("{field}.points"), format!("{x} is not a point index")));
                    }
                    Point::Id(x as usize)
                } else {
                    Point::Real(x)
                };
                if !space.contains(&p) {
                    return Err(CliError::spec(&format!("{field}.points"), format!("{p} lies outside the space")));
                }
                Ok(p)
            })
            .collect::<CliResult<Vec<_>>>()?;
        FiniteMeasure::new(atoms, weights.clone()).map_err(|e| CliError::spec(&format!("{field}.weights"), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_measures() {
        let c = ExperimentConfig::parse(
            r#"{"mu": {"type": "mixture", "components": [{"weight": 0.5, "measure": {"type": "gaussian", "mean": 0, "sd": 1}},
                {"weight": 0.5, "measure": {"type": "finite", "points": [1, 2], "weights": [0.5, 0.5]}}]}, "depth": 3}"#,
        )
        .unwrap();
        assert_eq!(c.depths().unwrap(), (1, 3));
        assert!(c.measure("mu", &c.space().unwrap()).is_ok());
    }

    #[test]
    fn errors_name_the_field() {
        let err = ExperimentConfig::parse(r#"{"mu": {"type": "gaussian", "mean": 0}}"#).unwrap_err();
        assert!(err.to_string().contains("mu"), "{err}");
        let err = ExperimentConfig::parse(r#"{"depth": {"min": 3, "max": 1}}"#).unwrap().depths().unwrap_err();
        assert!(err.to_string().starts_with("depth"), "{err}");
        let c = ExperimentConfig::parse(r#"{"mu": {"type": "finite", "points": [0, 1], "weights": [0.5, 0.6]}}"#).unwrap();
        let err = c.measure("mu", &MetricSpace::real_line()).unwrap_err();
        assert!(err.to_string().starts_with("mu.weights"), "{err}");
    }

    #[test]
    fn flags_override_the_file() {
        let c = ExperimentConfig::parse(r#"{"seed": 1, "depth": {"min": 2, "max": 4}, "reps": 10}"#).unwrap();
        let o = Overrides { seed: Some(7), depth: Some(3), ..Default::default() };
        let c = c.apply(&o);
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.depths().unwrap(), (2, 3));
        assert_eq!(c.reps, Some(10));
    }
}
