//! The named check suite behind `ldp verify`.

use ldp_core::entropy::kl_quadrature;
use ldp_core::harness::{replicate_stream, type_count, TYPES_GUARD};
use ldp_core::rng::stream_rng;
use ldp_core::{
    bl_distance, build_exhaustion, coupling_bound, discretize, entropy_ladder, exp_equivalence_check, martingale_trace, projection_coupling_bound,
    projection_distance_bound, proposition_chain_check, refine_check, relative_entropy_integral, supinf_ladder, CellRecord, Error, FiniteMeasure,
    MetricSpace, PartitionSequence, Point, SourceMeasure,
};
use rand::Rng;
use serde::Serialize;

use super::sequence;
use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};
use crate::output::{csv_table, json};

/// The configuration shipped with the binary.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/verify_default.json");

pub const CHECKS: [&str; 9] =
    ["lemma-2.1", "lemma-3.1", "lemma-4.1", "lemma-4.2-easy", "lemma-4.3", "lemma-5.1", "lemma-5.2", "prop-4.1-chain", "prop-4.2-chain"];

const COUPLING_TRIALS: usize = 1000;
const BOUND_CASES: usize = 50;
const BOUND_DEPTH: usize = 8;
const LADDER_TOL: f64 = 1e-10;
const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => Ok(json(self)),
            Format::Csv => {
                let rows: Vec<Vec<String>> = self.checks.iter().map(|c| vec![c.name.clone(), json_status(c.status), c.detail.clone()]).collect();
                csv_table(&["check", "status", "detail"], &rows)
            }
        }
    }
}

fn json_status(s: Status) -> String {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skip => "skip",
    }
    .to_string()
}

type Outcome = CliResult<(Status, String)>;

fn verdict(ok: bool, detail: String) -> Outcome {
    Ok((if ok { Status::Pass } else { Status::Fail }, detail))
}

struct Suite {
    space: MetricSpace<f64>,
    mu: SourceMeasure<f64>,
    nu: SourceMeasure<f64>,
    seq: PartitionSequence<f64>,
    seed: u64,
    reps: usize,
    n: usize,
    cfg: ExperimentConfig,
}

/// Runs every named check. Resource-guard overruns become skips; other
/// numerical failures become failed checks.
pub fn run_suite(cfg: &ExperimentConfig) -> CliResult<VerifyReport> {
    let space = cfg.space()?;
    let mu = cfg.measure("mu", &space)?;
    let nu = match &cfg.nu {
        Some(_) => cfg.measure("nu", &space)?,
        None => mu.clone(),
    };
    let (_, depth) = cfg.depths()?;
    let suite =
        Suite { seq: sequence(&mu, &space, depth)?, seed: cfg.seed()?, reps: cfg.reps()?, n: cfg.n_list()?[0], space, mu, nu, cfg: cfg.clone() };
    if cfg.finite.is_none() {
        return Err(CliError::spec("finite", "missing"));
    }
    let chains = suite.chains();
    let outcomes: Vec<(&str, Outcome)> = vec![
        (CHECKS[0], suite.couplings()),
        (CHECKS[1], suite.partitions()),
        (CHECKS[2], suite.ladder()),
        (CHECKS[3], suite.supinf()),
        (CHECKS[4], suite.exp_equivalence()),
        (CHECKS[5], suite.bl_bound()),
        (CHECKS[6], suite.martingale()),
        (CHECKS[7], chains.as_ref().map(|c| c.0.clone()).map_err(clone_err)),
        (CHECKS[8], chains.map(|c| c.1)),
    ];
    let mut checks = Vec::new();
    for (name, outcome) in outcomes {
        let (status, detail) = match outcome {
            Ok(r) => r,
            Err(CliError::Core(Error::Resource(msg))) => (Status::Skip, format!("resource guard exceeded: {msg}")),
            Err(CliError::Core(e)) => (Status::Fail, e.to_string()),
            Err(e) => return Err(e),
        };
        checks.push(CheckResult { name: name.to_string(), status, detail });
    }
    Ok(VerifyReport { seed: suite.seed, checks })
}

fn clone_err(e: &CliError) -> CliError {
    match e {
        CliError::Core(c) => CliError::Core(c.clone()),
        CliError::Spec(s) => CliError::Spec(s.clone()),
        CliError::Io { path, source } => CliError::Spec(format!("{path}: {source}")),
    }
}

impl Suite {
    fn fixture(&self) -> CliResult<(SourceMeasure<f64>, FiniteMeasure<f64>)> {
        let f = self.cfg.finite.as_ref().expect("checked in run_suite");
        let mu = f.mu.build("finite.mu", &self.space)?;
        let nu = f.nu.build_finite("finite.nu", &self.space)?;
        Ok((mu, nu))
    }

    /// Random couplings of random finite measures never undercut `d_BL`.
    fn couplings(&self) -> Outcome {
        let sampler = self.mu.sampler();
        let mut worst = f64::NEG_INFINITY;
        for t in 0..COUPLING_TRIALS {
            let mut rng = stream_rng(self.seed, replicate_stream(1, t));
            let a = random_measure(&sampler, &mut rng)?;
            let b = random_measure(&sampler, &mut rng)?;
            let pairs = random_coupling(&a, &b, &mut rng);
            let cost = coupling_bound(&pairs, &self.space)?;
            worst = worst.max(bl_distance(&a, &b, &self.space)? - cost);
        }
        verdict(worst <= 1e-9, format!("{COUPLING_TRIALS} couplings; max d_BL - cost = {worst:.3e}"))
    }

    /// Structural partition invariants, on the configured partition file
    /// when one is given.
    fn partitions(&self) -> Outcome {
        let seq = match &self.cfg.partition_file {
            None => self.seq.clone(),
            Some(path) => {
                let field = "partition_file";
                let text = std::fs::read_to_string(path).map_err(|e| CliError::spec(field, format!("{}: {e}", path.display())))?;
                let records: Vec<CellRecord> = serde_json::from_str(&text).map_err(|e| CliError::spec(field, e))?;
                let depth = records.iter().map(CellRecord::depth).max().ok_or_else(|| CliError::spec(field, "no cells"))?;
                let ex = build_exhaustion(&self.mu, &self.space, depth)?;
                PartitionSequence::from_records(self.space.clone(), ex, &records)?
            }
        };
        let report = refine_check(&seq);
        let certified = seq.exhaustion().is_certified();
        let failed: Vec<String> =
            report.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail.as_deref().unwrap_or("failed"))).collect();
        let detail = if failed.is_empty() && certified {
            format!("{} invariants and tail budgets hold over depths 1..{}", report.checks.len(), seq.max_depth())
        } else if !certified {
            format!("tail budget exceeded; {}", failed.join("; "))
        } else {
            failed.join("; ")
        };
        verdict(report.passed() && certified, detail)
    }

    /// `H(ν^m|μ^m)` is nondecreasing and bounded by `H(ν|μ)`.
    fn ladder(&self) -> Outcome {
        let ladder = entropy_ladder(&self.nu, &self.mu, &self.seq)?;
        let reference = match (&self.nu, &self.mu) {
            (SourceMeasure::Finite(a), SourceMeasure::Finite(b)) => Some(relative_entropy_integral(a, b)),
            (a, b) if !a.has_atoms() && !b.has_atoms() => {
                let lo = a.lower_quantile(1e-14)?.min(b.lower_quantile(1e-14)?);
                let hi = a.upper_quantile(1e-14)?.max(b.upper_quantile(1e-14)?);
                Some(kl_quadrature(a, b, lo, hi, 1e-10))
            }
            _ => None,
        };
        let monotone = ladder.is_monotone(LADDER_TOL);
        let bounded = reference.is_none_or(|h| ladder.values.iter().all(|&v| v <= h + 1e-9));
        let values: Vec<String> = ladder.values.iter().map(|v| format!("{v:.6}")).collect();
        let reference = reference.map_or("n/a".to_string(), |h| format!("{h:.6}"));
        verdict(monotone && bounded, format!("H_m = [{}]; H = {reference}", values.join(", ")))
    }

    /// Ball infima at radius `1/√m` never exceed `H(ν|μ)`.
    fn supinf(&self) -> Outcome {
        let (mu, nu) = self.fixture()?;
        let (_, depth) = self.cfg.depths()?;
        let seq = sequence(&mu, &self.space, depth)?;
        let ladder = supinf_ladder(&nu, &mu, &seq, 1)?;
        let values: Vec<String> = ladder.running_sup.iter().map(|v| format!("{v:.6}")).collect();
        verdict(ladder.below_entropy, format!("running sup = [{}]; H = {:.6}", values.join(", "), ladder.entropy))
    }

    fn exp_equivalence(&self) -> Outcome {
        let m = self.seq.max_depth().min(2);
        let r = exp_equivalence_check(&self.mu, &self.seq, self.n, m, self.reps, self.seed)?;
        verdict(
            r.passed,
            format!(
                "n = {}, m = {m}, {} reps: {} inequality violations, {} events (budget {:.3e}), max bad samples {}",
                r.n, r.reps, r.inequality_violations, r.events, r.budget, r.max_bad
            ),
        )
    }

    /// The projection coupling obeys the three-term bound at `θ = m`.
    fn bl_bound(&self) -> Outcome {
        let base = match self.mu.as_finite() {
            Some(fm) => fm.clone(),
            None => discretize(&self.mu, self.seq.at(self.seq.max_depth())?)?,
        };
        let source = SourceMeasure::Finite(base.clone());
        let seq = sequence(&source, &self.space, BOUND_DEPTH)?;
        let mut worst = f64::NEG_INFINITY;
        let mut failures = 0;
        for case in 0..BOUND_CASES {
            let mut rng = stream_rng(self.seed, replicate_stream(5, case));
            let scale = 0.5 + 2.5 * rng.random::<f64>();
            let w: Vec<f64> = base.weights().iter().map(|&p| p * (scale * (2.0 * rng.random::<f64>() - 1.0)).exp()).collect();
            let sigma = FiniteMeasure::normalized(base.support().to_vec(), w)?;
            let alpha = relative_entropy_integral(&sigma, &base);
            for m in 1..=BOUND_DEPTH {
                let d = projection_coupling_bound(&sigma, seq.at(m)?, &self.space)?;
                let three = projection_distance_bound(alpha, m, m as f64);
                let simple = (3.0 + 2.0 * alpha) / m as f64;
                worst = worst.max(d - three);
                if d > three + EXACT_TOL || d > simple + EXACT_TOL {
                    failures += 1;
                }
            }
        }
        verdict(failures == 0, format!("{BOUND_CASES} measures x depths 1..{BOUND_DEPTH}: {failures} violations; max coupling - bound = {worst:.3e}"))
    }

    fn martingale(&self) -> Outcome {
        let trace = match martingale_trace(&self.nu, &self.mu, &self.seq) {
            Ok(t) => t,
            Err(Error::Domain(msg)) => return Ok((Status::Skip, format!("nu is not absolutely continuous: {msg}"))),
            Err(e) => return Err(e.into()),
        };
        let mean_err = trace.means.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
        let tower = trace.tower_residuals.iter().cloned().fold(0.0, f64::max);
        let ui =
            trace.entropies.iter().zip(&trace.ladder).filter(|(a, b)| a.is_finite() || b.is_finite()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        verdict(
            mean_err <= EXACT_TOL && tower <= EXACT_TOL && ui <= EXACT_TOL,
            format!("max |E S - 1| = {mean_err:.3e}, tower residual {tower:.3e}, |E S log S - H_m| = {ui:.3e}"),
        )
    }

    fn chains(&self) -> CliResult<((Status, String), (Status, String))> {
        let f = self.cfg.finite.as_ref().expect("checked in run_suite");
        let (mu, nu) = self.fixture()?;
        if let Some(fm) = mu.as_finite() {
            let types = type_count(f.n, fm.len());
            if types > TYPES_GUARD {
                let skip = (Status::Skip, format!("types guard: {types} type classes at n = {} exceed {TYPES_GUARD}", f.n));
                return Ok((skip.clone(), skip));
            }
        }
        let seq = sequence(&mu, &self.space, f.m)?;
        let r = proposition_chain_check(&nu, &mu, &seq, f.n, f.eps, f.m, f.reps, self.seed)?;
        let side = |s: &ldp_core::harness::ChainSide| {
            let exact = s.exact.map_or(String::new(), |(a, b, c)| format!("; exact {a:.6e} <= {b:.6e} + {c:.6e}"));
            (
                if s.passed { Status::Pass } else { Status::Fail },
                format!(
                    "n = {}, m = {}, radius {:.4} -> {:.4}: hits {} <= {} + {}, containment failures {}{exact}",
                    r.n, r.m, s.left_radius, s.right_radius, s.left_hits, s.right_hits, s.far_hits, s.containment_failures
                ),
            )
        };
        Ok((side(&r.upper), side(&r.lower)))
    }
}

fn random_measure<R: Rng>(sampler: &ldp_core::measure::Sampler<f64>, rng: &mut R) -> CliResult<FiniteMeasure<f64>> {
    let k = rng.random_range(1..=5);
    let points: Vec<Point<f64>> = sampler.sample_n(k, rng)?;
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    Ok(FiniteMeasure::normalized(points, weights)?)
}

/// A north-west-corner coupling whose advance order is randomized.
fn random_coupling<R: Rng>(a: &FiniteMeasure<f64>, b: &FiniteMeasure<f64>, rng: &mut R) -> Vec<(Point<f64>, Point<f64>, f64)> {
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a.weights()[0], b.weights()[0]);
    let mut pairs = Vec::new();
    loop {
        let t = ra.min(rb);
        pairs.push((a.support()[i], b.support()[j], t));
        ra -= t;
        rb -= t;
        let next_a = ra <= 1e-15 && i + 1 < a.len();
        let next_b = rb <= 1e-15 && j + 1 < b.len();
        if !next_a && !next_b {
            break;
        }
        if next_a && (!next_b || rng.random::<bool>()) {
            i += 1;
            ra += a.weights()[i];
        } else {
            j += 1;
            rb += b.weights()[j];
        }
    }
    let total: f64 = pairs.iter().map(|p| p.2).sum();
    pairs.iter().map(|&(x, y, w)| (x, y, w / total)).collect()
}

/// Renders the suite; the flag is whether every check passed or skipped.
pub fn run(cfg: &ExperimentConfig) -> CliResult<(String, bool)> {
    let report = run_suite(cfg)?;
    Ok((report.render(cfg.format.unwrap_or(Format::Json))?, report.passed()))
}
