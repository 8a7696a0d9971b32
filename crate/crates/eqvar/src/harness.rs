//! Simulation sweeps over `(d, q, n)` estimating the exact-recovery probability.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use eqvar_core::covest::sample_cov;
use eqvar_core::learner::learn_dag;
use eqvar_core::rng::stream;
use eqvar_core::sem::RandomModelSpec;
use eqvar_core::{Gamma, LearnerConfig, SemModel};
use rayon::prelude::*;
use thiserror::Error;

/// Stream tags so that model and data draws never share a stream.
const TAG_MODEL: u64 = 0x006d_6f64_656c;
const TAG_DATA: u64 = 0x6461_7461;

pub const RESULTS_HEADER: &str = "d,q,n,reps,successes,errors,recovery_rate,mean_ms,seed";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("gamma must be a positive number, `auto` or `pop`, got {0:?}")]
    Gamma(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaMode {
    Fixed(f64),
    Auto,
    /// Half the generating model's variance gap; only available in simulation.
    PopulationHalfGap,
}

impl FromStr for GammaMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "auto" => Ok(GammaMode::Auto),
            "pop" | "population" => Ok(GammaMode::PopulationHalfGap),
            other => match other.parse::<f64>() {
                Ok(g) if g > 0.0 && g.is_finite() => Ok(GammaMode::Fixed(g)),
                _ => Err(HarnessError::Gamma(s.to_owned())),
            },
        }
    }
}

impl fmt::Display for GammaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaMode::Fixed(g) => write!(f, "{g}"),
            GammaMode::Auto => f.write_str("auto"),
            GammaMode::PopulationHalfGap => f.write_str("pop"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub d_grid: Vec<usize>,
    pub q_grid: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub sigma: f64,
    pub beta_low: f64,
    pub beta_high: f64,
    pub gamma_mode: GammaMode,
    pub tuning_constant: f64,
    pub seed: u64,
    pub center: bool,
    /// Worker count; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Wall-clock timing makes `mean_ms` the one column that varies between runs.
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            d_grid: vec![20],
            q_grid: vec![2],
            n_grid: vec![80, 160, 240, 320, 400, 480, 560],
            reps: 100,
            sigma: 0.3,
            beta_low: 0.5,
            beta_high: 1.0,
            gamma_mode: GammaMode::Auto,
            tuning_constant: 1.0,
            seed: 0,
            center: false,
            threads: None,
            record_timing: true,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Spec(m.to_owned()));
        if self.d_grid.is_empty() || self.q_grid.is_empty() || self.n_grid.is_empty() {
            return bad("grids must be nonempty");
        }
        if self.reps == 0 {
            return bad("reps must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        if !(self.tuning_constant > 0.0 && self.tuning_constant.is_finite()) {
            return bad("tuning constant must be positive");
        }
        for &d in &self.d_grid {
            for &q in &self.q_grid {
                self.model_spec(d, q).validate().map_err(|e| HarnessError::Spec(format!("d={d}, q={q}: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn model_spec(&self, d: usize, q: usize) -> RandomModelSpec {
        RandomModelSpec { d, q, sigma: self.sigma, beta_low: self.beta_low, beta_high: self.beta_high }
    }

    fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for &d in &self.d_grid {
            for &q in &self.q_grid {
                for &n in &self.n_grid {
                    out.push((d, q, n));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub d: usize,
    pub q: usize,
    pub n: usize,
    pub reps: usize,
    pub successes: usize,
    pub errors: usize,
    pub recovery_rate: f64,
    pub mean_ms: Option<f64>,
    pub seed: u64,
}

impl CellResult {
    /// Binomial standard error of the recovery rate.
    pub fn std_error(&self) -> f64 {
        let p = self.recovery_rate;
        (p * (1.0 - p) / self.reps as f64).sqrt()
    }

    fn csv_row(&self) -> String {
        let ms = self.mean_ms.map(|m| format!("{m:.3}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.4},{},{}",
            self.d, self.q, self.n, self.reps, self.successes, self.errors, self.recovery_rate, ms, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFailure {
    pub d: usize,
    pub q: usize,
    pub n: usize,
    pub rep: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
    /// Replicates that raised an error rather than returning a graph.
    pub failures: Vec<ReplicateFailure>,
}

impl ExperimentResult {
    pub fn cell(&self, d: usize, q: usize, n: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| (c.d, c.q, c.n) == (d, q, n))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{RESULTS_HEADER}")?;
        for c in &self.cells {
            writeln!(w, "{}", c.csv_row())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn write_csv_file(&self, path: &Path) -> std::io::Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// The model for replicate `rep` of a `(d, q)` cell. It does not depend on `n`,
/// so curves over `n` are paired comparisons on the same graphs.
pub fn replicate_model(spec: &ExperimentSpec, d: usize, q: usize, rep: usize) -> eqvar_core::Result<SemModel> {
    let mut rng = stream(spec.seed, &[TAG_MODEL, d as u64, q as u64, rep as u64]);
    spec.model_spec(d, q).generate_with(&mut rng)
}

enum Outcome {
    Recovered(bool),
    Failed(String),
}

fn run_replicate(spec: &ExperimentSpec, d: usize, q: usize, n: usize, rep: usize) -> Outcome {
    let attempt = || -> Result<bool, String> {
        let model = replicate_model(spec, d, q, rep).map_err(|e| format!("model: {e}"))?;
        if model.weighted_dag().max_in_degree() > q
            || model.weighted_dag().beta_min().is_some_and(|b| b < spec.beta_low)
        {
            return Err("generated model violates the in-degree or coefficient bounds".into());
        }
        let mut rng = stream(spec.seed, &[TAG_DATA, d as u64, q as u64, n as u64, rep as u64]);
        let data = model.sample_with(n, &mut rng);
        let cov = sample_cov(&data, spec.center).map_err(|e| format!("covariance: {e}"))?;
        let gamma = match spec.gamma_mode {
            GammaMode::Fixed(g) => Gamma::Fixed(g),
            GammaMode::Auto => Gamma::Auto,
            GammaMode::PopulationHalfGap => match model.variance_gap() {
                Ok(gap) => Gamma::Fixed(gap / 2.0),
                // Edgeless model: any positive threshold is equally valid.
                Err(_) => Gamma::Fixed(f64::MIN_POSITIVE),
            },
        };
        let cfg = LearnerConfig { tuning_constant: spec.tuning_constant, ..LearnerConfig::new(q, gamma) };
        let learned = learn_dag(&cov, &cfg).map_err(|e| format!("learner: {e}"))?;
        Ok(learned.dag == *model.dag())
    };
    match attempt() {
        Ok(ok) => Outcome::Recovered(ok),
        Err(reason) => Outcome::Failed(reason),
    }
}

/// Runs every `(cell, replicate)` pair on a bounded pool. Output does not
/// depend on the worker count apart from `mean_ms`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, HarnessError> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..spec.reps).map(move |r| (c, r))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = spec.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let outcomes: Vec<(Outcome, f64)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| {
                let (d, q, n) = cells[c];
                let start = Instant::now();
                let out = run_replicate(spec, d, q, n, r);
                (out, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });

    let mut result = ExperimentResult::default();
    for (c, &(d, q, n)) in cells.iter().enumerate() {
        let chunk = &outcomes[c * spec.reps..(c + 1) * spec.reps];
        let mut successes = 0;
        let mut errors = 0;
        let mut total_ms = 0.0;
        for (r, (out, ms)) in chunk.iter().enumerate() {
            total_ms += ms;
            match out {
                Outcome::Recovered(true) => successes += 1,
                Outcome::Recovered(false) => {}
                Outcome::Failed(reason) => {
                    errors += 1;
                    result.failures.push(ReplicateFailure { d, q, n, rep: r, reason: reason.clone() });
                }
            }
        }
        result.cells.push(CellResult {
            d,
            q,
            n,
            reps: spec.reps,
            successes,
            errors,
            recovery_rate: successes as f64 / spec.reps as f64,
            mean_ms: spec.record_timing.then(|| total_ms / spec.reps as f64),
            seed: spec.seed,
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_mode_parsing() {
        assert_eq!("auto".parse::<GammaMode>().unwrap(), GammaMode::Auto);
        assert_eq!("pop".parse::<GammaMode>().unwrap(), GammaMode::PopulationHalfGap);
        assert_eq!("0.25".parse::<GammaMode>().unwrap(), GammaMode::Fixed(0.25));
        for bad in ["0", "-1", "inf", "nan", "often"] {
            assert!(bad.parse::<GammaMode>().is_err(), "{bad}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let ok = ExperimentSpec { d_grid: vec![6], q_grid: vec![2], n_grid: vec![50], reps: 2, ..Default::default() };
        assert!(ok.validate().is_ok());
        assert!(ExperimentSpec { n_grid: vec![], ..ok.clone() }.validate().is_err());
        assert!(ExperimentSpec { reps: 0, ..ok.clone() }.validate().is_err());
        assert!(ExperimentSpec { q_grid: vec![4], ..ok.clone() }.validate().is_err());
        assert!(ExperimentSpec { beta_low: 2.0, ..ok.clone() }.validate().is_err());
        assert!(ExperimentSpec { threads: Some(0), ..ok }.validate().is_err());
    }

    #[test]
    fn models_do_not_depend_on_sample_size_or_grid() {
        let a = ExperimentSpec { seed: 5, ..Default::default() };
        let b = ExperimentSpec { d_grid: vec![10, 20, 30], seed: 5, ..Default::default() };
        assert_eq!(replicate_model(&a, 20, 2, 3).unwrap(), replicate_model(&b, 20, 2, 3).unwrap());
        assert_ne!(replicate_model(&a, 20, 2, 3).unwrap(), replicate_model(&a, 20, 2, 4).unwrap());
    }

    #[test]
    fn csv_header_is_stable() {
        let r = ExperimentResult {
            cells: vec![CellResult {
                d: 5,
                q: 2,
                n: 10,
                reps: 4,
                successes: 3,
                errors: 1,
                recovery_rate: 0.75,
                mean_ms: None,
                seed: 9,
            }],
            failures: vec![],
        };
        assert_eq!(
            r.to_csv_string(),
            "d,q,n,reps,successes,errors,recovery_rate,mean_ms,seed\n5,2,10,4,3,1,0.7500,,9\n"
        );
    }
}
