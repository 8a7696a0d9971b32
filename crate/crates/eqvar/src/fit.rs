//! Learning a DAG from a CSV of observations.

use std::path::Path;

use eqvar_core::covest::sample_cov;
use eqvar_core::learner::learn_dag;
use eqvar_core::{Gamma, LearnResult, LearnerConfig, Matrix};
use thiserror::Error;

use crate::harness::GammaMode;
use crate::io::{self, FormatError};

#[derive(Debug, Error)]
pub enum FitError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Learn(#[from] eqvar_core::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub q: usize,
    pub gamma: GammaMode,
    pub tuning_constant: f64,
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub result: LearnResult,
    pub warnings: Vec<String>,
}

pub fn fit_matrix(data: &Matrix, opts: &FitOptions) -> Result<FitOutput, FitError> {
    let (n, d) = (data.rows(), data.cols());
    if d < 2 {
        return Err(FitError::Argument(format!("need at least 2 columns, found {d}")));
    }
    if opts.q == 0 || opts.q >= d || 2 * opts.q > d {
        return Err(FitError::Argument(format!("q = {} must satisfy 1 <= q <= d/2 with d = {d}", opts.q)));
    }
    let gamma = match opts.gamma {
        GammaMode::Fixed(g) => Gamma::Fixed(g),
        GammaMode::Auto => Gamma::Auto,
        GammaMode::PopulationHalfGap => {
            return Err(FitError::Argument("gamma `pop` needs the generating model; use a number or `auto`".into()))
        }
    };
    let mut warnings = Vec::new();
    if n < 2 {
        warnings.push(format!("only {n} observation(s); the sample covariance has rank at most 1"));
    }
    let cov = sample_cov(data, opts.center)?;
    let cfg = LearnerConfig { tuning_constant: opts.tuning_constant, ..LearnerConfig::new(opts.q, gamma) };
    Ok(FitOutput { result: learn_dag(&cov, &cfg)?, warnings })
}

pub fn fit_from_file(path: &Path, opts: &FitOptions) -> Result<FitOutput, FitError> {
    fit_matrix(&io::read_data(path)?, opts)
}
