//! DAG learning under equal error variances.
//!
//! Ordering phase: repeatedly append the unplaced node whose best-subset
//! conditional variance (over conditioning sets of size `<= q` drawn from the
//! nodes placed so far) is smallest. Parent phase: for each node take the
//! minimizing set `C_j` and drop every member whose removal changes the
//! conditional variance by at most `γ`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::covest::{CovEstimate, TIE_RTOL};
use crate::error::{Error, Result};
use crate::graph::{Dag, Ordering, UndirectedGraph};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Fixed(f64),
    /// `c · 2 M̂⁵ q log(d/q) / n` with `M̂` estimated from the input covariance.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    LowestIndex,
    Randomized(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    pub q: usize,
    pub gamma: Gamma,
    pub tuning_constant: f64,
    pub tie_break: TieBreak,
    /// Recompute `C_j` in the parent phase instead of reusing the set found
    /// when the node was placed.
    pub recompute_candidates: bool,
}

impl LearnerConfig {
    pub fn new(q: usize, gamma: Gamma) -> Self {
        Self { q, gamma, tuning_constant: 1.0, tie_break: TieBreak::LowestIndex, recompute_candidates: false }
    }

    pub fn with_gamma(q: usize, gamma: f64) -> Self {
        Self::new(q, Gamma::Fixed(gamma))
    }

    pub fn validate(&self) -> Result<()> {
        if let Gamma::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument("gamma must be positive"));
            }
        }
        if !(self.tuning_constant > 0.0 && self.tuning_constant.is_finite()) {
            return Err(Error::InvalidArgument("tuning constant must be positive"));
        }
        Ok(())
    }
}

/// Output of the ordering phase.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingPhase {
    pub ordering: Ordering,
    /// `candidate_sets[v]`: minimizing conditioning set of node `v` at the step it was placed.
    pub candidate_sets: Vec<Vec<usize>>,
    /// `sigma[j]`: the winning conditional variance at step `j`.
    pub sigma: Vec<f64>,
    pub singular_skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub ordering: Ordering,
    pub dag: Dag,
    pub candidate_sets: Vec<Vec<usize>>,
    pub sigma: Vec<f64>,
    pub gamma: f64,
    pub singular_skipped: usize,
}

pub fn learn_ordering(c: &CovEstimate, cfg: &LearnerConfig) -> Result<OrderingPhase> {
    let d = c.d();
    if d == 0 {
        return Err(Error::EmptyData);
    }
    let mut rng = match cfg.tie_break {
        TieBreak::Randomized(seed) => Some(rng::stream(seed, &[0x7469_6562])),
        TieBreak::LowestIndex => None,
    };
    let scale = c.matrix().diag().into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TIE_RTOL * scale.max(f64::MIN_POSITIVE);

    let mut placed: Vec<usize> = Vec::with_capacity(d);
    let mut is_placed = vec![false; d];
    let mut candidate_sets = vec![Vec::new(); d];
    let mut sigma = Vec::with_capacity(d);
    let mut skipped = 0;
    for _ in 0..d {
        let mut scores = Vec::with_capacity(d - placed.len());
        for k in (0..d).filter(|&k| !is_placed[k]) {
            let r = c.min_cond_var(k, &placed, cfg.q)?;
            skipped += r.singular_skipped;
            scores.push((k, r.value, r.set));
        }
        let best = scores.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].1 <= best + tol).collect();
        let pick = match rng.as_mut() {
            Some(r) if tied.len() > 1 => tied[r.random_range(0..tied.len())],
            _ => tied[0],
        };
        let (k, value, set) = scores.swap_remove(pick);
        is_placed[k] = true;
        placed.push(k);
        candidate_sets[k] = set;
        sigma.push(value);
    }
    Ok(OrderingPhase { ordering: Ordering::new(placed)?, candidate_sets, sigma, singular_skipped: skipped })
}

/// Parent phase. With `candidate_sets = None` every `C_j` is recomputed as
/// the best subset of the node's predecessors in `ordering`.
pub fn learn_parents(
    c: &CovEstimate,
    ordering: &Ordering,
    candidate_sets: Option<&[Vec<usize>]>,
    q: usize,
    gamma: f64,
) -> Result<Dag> {
    let d = c.d();
    if ordering.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: ordering.len() });
    }
    let order = ordering.as_slice();
    let mut parent_sets = vec![Vec::new(); d];
    for (j, &k) in order.iter().enumerate() {
        let cj = match candidate_sets {
            Some(sets) => sets[k].clone(),
            None => c.min_cond_var(k, &order[..j], q)?.set,
        };
        if cj.is_empty() {
            continue;
        }
        let full = c.cond_var(k, &cj)?;
        let mut without = Vec::with_capacity(cj.len() - 1);
        for (idx, &i) in cj.iter().enumerate() {
            without.clear();
            without.extend(cj.iter().enumerate().filter(|&(t, _)| t != idx).map(|(_, &v)| v));
            let change = match c.cond_var(k, &without) {
                Ok(v) => (full - v).abs(),
                Err(Error::SingularBlock) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if change > gamma {
                parent_sets[k].push(i);
            }
        }
    }
    Dag::from_parent_sets(&parent_sets)
}

/// `c · 2 M⁵ q ln(d/q) / n`.
pub fn gamma_formula(m: f64, q: f64, d: f64, n: f64, tuning_constant: f64) -> f64 {
    tuning_constant * 2.0 * libm::pow(m, 5.0) * q * libm::log(d / q) / n
}

/// Threshold `γ` with `M` replaced by the spectral estimate `M̂` of `c`.
pub fn tune_gamma(c: &CovEstimate, q: usize, d: usize, n: usize, tuning_constant: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1"));
    }
    if q == 0 || q >= d {
        return Err(Error::InvalidArgument("tuning requires 1 <= q < d"));
    }
    let m_hat = c.spectral_bounds().m_hat;
    Ok(gamma_formula(m_hat, q as f64, d as f64, n as f64, tuning_constant))
}

fn resolve_gamma(c: &CovEstimate, cfg: &LearnerConfig) -> Result<f64> {
    match cfg.gamma {
        Gamma::Fixed(g) => Ok(g),
        Gamma::Auto => {
            let n = c.n().ok_or(Error::InvalidArgument("automatic gamma needs a sample covariance"))?;
            tune_gamma(c, cfg.q, c.d(), n, cfg.tuning_constant)
        }
    }
}

/// Ordering phase followed by the parent phase.
pub fn learn_dag(c: &CovEstimate, cfg: &LearnerConfig) -> Result<LearnResult> {
    cfg.validate()?;
    let gamma = if c.d() == 1 { resolve_gamma(c, cfg).unwrap_or(0.0) } else { resolve_gamma(c, cfg)? };
    let phase = learn_ordering(c, cfg)?;
    let cached = (!cfg.recompute_candidates).then_some(phase.candidate_sets.as_slice());
    let dag = learn_parents(c, &phase.ordering, cached, cfg.q, gamma)?;
    Ok(LearnResult {
        ordering: phase.ordering,
        dag,
        candidate_sets: phase.candidate_sets,
        sigma: phase.sigma,
        gamma,
        singular_skipped: phase.singular_skipped,
    })
}

/// Moral graph of the learned DAG.
pub fn learn_ug(c: &CovEstimate, cfg: &LearnerConfig) -> Result<UndirectedGraph> {
    Ok(learn_dag(c, cfg)?.dag.moralize())
}
