//! Information-theoretic lower-bound machinery: Gaussian KL divergences, the
//! Fano sample-size thresholds for DAG and undirected-graph recovery, the
//! one-edge ensembles, DAG counting, and the log-determinant of the
//! equicorrelated matrices that appear in the averaged-covariance argument.
//!
//! All logarithms are natural.

use alloc::vec::Vec;
use core::fmt;

use crate::covest::CovEstimate;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// `KL(N(0, Σ₀) ‖ N(0, Σ₁)) = ½ (tr(Σ₁⁻¹Σ₀) - d + log det Σ₁ - log det Σ₀)`.
pub fn gaussian_kl(s0: &CovEstimate, s1: &CovEstimate) -> Result<f64> {
    let d = s0.d();
    if s1.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: s1.d() });
    }
    let inv1 = linalg::spd_inverse(s1.matrix())?;
    let ld0 = linalg::spd_log_det(s0.matrix()).map_err(|_| Error::Singular)?;
    let ld1 = linalg::spd_log_det(s1.matrix()).map_err(|_| Error::Singular)?;
    let mut trace = 0.0;
    for i in 0..d {
        for j in 0..d {
            trace += inv1[(i, j)] * s0.get(j, i);
        }
    }
    Ok(0.5 * (trace - d as f64 + ld1 - ld0))
}

/// Covariance of the SEM whose only edge is `u -> v` with coefficient `beta`.
pub fn one_edge_covariance(d: usize, u: usize, v: usize, beta: f64, sigma2: f64) -> Result<CovEstimate> {
    if u >= d || v >= d {
        return Err(Error::NodeOutOfRange { node: u.max(v), d });
    }
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    let mut m = Matrix::identity(d).scale(sigma2);
    m[(u, v)] = beta * sigma2;
    m[(v, u)] = beta * sigma2;
    m[(v, v)] = sigma2 * (1.0 + beta * beta);
    CovEstimate::population(m)
}

/// How edge `j -> k` relates to the reference edge `u -> v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeRelation {
    /// `{j, k} ∩ {u, v} = ∅`
    Disjoint,
    /// `j = u, k ≠ v`
    SharedTail,
    /// `j ≠ u, k = v`
    SharedHead,
    /// `j = v, k = u`
    Reversal,
    /// `j = v, k ≠ u`
    HeadToTail,
    /// `j ≠ v, k = u`
    TailToHead,
}

impl EdgeRelation {
    pub const ALL: [EdgeRelation; 6] = [
        EdgeRelation::Disjoint,
        EdgeRelation::SharedTail,
        EdgeRelation::SharedHead,
        EdgeRelation::Reversal,
        EdgeRelation::HeadToTail,
        EdgeRelation::TailToHead,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EdgeRelation::Disjoint => "disjoint",
            EdgeRelation::SharedTail => "shared-tail",
            EdgeRelation::SharedHead => "shared-head",
            EdgeRelation::Reversal => "reversal",
            EdgeRelation::HeadToTail => "head-to-tail",
            EdgeRelation::TailToHead => "tail-to-head",
        }
    }

    /// A concrete `(j, k)` on 4 nodes with reference edge `0 -> 1`.
    pub fn witness(self) -> (usize, usize) {
        match self {
            EdgeRelation::Disjoint => (2, 3),
            EdgeRelation::SharedTail => (0, 2),
            EdgeRelation::SharedHead => (2, 1),
            EdgeRelation::Reversal => (1, 0),
            EdgeRelation::HeadToTail => (1, 2),
            EdgeRelation::TailToHead => (2, 0),
        }
    }

    /// The closed-form value published for this case. The reversal entry,
    /// `β² + β⁴/2 - β`, is negative for small `β` and disagrees with the
    /// exact divergence `β⁴/2` except at `β = 1`; it is reported as stated.
    pub fn published_kl(self, beta: f64) -> f64 {
        let b2 = beta * beta;
        match self {
            EdgeRelation::Disjoint | EdgeRelation::SharedTail | EdgeRelation::SharedHead | EdgeRelation::TailToHead => {
                b2
            }
            EdgeRelation::Reversal => b2 + b2 * b2 / 2.0 - beta,
            EdgeRelation::HeadToTail => b2 + b2 * b2 / 2.0,
        }
    }
}

impl fmt::Display for EdgeRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneEdgeEnsembleCase {
    pub case: EdgeRelation,
    pub paper_value: f64,
    pub oracle_value: f64,
    pub abs_diff: f64,
    pub matches: bool,
}

/// Tolerance for flagging a published value as mismatched.
pub const KL_MATCH_TOL: f64 = 1e-9;

/// `KL(F^{uv} ‖ F^{jk})` for all six edge relations, published value next
/// to the exact Gaussian divergence of the two covariances.
pub fn one_edge_kl_table(beta: f64, sigma2: f64) -> Result<Vec<OneEdgeEnsembleCase>> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive"));
    }
    let reference = one_edge_covariance(4, 0, 1, beta, sigma2)?;
    EdgeRelation::ALL
        .iter()
        .map(|&case| {
            let (j, k) = case.witness();
            let other = one_edge_covariance(4, j, k, beta, sigma2)?;
            let oracle_value = gaussian_kl(&reference, &other)?;
            let paper_value = case.published_kl(beta);
            let abs_diff = (paper_value - oracle_value).abs();
            Ok(OneEdgeEnsembleCase { case, paper_value, oracle_value, abs_diff, matches: abs_diff <= KL_MATCH_TOL })
        })
        .collect()
}

/// Parameters of the minimax lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsQuery {
    pub d: usize,
    pub q: usize,
    pub beta_min: f64,
    pub m: f64,
    pub delta: f64,
}

impl BoundsQuery {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidArgument("d must be at least 2"));
        }
        if self.q == 0 || 2 * self.q > self.d {
            return Err(Error::InvalidArgument("q must satisfy 1 <= q <= d/2"));
        }
        if !(self.beta_min > 0.0) {
            return Err(Error::InvalidArgument("beta_min must be positive"));
        }
        if !(self.m > 1.0) {
            return Err(Error::InvalidArgument("M must exceed 1"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::InvalidArgument("delta must lie in (0, 1/2)"));
        }
        Ok(())
    }

    fn sparsity_term(&self) -> f64 {
        let (d, q) = (self.d as f64, self.q as f64);
        q * libm::log(d / q) / (self.m * self.m - 1.0)
    }

    fn signal_term(&self) -> f64 {
        libm::log(self.d as f64) / (self.beta_min * self.beta_min)
    }
}

/// Sample size below which every DAG estimator is δ-unreliable:
/// `(1 - 2δ) max(log d / β_min², q log(d/q) / (M² - 1))`.
pub fn fano_threshold_dag(bq: &BoundsQuery) -> Result<f64> {
    bq.validate()?;
    Ok((1.0 - 2.0 * bq.delta) * bq.signal_term().max(bq.sparsity_term()))
}

/// Undirected counterpart:
/// `max(2(1 - δ) log d / β_min², (1 - 2δ) q log(d/q) / (M² - 1))`.
pub fn fano_threshold_ug(bq: &BoundsQuery) -> Result<f64> {
    bq.validate()?;
    Ok((2.0 * (1.0 - bq.delta) * bq.signal_term()).max((1.0 - 2.0 * bq.delta) * bq.sparsity_term()))
}

/// Largest `d` accepted by [`count_dags_exact`].
pub const COUNT_DAGS_MAX_D: usize = 5;

/// Number of labeled DAGs on `d` nodes with in-degree at most `q`, by
/// enumerating all `2^(d(d-1))` directed graphs.
pub fn count_dags_exact(d: usize, q: usize) -> Result<u64> {
    if d > COUNT_DAGS_MAX_D {
        return Err(Error::TooLarge { d, limit: COUNT_DAGS_MAX_D });
    }
    let slots: Vec<(usize, usize)> =
        (0..d).flat_map(|u| (0..d).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    let mut count = 0u64;
    let mut parents = [0u32; COUNT_DAGS_MAX_D];
    for mask in 0u64..(1u64 << slots.len()) {
        parents[..d].iter_mut().for_each(|p| *p = 0);
        for (bit, &(u, v)) in slots.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                parents[v] |= 1 << u;
            }
        }
        if parents[..d].iter().any(|p| p.count_ones() as usize > q) {
            continue;
        }
        if is_acyclic(&parents[..d]) {
            count += 1;
        }
    }
    Ok(count)
}

/// Peels off nodes whose parents are all removed; acyclic iff everything peels.
fn is_acyclic(parents: &[u32]) -> bool {
    let full = (1u32 << parents.len()) - 1;
    let mut removed = 0u32;
    loop {
        let ready = (0..parents.len())
            .filter(|&v| removed >> v & 1 == 0 && parents[v] & !removed == 0)
            .fold(0u32, |acc, v| acc | 1 << v);
        if ready == 0 {
            return removed == full;
        }
        removed |= ready;
    }
}

/// Log-size of the layered family of in-degree-`q` DAGs:
/// `(q(q+1)/2) · log(⌊d/(q+1)⌋!)`. Leftover nodes are discarded.
pub fn count_dags_construction_lower(d: usize, q: usize) -> Result<f64> {
    if q + 1 > d {
        return Err(Error::InvalidArgument("construction needs q + 1 <= d"));
    }
    let group = d / (q + 1);
    let log_fact: f64 = (2..=group).map(|i| libm::log(i as f64)).sum();
    Ok((q * (q + 1)) as f64 / 2.0 * log_fact)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredLogDet {
    pub exact: f64,
    /// First-order approximation `p · a`.
    pub approx: f64,
}

/// `log det` of the `p × p` matrix with `1 + a` on the diagonal and `b`
/// elsewhere: `(p-1) log(1+a-b) + log(1+a+(p-1)b)`.
pub fn structured_logdet(p: usize, a: f64, b: f64) -> Result<StructuredLogDet> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1"));
    }
    let lo = 1.0 + a - b;
    let hi = 1.0 + a + (p as f64 - 1.0) * b;
    if !(lo > 0.0 && hi > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let exact = (p as f64 - 1.0) * libm::log1p(a - b) + libm::log(hi);
    Ok(StructuredLogDet { exact, approx: p as f64 * a })
}

/// The equicorrelated matrix behind [`structured_logdet`].
pub fn structured_matrix(p: usize, a: f64, b: f64) -> Matrix {
    let mut m = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] = if i == j { 1.0 + a } else { b };
        }
    }
    m
}

/// Average of the `d(d-1)` one-edge covariances with coefficient `beta`:
/// `σ²(1 + β²/d)` on the diagonal and `σ² · 2β/(d(d-1))` off it. Returns the
/// matrix and its log-determinant.
pub fn ggm_one_edge_ensemble_avg(d: usize, beta: f64, sigma2: f64) -> Result<(CovEstimate, f64)> {
    if d < 2 {
        return Err(Error::InvalidArgument("d must be at least 2"));
    }
    let df = d as f64;
    let a = beta * beta / df;
    let b = 2.0 * beta / (df * (df - 1.0));
    let avg = CovEstimate::population(structured_matrix(d, a, b).scale(sigma2))?;
    let logdet = structured_logdet(d, a, b)?.exact + df * libm::log(sigma2);
    Ok((avg, logdet))
}
