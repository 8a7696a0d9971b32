//! Linear structural equation models `X = BᵀX + ε` with a shared noise
//! variance `σ²` on every node.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::covest::{CovEstimate, CovOrigin};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::linalg::{self, Matrix};
use crate::rng;

/// Coefficient matrix `B` (`B[(j, k)]` is the weight of `j -> k`) together
/// with the DAG formed by its support.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDag {
    weights: Matrix,
    dag: Dag,
}

impl WeightedDag {
    /// From `(parent, child, coefficient)` triples. Zero coefficients are
    /// dropped so that the graph is always the support of `B`.
    pub fn from_edges(d: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = Matrix::zeros(d, d);
        let mut support = Vec::with_capacity(edges.len());
        for &(j, k, beta) in edges {
            if j >= d || k >= d {
                return Err(Error::NodeOutOfRange { node: j.max(k), d });
            }
            if !beta.is_finite() {
                return Err(Error::InvalidArgument("edge coefficient must be finite"));
            }
            if beta != 0.0 {
                support.push((j, k));
                weights[(j, k)] = beta;
            }
        }
        let dag = Dag::new(d, &support)?;
        Ok(Self { weights, dag })
    }

    pub fn from_matrix(weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::DimensionMismatch { expected: weights.rows(), got: weights.cols() });
        }
        let d = weights.rows();
        let mut support = Vec::new();
        for j in 0..d {
            for k in 0..d {
                if weights[(j, k)] != 0.0 {
                    support.push((j, k));
                }
            }
        }
        let dag = Dag::new(d, &support)?;
        Ok(Self { weights, dag })
    }

    pub fn empty(d: usize) -> Self {
        Self { weights: Matrix::zeros(d, d), dag: Dag::empty(d) }
    }

    pub fn d(&self) -> usize {
        self.dag.d()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, j: usize, k: usize) -> f64 {
        self.weights[(j, k)]
    }

    /// `(parent, child, coefficient)` for every edge, sorted by `(parent, child)`.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        self.dag.edges().into_iter().map(|(j, k)| (j, k, self.weights[(j, k)])).collect()
    }

    /// Smallest nonzero coefficient magnitude; `None` without edges.
    pub fn beta_min(&self) -> Option<f64> {
        self.weighted_edges().into_iter().map(|(_, _, b)| b.abs()).reduce(f64::min)
    }

    pub fn max_in_degree(&self) -> usize {
        self.dag.max_in_degree()
    }

    /// `(I - B)⁻¹`, filled in reverse topological order from `T = I + B T`.
    fn inverse_i_minus_b(&self) -> Result<Matrix> {
        let d = self.d();
        let order = self.dag.topological_order();
        let mut t = Matrix::zeros(d, d);
        for &j in order.as_slice().iter().rev() {
            let mut row = vec![0.0; d];
            row[j] = 1.0;
            for &k in self.dag.children(j)? {
                let b = self.weights[(j, k)];
                for (r, &tk) in row.iter_mut().zip(t.row(k)) {
                    *r += b * tk;
                }
            }
            t.row_mut(j).copy_from_slice(&row);
        }
        if t.as_slice().iter().all(|v| v.is_finite()) {
            Ok(t)
        } else {
            Err(Error::Singular)
        }
    }
}

/// Equal-variance linear Gaussian SEM.
#[derive(Debug, Clone, PartialEq)]
pub struct SemModel {
    weighted_dag: WeightedDag,
    sigma2: f64,
}

impl SemModel {
    pub fn new(weighted_dag: WeightedDag, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument("noise variance must be positive"));
        }
        Ok(Self { weighted_dag, sigma2 })
    }

    pub fn d(&self) -> usize {
        self.weighted_dag.d()
    }

    pub fn weighted_dag(&self) -> &WeightedDag {
        &self.weighted_dag
    }

    pub fn dag(&self) -> &Dag {
        self.weighted_dag.dag()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Population covariance `σ² (I-B)⁻ᵀ (I-B)⁻¹`.
    pub fn covariance(&self) -> Result<CovEstimate> {
        let t = self.weighted_dag.inverse_i_minus_b()?;
        let sigma = t.transpose().matmul(&t)?.scale(self.sigma2);
        CovEstimate::new(sigma, CovOrigin::Population)
    }

    /// Identifiability gap `Δ = β_min² σ²`.
    pub fn variance_gap(&self) -> Result<f64> {
        let b = self.weighted_dag.beta_min().ok_or(Error::NoEdges)?;
        Ok(b * b * self.sigma2)
    }

    /// Draws `n` i.i.d. observations by ancestral sampling; row `i` is observation `i`.
    pub fn sample(&self, n: usize, seed: u64) -> Matrix {
        self.sample_with(n, &mut rng::stream(seed, &[]))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Matrix {
        let d = self.d();
        let sigma = libm::sqrt(self.sigma2);
        let order = self.dag().topological_order();
        let parents: Vec<Vec<(usize, f64)>> = (0..d)
            .map(|k| self.dag().parents(k).unwrap().iter().map(|&p| (p, self.weighted_dag.weight(p, k))).collect())
            .collect();
        let mut out = Matrix::zeros(n, d);
        for i in 0..n {
            let row = out.row_mut(i);
            for &k in order.as_slice() {
                let z: f64 = rng.sample(StandardNormal);
                let mean: f64 = parents[k].iter().map(|&(p, b)| b * row[p]).sum();
                row[k] = mean + sigma * z;
            }
        }
        out
    }

    /// Checks that the support of `Γ = Σ⁻¹` is exactly the moral graph of
    /// the DAG: `Γ_ij = 0` iff `β_ij = β_ji = 0` and `β_ik β_jk = 0` for all `k`.
    pub fn check_condition_moral(&self) -> Result<bool> {
        let gamma = linalg::spd_inverse(self.covariance()?.matrix())?;
        let tol = MORAL_ZERO_RTOL * gamma.max_abs();
        let b = self.weighted_dag.weights();
        let d = self.d();
        for i in 0..d {
            for j in i + 1..d {
                let gamma_zero = gamma[(i, j)].abs() <= tol;
                let structurally_zero =
                    b[(i, j)] == 0.0 && b[(j, i)] == 0.0 && (0..d).all(|k| b[(i, k)] * b[(j, k)] == 0.0);
                if gamma_zero != structurally_zero {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Relative zero threshold for precision-matrix entries.
pub const MORAL_ZERO_RTOL: f64 = 1e-8;

/// Random model generator: a uniformly random node order, each node taking
/// `min(q, position)` parents drawn uniformly from its predecessors, with
/// coefficients `±Unif(beta_low, beta_high)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModelSpec {
    pub d: usize,
    pub q: usize,
    pub sigma: f64,
    pub beta_low: f64,
    pub beta_high: f64,
}

impl RandomModelSpec {
    /// Defaults used in the simulation study: `σ = 0.3`, `|β| ∈ [0.5, 1]`.
    pub fn new(d: usize, q: usize) -> Self {
        Self { d, q, sigma: 0.3, beta_low: 0.5, beta_high: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1"));
        }
        if self.d > 1 && (self.q == 0 || 2 * self.q > self.d) {
            return Err(Error::InvalidArgument("in-degree q must satisfy 1 <= q <= d/2"));
        }
        if !(self.beta_low > 0.0 && self.beta_low <= self.beta_high && self.beta_high.is_finite()) {
            return Err(Error::InvalidArgument("coefficient range must satisfy 0 < beta_low <= beta_high"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument("sigma must be positive"));
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<SemModel> {
        self.generate_with(&mut rng::stream(seed, &[]))
    }

    pub fn generate_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SemModel> {
        self.validate()?;
        let d = self.d;
        let mut tau: Vec<usize> = (0..d).collect();
        tau.shuffle(rng);
        let mut edges = Vec::new();
        for j in 1..d {
            let k = tau[j];
            for i in index::sample(rng, j, self.q.min(j)) {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let magnitude = rng.random_range(self.beta_low..=self.beta_high);
                edges.push((tau[i], k, sign * magnitude));
            }
        }
        SemModel::new(WeightedDag::from_edges(d, &edges)?, self.sigma * self.sigma)
    }
}

/// Convenience wrapper over [`RandomModelSpec`].
pub fn random_model(d: usize, q: usize, seed: u64, sigma: f64, beta_low: f64, beta_high: f64) -> Result<SemModel> {
    RandomModelSpec { d, q, sigma, beta_low, beta_high }.generate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covest::sample_cov;

    fn model(d: usize, edges: &[(usize, usize, f64)], sigma2: f64) -> SemModel {
        SemModel::new(WeightedDag::from_edges(d, edges).unwrap(), sigma2).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let m = model(3, &[], 1.0);
        assert_eq!(m.covariance().unwrap().matrix(), &Matrix::identity(3));

        let beta = 0.7;
        let m = model(2, &[(0, 1, beta)], 1.0);
        let expect = Matrix::from_rows(&[[1.0, beta], [beta, 1.0 + beta * beta]]).unwrap();
        assert!(m.covariance().unwrap().matrix().max_abs_diff(&expect) < 1e-15);

        let m = model(3, &[(0, 1, 1.0), (1, 2, 1.0)], 1.0);
        let expect = Matrix::from_rows(&[[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 2.0, 3.0]]).unwrap();
        assert!(m.covariance().unwrap().matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn covariance_is_spd() {
        for seed in 0..50 {
            let m = random_model(10, 3, seed, 0.3, 0.5, 1.0).unwrap();
            let c = m.covariance().unwrap();
            assert!(c.matrix().is_symmetric(1e-12));
            assert!(linalg::cholesky(c.matrix(), 1e-12).is_ok());
        }
    }

    #[test]
    fn variance_gap_examples() {
        assert!((model(3, &[(0, 1, 0.5), (1, 2, 0.9)], 0.09).variance_gap().unwrap() - 0.0225).abs() < 1e-15);
        assert_eq!(model(2, &[(0, 1, -1.0)], 1.0).variance_gap().unwrap(), 1.0);
        assert!((model(2, &[(0, 1, 0.7)], 2.0).variance_gap().unwrap() - 0.98).abs() < 1e-15);
        assert_eq!(model(3, &[], 1.0).variance_gap(), Err(Error::NoEdges));
    }

    #[test]
    fn invalid_models() {
        assert!(SemModel::new(WeightedDag::empty(2), 0.0).is_err());
        assert!(matches!(WeightedDag::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]), Err(Error::Cyclic)));
        assert!(random_model(10, 6, 0, 0.3, 0.5, 1.0).is_err());
        assert!(random_model(10, 0, 0, 0.3, 0.5, 1.0).is_err());
        assert!(random_model(10, 2, 0, 0.3, 0.0, 1.0).is_err());
        assert!(random_model(10, 2, 0, 0.3, 1.0, 0.5).is_err());
    }

    #[test]
    fn random_model_shapes() {
        let m = random_model(1, 3, 9, 0.3, 0.5, 1.0).unwrap();
        assert_eq!(m.dag().edge_count(), 0);

        for seed in 0..100 {
            let m = random_model(5, 2, seed, 0.3, 0.5, 1.0).unwrap();
            assert_eq!(m.dag().max_in_degree(), 2);
            let mut counts: Vec<usize> = (0..5).map(|k| m.dag().parents(k).unwrap().len()).collect();
            counts.sort_unstable();
            // τ_1, τ_2 have 0 and 1 parents; everyone after has exactly q = 2
            assert_eq!(counts, vec![0, 1, 2, 2, 2]);
        }
    }

    #[test]
    fn random_model_coefficient_range() {
        let mut signs = [0usize; 2];
        for seed in 0..10_000 {
            let m = random_model(20, 2, seed, 0.3, 0.5, 1.0).unwrap();
            assert!(m.dag().max_in_degree() <= 2);
            assert!((m.sigma2() - 0.09).abs() < 1e-15);
            for (_, _, b) in m.weighted_dag().weighted_edges() {
                assert!((0.5..=1.0).contains(&b.abs()), "coefficient {b}");
                signs[(b > 0.0) as usize] += 1;
            }
            assert!(m.weighted_dag().beta_min().unwrap() >= 0.5);
        }
        let frac = signs[1] as f64 / (signs[0] + signs[1]) as f64;
        assert!((frac - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = random_model(6, 2, 3, 0.3, 0.5, 1.0).unwrap();
        assert_eq!(m.sample(100, 42), m.sample(100, 42));
        assert_ne!(m.sample(100, 42), m.sample(100, 43));
    }

    #[test]
    fn sampling_empty_graph_variances() {
        let m = model(4, &[], 1.0);
        let n = 20_000;
        let c = sample_cov(&m.sample(n, 1), false).unwrap();
        let band = 4.0 / libm::sqrt(n as f64);
        for k in 0..4 {
            assert!((c.get(k, k) - 1.0).abs() < band);
        }
    }

    #[test]
    fn sampling_single_edge_covariance() {
        let m = model(2, &[(0, 1, 1.0)], 1.0);
        let c = sample_cov(&m.sample(100_000, 5), false).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 0.05);
    }

    #[test]
    fn sampling_converges_to_population() {
        for seed in 0..3 {
            let m = random_model(8, 3, seed, 0.3, 0.5, 1.0).unwrap();
            let emp = sample_cov(&m.sample(100_000, seed + 100), false).unwrap();
            let err = emp.matrix().frobenius_diff(m.covariance().unwrap().matrix());
            assert!(err < 0.05, "frobenius error {err}");
        }
    }

    #[test]
    fn condition_moral_examples() {
        assert!(model(3, &[(0, 2, 1.0), (1, 2, 1.0)], 1.0).check_condition_moral().unwrap());
        assert!(model(2, &[(0, 1, 0.8)], 1.0).check_condition_moral().unwrap());
        assert!(model(4, &[], 1.0).check_condition_moral().unwrap());
        // Γ_01 ∝ -β_01 + β_02 β_12 vanishes when β_01 = β_02 β_12
        let (b02, b12) = (0.8, 0.6);
        let m = model(3, &[(0, 1, b02 * b12), (0, 2, b02), (1, 2, b12)], 1.0);
        let gamma = linalg::spd_inverse(m.covariance().unwrap().matrix()).unwrap();
        assert!(gamma[(0, 1)].abs() < 1e-12);
        assert!(!m.check_condition_moral().unwrap());
    }
}
