//! Brute-force reference implementations.
//!
//! Everything here takes a numerically independent route from the primary
//! code: Gaussian elimination with partial pivoting and compensated dot
//! products instead of Cholesky, a direct covariance recursion instead of
//! `(I - B)⁻¹`, plain bitmask enumeration instead of the incremental subset
//! search.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds;
use crate::covest::{CovEstimate, MinCondVar, TieSet, TIE_RTOL};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::linalg::Matrix;
use crate::rng;
use crate::sem::{RandomModelSpec, SemModel};

/// One primary-vs-oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub instance: String,
    pub primary: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(instance: String, primary: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_diff = (primary - oracle).abs();
        Self { instance, primary, oracle, abs_diff, tolerance, pass: abs_diff <= tolerance }
    }
}

/// `a·b` with error-free products and Neumaier summation.
fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let p = x * y;
        let p_err = libm::fma(x, y, -p);
        let t = sum + p;
        comp += if sum.abs() >= p.abs() { (sum - t) + p } else { (p - t) + sum };
        sum = t;
        comp += p_err;
    }
    sum + comp
}

/// LU factorization with partial pivoting of a square matrix.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn factor(a: &Matrix, rel_tol: f64) -> Result<Lu> {
        let n = a.rows();
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let piv =
                (col..n).max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs())).expect("nonempty range");
            if !(lu[(piv, col)].abs() > rel_tol * scale) {
                return Err(Error::Singular);
            }
            if piv != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(col, piv);
                sign = -sign;
            }
            for i in col + 1..n {
                let f = lu[(i, col)] / lu[(col, col)];
                lu[(i, col)] = f;
                for j in col + 1..n {
                    lu[(i, j)] -= f * lu[(col, j)];
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot_compensated(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot_compensated(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    fn log_abs_det(&self) -> (f64, f64) {
        let mut sign = self.sign;
        let mut log = 0.0;
        for i in 0..self.lu.rows() {
            let v = self.lu[(i, i)];
            if v < 0.0 {
                sign = -sign;
            }
            log += libm::log(v.abs());
        }
        (sign, log)
    }
}

/// Schur complement `Σ_kk - Σ_kC Σ_CC⁻¹ Σ_Ck` by pivoted elimination.
fn schur_lu(s: &Matrix, k: usize, set: &[usize]) -> Result<f64> {
    if set.is_empty() {
        return Ok(s[(k, k)]);
    }
    let block = s.submatrix(set);
    let lu = Lu::factor(&block, 1e-12).map_err(|_| Error::SingularBlock)?;
    let rhs: Vec<f64> = set.iter().map(|&c| s[(c, k)]).collect();
    let x = lu.solve(&rhs);
    Ok(s[(k, k)] - dot_compensated(&rhs, &x))
}

/// Population covariance by the covariance recursion along a topological
/// order: `Σ_ik = Σ_p B_pk Σ_ip` for `i` before `k`, and
/// `Σ_kk = σ² + Σ_{p,p'} B_pk B_p'k Σ_pp'`.
pub fn population_covariance(m: &SemModel) -> Matrix {
    let d = m.d();
    let g = m.dag();
    let w = m.weighted_dag();
    let order = g.topological_order();
    let mut s = Matrix::zeros(d, d);
    let mut done: Vec<usize> = Vec::with_capacity(d);
    for &k in order.as_slice() {
        let pa = g.parents(k).expect("node in range");
        let coef: Vec<f64> = pa.iter().map(|&p| w.weight(p, k)).collect();
        for &i in &done {
            let col: Vec<f64> = pa.iter().map(|&p| s[(i, p)]).collect();
            let v = dot_compensated(&coef, &col);
            s[(i, k)] = v;
            s[(k, i)] = v;
        }
        let mut var = m.sigma2();
        for (a, &p) in pa.iter().enumerate() {
            let row: Vec<f64> = pa.iter().map(|&p2| s[(p, p2)]).collect();
            var += coef[a] * dot_compensated(&coef, &row);
        }
        s[(k, k)] = var;
        done.push(k);
    }
    s
}

/// `var(X_k | X_C)` from the model's exact covariance.
pub fn population_cond_var(m: &SemModel, k: usize, set: &[usize]) -> Result<f64> {
    let d = m.d();
    if k >= d || set.iter().any(|&c| c >= d) {
        return Err(Error::NodeOutOfRange { node: set.iter().copied().chain([k]).max().unwrap_or(k), d });
    }
    if set.contains(&k) {
        return Err(Error::InvalidArgument("conditioning set contains the target node"));
    }
    schur_lu(&population_covariance(m), k, set)
}

/// Largest pool accepted by [`brute_force_min_cond_var`].
pub const BRUTE_FORCE_MAX_POOL: usize = 12;

/// Same contract as [`CovEstimate::min_cond_var`], by enumerating every
/// subset of the pool as a bitmask.
pub fn brute_force_min_cond_var(c: &CovEstimate, k: usize, pool: &[usize], q: usize) -> Result<MinCondVar> {
    let mut pool = pool.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if pool.len() > BRUTE_FORCE_MAX_POOL {
        return Err(Error::TooLarge { d: pool.len(), limit: BRUTE_FORCE_MAX_POOL });
    }
    if k >= c.d() || pool.iter().any(|&v| v >= c.d()) {
        return Err(Error::NodeOutOfRange { node: k, d: c.d() });
    }
    if pool.contains(&k) {
        return Err(Error::InvalidArgument("pool contains the target node"));
    }
    let mut ties = TieSet::new(TIE_RTOL * c.get(k, k).abs().max(f64::MIN_POSITIVE));
    let mut skipped = 0;
    for mask in 0u32..(1u32 << pool.len()) {
        if mask.count_ones() as usize > q {
            continue;
        }
        let set: Vec<usize> = (0..pool.len()).filter(|&b| mask >> b & 1 == 1).map(|b| pool[b]).collect();
        match schur_lu(c.matrix(), k, &set) {
            Ok(v) => ties.offer(v, &set),
            Err(Error::SingularBlock) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let (value, set) = ties.best();
    Ok(MinCondVar { value, set, singular_skipped: skipped })
}

/// Largest `d` accepted by [`exhaustive_identifiability`].
pub const IDENTIFIABILITY_MAX_D: usize = 4;

const FIT_TOL: f64 = 1e-8;

/// Every DAG with in-degree `<= q` that reproduces `s` as an equal-variance
/// SEM: least-squares fit of each node on its parents, all residual
/// variances equal, every fitted coefficient nonzero, and the implied
/// covariance matching `s`, each within `1e-8`.
pub fn exhaustive_identifiability(s: &CovEstimate, q: usize) -> Result<Vec<Dag>> {
    let d = s.d();
    if d > IDENTIFIABILITY_MAX_D {
        return Err(Error::TooLarge { d, limit: IDENTIFIABILITY_MAX_D });
    }
    let slots: Vec<(usize, usize)> =
        (0..d).flat_map(|u| (0..d).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    let mut survivors = Vec::new();
    for mask in 0u32..(1u32 << slots.len()) {
        let edges: Vec<(usize, usize)> =
            slots.iter().enumerate().filter(|&(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
        let Ok(g) = Dag::new(d, &edges) else { continue };
        if g.max_in_degree() > q {
            continue;
        }
        if fits_equal_variance(s, &g)? {
            survivors.push(g);
        }
    }
    Ok(survivors)
}

fn fits_equal_variance(s: &CovEstimate, g: &Dag) -> Result<bool> {
    let d = s.d();
    let mut weights = Matrix::zeros(d, d);
    let mut residuals = Vec::with_capacity(d);
    for k in 0..d {
        let pa = g.parents(k)?;
        if pa.is_empty() {
            residuals.push(s.get(k, k));
            continue;
        }
        let Ok(lu) = Lu::factor(&s.matrix().submatrix(pa), 1e-12) else { return Ok(false) };
        let rhs: Vec<f64> = pa.iter().map(|&p| s.get(p, k)).collect();
        let beta = lu.solve(&rhs);
        if beta.iter().any(|b| b.abs() <= FIT_TOL) {
            return Ok(false);
        }
        for (&p, &b) in pa.iter().zip(&beta) {
            weights[(p, k)] = b;
        }
        residuals.push(s.get(k, k) - dot_compensated(&rhs, &beta));
    }
    let lo = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > FIT_TOL || !(lo > 0.0) {
        return Ok(false);
    }
    let model =
        SemModel::new(crate::sem::WeightedDag::from_matrix(weights)?, residuals.iter().sum::<f64>() / d as f64)?;
    Ok(population_covariance(&model).max_abs_diff(s.matrix()) <= FIT_TOL)
}

/// Monte Carlo estimate of `KL(N(0,Σ₀) ‖ N(0,Σ₁))` as the mean log-density
/// ratio over `samples` draws from `N(0, Σ₀)`. Returns `(estimate, standard error)`.
pub fn monte_carlo_kl(s0: &CovEstimate, s1: &CovEstimate, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let d = s0.d();
    if s1.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: s1.d() });
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples"));
    }
    let l0 = lower_factor(s0.matrix())?;
    let lu0 = Lu::factor(s0.matrix(), 1e-14)?;
    let lu1 = Lu::factor(s1.matrix(), 1e-14)?;
    let (sg0, ld0) = lu0.log_abs_det();
    let (sg1, ld1) = lu1.log_abs_det();
    if sg0 < 0.0 || sg1 < 0.0 {
        return Err(Error::Singular);
    }
    let mut rng = rng::stream(seed, &[0x6b6c]);
    let mut z = vec![0.0; d];
    let mut x = vec![0.0; d];
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for t in 0..samples {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for i in 0..d {
            x[i] = dot_compensated(&l0.row(i)[..=i], &z[..=i]);
        }
        let quad0: f64 = z.iter().map(|v| v * v).sum();
        let quad1 = dot_compensated(&x, &lu1.solve(&x));
        let r = 0.5 * (quad1 - quad0 + ld1 - ld0);
        // Welford
        let delta = r - mean;
        mean += delta / (t + 1) as f64;
        m2 += delta * (r - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, libm::sqrt(var / samples as f64)))
}

/// Cholesky-Banachiewicz with compensated inner products (sampling only).
fn lower_factor(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = dot_compensated(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                let p = a[(i, i)] - s;
                if !(p > 0.0) {
                    return Err(Error::Singular);
                }
                l[(i, i)] = libm::sqrt(p);
            } else {
                l[(i, j)] = (a[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Dense `log det` via pivoted LU.
pub fn dense_log_det(a: &Matrix) -> Result<f64> {
    let (sign, log) = Lu::factor(a, 0.0)?.log_abs_det();
    if sign < 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(log)
}

/// A desk-scale sweep of primary-vs-oracle checks for the `validate` command.
pub fn validation_suite(seed: u64) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();

    for r in 0..5u64 {
        let m = RandomModelSpec::new(8, 3).generate(rng::derive_seed(seed, &[1, r]))?;
        let c = m.covariance()?;
        out.push(OracleReport::new(
            format!("covariance model={r}"),
            0.0,
            c.matrix().max_abs_diff(&population_covariance(&m)),
            1e-10,
        ));
        for k in 0..m.d() {
            let pa = m.dag().parents(k)?;
            out.push(OracleReport::new(
                format!("cond_var model={r} k={k} C=pa(k)"),
                c.cond_var(k, pa)?,
                population_cond_var(&m, k, pa)?,
                1e-10,
            ));
        }
        let order = m.dag().topological_order();
        let last = order.as_slice()[m.d() - 1];
        let pool: Vec<usize> = order.as_slice()[..m.d() - 1].to_vec();
        let primary = c.min_cond_var(last, &pool, 3)?;
        let oracle = brute_force_min_cond_var(&c, last, &pool, 3)?;
        out.push(OracleReport::new(
            format!("min_cond_var model={r} k={last} set_equal={}", primary.set == oracle.set),
            primary.value,
            oracle.value,
            if primary.set == oracle.set { 1e-10 } else { -1.0 },
        ));
    }

    for r in 0..5u64 {
        let m = RandomModelSpec::new(4, 2).generate(rng::derive_seed(seed, &[2, r]))?;
        let found = exhaustive_identifiability(&m.covariance()?, 2)?;
        let unique_truth = found.len() == 1 && found[0] == *m.dag();
        out.push(OracleReport::new(
            format!("identifiability model={r} survivors={}", found.len()),
            1.0,
            unique_truth as u8 as f64,
            0.0,
        ));
    }

    for beta in [0.3, 0.5, 1.0] {
        for row in bounds::one_edge_kl_table(beta, 1.0)? {
            let (j, k) = row.case.witness();
            let s0 = bounds::one_edge_covariance(4, 0, 1, beta, 1.0)?;
            let s1 = bounds::one_edge_covariance(4, j, k, beta, 1.0)?;
            let (est, se) = monte_carlo_kl(&s0, &s1, 200_000, rng::derive_seed(seed, &[3, j as u64, k as u64]))?;
            out.push(OracleReport::new(
                format!("kl {} beta={beta} (3 SE band)", row.case),
                row.oracle_value,
                est,
                3.0 * se,
            ));
        }
    }

    for p in [2usize, 10, 50] {
        let (a, b) = (0.1, 0.01);
        out.push(OracleReport::new(
            format!("structured_logdet p={p} a={a} b={b}"),
            bounds::structured_logdet(p, a, b)?.exact,
            dense_log_det(&bounds::structured_matrix(p, a, b))?,
            1e-10,
        ));
    }
    Ok(out)
}
