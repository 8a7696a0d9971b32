//! Covariance matrices and conditional-variance queries.
//!
//! `cond_var(k, C)` is the Schur complement `Σ_kk - Σ_kC Σ_CC⁻¹ Σ_Ck`,
//! i.e. the residual variance of `X_k` after linear projection on `X_C`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Pivot threshold, relative to the largest diagonal entry of `Σ_CC`,
/// below which a conditioning block counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Two conditional variances within `TIE_RTOL * Σ_kk` of each other are
/// treated as tied.
pub const TIE_RTOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovOrigin {
    Population,
    Sample { n: usize },
}

/// A symmetric covariance matrix (population `Σ` or sample `Σ̂`).
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    matrix: Matrix,
    origin: CovOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `max(λ_max, 1 / max(λ_min, tol))`.
    pub m_hat: f64,
}

/// Result of a best-subset search for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct MinCondVar {
    pub value: f64,
    /// Minimizing conditioning set, sorted ascending.
    pub set: Vec<usize>,
    /// Subsets skipped because their conditioning block was singular.
    pub singular_skipped: usize,
}

impl CovEstimate {
    pub fn new(matrix: Matrix, origin: CovOrigin) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.rows(), got: matrix.cols() });
        }
        if matrix.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("covariance has non-finite entries"));
        }
        if !matrix.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::InvalidArgument("covariance is not symmetric"));
        }
        Ok(Self { matrix, origin })
    }

    pub fn population(matrix: Matrix) -> Result<Self> {
        Self::new(matrix, CovOrigin::Population)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn origin(&self) -> CovOrigin {
        self.origin
    }

    /// Sample size behind a sample estimate.
    pub fn n(&self) -> Option<usize> {
        match self.origin {
            CovOrigin::Sample { n } => Some(n),
            CovOrigin::Population => None,
        }
    }

    /// Relabels variables: variable `v` of `self` becomes variable `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<CovEstimate> {
        if perm.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: perm.len() });
        }
        let inv = crate::graph::Ordering::new(perm.to_vec())?.positions();
        Ok(CovEstimate { matrix: self.matrix.permute_sym(&inv), origin: self.origin })
    }

    fn check_query(&self, k: usize, set: &[usize]) -> Result<()> {
        let d = self.d();
        if k >= d {
            return Err(Error::NodeOutOfRange { node: k, d });
        }
        if let Some(&bad) = set.iter().find(|&&c| c >= d) {
            return Err(Error::NodeOutOfRange { node: bad, d });
        }
        if set.contains(&k) {
            return Err(Error::InvalidArgument("conditioning set contains the target node"));
        }
        Ok(())
    }

    /// Residual variance of `X_k` given `X_C`; `Σ_kk` for empty `C`.
    pub fn cond_var(&self, k: usize, set: &[usize]) -> Result<f64> {
        self.check_query(k, set)?;
        let mut ws = Workspace::new(set.len());
        for (depth, &c) in set.iter().enumerate() {
            if !ws.push(self, k, c, depth) {
                return Err(Error::SingularBlock);
            }
        }
        Ok(ws.residual(self, k, set.len()))
    }

    /// Best subset search: minimum of `cond_var(k, C)` over `C ⊆ pool`,
    /// `|C| <= q` (including `C = ∅`).
    ///
    /// Among subsets whose value is within the tie tolerance of the minimum,
    /// the one with the fewest elements wins, then the lexicographically
    /// smallest. Subsets with a singular block are skipped and counted.
    pub fn min_cond_var(&self, k: usize, pool: &[usize], q: usize) -> Result<MinCondVar> {
        self.check_query(k, pool)?;
        let mut pool = pool.to_vec();
        pool.sort_unstable();
        pool.dedup();
        let cap = q.min(pool.len());
        let tol = TIE_RTOL * self.get(k, k).abs().max(f64::MIN_POSITIVE);

        let mut search = Search {
            cov: self,
            k,
            pool: &pool,
            cap,
            ws: Workspace::new(cap),
            stack: Vec::with_capacity(cap),
            ties: TieSet::new(tol),
            skipped: 0,
        };
        search.ties.offer(self.get(k, k), &[]);
        search.descend(0);

        let skipped = search.skipped;
        let (value, set) = search.ties.best();
        Ok(MinCondVar { value, set, singular_skipped: skipped })
    }

    /// Extreme eigenvalues and the spectral constant `M̂`.
    pub fn spectral_bounds(&self) -> SpectralBounds {
        const TOL: f64 = 1e-12;
        let ev = linalg::sym_eigenvalues(&self.matrix);
        let lambda_min = ev.first().copied().unwrap_or(0.0);
        let lambda_max = ev.last().copied().unwrap_or(0.0);
        SpectralBounds { lambda_min, lambda_max, m_hat: lambda_max.max(1.0 / lambda_min.max(TOL)) }
    }
}

/// `(1/n) XᵀX` of an `n × d` data matrix, optionally after subtracting column means.
pub fn sample_cov(data: &Matrix, center: bool) -> Result<CovEstimate> {
    let (n, d) = (data.rows(), data.cols());
    if n == 0 || d == 0 {
        return Err(Error::EmptyData);
    }
    let means: Vec<f64> = if center {
        let mut m = vec![0.0; d];
        for i in 0..n {
            for (acc, &x) in m.iter_mut().zip(data.row(i)) {
                *acc += x;
            }
        }
        m.iter_mut().for_each(|v| *v /= n as f64);
        m
    } else {
        vec![0.0; d]
    };
    let mut s = Matrix::zeros(d, d);
    let mut row = vec![0.0; d];
    for i in 0..n {
        for ((r, &x), &mu) in row.iter_mut().zip(data.row(i)).zip(&means) {
            *r = x - mu;
        }
        for a in 0..d {
            let ra = row[a];
            let dst = &mut s.row_mut(a)[a..];
            for (acc, &rb) in dst.iter_mut().zip(&row[a..]) {
                *acc += ra * rb;
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for a in 0..d {
        for b in a..d {
            let v = s[(a, b)] * inv_n;
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    CovEstimate::new(s, CovOrigin::Sample { n })
}

/// Incremental Cholesky factor of `Σ_CC` for a growing conditioning set,
/// together with `y = L⁻¹ Σ_Ck`, so that `cond_var = Σ_kk - |y|²`.
struct Workspace {
    cap: usize,
    l: Vec<f64>,
    y: Vec<f64>,
    members: Vec<usize>,
    max_diag: Vec<f64>,
}

impl Workspace {
    fn new(cap: usize) -> Self {
        Self { cap, l: vec![0.0; cap * cap], y: vec![0.0; cap], members: vec![0; cap], max_diag: vec![0.0; cap] }
    }

    /// Sets row `depth` of the factor to element `c`. Returns false when
    /// the pivot falls below the singularity threshold.
    fn push(&mut self, cov: &CovEstimate, k: usize, c: usize, depth: usize) -> bool {
        let cap = self.cap;
        self.members[depth] = c;
        let diag_c = cov.get(c, c);
        let max_diag = if depth == 0 { diag_c } else { self.max_diag[depth - 1].max(diag_c) };
        self.max_diag[depth] = max_diag;
        for t in 0..depth {
            let mut s = cov.get(c, self.members[t]);
            for u in 0..t {
                s -= self.l[depth * cap + u] * self.l[t * cap + u];
            }
            self.l[depth * cap + t] = s / self.l[t * cap + t];
        }
        let mut pivot = diag_c;
        for u in 0..depth {
            pivot -= self.l[depth * cap + u] * self.l[depth * cap + u];
        }
        if !(pivot > SINGULAR_RTOL * max_diag) {
            return false;
        }
        let ldd = libm::sqrt(pivot);
        self.l[depth * cap + depth] = ldd;
        let mut s = cov.get(c, k);
        for u in 0..depth {
            s -= self.l[depth * cap + u] * self.y[u];
        }
        self.y[depth] = s / ldd;
        true
    }

    fn residual(&self, cov: &CovEstimate, k: usize, len: usize) -> f64 {
        cov.get(k, k) - self.y[..len].iter().map(|v| v * v).sum::<f64>()
    }
}

struct Search<'a> {
    cov: &'a CovEstimate,
    k: usize,
    pool: &'a [usize],
    cap: usize,
    ws: Workspace,
    stack: Vec<usize>,
    ties: TieSet,
    skipped: usize,
}

impl Search<'_> {
    fn descend(&mut self, start: usize) {
        let depth = self.stack.len();
        if depth == self.cap {
            return;
        }
        for i in start..self.pool.len() {
            let c = self.pool[i];
            if !self.ws.push(self.cov, self.k, c, depth) {
                self.skipped += count_supersets(self.pool.len() - i - 1, self.cap - depth - 1);
                continue;
            }
            self.stack.push(c);
            let v = self.ws.residual(self.cov, self.k, depth + 1);
            self.ties.offer(v, &self.stack);
            self.descend(i + 1);
            self.stack.pop();
        }
    }
}

/// Number of sets `{c} ∪ S` with `S` drawn from `rest` later elements and
/// `|S| <= room`: all of them share the singular prefix.
fn count_supersets(rest: usize, room: usize) -> usize {
    let mut total = 0usize;
    let mut binom = 1usize;
    for j in 0..=room.min(rest) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul(rest - j) / (j + 1);
    }
    total
}

/// Keeps every candidate within `tol` of the running minimum and picks the
/// smallest `(|C|, C)` among them at the end, so the winner does not depend
/// on enumeration order.
pub(crate) struct TieSet {
    tol: f64,
    min: f64,
    candidates: Vec<(f64, Vec<usize>)>,
}

impl TieSet {
    pub(crate) fn new(tol: f64) -> Self {
        Self { tol, min: f64::INFINITY, candidates: Vec::new() }
    }

    pub(crate) fn offer(&mut self, v: f64, set: &[usize]) {
        if v < self.min {
            self.min = v;
            let bound = v + self.tol;
            self.candidates.retain(|(cv, _)| *cv <= bound);
        }
        if v <= self.min + self.tol {
            self.candidates.push((v, set.to_vec()));
        }
    }

    pub(crate) fn best(self) -> (f64, Vec<usize>) {
        self.candidates
            .into_iter()
            .min_by(|(_, a), (_, b)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
            .expect("at least one candidate offered")
    }
}
