//! Directed acyclic and undirected graphs over nodes `0..d`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Directed acyclic graph. Parent and child lists are kept sorted, so two
/// DAGs compare equal exactly when their edge sets are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    d: usize,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn empty(d: usize) -> Self {
        Self { d, parents: vec![Vec::new(); d], children: vec![Vec::new(); d] }
    }

    /// Builds a DAG from `(parent, child)` pairs, rejecting self-loops,
    /// duplicates, out-of-range nodes and cycles.
    pub fn new(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(d);
        for &(u, v) in edges {
            check_node(u, d)?;
            check_node(v, d)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if g.parents[v].contains(&u) {
                return Err(Error::DuplicateEdge(u, v));
            }
            g.parents[v].push(u);
            g.children[u].push(v);
        }
        g.parents.iter_mut().for_each(|p| p.sort_unstable());
        g.children.iter_mut().for_each(|c| c.sort_unstable());
        if g.topological_order_inner().is_none() {
            return Err(Error::Cyclic);
        }
        Ok(g)
    }

    /// Builds a DAG from per-node parent sets.
    pub fn from_parent_sets(parent_sets: &[Vec<usize>]) -> Result<Self> {
        let edges: Vec<(usize, usize)> =
            parent_sets.iter().enumerate().flat_map(|(k, ps)| ps.iter().map(move |&p| (p, k))).collect();
        Self::new(parent_sets.len(), &edges)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn parents(&self, k: usize) -> Result<&[usize]> {
        check_node(k, self.d)?;
        Ok(&self.parents[k])
    }

    pub fn children(&self, k: usize) -> Result<&[usize]> {
        check_node(k, self.d)?;
        Ok(&self.children[k])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.d && v < self.d && self.parents[v].binary_search(&u).is_ok()
    }

    /// Edges as `(parent, child)` pairs, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> =
            self.children.iter().enumerate().flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v))).collect();
        e.sort_unstable();
        e
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Topological order; among available nodes the smallest index goes first.
    pub fn topological_order(&self) -> Ordering {
        Ordering(self.topological_order_inner().expect("Dag invariant: acyclic"))
    }

    fn topological_order_inner(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: alloc::collections::BinaryHeap<core::cmp::Reverse<usize>> =
            (0..self.d).filter(|&k| indeg[k] == 0).map(core::cmp::Reverse).collect();
        let mut order = Vec::with_capacity(self.d);
        while let Some(core::cmp::Reverse(u)) = ready.pop() {
            order.push(u);
            for &v in &self.children[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(core::cmp::Reverse(v));
                }
            }
        }
        (order.len() == self.d).then_some(order)
    }

    /// True iff every edge `u -> v` has `u` placed before `v` in `t`.
    pub fn is_valid_ordering(&self, t: &Ordering) -> Result<bool> {
        if t.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: t.len() });
        }
        let pos = t.positions();
        Ok(self.children.iter().enumerate().all(|(u, cs)| cs.iter().all(|&v| pos[u] < pos[v])))
    }

    /// Strict descendants of `k`.
    pub fn descendants(&self, k: usize) -> Result<Vec<bool>> {
        check_node(k, self.d)?;
        Ok(self.reach(k, &self.children))
    }

    /// Strict ancestors of `k`.
    pub fn ancestors(&self, k: usize) -> Result<Vec<bool>> {
        check_node(k, self.d)?;
        Ok(self.reach(k, &self.parents))
    }

    fn reach(&self, k: usize, adj: &[Vec<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.d];
        let mut queue: VecDeque<usize> = adj[k].iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            if !seen[u] {
                seen[u] = true;
                queue.extend(adj[u].iter().copied());
            }
        }
        seen
    }

    /// Non-descendants of `k`, excluding `k` itself.
    pub fn non_descendants(&self, k: usize) -> Result<Vec<usize>> {
        let de = self.descendants(k)?;
        Ok((0..self.d).filter(|&v| v != k && !de[v]).collect())
    }

    /// Subgraph on `keep`, relabeled to `0..keep.len()` in ascending order of
    /// the original labels. Returns the subgraph and the new-to-old label map.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<(Dag, Vec<usize>)> {
        let mut map: Vec<usize> = keep.to_vec();
        map.sort_unstable();
        map.dedup();
        for &k in &map {
            check_node(k, self.d)?;
        }
        let mut old_to_new = vec![usize::MAX; self.d];
        for (new, &old) in map.iter().enumerate() {
            old_to_new[old] = new;
        }
        let mut sub = Dag::empty(map.len());
        for (new_v, &old_v) in map.iter().enumerate() {
            for &old_u in &self.parents[old_v] {
                let new_u = old_to_new[old_u];
                if new_u != usize::MAX {
                    sub.parents[new_v].push(new_u);
                    sub.children[new_u].push(new_v);
                }
            }
        }
        sub.parents.iter_mut().for_each(|p| p.sort_unstable());
        sub.children.iter_mut().for_each(|c| c.sort_unstable());
        Ok((sub, map))
    }

    /// Relabels node `v` to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Dag> {
        if perm.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: perm.len() });
        }
        Ordering::new(perm.to_vec())?;
        let edges: Vec<(usize, usize)> = self.edges().into_iter().map(|(u, v)| (perm[u], perm[v])).collect();
        Dag::new(self.d, &edges)
    }

    /// Undirected skeleton plus an edge between every pair of co-parents.
    pub fn moralize(&self) -> UndirectedGraph {
        let mut adj = vec![Vec::new(); self.d];
        for (v, pa) in self.parents.iter().enumerate() {
            for (i, &p) in pa.iter().enumerate() {
                adj[v].push(p);
                adj[p].push(v);
                for &p2 in &pa[i + 1..] {
                    adj[p].push(p2);
                    adj[p2].push(p);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        UndirectedGraph { d: self.d, adj }
    }

    /// Undirected skeleton (edge directions dropped).
    pub fn skeleton(&self) -> UndirectedGraph {
        let mut adj = vec![Vec::new(); self.d];
        for (u, v) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        UndirectedGraph { d: self.d, adj }
    }
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UndirectedGraph {
    d: usize,
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    pub fn empty(d: usize) -> Self {
        Self { d, adj: vec![Vec::new(); d] }
    }

    /// Builds from unordered pairs; `(u, v)` and `(v, u)` are the same edge,
    /// repeated pairs are rejected.
    pub fn new(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(d);
        for &(u, v) in edges {
            check_node(u, d)?;
            check_node(v, d)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if g.adj[u].contains(&v) {
                return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.adj[u].push(v);
            g.adj[v].push(u);
        }
        g.adj.iter_mut().for_each(|a| a.sort_unstable());
        Ok(g)
    }

    pub fn complete(d: usize) -> Self {
        Self { d, adj: (0..d).map(|u| (0..d).filter(|&v| v != u).collect()).collect() }
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn neighbors(&self, k: usize) -> Result<&[usize]> {
        check_node(k, self.d)?;
        Ok(&self.adj[k])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.d && v < self.d && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn degree(&self, k: usize) -> usize {
        self.adj[k].len()
    }

    /// Maximum neighborhood size.
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True iff every edge of `other` is an edge of `self`.
    pub fn contains(&self, other: &UndirectedGraph) -> bool {
        self.d == other.d && other.edges().into_iter().all(|(u, v)| self.has_edge(u, v))
    }
}

/// A permutation of `0..d`; position 0 is placed first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let d = order.len();
        let mut seen = vec![false; d];
        for &v in &order {
            if v >= d || seen[v] {
                return Err(Error::NotAPermutation(d));
            }
            seen[v] = true;
        }
        Ok(Self(order))
    }

    pub fn identity(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// `positions()[v]` is the index of node `v` in the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

#[inline]
fn check_node(k: usize, d: usize) -> Result<()> {
    if k < d {
        Ok(())
    } else {
        Err(Error::NodeOutOfRange { node: k, d })
    }
}
