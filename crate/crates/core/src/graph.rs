//! Directed graphs, spanning trees and matched cut/cycle matrix pairs.
//!
//! Branch ids are 1-based inside [`IndexSet`]/[`SpanningTree`] values and
//! 0-based everywhere else (vector positions, matrix columns).

use crate::error::{Error, Result};
use crate::numerics::{integer_det, DenseMatrix, IndexSet};

/// Default bound on the number of spanning trees enumerated.
pub const DEFAULT_TREE_CAP: usize = 1_000_000;

/// Connected directed multigraph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    node_count: usize,
    branches: Vec<(usize, usize)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl Digraph {
    /// `branches[k] = (tail, head)` with 0-based node ids.
    pub fn new(node_count: usize, branches: Vec<(usize, usize)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidGraph("a circuit needs at least one branch".into()));
        }
        let mut touched = vec![false; node_count];
        for (k, &(tail, head)) in branches.iter().enumerate() {
            if tail >= node_count || head >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "branch {} references a node outside 0..{node_count}",
                    k + 1
                )));
            }
            if tail == head {
                return Err(Error::InvalidGraph(format!("branch {} is a self-loop", k + 1)));
            }
            touched[tail] = true;
            touched[head] = true;
        }
        if let Some(isolated) = touched.iter().position(|t| !t) {
            return Err(Error::InvalidGraph(format!("node {isolated} is isolated")));
        }
        let g = Digraph {
            node_count,
            branches,
        };
        if !g.spans(&(0..g.branch_count()).collect::<Vec<_>>()) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[(usize, usize)] {
        &self.branches
    }

    /// Rank of the cut space, `n − 1`.
    pub fn tree_size(&self) -> usize {
        self.node_count - 1
    }

    /// Dimension of the cycle space, `m − n + 1`.
    pub fn cycle_rank(&self) -> usize {
        self.branch_count() - self.tree_size()
    }

    /// Same graph with one more branch appended (it becomes branch `m + 1`).
    pub fn with_branch(&self, tail: usize, head: usize) -> Result<Digraph> {
        let mut branches = self.branches.clone();
        branches.push((tail, head));
        Digraph::new(self.node_count, branches)
    }

    /// Whether the given 0-based branches connect every node.
    fn spans(&self, subset: &[usize]) -> bool {
        let mut uf = UnionFind::new(self.node_count);
        let mut components = self.node_count;
        for &k in subset {
            let (t, h) = self.branches[k];
            if uf.union(t, h) {
                components -= 1;
            }
        }
        components == 1
    }

    pub fn is_spanning_tree(&self, set: &IndexSet) -> bool {
        if set.universe() != self.branch_count() || set.len() != self.tree_size() {
            return false;
        }
        self.spans(&set.zero_based())
    }

    pub fn full_incidence(&self) -> DenseMatrix<i64> {
        let mut a = DenseMatrix::from_fn(self.node_count, self.branch_count(), |_, _| 0i64);
        for (k, &(tail, head)) in self.branches.iter().enumerate() {
            a[(tail, k)] = 1;
            a[(head, k)] = -1;
        }
        a
    }

    pub fn reduced_incidence(&self, reference: usize) -> Result<DenseMatrix<i64>> {
        if reference >= self.node_count {
            return Err(Error::UnknownNode(reference.to_string()));
        }
        let rows: Vec<usize> = (0..self.node_count).filter(|&r| r != reference).collect();
        let cols: Vec<usize> = (0..self.branch_count()).collect();
        Ok(self.full_incidence().select(&rows, &cols))
    }

    /// Lexicographically first spanning tree (greedy in branch order).
    pub fn first_spanning_tree(&self) -> SpanningTree {
        let mut uf = UnionFind::new(self.node_count);
        let picked: Vec<usize> = (0..self.branch_count())
            .filter(|&k| {
                let (t, h) = self.branches[k];
                uf.union(t, h)
            })
            .collect();
        SpanningTree(
            IndexSet::from_zero_based(picked, self.branch_count())
                .expect("greedy selection yields valid indices"),
        )
    }

    /// All spanning trees in lexicographic order of their sorted branch ids.
    pub fn spanning_trees(&self, cap: usize) -> Result<Vec<SpanningTree>> {
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.tree_size());
        let mut uf = UnionFind::new(self.node_count);
        self.enumerate(0, &mut chosen, &mut uf, &mut out, cap)?;
        Ok(out)
    }

    /// The first `limit` spanning trees in the same order, and whether more
    /// exist.
    pub fn first_spanning_trees(&self, limit: usize) -> (Vec<SpanningTree>, bool) {
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.tree_size());
        let mut uf = UnionFind::new(self.node_count);
        let truncated = self.enumerate(0, &mut chosen, &mut uf, &mut out, limit).is_err();
        (out, truncated)
    }

    fn enumerate(
        &self,
        next: usize,
        chosen: &mut Vec<usize>,
        uf: &mut UnionFind,
        out: &mut Vec<SpanningTree>,
        cap: usize,
    ) -> Result<()> {
        let m = self.branch_count();
        if chosen.len() == self.tree_size() {
            if out.len() == cap {
                return Err(Error::TreeCountExceedsCap {
                    cap,
                    found: out.len(),
                });
            }
            out.push(SpanningTree(
                IndexSet::from_zero_based(chosen.clone(), m).expect("chosen branches are valid"),
            ));
            return Ok(());
        }
        if next == m || m - next < self.tree_size() - chosen.len() {
            return Ok(());
        }
        let (t, h) = self.branches[next];
        let (rt, rh) = (uf.find(t), uf.find(h));
        if rt != rh {
            let saved = uf.parent.clone();
            uf.union(rt, rh);
            chosen.push(next);
            self.enumerate(next + 1, chosen, uf, out, cap)?;
            chosen.pop();
            uf.parent = saved;
        }
        // Excluding `next` is only worthwhile if the rest can still span.
        let mut rest: Vec<usize> = chosen.clone();
        rest.extend(next + 1..m);
        if self.spans(&rest) {
            self.enumerate(next + 1, chosen, uf, out, cap)?;
        }
        Ok(())
    }

    /// Fundamental cycle matrix of `tree`: one row per cotree branch (in
    /// increasing order), oriented along that branch.
    pub fn fundamental_cycles(&self, tree: &SpanningTree) -> DenseMatrix<i64> {
        let m = self.branch_count();
        let in_tree = tree.0.zero_based();
        let cotree = tree.0.complement().zero_based();
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.node_count];
        for &k in &in_tree {
            let (t, h) = self.branches[k];
            adjacency[t].push((h, k));
            adjacency[h].push((t, k));
        }
        let mut b = DenseMatrix::from_fn(cotree.len(), m, |_, _| 0i64);
        for (row, &c) in cotree.iter().enumerate() {
            let (tail, head) = self.branches[c];
            b[(row, c)] = 1;
            // walk the tree from `head` back to `tail`
            let mut via: Vec<Option<(usize, usize)>> = vec![None; self.node_count];
            let mut seen = vec![false; self.node_count];
            let mut stack = vec![head];
            seen[head] = true;
            while let Some(x) = stack.pop() {
                for &(y, k) in &adjacency[x] {
                    if !seen[y] {
                        seen[y] = true;
                        via[y] = Some((x, k));
                        stack.push(y);
                    }
                }
            }
            let mut node = tail;
            while node != head {
                let (prev, k) = via[node].expect("tree spans the graph");
                // traversal goes prev -> node
                b[(row, k)] = if self.branches[k] == (prev, node) { 1 } else { -1 };
                node = prev;
            }
        }
        b
    }
}

/// Set of `n − 1` branches forming a spanning tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTree(IndexSet);

impl SpanningTree {
    pub fn new(graph: &Digraph, branches: IndexSet) -> Result<Self> {
        if !graph.is_spanning_tree(&branches) {
            return Err(Error::NotASpanningTree(branches.members().to_vec()));
        }
        Ok(SpanningTree(branches))
    }

    pub fn branches(&self) -> &IndexSet {
        &self.0
    }

    pub fn cotree(&self) -> IndexSet {
        self.0.complement()
    }

    pub fn contains(&self, branch_id: usize) -> bool {
        self.0.contains(branch_id)
    }
}

/// `(−1)^{n(n−1)/2 + Σ_{j∈T} j} · det A_T · det B_T̄`.
pub fn k_invariant(
    a: &DenseMatrix<i64>,
    b: &DenseMatrix<i64>,
    tree: &SpanningTree,
    n: usize,
) -> Result<i64> {
    let det_a = integer_det(&a.select_columns(&tree.branches().zero_based()))?;
    let det_b = integer_det(&b.select_columns(&tree.cotree().zero_based()))?;
    if det_a == 0 || det_b == 0 {
        return Err(Error::ZeroTreeDeterminant);
    }
    let exponent = n * (n - 1) / 2 + tree.branches().sum();
    let sign = if exponent.is_multiple_of(2) { 1 } else { -1 };
    Ok(sign * det_a * det_b)
}

/// Cut matrix `A` and cycle matrix `B` over a common branch order, with the
/// invariants `k_A`, `k_B` and the signed matching constant `k_AB`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutCyclePair {
    a: DenseMatrix<i64>,
    b: DenseMatrix<i64>,
    k_a: i64,
    k_b: i64,
    k_ab: i64,
    witness: SpanningTree,
}

impl CutCyclePair {
    /// Validates an arbitrary pair and computes its invariants.
    pub fn new(graph: &Digraph, a: DenseMatrix<i64>, b: DenseMatrix<i64>) -> Result<Self> {
        let (n, m) = (graph.node_count(), graph.branch_count());
        if a.rows() != n - 1 || a.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "cut matrix must be {}x{m}, got {}x{}",
                n - 1,
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != m + 1 - n || b.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "cycle matrix must be {}x{m}, got {}x{}",
                m + 1 - n,
                b.rows(),
                b.cols()
            )));
        }
        if a.as_slice().iter().chain(b.as_slice()).any(|x| x.abs() > 1) {
            return Err(Error::InvalidPair("entries must lie in {-1, 0, 1}".into()));
        }
        if !a.int_matmul(&b.transpose())?.is_zero() {
            return Err(Error::InvalidPair("A·Bᵀ ≠ 0".into()));
        }
        let witness = graph.first_spanning_tree();
        let det_a = integer_det(&a.select_columns(&witness.branches().zero_based()))?;
        let det_b = integer_det(&b.select_columns(&witness.cotree().zero_based()))?;
        if det_a == 0 {
            return Err(Error::InvalidPair("cut matrix is rank deficient".into()));
        }
        if det_b == 0 {
            return Err(Error::InvalidPair("cycle matrix is rank deficient".into()));
        }
        let k_ab = k_invariant(&a, &b, &witness, n)?;
        Ok(CutCyclePair {
            a,
            b,
            k_a: det_a.abs(),
            k_b: det_b.abs(),
            k_ab,
            witness,
        })
    }

    /// Fundamental cut/cycle matrices of `tree`, made well-matched.
    ///
    /// In tree-first column order `A = (I | A_T̄)`, `B = (B_T | I)` with
    /// `B_T = −A_T̄ᵀ`. Returning to the global branch order multiplies
    /// `k_AB` by `(−1)^{n(n−1)/2 + Σ_{j∈T} j}`; when that is odd the last
    /// cycle row (or the last cut row for a tree-only graph) is negated.
    pub fn fundamental(graph: &Digraph, tree: &SpanningTree) -> Result<Self> {
        if !graph.is_spanning_tree(tree.branches()) {
            return Err(Error::NotASpanningTree(tree.branches().members().to_vec()));
        }
        let m = graph.branch_count();
        let mut b = graph.fundamental_cycles(tree);
        let tree_cols = tree.branches().zero_based();
        let cotree_cols = tree.cotree().zero_based();
        let mut a = DenseMatrix::from_fn(tree_cols.len(), m, |_, _| 0i64);
        for (row, &t) in tree_cols.iter().enumerate() {
            a[(row, t)] = 1;
            for (crow, &c) in cotree_cols.iter().enumerate() {
                a[(row, c)] = -b[(crow, t)];
            }
        }
        let n = graph.node_count();
        if (n * (n - 1) / 2 + tree.branches().sum()) % 2 == 1 {
            let target = if b.rows() > 0 { &mut b } else { &mut a };
            let last = target.rows() - 1;
            for x in target.row_mut(last) {
                *x = -*x;
            }
        }
        let pair = CutCyclePair::new(graph, a, b)?;
        debug_assert_eq!(pair.k_ab, 1);
        Ok(pair)
    }

    /// Reduced incidence matrix (given reference node) paired with the
    /// fundamental cycle matrix of the lexicographically first spanning
    /// tree, sign-adjusted so that `k_AB = +1`.
    pub fn default_for(graph: &Digraph, reference: usize) -> Result<Self> {
        let mut a = graph.reduced_incidence(reference)?;
        let mut b = graph.fundamental_cycles(&graph.first_spanning_tree());
        let k_ab = k_invariant(&a, &b, &graph.first_spanning_tree(), graph.node_count())?;
        if k_ab < 0 {
            let target = if b.rows() > 0 { &mut b } else { &mut a };
            let last = target.rows() - 1;
            for x in target.row_mut(last) {
                *x = -*x;
            }
        }
        CutCyclePair::new(graph, a, b)
    }

    pub fn cut(&self) -> &DenseMatrix<i64> {
        &self.a
    }

    pub fn cycle(&self) -> &DenseMatrix<i64> {
        &self.b
    }

    pub fn k_a(&self) -> i64 {
        self.k_a
    }

    pub fn k_b(&self) -> i64 {
        self.k_b
    }

    pub fn k_ab(&self) -> i64 {
        self.k_ab
    }

    pub fn witness_tree(&self) -> &SpanningTree {
        &self.witness
    }

    /// `(A; B)`, square of order `m`.
    pub fn stacked(&self) -> DenseMatrix<i64> {
        self.a.vstack(&self.b).expect("A and B share the branch count")
    }
}

/// Number of spanning trees from `det(A; B) = τ · k_AB`.
pub fn tree_count(pair: &CutCyclePair) -> Result<i64> {
    Ok(integer_det(&pair.stacked())? / pair.k_ab())
}
