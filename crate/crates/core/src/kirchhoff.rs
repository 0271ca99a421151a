//! Multihomogeneous Kirchhoff polynomial
//! `K(p, q) = Σ_T Π_{j∈T} p_j Π_{k∉T} q_k` and its dehomogenizations.
//!
//! The polynomial is kept as its list of spanning trees; evaluation costs
//! `O(τ·m)`.

use std::fmt;

use rayon::prelude::*;

use crate::config::{Configuration, C64};
use crate::error::{Error, Result};
use crate::graph::{Digraph, SpanningTree};
use crate::numerics::Scalar;

/// Chunk size for parallel evaluation; chunk sums are added in order.
const EVAL_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct KirchhoffPolynomial {
    m: usize,
    trees: Vec<SpanningTree>,
}

/// Result of the degeneracy test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degeneracy {
    pub degenerate: bool,
    /// `K(p, q)`.
    pub value: C64,
    /// `Σ_T |Π p_j Π q_k|`, the scale `|K|` is judged against.
    pub scale: f64,
}

impl Degeneracy {
    pub fn relative_value(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.value.norm() / self.scale
        }
    }
}

/// Single-variable-per-branch dehomogenization: trees (`K₀(y)`) or cotrees
/// (`K₁(z)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dehomogenized {
    variable: char,
    /// 1-based branch ids per monomial.
    monomials: Vec<Vec<usize>>,
}

impl Dehomogenized {
    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> Result<T> {
        if self
            .monomials
            .iter()
            .flatten()
            .any(|&j| j > x.len())
        {
            return Err(Error::DimensionMismatch(format!(
                "{} values supplied for variable {}",
                x.len(),
                self.variable
            )));
        }
        Ok(self.monomials.iter().fold(T::zero(), |acc, mono| {
            acc + mono.iter().fold(T::one(), |p, &j| p * x[j - 1])
        }))
    }
}

impl fmt::Display for Dehomogenized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (k, mono) in self.monomials.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if mono.is_empty() {
                write!(f, "1")?;
            }
            for (i, j) in mono.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{}{j}", self.variable)?;
            }
        }
        Ok(())
    }
}

impl KirchhoffPolynomial {
    pub fn new(graph: &Digraph, cap: usize) -> Result<Self> {
        Ok(KirchhoffPolynomial {
            m: graph.branch_count(),
            trees: graph.spanning_trees(cap)?,
        })
    }

    pub fn branch_count(&self) -> usize {
        self.m
    }

    pub fn trees(&self) -> &[SpanningTree] {
        &self.trees
    }

    /// Number of spanning trees, `K(𝟙, 𝟙)`.
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    fn check_len(&self, p: usize, q: usize) -> Result<()> {
        if p != self.m || q != self.m {
            return Err(Error::DimensionMismatch(format!(
                "K has {} branches; got {p} p-values and {q} q-values",
                self.m
            )));
        }
        Ok(())
    }

    fn monomial<T: Scalar>(&self, tree: &SpanningTree, p: &[T], q: &[T]) -> T {
        (1..=self.m).fold(T::one(), |acc, j| {
            acc * if tree.contains(j) { p[j - 1] } else { q[j - 1] }
        })
    }

    pub fn evaluate<T: Scalar>(&self, p: &[T], q: &[T]) -> Result<T> {
        self.check_len(p.len(), q.len())?;
        let partials: Vec<T> = self
            .trees
            .par_chunks(EVAL_CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .fold(T::zero(), |acc, t| acc + self.monomial(t, p, q))
            })
            .collect();
        Ok(partials.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// `Σ_T |monomial_T|`.
    pub fn magnitude_sum<T: Scalar>(&self, p: &[T], q: &[T]) -> Result<f64> {
        self.check_len(p.len(), q.len())?;
        Ok(self
            .trees
            .iter()
            .map(|t| self.monomial(t, p, q).modulus())
            .sum())
    }

    /// Maxwell's tree form `K₀(y) = K(y, 𝟙)`.
    pub fn dehomogenize_trees(&self) -> Dehomogenized {
        Dehomogenized {
            variable: 'y',
            monomials: self
                .trees
                .iter()
                .map(|t| t.branches().members().to_vec())
                .collect(),
        }
    }

    /// Cotree form `K₁(z) = K(𝟙, z)`.
    pub fn dehomogenize_cotrees(&self) -> Dehomogenized {
        Dehomogenized {
            variable: 'z',
            monomials: self
                .trees
                .iter()
                .map(|t| t.cotree().members().to_vec())
                .collect(),
        }
    }

    /// Degeneracy from the source-free projection of `config`: `|K|` small
    /// relative to the monomial magnitude sum.
    pub fn degeneracy(&self, config: &Configuration, tol: f64) -> Result<Degeneracy> {
        let (p, q) = (config.p(), config.q());
        let value = self.evaluate(&p, &q)?;
        let scale = self.magnitude_sum(&p, &q)?;
        // A NaN value compares false and so counts as degenerate.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let degenerate = !(value.norm() > tol * scale);
        Ok(Degeneracy {
            degenerate,
            value,
            scale,
        })
    }
}

impl fmt::Display for KirchhoffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return write!(f, "0");
        }
        for (k, tree) in self.trees.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            for j in 1..=self.m {
                if j > 1 {
                    write!(f, "*")?;
                }
                let var = if tree.contains(j) { 'p' } else { 'q' };
                write!(f, "{var}{j}")?;
            }
        }
        Ok(())
    }
}

/// Builds `K` for `graph` and applies [`KirchhoffPolynomial::degeneracy`].
pub fn is_degenerate(
    graph: &Digraph,
    config: &Configuration,
    tol: f64,
    cap: usize,
) -> Result<Degeneracy> {
    if config.len() != graph.branch_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} triads for {} branches",
            config.len(),
            graph.branch_count()
        )));
    }
    KirchhoffPolynomial::new(graph, cap)?.degeneracy(config, tol)
}
