//! Shared fixtures and brute-force oracles for integration tests.
#![allow(dead_code)]

use hct_core::config::{Configuration, Triad, C64};
use hct_core::graph::Digraph;
use hct_core::solver::Circuit;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rand_c(rng: &mut StdRng) -> C64 {
    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

/// Complex number with modulus in `[0.2, 5]`.
pub fn rand_c_nz(rng: &mut StdRng) -> C64 {
    C64::from_polar(rng.gen_range(0.2..5.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random connected multigraph: a random tree plus extra branches, in a
/// shuffled branch order with random orientations.
pub fn random_graph(rng: &mut StdRng, n: usize, m: usize) -> Digraph {
    assert!(n >= 2 && m >= n - 1);
    let orient = |rng: &mut StdRng, a: usize, b: usize| if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    let mut branches: Vec<(usize, usize)> = (1..n)
        .map(|k| {
            let j = rng.gen_range(0..k);
            orient(rng, j, k)
        })
        .collect();
    while branches.len() < m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            branches.push((a, b));
        }
    }
    branches.shuffle(rng);
    Digraph::new(n, branches).unwrap()
}

pub fn random_sized_graph(rng: &mut StdRng, max_n: usize, max_m: usize) -> Digraph {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(n - 1..=max_m.max(n - 1));
    random_graph(rng, n, m)
}

pub fn complete_graph(n: usize) -> Digraph {
    let branches = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    Digraph::new(n, branches).unwrap()
}

/// Spanning trees by exhaustive subset search (0-based branch lists).
pub fn oracle_trees(g: &Digraph) -> Vec<Vec<usize>> {
    let (n, m) = (g.node_count(), g.branch_count());
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut acyclic = true;
        for k in (0..m).filter(|k| mask >> k & 1 == 1) {
            let (a, b) = g.branches()[k];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                acyclic = false;
                break;
            }
            parent[ra] = rb;
        }
        if acyclic {
            out.push((0..m).filter(|k| mask >> k & 1 == 1).collect());
        }
    }
    out
}

/// `Σ_T Π_{j∈T} p_j Π_{k∉T} q_k` from an explicit tree list.
pub fn oracle_k(trees: &[Vec<usize>], p: &[C64], q: &[C64]) -> C64 {
    trees
        .iter()
        .map(|t| (0..p.len()).map(|k| if t.contains(&k) { p[k] } else { q[k] }).product::<C64>())
        .sum()
}

pub fn oracle_k_scale(trees: &[Vec<usize>], p: &[C64], q: &[C64]) -> f64 {
    trees
        .iter()
        .map(|t| (0..p.len()).map(|k| if t.contains(&k) { p[k] } else { q[k] }).product::<C64>().norm())
        .sum()
}

/// Random triad; with probability `special` one coordinate is exactly zero.
pub fn random_triad(rng: &mut StdRng, special: f64) -> Triad {
    let (mut p, mut q) = (rand_c_nz(rng), rand_c_nz(rng));
    if rng.gen_bool(special) {
        if rng.gen_bool(0.5) {
            p = c(0.0, 0.0);
        } else {
            q = c(0.0, 0.0);
        }
    }
    let s = if rng.gen_bool(0.4) { rand_c(rng) } else { c(0.0, 0.0) };
    Triad::new(p, q, s).unwrap()
}

pub fn random_config(rng: &mut StdRng, m: usize, special: f64) -> Configuration {
    Configuration::new((0..m).map(|_| random_triad(rng, special)).collect())
}

/// Sign of the permutation taking `t1 ++ complement(t1)` onto
/// `t2 ++ complement(t2)`, by counting inversions.
pub fn oracle_sign(t1: &[usize], t2: &[usize], m: usize) -> i64 {
    let order = |t: &[usize]| -> Vec<usize> {
        t.iter().copied().chain((0..m).filter(|k| !t.contains(k))).collect()
    };
    let (from, to) = (order(t1), order(t2));
    let mut perm = vec![0usize; m];
    for k in 0..m {
        perm[from[k]] = to[k];
    }
    let inversions = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).filter(|&(a, b)| perm[a] > perm[b]).count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub const WIEN_LABELS: [&str; 11] = ["0", "1", "2", "3a", "3b", "4a", "4b", "5", "6", "7", "8"];

/// Wien bridge: source branch 0 (1 V) across N1→N3, arms z1 = 1, z2 = 2,
/// z3 = 1 ∥ −j, z4 = 1 in series with −j, detector z5 = 100 between N2 and
/// N4, and open virtual branches 6, 7, 8 for bridging faults. Nodes N1..N5
/// are 0..4.
pub fn wien() -> Circuit {
    let z = |v: C64| Triad::new(c(1.0, 0.0), v, c(0.0, 0.0)).unwrap();
    let branches = vec![
        (0, 2),
        (0, 1),
        (1, 2),
        (0, 3),
        (0, 3),
        (3, 4),
        (2, 4),
        (1, 3),
        (1, 4),
        (2, 3),
        (0, 4),
    ];
    let triads = vec![
        Triad::real(1.0, 0.0, 1.0).unwrap(),
        z(c(1.0, 0.0)),
        z(c(2.0, 0.0)),
        z(c(1.0, 0.0)),
        z(c(0.0, -1.0)),
        z(c(1.0, 0.0)),
        z(c(0.0, -1.0)),
        z(c(100.0, 0.0)),
        Triad::open(),
        Triad::open(),
        Triad::open(),
    ];
    Circuit::new(Digraph::new(5, branches).unwrap(), Configuration::new(triads)).unwrap()
}

pub fn max_rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().chain(b).map(|x| x.norm()).fold(1.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}
