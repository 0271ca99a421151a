//! `hct check`: seeded randomized verification of the core identities.

use hct_core::graph::DEFAULT_TREE_CAP;
use hct_core::{Circuit, Configuration, Digraph, KirchhoffPolynomial, ModelKind, Triad, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Map, Value};

use crate::session::{CliError, Globals, Report, DEFAULT_TOL};

const DEFAULT_SEED: u64 = 0x5eed;

fn rand_nz(rng: &mut StdRng) -> C64 {
    C64::from_polar(rng.gen_range(0.2..5.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Connected multigraph: random tree plus extra random branches.
fn random_graph(rng: &mut StdRng) -> Digraph {
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(n - 1..=10);
    let mut branches: Vec<(usize, usize)> = (1..n).map(|k| (rng.gen_range(0..k), k)).collect();
    while branches.len() < m {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            branches.push((a, b));
        }
    }
    Digraph::new(n, branches).expect("construction yields a connected loop-free graph")
}

fn random_config(rng: &mut StdRng, m: usize) -> Configuration {
    Configuration::new(
        (0..m)
            .map(|_| {
                let (mut p, mut q) = (rand_nz(rng), rand_nz(rng));
                match rng.gen_range(0..6) {
                    0 => p = C64::new(0.0, 0.0),
                    1 => q = C64::new(0.0, 0.0),
                    _ => {}
                }
                let s = if rng.gen_bool(0.4) { rand_nz(rng) } else { C64::new(0.0, 0.0) };
                Triad::new(p, q, s).expect("p and q are never both zero")
            })
            .collect(),
    )
}

fn max_rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().chain(b).map(|x| x.norm()).fold(1.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[derive(Default)]
struct Tally {
    identity: usize,
    models: usize,
    projective: usize,
    singular: usize,
    failures: Vec<String>,
}

fn one_case(rng: &mut StdRng, case: usize, tol: f64, tally: &mut Tally) -> Result<(), hct_core::Error> {
    let graph = random_graph(rng);
    let config = random_config(rng, graph.branch_count());
    let circuit = Circuit::new(graph, config)?;
    let (p, q) = (circuit.config().p(), circuit.config().q());

    let k = KirchhoffPolynomial::new(circuit.graph(), DEFAULT_TREE_CAP)?;
    let pair = circuit.pair();
    let ap = pair.cut().to_scalar::<C64>().scale_columns(&p)?;
    let bq = pair.cycle().to_scalar::<C64>().scale_columns(&q)?;
    let det = ap.vstack(&bq)?.determinant()?;
    let expected = k.evaluate(&p, &q)? * pair.k_ab() as f64;
    // Roundoff in the LU determinant is bounded relative to Hadamard's bound.
    let hadamard: f64 = (0..p.len())
        .map(|c| {
            let col = |m: &hct_core::DenseMatrix<i64>| (0..m.rows()).map(|r| (m.row(r)[c] * m.row(r)[c]) as f64).sum::<f64>();
            (p[c].norm_sqr() * col(pair.cut()) + q[c].norm_sqr() * col(pair.cycle())).sqrt()
        })
        .product();
    let scale = k.magnitude_sum(&p, &q)?.max(hadamard).max(f64::MIN_POSITIVE);
    if (det - expected).norm() <= 1e-9 * scale {
        tally.identity += 1;
    } else {
        tally.failures.push(format!("case {case}: det[AP;BQ] = {det}, k_AB*K = {expected}"));
    }

    let full = match circuit.solve(&ModelKind::Full, tol) {
        Ok(r) => r,
        Err(hct_core::Error::SingularMatrix { .. }) => {
            tally.singular += 1;
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let sym = circuit.solve(&ModelKind::Symmetric, tol)?;
    let diff = max_rel_diff(&full.i, &sym.i).max(max_rel_diff(&full.v, &sym.v));
    if diff <= 1e-8 {
        tally.models += 1;
    } else {
        tally.failures.push(format!("case {case}: full vs symmetric differ by {diff:.2e}"));
    }

    let factors: Vec<C64> = (0..circuit.branch_count()).map(|_| rand_nz(rng)).collect();
    let scaled = circuit.with_config(circuit.config().rescaled(&factors)?)?;
    let rescaled = scaled.solve(&ModelKind::Symmetric, tol)?;
    let diff = max_rel_diff(&rescaled.i, &sym.i).max(max_rel_diff(&rescaled.v, &sym.v));
    if diff <= 1e-9 {
        tally.projective += 1;
    } else {
        tally.failures.push(format!("case {case}: rescaling moved (i, v) by {diff:.2e}"));
    }
    Ok(())
}

pub fn run(globals: &Globals, cases: usize) -> Result<Report, CliError> {
    let seed = globals.seed.unwrap_or(DEFAULT_SEED);
    let tol = globals.tol.unwrap_or(DEFAULT_TOL);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for case in 0..cases {
        if let Err(e) = one_case(&mut rng, case, tol, &mut tally) {
            tally.failures.push(format!("case {case}: {e}"));
        }
    }
    let failed = !tally.failures.is_empty();
    let mut text = format!(
        "seed {seed}, {cases} cases\nmatrix-tree identity: {} passed\nfull vs symmetric: {} passed ({} singular skipped)\nprojective rescaling: {} passed\n",
        tally.identity, tally.models, tally.singular, tally.projective
    );
    for f in &tally.failures {
        text.push_str(&format!("FAIL {f}\n"));
    }
    text.push_str(if failed { "check failed\n" } else { "all checks passed\n" });
    let mut diagnostics = Map::new();
    diagnostics.insert("command".into(), json!("check"));
    diagnostics.insert("cases".into(), json!(cases));
    diagnostics.insert("seed".into(), json!(seed));
    diagnostics.insert("tol".into(), json!(tol));
    Ok(Report {
        text,
        branches: Vec::new(),
        result: json!({
            "identity_passed": tally.identity,
            "models_passed": tally.models,
            "singular_skipped": tally.singular,
            "projective_passed": tally.projective,
            "failures": tally.failures,
        }),
        residuals: Value::Null,
        diagnostics,
        failed,
    })
}
