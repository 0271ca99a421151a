mod common;

use common::*;
use hct_core::config::{Configuration, Triad, C64};
use hct_core::coupled::Coupling;
use hct_core::graph::{CutCyclePair, DEFAULT_TREE_CAP};
use hct_core::kirchhoff::KirchhoffPolynomial;
use hct_core::netlist::Netlist;
use hct_core::numerics::Lu;
use hct_core::solver::{fault_sweep, Circuit, Fault, ModelKind};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rel(a: C64, b: C64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_and_symmetric_determinants_agree(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_sized_graph(&mut rng, 6, 9);
        let cfg = random_config(&mut rng, g.branch_count(), 0.3);
        let circuit = Circuit::new(g, cfg).unwrap();
        let full = circuit.assemble_full().unwrap().coefficient.determinant().unwrap();
        let sym = circuit.assemble_homogeneous_symmetric().unwrap().coefficient.determinant().unwrap();
        let trees = oracle_trees(circuit.graph());
        let scale = oracle_k_scale(&trees, &circuit.config().p(), &circuit.config().q());
        prop_assert!(rel(full, sym, scale) <= 1e-9);
    }

    #[test]
    fn cut_times_admittance_over_cycle(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_sized_graph(&mut rng, 6, 9);
        let m = g.branch_count();
        let pair = CutCyclePair::default_for(&g, g.node_count() - 1).unwrap();
        let y: Vec<C64> = (0..m).map(|_| rand_c_nz(&mut rng)).collect();
        let ay = pair.cut().to_scalar::<C64>().scale_columns(&y).unwrap();
        let det = ay.vstack(&pair.cycle().to_scalar()).unwrap().determinant().unwrap();
        let k = KirchhoffPolynomial::new(&g, DEFAULT_TREE_CAP).unwrap();
        let ones = vec![c(1.0, 0.0); m];
        let k0 = k.evaluate(&y, &ones).unwrap();
        prop_assert!(rel(det, k0, k.magnitude_sum(&y, &ones).unwrap()) <= 1e-9);
    }

    #[test]
    fn branch_voltage_determinant_scaling(seed in any::<u64>()) {
        // With q_k = 1 the branch-voltage matrix is [A·Y; B].
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_sized_graph(&mut rng, 6, 9);
        let m = g.branch_count();
        let y: Vec<C64> = (0..m).map(|_| rand_c_nz(&mut rng)).collect();
        let cfg = Configuration::new(y.iter().map(|&yk| Triad::new(yk, c(1.0, 0.0), rand_c(&mut rng)).unwrap()).collect());
        let circuit = Circuit::new(g, cfg).unwrap();
        let det = circuit.assemble_branch_voltage(1e-9).unwrap().coefficient.determinant().unwrap();
        let trees = oracle_trees(circuit.graph());
        let ones = vec![c(1.0, 0.0); m];
        let expected = oracle_k(&trees, &y, &ones) * circuit.pair().k_ab() as f64;
        prop_assert!(rel(det, expected, oracle_k_scale(&trees, &y, &ones)) <= 1e-9);
    }

    #[test]
    fn source_shift_keeps_degeneracy(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_sized_graph(&mut rng, 5, 8);
        let cfg = random_config(&mut rng, g.branch_count(), 0.3);
        let circuit = Circuit::new(g, cfg.clone()).unwrap();
        let s: Vec<C64> = (0..cfg.len()).map(|_| rand_c(&mut rng)).collect();
        let shifted = circuit.with_config(cfg.with_sources(&s).unwrap()).unwrap();
        let a = circuit.degeneracy(1e-9, DEFAULT_TREE_CAP).unwrap();
        let b = shifted.degeneracy(1e-9, DEFAULT_TREE_CAP).unwrap();
        prop_assert_eq!(a.degenerate, b.degenerate);
        prop_assert_eq!(a.value, b.value);
    }

    #[test]
    fn coupled_models_agree(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = random_sized_graph(&mut rng, 5, 8);
        let m = g.branch_count();
        prop_assume!(m >= 2);
        let cfg = Configuration::new((0..m).map(|_| random_triad(&mut rng, 0.0)).collect());
        let controlled = rng.gen_range(0..m);
        let controlling = (controlled + rng.gen_range(1..m)) % m;
        let coupling = Coupling::new(controlled, controlling, rand_c(&mut rng), rand_c(&mut rng)).unwrap();
        let circuit = Circuit::new(g, cfg).unwrap().with_couplings(vec![coupling]).unwrap();
        let full = circuit.solve(&ModelKind::Full, 1e-9);
        prop_assume!(full.is_ok());
        let full = full.unwrap();
        for kind in [ModelKind::Symmetric, ModelKind::BranchCurrent, ModelKind::BranchVoltage] {
            let r = circuit.solve(&kind, 1e-9).unwrap();
            prop_assert!(max_rel_diff(&r.i, &full.i) <= 1e-8);
            prop_assert!(max_rel_diff(&r.v, &full.v) <= 1e-8);
        }
    }
}

#[test]
fn wien_netlist_matches_fixture() {
    let text = "\
        field complex\n\
        branch 0  N1 N3 vsource v=1\n\
        branch 1  N1 N2 impedance z=1\n\
        branch 2  N2 N3 impedance z=2\n\
        branch 3a N1 N4 impedance z=1\n\
        branch 3b N1 N4 impedance z=-j\n\
        branch 4a N4 N5 impedance z=1\n\
        branch 4b N3 N5 impedance z=-j\n\
        branch 5  N2 N4 impedance z=100\n\
        branch 6  N2 N5 homog p=0 q=1\n\
        branch 7  N3 N4 homog p=0 q=1\n\
        branch 8  N1 N5 homog p=0 q=1\n";
    let netlist = Netlist::parse(text).unwrap();
    assert_eq!(netlist.branch_ids, WIEN_LABELS);
    let parsed = netlist.circuit(None).unwrap();
    let fixture = wien();
    assert_eq!(parsed.graph(), fixture.graph());
    assert_eq!(parsed.config(), fixture.config());
    // The cut matrix is the reduced incidence matrix at N5.
    let a = parsed.pair().cut();
    assert_eq!(a.row(0), &[1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1]);
    assert_eq!(a.row(1), &[0, -1, 1, 0, 0, 0, 0, 1, 1, 0, 0]);
    assert_eq!(a.row(2), &[-1, 0, -1, 0, 0, 0, 1, 0, 0, 1, 0]);
    assert_eq!(a.row(3), &[0, 0, 0, -1, -1, 1, 0, -1, 0, -1, 0]);
}

#[test]
fn wien_single_model_structure() {
    // Faulting parallel or series partners gives identical signatures.
    let circuit = wien();
    let table = fault_sweep(
        &circuit,
        &[Fault::Short(3), Fault::Short(4), Fault::Open(5), Fault::Open(6)],
        7,
        1e-9,
    )
    .unwrap();
    assert_eq!(table.signatures(1e-9), vec![vec![1, 2], vec![3, 4]]);
    let lu = Lu::factor(&circuit.assemble_homogeneous_symmetric().unwrap().coefficient).unwrap();
    assert!(!lu.is_singular(1e-9));
}
