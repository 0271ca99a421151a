//! Python module `hct`: triads, circuits, solves, Kirchhoff polynomials,
//! Thévenin data and fault sweeps. Branch and node indices are 0-based.

use hct_core::config::ClassicalElement;
use hct_core::graph::{tree_count, DEFAULT_TREE_CAP};
use hct_core::solver::{fault_sweep, single_faults, thevenin, Fault};
use hct_core::{
    Circuit, Configuration, Coupling, CutCyclePair, Digraph, Error, ErrorCategory, IndexSet,
    KirchhoffPolynomial, ModelKind, Netlist, PiModel, Triad, C64,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(hct, HctError, PyValueError, "Base class for hct errors.");
create_exception!(hct, ParseError, HctError, "Malformed input.");
create_exception!(hct, PatchError, HctError, "Model needs a patch the configuration leaves.");
create_exception!(hct, DegenerateError, HctError, "Singular circuit equations.");
create_exception!(hct, DimensionError, HctError, "Inconsistent sizes.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.category() {
        ErrorCategory::Parse => ParseError::new_err(msg),
        ErrorCategory::Patch => PatchError::new_err(msg),
        ErrorCategory::Degenerate => DegenerateError::new_err(msg),
        ErrorCategory::Dimension => DimensionError::new_err(msg),
        ErrorCategory::Internal => HctError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for hct_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Branch triad `(p : q : s)` with `p·v − q·i = s`.
#[pyclass(name = "Triad", module = "hct", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyTriad(Triad);

#[pymethods]
impl PyTriad {
    #[new]
    #[pyo3(signature = (p, q, s = C64::new(0.0, 0.0)))]
    fn new(p: C64, q: C64, s: C64) -> PyResult<Self> {
        Triad::new(p, q, s).py().map(PyTriad)
    }

    #[staticmethod]
    #[pyo3(signature = (z, vs = C64::new(0.0, 0.0)))]
    fn impedance(z: C64, vs: C64) -> PyResult<Self> {
        Triad::from_classical(ClassicalElement::Impedance { z, v_s: vs }).py().map(PyTriad)
    }

    #[staticmethod]
    #[pyo3(signature = (y, i_s = C64::new(0.0, 0.0)))]
    fn admittance(y: C64, i_s: C64) -> PyResult<Self> {
        Triad::from_classical(ClassicalElement::Admittance { y, i_s }).py().map(PyTriad)
    }

    #[staticmethod]
    #[pyo3(signature = (v, z = C64::new(0.0, 0.0)))]
    fn vsource(v: C64, z: C64) -> PyResult<Self> {
        Triad::from_classical(ClassicalElement::VoltageSource { v, z }).py().map(PyTriad)
    }

    #[staticmethod]
    #[pyo3(signature = (i, y = C64::new(0.0, 0.0)))]
    fn isource(i: C64, y: C64) -> PyResult<Self> {
        Triad::from_classical(ClassicalElement::CurrentSource { i, y }).py().map(PyTriad)
    }

    #[staticmethod]
    fn short() -> Self {
        PyTriad(Triad::short())
    }

    #[staticmethod]
    fn open() -> Self {
        PyTriad(Triad::open())
    }

    #[getter]
    fn p(&self) -> C64 {
        self.0.p()
    }

    #[getter]
    fn q(&self) -> C64 {
        self.0.q()
    }

    #[getter]
    fn s(&self) -> C64 {
        self.0.s()
    }

    /// Representative with `|p|² + |q|² = 1`.
    fn normalize(&self) -> Self {
        PyTriad(self.0.normalize())
    }

    /// `(in_z_patch, in_y_patch)`: whether `p ≠ 0`, resp. `q ≠ 0`.
    #[pyo3(signature = (tol = 1e-9))]
    fn patch(&self, tol: f64) -> (bool, bool) {
        let patch = self.0.patch_with_tol(tol);
        (patch.z, patch.y)
    }

    #[pyo3(signature = (other, tol = 1e-9))]
    fn projectively_eq(&self, other: &PyTriad, tol: f64) -> bool {
        self.0.projectively_eq(&other.0, tol)
    }

    fn __repr__(&self) -> String {
        let c = |z: C64| format!("({}{:+}j)", z.re, z.im);
        format!("Triad({}, {}, {})", c(self.0.p()), c(self.0.q()), c(self.0.s()))
    }
}

/// Solution of one model.
#[pyclass(name = "Solution", module = "hct", frozen, get_all)]
struct PySolution {
    model: String,
    i: Vec<C64>,
    v: Vec<C64>,
    /// Homogeneous unknowns for symmetric solves, else `None`.
    u: Option<Vec<C64>>,
    x: Vec<C64>,
    det: C64,
    kcl: f64,
    kvl: f64,
    characteristic: f64,
}

#[pymethods]
impl PySolution {
    fn residuals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("kcl", self.kcl)?;
        d.set_item("kvl", self.kvl)?;
        d.set_item("characteristic", self.characteristic)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Solution(model={:?}, branches={})", self.model, self.i.len())
    }
}

/// Circuit on a connected digraph with one triad per branch.
#[pyclass(name = "Circuit", module = "hct", frozen)]
struct PyCircuit {
    circuit: Circuit,
    branch_ids: Vec<String>,
    nodes: Vec<String>,
}

fn model_kind(
    name: &str,
    m: usize,
    homogeneous: Option<Vec<usize>>,
    admittance: Option<Vec<usize>>,
) -> PyResult<ModelKind> {
    let set = |ids: Vec<usize>| IndexSet::from_zero_based(ids, m).py();
    let partial_only = homogeneous.is_some() || admittance.is_some();
    let kind = match name {
        "full" => ModelKind::Full,
        "symmetric" => ModelKind::Symmetric,
        "bcurrent" | "branch-current" => ModelKind::BranchCurrent,
        "bvoltage" | "branch-voltage" => ModelKind::BranchVoltage,
        "partial" => {
            return Ok(ModelKind::Partial {
                homogeneous: set(homogeneous.unwrap_or_default())?,
                admittance: set(admittance.unwrap_or_default())?,
            })
        }
        other => return Err(ParseError::new_err(format!("unknown model '{other}'"))),
    };
    if partial_only {
        return Err(ParseError::new_err("homogeneous/admittance apply only to model='partial'"));
    }
    Ok(kind)
}

/// `(kind, indices, observed value)`.
type FaultRow = (String, Vec<usize>, Option<C64>);

fn fault_label(f: &Fault) -> (String, Vec<usize>) {
    match *f {
        Fault::Short(k) => ("short".into(), vec![k]),
        Fault::Open(k) => ("open".into(), vec![k]),
        Fault::Bridge(a, b) => ("bridge".into(), vec![a, b]),
    }
}

#[pymethods]
impl PyCircuit {
    /// `branches` are `(tail, head)` node pairs; `couplings` are
    /// `(controlled, controlling, alpha, beta)` tuples.
    #[new]
    #[pyo3(signature = (node_count, branches, triads, reference = None, couplings = Vec::new()))]
    fn new(
        node_count: usize,
        branches: Vec<(usize, usize)>,
        triads: Vec<PyTriad>,
        reference: Option<usize>,
        couplings: Vec<(usize, usize, C64, C64)>,
    ) -> PyResult<Self> {
        let graph = Digraph::new(node_count, branches).py()?;
        let config = Configuration::new(triads.into_iter().map(|t| t.0).collect());
        let reference = reference.unwrap_or(node_count.saturating_sub(1));
        let pair = CutCyclePair::default_for(&graph, reference).py()?;
        let couplings = couplings
            .into_iter()
            .map(|(c, k, a, b)| Coupling::new(c, k, a, b))
            .collect::<hct_core::Result<Vec<_>>>()
            .py()?;
        let m = graph.branch_count();
        let circuit = Circuit::with_pair(graph, config, pair).py()?.with_couplings(couplings).py()?;
        Ok(PyCircuit {
            circuit,
            branch_ids: (1..=m).map(|k| k.to_string()).collect(),
            nodes: (0..node_count).map(|k| k.to_string()).collect(),
        })
    }

    /// Parses `.hct` netlist text.
    #[staticmethod]
    #[pyo3(signature = (text, reference = None))]
    fn from_netlist(text: &str, reference: Option<&str>) -> PyResult<Self> {
        let netlist = Netlist::parse(text).py()?;
        let circuit = netlist.circuit(reference).py()?;
        Ok(PyCircuit {
            circuit,
            branch_ids: netlist.branch_ids,
            nodes: netlist.nodes,
        })
    }

    #[getter]
    fn branch_ids(&self) -> Vec<String> {
        self.branch_ids.clone()
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.nodes.clone()
    }

    #[getter]
    fn branches(&self) -> Vec<(usize, usize)> {
        self.circuit.graph().branches().to_vec()
    }

    #[getter]
    fn triads(&self) -> Vec<PyTriad> {
        self.circuit.config().triads().iter().copied().map(PyTriad).collect()
    }

    #[getter]
    fn k_ab(&self) -> i64 {
        self.circuit.pair().k_ab()
    }

    fn branch_index(&self, id: &str) -> PyResult<usize> {
        self.branch_ids
            .iter()
            .position(|b| b == id)
            .ok_or_else(|| to_py(Error::UnknownBranch(id.to_string())))
    }

    fn node_index(&self, name: &str) -> PyResult<usize> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| to_py(Error::UnknownNode(name.to_string())))
    }

    /// Copy with triad `k` replaced.
    fn with_triad(&self, k: usize, triad: PyTriad) -> PyResult<Self> {
        if k >= self.circuit.branch_count() {
            return Err(to_py(Error::UnknownBranch(k.to_string())));
        }
        let config = self.circuit.config().with_triad(k, triad.0);
        Ok(PyCircuit {
            circuit: self.circuit.with_config(config).py()?,
            branch_ids: self.branch_ids.clone(),
            nodes: self.nodes.clone(),
        })
    }

    /// `model` is one of `full`, `symmetric`, `bcurrent`, `bvoltage`,
    /// `partial`.
    #[pyo3(signature = (model = "symmetric", tol = 1e-9, homogeneous = None, admittance = None))]
    fn solve(
        &self,
        model: &str,
        tol: f64,
        homogeneous: Option<Vec<usize>>,
        admittance: Option<Vec<usize>>,
    ) -> PyResult<PySolution> {
        let kind = model_kind(model, self.circuit.branch_count(), homogeneous, admittance)?;
        let r = self.circuit.solve(&kind, tol).py()?;
        Ok(PySolution {
            model: kind.name().to_string(),
            u: r.u(),
            i: r.i,
            v: r.v,
            x: r.x,
            det: r.det,
            kcl: r.residuals.kcl,
            kvl: r.residuals.kvl,
            characteristic: r.residuals.characteristic,
        })
    }

    /// `K(p, q)` rendered over positional variables `p1..pm`, `q1..qm`.
    fn kirchhoff_polynomial(&self) -> PyResult<String> {
        Ok(KirchhoffPolynomial::new(self.circuit.graph(), DEFAULT_TREE_CAP).py()?.to_string())
    }

    /// `K` evaluated at this circuit's `(p, q)`.
    fn kirchhoff_value(&self) -> PyResult<C64> {
        let cfg = self.circuit.config();
        KirchhoffPolynomial::new(self.circuit.graph(), DEFAULT_TREE_CAP)
            .py()?
            .evaluate(&cfg.p(), &cfg.q())
            .py()
    }

    fn tree_count(&self) -> PyResult<i64> {
        tree_count(self.circuit.pair()).py()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn degeneracy<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let d = self.circuit.degeneracy(tol, DEFAULT_TREE_CAP).py()?;
        let out = PyDict::new(py);
        out.set_item("degenerate", d.degenerate)?;
        out.set_item("value", d.value)?;
        out.set_item("relative_value", d.relative_value())?;
        Ok(out)
    }

    /// Thévenin/Norton data between nodes `plus` and `minus`; a degenerate
    /// side yields `None`.
    #[pyo3(signature = (plus, minus, tol = 1e-9))]
    fn thevenin<'py>(&self, py: Python<'py>, plus: usize, minus: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = thevenin(&self.circuit, (plus, minus), tol).py()?;
        let out = PyDict::new(py);
        out.set_item("v_th", r.v_th.as_ref().ok().copied())?;
        out.set_item("i_n", r.i_n.as_ref().ok().copied())?;
        out.set_item("z_th", r.z_th)?;
        out.set_item("z", r.z_affine(tol))?;
        out.set_item("det_open", r.det_open)?;
        out.set_item("det_short", r.det_short)?;
        Ok(out)
    }

    /// Every single short/open fault except on `observable` and sources,
    /// as `(kind, [branch])` tuples.
    #[pyo3(signature = (observable, tol = 1e-9))]
    fn single_faults(&self, observable: usize, tol: f64) -> Vec<(String, Vec<usize>)> {
        single_faults(&self.circuit, observable, tol).iter().map(fault_label).collect()
    }

    /// Observed voltage per fault, baseline first, as `(kind, indices,
    /// value)`; a singular row has value `None`.
    #[pyo3(signature = (observable, shorts = Vec::new(), opens = Vec::new(), bridges = Vec::new(), tol = 1e-9, all_single = false))]
    fn fault_sweep(
        &self,
        observable: usize,
        shorts: Vec<usize>,
        opens: Vec<usize>,
        bridges: Vec<(usize, usize)>,
        tol: f64,
        all_single: bool,
    ) -> PyResult<Vec<FaultRow>> {
        let mut faults = if all_single {
            single_faults(&self.circuit, observable, tol)
        } else {
            Vec::new()
        };
        faults.extend(shorts.into_iter().map(Fault::Short));
        faults.extend(opens.into_iter().map(Fault::Open));
        faults.extend(bridges.into_iter().map(|(a, b)| Fault::Bridge(a, b)));
        let table = fault_sweep(&self.circuit, &faults, observable, tol).py()?;
        Ok(table
            .rows
            .iter()
            .map(|row| {
                let (kind, idx) = row.fault.as_ref().map_or(("baseline".into(), Vec::new()), fault_label);
                (kind, idx, row.value.as_ref().ok().copied())
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(nodes={}, branches={})",
            self.circuit.graph().node_count(),
            self.circuit.branch_count()
        )
    }
}

/// Z-parameter existence for a Π model (branch 2 controlled by branch 1).
#[pyfunction]
#[pyo3(signature = (p, q, alpha, beta, tol = 1e-9))]
fn pi_zparams<'py>(
    py: Python<'py>,
    p: [C64; 3],
    q: [C64; 3],
    alpha: C64,
    beta: C64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = PiModel::new(p, q, alpha, beta).py()?.zparam_existence(tol).py()?;
    let out = PyDict::new(py);
    out.set_item("exists", r.exists)?;
    out.set_item("det", r.det)?;
    out.set_item("assembled_det", r.assembled_det)?;
    Ok(out)
}

#[pymodule]
fn hct(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyTriad>()?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(pi_zparams, m)?)?;
    m.add("HctError", py.get_type::<HctError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("PatchError", py.get_type::<PatchError>())?;
    m.add("DegenerateError", py.get_type::<DegenerateError>())?;
    m.add("DimensionError", py.get_type::<DimensionError>())?;
    Ok(())
}
