//! Assembly and solution of the circuit models: the `2m` general model, the
//! branch-current and branch-voltage reductions, the symmetric homogeneous
//! model and partially homogeneous models; Thévenin/Norton extraction and
//! fault sweeps built on them.
//!
//! Every reduced model is a per-branch affine parametrization
//! `i = Cᵢ·x + i₀`, `v = Cᵥ·x + v₀` of the characteristic, substituted into
//! Kirchhoff's laws: `[A·Cᵢ; B·Cᵥ]·x = [−A·i₀; −B·v₀]`.

use std::fmt;

use rayon::prelude::*;

use crate::config::{Configuration, Triad, C64};
use crate::coupled::{validate_couplings, ControlledPair, Coupling};
use crate::error::{Error, Result};
use crate::graph::{CutCyclePair, Digraph};
use crate::kirchhoff::{Degeneracy, KirchhoffPolynomial};
use crate::numerics::{DenseMatrix, IndexSet, Lu, DEFAULT_TOL};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Which model family to assemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    /// Unknowns `(i, v)`, `2m` equations.
    Full,
    /// Unknowns `i`; needs `p ≠ 0` everywhere.
    BranchCurrent,
    /// Unknowns `v`; needs `q ≠ 0` everywhere.
    BranchVoltage,
    /// Unknowns `u`; valid for every configuration.
    Symmetric,
    /// Homogeneous unknowns on `homogeneous` (1-based ids); elsewhere the
    /// current is the unknown (impedance view) unless the branch is listed
    /// in `admittance` or has `p = 0`, in which case the voltage is.
    Partial {
        homogeneous: IndexSet,
        admittance: IndexSet,
    },
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::BranchCurrent => "branch-current",
            ModelKind::BranchVoltage => "branch-voltage",
            ModelKind::Symmetric => "symmetric",
            ModelKind::Partial { .. } => "partial",
        }
    }

    /// Partial model with the default classical views.
    pub fn partial(homogeneous: IndexSet) -> Self {
        let m = homogeneous.universe();
        ModelKind::Partial {
            homogeneous,
            admittance: IndexSet::new(Vec::new(), m).expect("empty set is valid"),
        }
    }
}

/// Meaning of one solution component (0-based branch).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unknown {
    Current(usize),
    Voltage(usize),
    Homogeneous(usize),
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unknown::Current(k) => write!(f, "i{}", k + 1),
            Unknown::Voltage(k) => write!(f, "v{}", k + 1),
            Unknown::Homogeneous(k) => write!(f, "u{}", k + 1),
        }
    }
}

/// Affine maps `i = ci·x + oi`, `v = cv·x + ov` from a model's unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub ci: DenseMatrix<C64>,
    pub oi: Vec<C64>,
    pub cv: DenseMatrix<C64>,
    pub ov: Vec<C64>,
}

impl Recovery {
    pub fn apply(&self, x: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
        let add = |a: Vec<C64>, b: &[C64]| a.into_iter().zip(b).map(|(x, y)| x + y).collect();
        Ok((add(self.ci.mul_vec(x)?, &self.oi), add(self.cv.mul_vec(x)?, &self.ov)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledModel {
    pub kind: ModelKind,
    pub coefficient: DenseMatrix<C64>,
    pub rhs: Vec<C64>,
    pub unknowns: Vec<Unknown>,
    pub recovery: Recovery,
}

/// Residuals of a solution, relative to its magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `A·i`
    pub kcl: f64,
    /// `B·v`
    pub kvl: f64,
    /// `−Q·i + P·v − s`
    pub characteristic: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.kcl.max(self.kvl).max(self.characteristic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub kind: ModelKind,
    pub unknowns: Vec<Unknown>,
    /// Raw solution vector, ordered as `unknowns`.
    pub x: Vec<C64>,
    pub i: Vec<C64>,
    pub v: Vec<C64>,
    pub residuals: Residuals,
    /// Determinant of the coefficient matrix.
    pub det: C64,
}

impl SolveResult {
    /// Homogeneous unknowns, when every component is one.
    pub fn u(&self) -> Option<Vec<C64>> {
        if self.unknowns.iter().all(|u| matches!(u, Unknown::Homogeneous(_))) {
            Some(self.x.clone())
        } else {
            None
        }
    }

    /// Homogeneous unknown of branch `k` (0-based), if the model has one.
    pub fn homogeneous(&self, k: usize) -> Option<C64> {
        self.unknowns
            .iter()
            .position(|u| *u == Unknown::Homogeneous(k))
            .map(|pos| self.x[pos])
    }
}

/// A circuit: digraph, branch triads, controlled-source couplings and a
/// cut/cycle pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    graph: Digraph,
    config: Configuration,
    couplings: Vec<Coupling>,
    pair: CutCyclePair,
}

impl Circuit {
    /// Uses the default pair with the highest-numbered node as reference.
    pub fn new(graph: Digraph, config: Configuration) -> Result<Self> {
        let pair = CutCyclePair::default_for(&graph, graph.node_count() - 1)?;
        Circuit::with_pair(graph, config, pair)
    }

    pub fn with_pair(graph: Digraph, config: Configuration, pair: CutCyclePair) -> Result<Self> {
        if config.len() != graph.branch_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} triads for {} branches",
                config.len(),
                graph.branch_count()
            )));
        }
        if pair.cut().cols() != graph.branch_count() {
            return Err(Error::DimensionMismatch(format!(
                "cut/cycle pair has {} columns for {} branches",
                pair.cut().cols(),
                graph.branch_count()
            )));
        }
        Ok(Circuit {
            graph,
            config,
            couplings: Vec::new(),
            pair,
        })
    }

    pub fn with_couplings(mut self, couplings: Vec<Coupling>) -> Result<Self> {
        validate_couplings(&couplings, self.graph.branch_count())?;
        self.couplings = couplings;
        self.controlled_pairs()?;
        Ok(self)
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn pair(&self) -> &CutCyclePair {
        &self.pair
    }

    pub fn branch_count(&self) -> usize {
        self.graph.branch_count()
    }

    /// Same topology, pair and couplings with another configuration.
    pub fn with_config(&self, config: Configuration) -> Result<Self> {
        if config.len() != self.branch_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} triads for {} branches",
                config.len(),
                self.branch_count()
            )));
        }
        let out = Circuit {
            config,
            ..self.clone()
        };
        out.controlled_pairs()?;
        Ok(out)
    }

    fn controlled_pairs(&self) -> Result<Vec<(Coupling, ControlledPair)>> {
        self.couplings
            .iter()
            .map(|c| {
                let pair = ControlledPair::new(
                    *self.config.triad(c.controlling),
                    *self.config.triad(c.controlled),
                    c.alpha,
                    c.beta,
                )?;
                Ok((*c, pair))
            })
            .collect()
    }

    /// `(P, Q)` of the characteristic `−Q·i + P·v = s`, couplings included.
    pub fn characteristic(&self) -> (DenseMatrix<C64>, DenseMatrix<C64>) {
        let mut p = DenseMatrix::diagonal(&self.config.p());
        let mut q = DenseMatrix::diagonal(&self.config.q());
        for c in &self.couplings {
            p[(c.controlled, c.controlling)] = c.alpha;
            q[(c.controlled, c.controlling)] = -c.beta;
        }
        (p, q)
    }

    fn cut_c(&self) -> DenseMatrix<C64> {
        self.pair.cut().to_scalar()
    }

    fn cycle_c(&self) -> DenseMatrix<C64> {
        self.pair.cycle().to_scalar()
    }

    fn reduced(&self, kind: ModelKind, unknowns: Vec<Unknown>, rec: Recovery) -> Result<AssembledModel> {
        let (a, b) = (self.cut_c(), self.cycle_c());
        let coefficient = a.matmul(&rec.ci)?.vstack(&b.matmul(&rec.cv)?)?;
        let rhs = a
            .mul_vec(&rec.oi)?
            .into_iter()
            .chain(b.mul_vec(&rec.ov)?)
            .map(|x| -x)
            .collect();
        Ok(AssembledModel {
            kind,
            coefficient,
            rhs,
            unknowns,
            recovery: rec,
        })
    }

    /// `[[A, 0], [0, B], [−Q, P]]·(i; v) = (0; 0; s)`.
    pub fn assemble_full(&self) -> Result<AssembledModel> {
        let m = self.branch_count();
        let (a, b) = (self.cut_c(), self.cycle_c());
        let (p, q) = self.characteristic();
        let za = DenseMatrix::zeros(a.rows(), m);
        let zb = DenseMatrix::zeros(b.rows(), m);
        let coefficient = a
            .hstack(&za)?
            .vstack(&zb.hstack(&b)?)?
            .vstack(&q.map(|x| -x).hstack(&p)?)?;
        let rhs = vec![zero(); m].into_iter().chain(self.config.s()).collect();
        let unknowns = (0..m)
            .map(Unknown::Current)
            .chain((0..m).map(Unknown::Voltage))
            .collect();
        let eye = DenseMatrix::<C64>::identity(m);
        let zm = DenseMatrix::zeros(m, m);
        let recovery = Recovery {
            ci: eye.hstack(&zm)?,
            oi: vec![zero(); m],
            cv: zm.hstack(&eye)?,
            ov: vec![zero(); m],
        };
        Ok(AssembledModel {
            kind: ModelKind::Full,
            coefficient,
            rhs,
            unknowns,
            recovery,
        })
    }

    /// `[A·P̂; B·Q̂]·u = [−A·i₀; −B·v₀]` with the origin
    /// `i₀ = −Q̄·s̄`, `v₀ = P̄·s̄`, `s̄_k = s_k / (|p_k|² + |q_k|²)`.
    pub fn assemble_homogeneous_symmetric(&self) -> Result<AssembledModel> {
        let m = self.branch_count();
        let triads = self.config.triads();
        let mut ci = DenseMatrix::diagonal(&self.config.p());
        let mut cv = DenseMatrix::diagonal(&self.config.q());
        let (mut oi, mut ov): (Vec<C64>, Vec<C64>) = triads.iter().map(symmetric_origin).unzip();
        for (c, pair) in self.controlled_pairs()? {
            let (gamma, delta) = pair.gamma_delta();
            ci[(c.controlled, c.controlling)] = gamma;
            cv[(c.controlled, c.controlling)] = delta;
            let (i0, v0) = pair.origin();
            oi[c.controlled] = i0[1];
            ov[c.controlled] = v0[1];
        }
        let rec = Recovery { ci, oi, cv, ov };
        self.reduced(ModelKind::Symmetric, (0..m).map(Unknown::Homogeneous).collect(), rec)
    }

    fn patch_guard(&self, model: &'static str, requirement: &'static str, bad: Vec<usize>) -> Result<()> {
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::PatchViolation {
                model,
                requirement,
                branches: bad.into_iter().map(|k| k + 1).collect(),
            })
        }
    }

    /// `[A; B·Z]·i = [0; −B·v_s]` with `Z = P⁻¹Q`, `v_s = P⁻¹s`.
    pub fn assemble_branch_current(&self, tol: f64) -> Result<AssembledModel> {
        self.patch_guard("branch-current", "p != 0 on every branch", self.config.outside_z_patch(tol))?;
        let m = self.branch_count();
        let (p, q) = self.characteristic();
        let lu = Lu::factor(&p)?;
        let rec = Recovery {
            ci: DenseMatrix::identity(m),
            oi: vec![zero(); m],
            cv: lu.solve(&q, 0.0)?,
            ov: lu.solve_vec(&self.config.s(), 0.0)?,
        };
        self.reduced(ModelKind::BranchCurrent, (0..m).map(Unknown::Current).collect(), rec)
    }

    /// `[A·Y; B]·v = [A·i_s; 0]` with `Y = Q⁻¹P`, `i_s = Q⁻¹s`.
    pub fn assemble_branch_voltage(&self, tol: f64) -> Result<AssembledModel> {
        self.patch_guard("branch-voltage", "q != 0 on every branch", self.config.outside_y_patch(tol))?;
        let m = self.branch_count();
        let (p, q) = self.characteristic();
        let lu = Lu::factor(&q)?;
        let rec = Recovery {
            ci: lu.solve(&p, 0.0)?,
            oi: lu.solve_vec(&self.config.s(), 0.0)?.into_iter().map(|x| -x).collect(),
            cv: DenseMatrix::identity(m),
            ov: vec![zero(); m],
        };
        self.reduced(ModelKind::BranchVoltage, (0..m).map(Unknown::Voltage).collect(), rec)
    }

    /// Partially homogeneous model; see [`ModelKind::Partial`].
    pub fn assemble_partial(
        &self,
        homogeneous: &IndexSet,
        admittance: &IndexSet,
        tol: f64,
    ) -> Result<AssembledModel> {
        let m = self.branch_count();
        for set in [homogeneous, admittance] {
            if set.universe() != m {
                return Err(Error::DimensionMismatch(format!(
                    "index set over {} branches for a circuit with {m}",
                    set.universe()
                )));
            }
        }
        if !self.couplings.is_empty() {
            return Err(Error::Unsupported(
                "partially homogeneous models with controlled sources".into(),
            ));
        }
        let bad: Vec<usize> = admittance
            .zero_based()
            .into_iter()
            .filter(|&k| !homogeneous.contains(k + 1) && !self.config.triad(k).patch_with_tol(tol).y)
            .collect();
        self.patch_guard("partial", "q != 0 on admittance-form branches", bad)?;
        let mut ci = DenseMatrix::zeros(m, m);
        let mut cv = DenseMatrix::zeros(m, m);
        let mut oi = vec![zero(); m];
        let mut ov = vec![zero(); m];
        let mut unknowns = Vec::with_capacity(m);
        for (k, t) in self.config.triads().iter().enumerate() {
            if homogeneous.contains(k + 1) {
                ci[(k, k)] = t.p();
                cv[(k, k)] = t.q();
                (oi[k], ov[k]) = symmetric_origin(t);
                unknowns.push(Unknown::Homogeneous(k));
            } else if t.patch_with_tol(tol).z && !admittance.contains(k + 1) {
                ci[(k, k)] = one();
                cv[(k, k)] = t.q() / t.p();
                ov[k] = t.s() / t.p();
                unknowns.push(Unknown::Current(k));
            } else {
                cv[(k, k)] = one();
                ci[(k, k)] = t.p() / t.q();
                oi[k] = -t.s() / t.q();
                unknowns.push(Unknown::Voltage(k));
            }
        }
        let rec = Recovery { ci, oi, cv, ov };
        let kind = ModelKind::Partial {
            homogeneous: homogeneous.clone(),
            admittance: admittance.clone(),
        };
        self.reduced(kind, unknowns, rec)
    }

    pub fn assemble(&self, kind: &ModelKind, tol: f64) -> Result<AssembledModel> {
        match kind {
            ModelKind::Full => self.assemble_full(),
            ModelKind::BranchCurrent => self.assemble_branch_current(tol),
            ModelKind::BranchVoltage => self.assemble_branch_voltage(tol),
            ModelKind::Symmetric => self.assemble_homogeneous_symmetric(),
            ModelKind::Partial {
                homogeneous,
                admittance,
            } => self.assemble_partial(homogeneous, admittance, tol),
        }
    }

    /// Assembles, solves and verifies Kirchhoff's laws and the
    /// characteristic on the recovered `(i, v)`.
    pub fn solve(&self, kind: &ModelKind, tol: f64) -> Result<SolveResult> {
        let model = self.assemble(kind, tol)?;
        self.solve_model(&model, tol)
    }

    pub fn solve_model(&self, model: &AssembledModel, tol: f64) -> Result<SolveResult> {
        let lu = Lu::factor(&model.coefficient)?;
        let x = lu.solve_vec(&model.rhs, tol)?;
        let (i, v) = model.recovery.apply(&x)?;
        let residuals = self.residuals(&i, &v)?;
        let limit = tol.max(DEFAULT_TOL);
        for (which, value) in [
            ("KCL", residuals.kcl),
            ("KVL", residuals.kvl),
            ("characteristic", residuals.characteristic),
        ] {
            // NaN residuals fail too.
            if value.is_nan() || value > limit {
                return Err(Error::ResidualCheck { which, value, limit });
            }
        }
        Ok(SolveResult {
            kind: model.kind.clone(),
            unknowns: model.unknowns.clone(),
            x,
            i,
            v,
            residuals,
            det: lu.det(),
        })
    }

    /// Residuals of `A·i`, `B·v` and `−Q·i + P·v − s`, relative to the
    /// solution size `N = max(‖i‖, ‖v‖)` (max norms): `‖A·i‖/N`, `‖B·v‖/N`
    /// and, per branch, `|r_k| / ((Σ_j |P_kj| + |Q_kj|)·N + |s_k|)`.
    pub fn residuals(&self, i: &[C64], v: &[C64]) -> Result<Residuals> {
        let m = self.branch_count();
        if i.len() != m || v.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} currents and {} voltages for {m} branches",
                i.len(),
                v.len()
            )));
        }
        let norm = |x: &[C64]| x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let size = norm(i).max(norm(v));
        let kcl = ratio(norm(&self.cut_c().mul_vec(i)?), size);
        let kvl = ratio(norm(&self.cycle_c().mul_vec(v)?), size);
        let (p, q) = self.characteristic();
        let s = self.config.s();
        let characteristic = (0..m)
            .map(|r| {
                let (mut res, mut weight) = (-s[r], 0.0);
                for j in 0..m {
                    res += p[(r, j)] * v[j] - q[(r, j)] * i[j];
                    weight += p[(r, j)].norm() + q[(r, j)].norm();
                }
                ratio(res.norm(), weight * size + s[r].norm())
            })
            .fold(0.0, f64::max);
        Ok(Residuals {
            kcl,
            kvl,
            characteristic,
        })
    }

    /// Degeneracy verdict: Kirchhoff polynomial for uncoupled circuits,
    /// scaled determinant of the symmetric model otherwise.
    pub fn degeneracy(&self, tol: f64, cap: usize) -> Result<Degeneracy> {
        if self.couplings.is_empty() {
            return KirchhoffPolynomial::new(&self.graph, cap)?.degeneracy(&self.config, tol);
        }
        let model = self.assemble_homogeneous_symmetric()?;
        let lu = Lu::factor(&model.coefficient)?;
        let scale = model.coefficient.equilibration_scale();
        Ok(Degeneracy {
            degenerate: lu.is_singular(tol),
            value: lu.det(),
            scale,
        })
    }

    /// Appends a branch `tail → head` carrying `triad`.
    pub fn with_virtual_branch(&self, tail: usize, head: usize, triad: Triad) -> Result<Self> {
        let graph = self.graph.with_branch(tail, head)?;
        let mut config = self.config.clone();
        config.push(triad);
        let pair = CutCyclePair::default_for(&graph, graph.node_count() - 1)?;
        let mut out = Circuit::with_pair(graph, config, pair)?;
        out.couplings = self.couplings.clone();
        Ok(out)
    }
}

/// `(i₀, v₀) = (−q̄·s̄, p̄·s̄)` with `s̄ = s / (|p|² + |q|²)`.
pub fn symmetric_origin(t: &Triad) -> (C64, C64) {
    let sbar = t.s() / t.pq_norm_sqr();
    (-t.q().conj() * sbar, t.p().conj() * sbar)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Homogeneous unknowns valid for `new`, given a symmetric-model solution
/// `u` for `old`, when `new` is a branchwise rescaling of `old`.
///
/// With `p̃ = μp`, `q̃ = μq` the recovered `(i, v)` must agree, which gives
/// `ũ = (conj(p̃)(i − ĩ₀) + conj(q̃)(v − ṽ₀)) / (|p̃|² + |q̃|²)`; for symmetric
/// origins this is `u/μ`.
pub fn rescale_solution(
    u: &[C64],
    old: &Configuration,
    new: &Configuration,
    tol: f64,
) -> Result<Vec<C64>> {
    if u.len() != old.len() || new.len() != old.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} unknowns, {} old and {} new triads",
            u.len(),
            old.len(),
            new.len()
        )));
    }
    old.triads()
        .iter()
        .zip(new.triads())
        .zip(u)
        .enumerate()
        .map(|(k, ((t, nt), &uk))| {
            if t.ratio_to(nt, tol).is_none() {
                return Err(Error::NotProjectivelyEqual(k + 1));
            }
            let (i0, v0) = symmetric_origin(t);
            let (ni0, nv0) = symmetric_origin(nt);
            let (i, v) = (t.p() * uk + i0, t.q() * uk + v0);
            Ok((nt.p().conj() * (i - ni0) + nt.q().conj() * (v - nv0)) / nt.pq_norm_sqr())
        })
        .collect()
}

/// Thévenin/Norton data at a port.
#[derive(Debug, Clone, PartialEq)]
pub struct TheveninResult {
    /// Open-circuit voltage `v(port+) − v(port−)`.
    pub v_th: Result<C64>,
    /// Short-circuit current from `port+` to `port−` through the short.
    pub i_n: Result<C64>,
    /// Symmetric-model determinant with the load open (`q_l` coefficient).
    pub det_open: C64,
    /// Same with the load shorted (`p_l` coefficient).
    pub det_short: C64,
    /// `Z_th` as a projective pair `(p : q)`, `Z = q/p`, proportional to
    /// `(I_N : V_th)`.
    pub z_th: (C64, C64),
}

impl TheveninResult {
    /// Affine impedance, `None` when infinite.
    pub fn z_affine(&self, tol: f64) -> Option<C64> {
        let (p, q) = self.z_th;
        if p.norm() <= tol * q.norm() {
            None
        } else {
            Some(q / p)
        }
    }
}

/// Augments the circuit with a virtual load `port+ → port−` and solves the
/// symmetric model with the load open and shorted.
pub fn thevenin(circuit: &Circuit, port: (usize, usize), tol: f64) -> Result<TheveninResult> {
    let (plus, minus) = port;
    let n = circuit.graph().node_count();
    for node in [plus, minus] {
        if node >= n {
            return Err(Error::UnknownNode((node + 1).to_string()));
        }
    }
    if plus == minus {
        return Err(Error::InvalidGraph("port terminals must differ".into()));
    }
    let open = circuit.with_virtual_branch(plus, minus, Triad::open())?;
    let load = open.branch_count() - 1;
    let short = open.with_config(open.config().with_triad(load, Triad::short()))?;
    let side = |c: &Circuit, err: Error| -> (C64, Result<C64>) {
        let det = match c
            .assemble_homogeneous_symmetric()
            .and_then(|m| Lu::factor(&m.coefficient))
        {
            Ok(lu) => lu.det(),
            Err(e) => return (zero(), Err(e)),
        };
        let value = match c.solve(&ModelKind::Symmetric, tol) {
            Ok(r) => Ok(r.x[load]),
            Err(Error::SingularMatrix { .. }) => Err(err),
            Err(e) => Err(e),
        };
        (det, value)
    };
    let (det_open, v_th) = side(&open, Error::DegenerateTheveninSide);
    let (det_short, i_n) = side(&short, Error::DegenerateNortonSide);
    let norm = det_open.norm().max(det_short.norm());
    let z_th = if norm > 0.0 {
        (det_open / norm, det_short / norm)
    } else {
        (zero(), zero())
    };
    Ok(TheveninResult {
        v_th,
        i_n,
        det_open,
        det_short,
        z_th,
    })
}

/// A single fault. Branch ids and nodes are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Triad becomes `(1, 0, 0)`.
    Short(usize),
    /// Triad becomes `(0, 1, 0)`.
    Open(usize),
    /// A short between two nodes, through a virtual branch.
    Bridge(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultRow {
    /// `None` for the fault-free baseline.
    pub fault: Option<Fault>,
    /// Voltage of the observed branch.
    pub value: Result<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultTable {
    pub observable: usize,
    /// Baseline first, then faults in input order.
    pub rows: Vec<FaultRow>,
}

impl FaultTable {
    /// Groups fault rows (indices into `rows`, baseline excluded) whose
    /// observed values coincide within `rel_tol`; failed rows are omitted.
    /// Groups are ordered by first appearance.
    pub fn signatures(&self, rel_tol: f64) -> Vec<Vec<usize>> {
        let mut groups: Vec<(C64, Vec<usize>)> = Vec::new();
        for (idx, row) in self.rows.iter().enumerate() {
            let (Some(_), Ok(value)) = (&row.fault, &row.value) else {
                continue;
            };
            let scale = |a: C64, b: C64| rel_tol * a.norm().max(b.norm()).max(1.0);
            match groups.iter_mut().find(|(rep, _)| (*rep - value).norm() <= scale(*rep, *value)) {
                Some((_, members)) => members.push(idx),
                None => groups.push((*value, vec![idx])),
            }
        }
        groups.into_iter().map(|(_, members)| members).collect()
    }
}

/// Solves the symmetric model once per fault over a single augmented
/// topology: bridge faults add virtual branches that stay open except in
/// their own row. Rows run in parallel; a failed row does not stop the
/// sweep.
pub fn fault_sweep(
    circuit: &Circuit,
    faults: &[Fault],
    observable: usize,
    tol: f64,
) -> Result<FaultTable> {
    let m = circuit.branch_count();
    if observable >= m {
        return Err(Error::UnknownBranch((observable + 1).to_string()));
    }
    let mut bridges: Vec<(usize, usize)> = Vec::new();
    for f in faults {
        match *f {
            Fault::Short(k) | Fault::Open(k) if k >= m => {
                return Err(Error::UnknownBranch((k + 1).to_string()));
            }
            Fault::Bridge(a, b) => {
                let n = circuit.graph().node_count();
                if a >= n || b >= n {
                    return Err(Error::UnknownNode((a.max(b) + 1).to_string()));
                }
                if a == b {
                    return Err(Error::InvalidGraph("bridge terminals must differ".into()));
                }
                if !bridges.contains(&(a, b)) {
                    bridges.push((a, b));
                }
            }
            _ => {}
        }
    }
    let mut base = circuit.clone();
    for &(a, b) in &bridges {
        base = base.with_virtual_branch(a, b, Triad::open())?;
    }
    let row = |fault: Option<Fault>| -> FaultRow {
        let config = match fault {
            None => base.config().clone(),
            Some(Fault::Short(k)) => base.config().with_triad(k, Triad::short()),
            Some(Fault::Open(k)) => base.config().with_triad(k, Triad::open()),
            Some(Fault::Bridge(a, b)) => {
                let k = m + bridges.iter().position(|&x| x == (a, b)).expect("collected above");
                base.config().with_triad(k, Triad::short())
            }
        };
        let value = base
            .with_config(config)
            .and_then(|c| c.solve(&ModelKind::Symmetric, tol))
            .map(|r| r.v[observable]);
        FaultRow { fault, value }
    };
    let rows = std::iter::once(None)
        .chain(faults.iter().copied().map(Some))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(row)
        .collect();
    Ok(FaultTable { observable, rows })
}

/// Every single short/open fault on passive branches (`s = 0`) other than
/// `observable`, shorts first; a branch that is already open only gets a
/// short, and vice versa.
pub fn single_faults(circuit: &Circuit, observable: usize, tol: f64) -> Vec<Fault> {
    let mut out = Vec::new();
    for (k, t) in circuit.config().triads().iter().enumerate() {
        if k == observable || t.s().norm() > 0.0 {
            continue;
        }
        let patch = t.patch_with_tol(tol);
        if patch.y {
            out.push(Fault::Short(k));
        }
        if patch.z {
            out.push(Fault::Open(k));
        }
    }
    out.sort_by_key(|f| matches!(f, Fault::Open(_)));
    out
}
