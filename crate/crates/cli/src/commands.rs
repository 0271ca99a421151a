//! One function per subcommand, each producing a [`Report`].

use std::path::Path;

use hct_core::graph::{tree_count, DEFAULT_TREE_CAP};
use hct_core::numerics::Lu;
use hct_core::solver::{fault_sweep, single_faults, thevenin as thevenin_at, Fault, Unknown};
use hct_core::{ErrorCategory, IndexSet, KirchhoffPolynomial, ModelKind, PiModel, C64};
use serde_json::{json, Value};

use crate::format::{chop, complex, json_complex, noise_floor, real, table};
use crate::session::{error_json, CliError, Globals, Report, Session};
use crate::Model;

fn set_of(session: &Session, ids: &[String], m: usize) -> Result<IndexSet, CliError> {
    let mut members = Vec::with_capacity(ids.len());
    for id in ids {
        members.push(session.branch(id)? + 1);
    }
    members.sort_unstable();
    members.dedup();
    Ok(IndexSet::new(members, m)?)
}

/// Rewrites positional branch numbers in patch errors as netlist ids.
fn with_ids(session: &Session, e: hct_core::Error) -> CliError {
    match e {
        hct_core::Error::PatchViolation {
            model,
            requirement,
            branches,
        } => {
            let ids: Vec<&str> = branches.iter().map(|&k| session.id(k - 1)).collect();
            CliError::new(
                ErrorCategory::Patch,
                format!("{model} model requires {requirement}; violated at branches {}", ids.join(", ")),
            )
        }
        other => other.into(),
    }
}

fn unknown_label(session: &Session, u: &Unknown) -> String {
    let (tag, k) = match *u {
        Unknown::Current(k) => ('i', k),
        Unknown::Voltage(k) => ('v', k),
        Unknown::Homogeneous(k) => ('u', k),
    };
    format!("{tag}({})", session.id(k))
}

pub fn solve(
    globals: &Globals,
    file: &Path,
    model: Model,
    homog: Option<Vec<String>>,
    admittance: &[String],
) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let circuit = session.circuit()?;
    let m = circuit.branch_count();
    if model != Model::Partial && (homog.is_some() || !admittance.is_empty()) {
        return Err(CliError::parse("--homog and --admittance apply only to --model partial"));
    }
    let kind = match model {
        Model::Full => ModelKind::Full,
        Model::Symmetric => ModelKind::Symmetric,
        Model::Bcurrent => ModelKind::BranchCurrent,
        Model::Bvoltage => ModelKind::BranchVoltage,
        Model::Partial => {
            let homogeneous = match homog {
                Some(ids) => set_of(&session, &ids, m)?,
                None => {
                    let ideal = circuit
                        .config()
                        .triads()
                        .iter()
                        .enumerate()
                        .filter(|(_, t)| t.p().norm() == 0.0 || t.q().norm() == 0.0)
                        .map(|(k, _)| k)
                        .collect();
                    IndexSet::from_zero_based(ideal, m)?
                }
            };
            ModelKind::Partial {
                homogeneous,
                admittance: set_of(&session, admittance, m)?,
            }
        }
    };
    let r = circuit.solve(&kind, session.tol).map_err(|e| with_ids(&session, e))?;
    let sig = session.precision;
    let floor = noise_floor(r.i.iter().chain(&r.v).chain(&r.x));
    let show = |z: C64| complex(chop(z, floor), sig);

    let has_u = (0..m).any(|k| r.homogeneous(k).is_some());
    let mut header = vec!["branch", "from", "to"];
    if has_u {
        header.push("u");
    }
    header.extend(["i", "v"]);
    let rows: Vec<Vec<String>> = (0..m)
        .map(|k| {
            let (from, to) = circuit.graph().branches()[k];
            let mut row = vec![
                session.id(k).to_string(),
                session.netlist.nodes[from].clone(),
                session.netlist.nodes[to].clone(),
            ];
            if has_u {
                row.push(r.homogeneous(k).map_or("-".into(), show));
            }
            row.push(show(r.i[k]));
            row.push(show(r.v[k]));
            row
        })
        .collect();
    let res = r.residuals;
    let text = format!(
        "model: {}\ndet: {}\n{}residuals: kcl {}, kvl {}, characteristic {}\n",
        kind.name(),
        complex(r.det, sig),
        table(&header, &rows),
        real(res.kcl, 3),
        real(res.kvl, 3),
        real(res.characteristic, 3),
    );

    let branches = session.branches_json(|k, obj| {
        obj.insert("u".into(), r.homogeneous(k).map_or(Value::Null, json_complex));
        obj.insert("i".into(), json_complex(r.i[k]));
        obj.insert("v".into(), json_complex(r.v[k]));
    });
    let mut diagnostics = session.diagnostics("solve");
    diagnostics.insert("k_ab".into(), json!(circuit.pair().k_ab()));
    Ok(Report {
        text,
        branches,
        result: json!({
            "model": kind.name(),
            "det": json_complex(r.det),
            "unknowns": r.unknowns.iter().map(|u| unknown_label(&session, u)).collect::<Vec<_>>(),
            "x": r.x.iter().copied().map(json_complex).collect::<Vec<_>>(),
        }),
        residuals: json!({
            "kcl": res.kcl,
            "kvl": res.kvl,
            "characteristic": res.characteristic,
            "max": res.max(),
        }),
        diagnostics,
        failed: false,
    })
}

/// Legend line when positional variable indices differ from branch ids.
fn variable_legend(session: &Session) -> Option<String> {
    let ids = &session.netlist.branch_ids;
    if ids.iter().enumerate().all(|(k, id)| *id == (k + 1).to_string()) {
        return None;
    }
    let pairs: Vec<String> = ids.iter().enumerate().map(|(k, id)| format!("{}={id}", k + 1)).collect();
    Some(format!("variables: {}\n", pairs.join(" ")))
}

pub fn poly(globals: &Globals, file: &Path, graph_only: bool) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let k = KirchhoffPolynomial::new(&session.netlist.graph, DEFAULT_TREE_CAP)?;
    let (k0, k1) = (k.dehomogenize_trees(), k.dehomogenize_cotrees());
    let tau = k.tree_count();
    let mut text = format!("K = {k}\nK0(y) = {k0}\nK1(z) = {k1}\ntau = {tau}\n");
    let value = if graph_only {
        Value::Null
    } else {
        let cfg = &session.netlist.config;
        let v = k.evaluate(&cfg.p(), &cfg.q())?;
        text.push_str(&format!("K(p,q) = {}\n", complex(v, session.precision)));
        json_complex(v)
    };
    if let Some(legend) = variable_legend(&session) {
        text.push_str(&legend);
    }
    Ok(Report {
        text,
        branches: session.branches_json(|_, _| {}),
        result: json!({
            "K": k.to_string(),
            "K0": k0.to_string(),
            "K1": k1.to_string(),
            "tau": tau,
            "value": value,
            "variables": session.netlist.branch_ids,
        }),
        residuals: Value::Null,
        diagnostics: session.diagnostics("poly"),
        failed: false,
    })
}

pub fn degeneracy(globals: &Globals, file: &Path) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let circuit = session.circuit()?;
    let sig = session.precision;
    let d = circuit.degeneracy(session.tol, DEFAULT_TREE_CAP)?;
    let coupled = !circuit.couplings().is_empty();
    let name = if coupled { "det" } else { "K" };

    let (p, q) = (circuit.config().p(), circuit.config().q());
    let pair = circuit.pair();
    let ap = pair.cut().to_scalar::<C64>().scale_columns(&p)?;
    let bq = pair.cycle().to_scalar::<C64>().scale_columns(&q)?;
    let det_apbq = ap.vstack(&bq)?.determinant()?;
    let k_ab = pair.k_ab();
    let full = circuit.assemble_full()?;
    let lu = Lu::factor(&full.coefficient)?;
    let lu_singular = lu.is_singular(session.tol);

    let mut text = format!("{name} = {}\n", complex(d.value, sig));
    text.push_str(&if d.degenerate {
        format!("degenerate ({name} = 0)\n")
    } else {
        format!("non-degenerate ({name} = {})\n", complex(d.value, sig))
    });
    if !coupled {
        text.push_str(&format!(
            "det[AP;BQ] = {}, k_AB*K = {}\n",
            complex(det_apbq, sig),
            complex(d.value * k_ab as f64, sig)
        ));
    }
    text.push_str(&format!(
        "full-model LU: {} (ratio {})\n",
        if lu_singular { "singular" } else { "regular" },
        real(lu.degeneracy_ratio(), 3)
    ));
    let agrees = lu_singular == d.degenerate;
    if !agrees {
        text.push_str("warning: polynomial and LU verdicts disagree\n");
    }
    let mut diagnostics = session.diagnostics("degeneracy");
    diagnostics.insert("k_ab".into(), json!(k_ab));
    diagnostics.insert("verdicts_agree".into(), json!(agrees));
    Ok(Report {
        text,
        branches: session.branches_json(|_, _| {}),
        result: json!({
            "degenerate": d.degenerate,
            "value": json_complex(d.value),
            "relative_value": d.relative_value(),
            "source": if coupled { "symmetric_det" } else { "kirchhoff" },
            "det_ap_bq": if coupled { Value::Null } else { json_complex(det_apbq) },
            "lu_singular": lu_singular,
            "lu_ratio": lu.degeneracy_ratio(),
        }),
        residuals: Value::Null,
        diagnostics,
        failed: false,
    })
}

pub fn trees(globals: &Globals, file: &Path, limit: usize) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let circuit = session.circuit()?;
    let pair = circuit.pair();
    let tau = tree_count(pair)?;
    let (listed, truncated) = circuit.graph().first_spanning_trees(limit);
    let names: Vec<Vec<String>> = listed
        .iter()
        .map(|t| t.branches().zero_based().into_iter().map(|k| session.id(k).to_string()).collect())
        .collect();
    let mut text = format!(
        "tau = {tau}\nk_A = {}, k_B = {}, k_AB = {}\n",
        pair.k_a(),
        pair.k_b(),
        pair.k_ab()
    );
    for t in &names {
        text.push_str(&format!("{{{}}}\n", t.join(",")));
    }
    if truncated {
        text.push_str(&format!("... ({} more)\n", tau as usize - listed.len()));
    }
    let witness: Vec<&str> = pair.witness_tree().branches().zero_based().into_iter().map(|k| session.id(k)).collect();
    Ok(Report {
        text,
        branches: session.branches_json(|_, _| {}),
        result: json!({
            "tau": tau,
            "trees": names,
            "truncated": truncated,
            "k_a": pair.k_a(),
            "k_b": pair.k_b(),
            "k_ab": pair.k_ab(),
            "witness_tree": witness,
        }),
        residuals: Value::Null,
        diagnostics: session.diagnostics("trees"),
        failed: false,
    })
}

pub fn thevenin(globals: &Globals, file: &Path, port: (&str, &str)) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let circuit = session.circuit()?;
    let (plus, minus) = (session.node(port.0)?, session.node(port.1)?);
    let r = thevenin_at(&circuit, (plus, minus), session.tol)?;
    if let (Err(e), Err(_)) = (&r.v_th, &r.i_n) {
        return Err(CliError::new(
            ErrorCategory::Degenerate,
            format!("both port sides are degenerate ({e})"),
        ));
    }
    let sig = session.precision;
    let show = |v: &hct_core::Result<C64>| match v {
        Ok(z) => complex(*z, sig),
        Err(e) => format!("undefined ({e})"),
    };
    let z = r.z_affine(session.tol);
    let text = format!(
        "V_th = {}\nI_N = {}\nZ_th = ({} : {})\nZ = {}\n",
        show(&r.v_th),
        show(&r.i_n),
        complex(r.z_th.0, sig),
        complex(r.z_th.1, sig),
        z.map_or("infinite".into(), |z| complex(z, sig)),
    );
    let side = |v: &hct_core::Result<C64>| match v {
        Ok(z) => json_complex(*z),
        Err(_) => Value::Null,
    };
    let errors: Vec<Value> = [&r.v_th, &r.i_n].iter().filter_map(|v| v.as_ref().err().map(error_json)).collect();
    let mut diagnostics = session.diagnostics("thevenin");
    diagnostics.insert("errors".into(), Value::Array(errors));
    Ok(Report {
        text,
        branches: session.branches_json(|_, _| {}),
        result: json!({
            "port": [port.0, port.1],
            "v_th": side(&r.v_th),
            "i_n": side(&r.i_n),
            "det_open": json_complex(r.det_open),
            "det_short": json_complex(r.det_short),
            "z_th": [json_complex(r.z_th.0), json_complex(r.z_th.1)],
            "z": z.map_or(json!("infinite"), json_complex),
        }),
        residuals: Value::Null,
        diagnostics,
        failed: false,
    })
}

pub struct FaultRequest {
    pub observe: Option<String>,
    pub short: Vec<String>,
    pub open: Vec<String>,
    pub bridge: Vec<String>,
    pub all_single: bool,
    pub signature_tol: f64,
}

fn fault_json(session: &Session, f: &Fault) -> (String, Value) {
    let nodes = &session.netlist.nodes;
    match *f {
        Fault::Short(k) => {
            let t = session.netlist.config.triad(k);
            let virtual_open = t.p().norm() == 0.0 && t.s().norm() == 0.0;
            let kind = if virtual_open { "bridge" } else { "short" };
            (format!("{kind} {}", session.id(k)), json!({ "kind": kind, "branch": session.id(k) }))
        }
        Fault::Open(k) => (format!("open {}", session.id(k)), json!({ "kind": "open", "branch": session.id(k) })),
        Fault::Bridge(a, b) => (
            format!("bridge {}:{}", nodes[a], nodes[b]),
            json!({ "kind": "bridge", "nodes": [nodes[a], nodes[b]] }),
        ),
    }
}

fn parse_bridge(session: &Session, spec: &str) -> Result<Fault, CliError> {
    let (a, b) = spec
        .split_once(':')
        .ok_or_else(|| CliError::parse(format!("bridge '{spec}' must be written n+:n-")))?;
    Ok(Fault::Bridge(session.node(a)?, session.node(b)?))
}

pub fn faults(globals: &Globals, file: &Path, req: FaultRequest) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let circuit = session.circuit()?;
    let observe_id = req
        .observe
        .or_else(|| session.netlist.options.observe.clone())
        .ok_or_else(|| CliError::parse("no observed branch: pass --observe or 'option observe='"))?;
    let observable = session.branch(&observe_id)?;
    if !(req.signature_tol.is_finite() && req.signature_tol >= 0.0) {
        return Err(CliError::parse("--signature-tol must be non-negative"));
    }

    let mut list: Vec<Fault> = Vec::new();
    let mut push = |f: Fault| {
        if !list.contains(&f) {
            list.push(f);
        }
    };
    if req.all_single {
        single_faults(&circuit, observable, session.tol).into_iter().for_each(&mut push);
    }
    for id in &req.short {
        push(Fault::Short(session.branch(id)?));
    }
    for id in &req.open {
        push(Fault::Open(session.branch(id)?));
    }
    let declared = if req.all_single { session.netlist.bridges.clone() } else { Vec::new() };
    for (a, b) in declared {
        push(Fault::Bridge(a, b));
    }
    for spec in &req.bridge {
        push(parse_bridge(&session, spec)?);
    }
    if list.is_empty() {
        return Err(CliError::parse("no faults requested: use --short, --open, --bridge or --all-single"));
    }

    let table_data = fault_sweep(&circuit, &list, observable, session.tol)?;
    let groups = table_data.signatures(req.signature_tol);
    let mut signature_of = vec![None; table_data.rows.len()];
    for (g, members) in groups.iter().enumerate() {
        for &row in members {
            signature_of[row] = Some(g + 1);
        }
    }

    let sig = session.precision;
    let floor = noise_floor(table_data.rows.iter().filter_map(|r| r.value.as_ref().ok()));
    let mut rows_text = Vec::new();
    let mut rows_json = Vec::new();
    for (idx, row) in table_data.rows.iter().enumerate() {
        let (label, fault) = match &row.fault {
            None => ("baseline".to_string(), Value::Null),
            Some(f) => fault_json(&session, f),
        };
        let (value_text, value_json, error) = match &row.value {
            Ok(v) => (complex(chop(*v, floor), sig), json_complex(*v), Value::Null),
            Err(e) => (format!("error: {e}"), Value::Null, error_json(e)),
        };
        rows_text.push(vec![
            label.clone(),
            value_text,
            signature_of[idx].map_or("-".into(), |s| format!("S{s}")),
        ]);
        rows_json.push(json!({
            "label": label,
            "fault": fault,
            "value": value_json,
            "error": error,
            "signature": signature_of[idx],
        }));
    }
    let observed = format!("v({observe_id})");
    let failures = table_data.rows.iter().filter(|r| r.value.is_err()).count();
    let mut text = table(&["fault", &observed, "signature"], &rows_text);
    text.push_str(&format!(
        "{} faults, {} distinct signatures{}\n",
        list.len(),
        groups.len(),
        if failures > 0 { format!(", {failures} failed") } else { String::new() }
    ));

    let mut diagnostics = session.diagnostics("faults");
    diagnostics.insert("signature_tol".into(), json!(req.signature_tol));
    diagnostics.insert("failed_rows".into(), json!(failures));
    Ok(Report {
        text,
        branches: session.branches_json(|_, _| {}),
        result: json!({
            "observe": observe_id,
            "rows": rows_json,
            "fault_count": list.len(),
            "signature_count": groups.len(),
        }),
        residuals: Value::Null,
        diagnostics,
        failed: false,
    })
}

pub fn zparams(globals: &Globals, file: &Path) -> Result<Report, CliError> {
    let session = Session::load(globals, file)?;
    let n = &session.netlist;
    let shape_err = || {
        CliError::parse(
            "zparams expects a Π model: three branches, the second controlled by the first",
        )
    };
    if n.branch_ids.len() != 3 || n.couplings.len() != 1 {
        return Err(shape_err());
    }
    let c = n.couplings[0];
    if c.controlled != 1 || c.controlling != 0 {
        return Err(shape_err());
    }
    let t = n.config.triads();
    let pi = PiModel::new([t[0].p(), t[1].p(), t[2].p()], [t[0].q(), t[1].q(), t[2].q()], c.alpha, c.beta)?;
    let r = pi.zparam_existence(session.tol)?;
    let sig = session.precision;
    let text = format!(
        "det = {}\nassembled det = {}\n{}\n",
        complex(r.det, sig),
        complex(r.assembled_det, sig),
        if r.exists {
            "Z-parameters exist"
        } else {
            "Z-parameters do not exist (det = 0)"
        }
    );
    let mut diagnostics = session.diagnostics("zparams");
    diagnostics.insert("scale".into(), json!(r.scale));
    Ok(Report {
        text,
        branches: session.branches_json(|_, _| {}),
        result: json!({
            "det": json_complex(r.det),
            "assembled_det": json_complex(r.assembled_det),
            "exists": r.exists,
            "alpha": json_complex(c.alpha),
            "beta": json_complex(c.beta),
        }),
        residuals: Value::Null,
        diagnostics,
        failed: false,
    })
}
