//! Netlist loading, overrides, error mapping and the output envelope.

use std::path::{Path, PathBuf};

use hct_core::netlist::natural_cmp;
use hct_core::{Circuit, Error, ErrorCategory, Netlist, Triad};
use serde_json::{json, Map, Value};

use crate::format::{json_complex, parse_json_complex};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Globals {
    pub tol: Option<f64>,
    pub reference: Option<String>,
    pub seed: Option<u64>,
    pub precision: usize,
    pub overrides: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub category: ErrorCategory,
    pub message: String,
}

impl CliError {
    pub fn new(category: ErrorCategory, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ErrorCategory::Parse, message)
    }

    /// 2 parse (and malformed dimensions), 3 patch, 4 degenerate, 5 internal.
    pub fn exit_code(&self) -> u8 {
        match self.category {
            ErrorCategory::Parse | ErrorCategory::Dimension => 2,
            ErrorCategory::Patch => 3,
            ErrorCategory::Degenerate => 4,
            ErrorCategory::Internal => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(e.category(), e.to_string())
    }
}

/// `{"category", "message"}` for a row-level failure.
pub fn error_json(e: &Error) -> Value {
    json!({ "category": e.category().as_str(), "message": e.to_string() })
}

/// Text and JSON renderings of one command.
#[derive(Debug, Default)]
pub struct Report {
    pub text: String,
    pub branches: Vec<Value>,
    pub result: Value,
    pub residuals: Value,
    pub diagnostics: Map<String, Value>,
    /// Exit with the internal-error code despite producing output.
    pub failed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let doc = json!({
            "branches": self.branches,
            "result": self.result,
            "residuals": self.residuals,
            "diagnostics": self.diagnostics,
        });
        serde_json::to_string_pretty(&doc).expect("JSON values serialize")
    }
}

/// A parsed netlist with overrides applied and flags resolved.
pub struct Session {
    pub netlist: Netlist,
    pub tol: f64,
    pub reference: usize,
    pub precision: usize,
}

impl Session {
    pub fn load(globals: &Globals, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let mut netlist = Netlist::parse(&text)?;
        if let Some(file) = &globals.overrides {
            apply_overrides(&mut netlist, file)?;
        }
        let tol = globals.tol.or(netlist.options.tol).unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::parse(format!("tolerance must be positive, got {tol}")));
        }
        let reference = match globals.reference.as_deref().or(netlist.options.reference.as_deref()) {
            Some(name) => netlist.node_index(name)?,
            None => netlist.nodes.len() - 1,
        };
        Ok(Session {
            netlist,
            tol,
            reference,
            precision: globals.precision,
        })
    }

    pub fn circuit(&self) -> Result<Circuit, CliError> {
        Ok(self.netlist.circuit(Some(&self.netlist.nodes[self.reference]))?)
    }

    pub fn branch(&self, id: &str) -> Result<usize, CliError> {
        Ok(self.netlist.branch_index(id)?)
    }

    pub fn node(&self, name: &str) -> Result<usize, CliError> {
        Ok(self.netlist.node_index(name)?)
    }

    pub fn id(&self, k: usize) -> &str {
        &self.netlist.branch_ids[k]
    }

    /// Branch indices ordered by id.
    pub fn sorted_branches(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.netlist.branch_ids.len()).collect();
        order.sort_by(|&a, &b| natural_cmp(&self.netlist.branch_ids[a], &self.netlist.branch_ids[b]));
        order
    }

    /// `{id, from, to, p, q, s}` for branch `k`.
    pub fn branch_json(&self, k: usize) -> Map<String, Value> {
        let (from, to) = self.netlist.graph.branches()[k];
        let t = self.netlist.config.triad(k);
        let mut obj = Map::new();
        obj.insert("id".into(), json!(self.id(k)));
        obj.insert("from".into(), json!(self.netlist.nodes[from]));
        obj.insert("to".into(), json!(self.netlist.nodes[to]));
        obj.insert("p".into(), json_complex(t.p()));
        obj.insert("q".into(), json_complex(t.q()));
        obj.insert("s".into(), json_complex(t.s()));
        obj
    }

    /// Branch records in id order, each extended by `extra`.
    pub fn branches_json(&self, mut extra: impl FnMut(usize, &mut Map<String, Value>)) -> Vec<Value> {
        self.sorted_branches()
            .into_iter()
            .map(|k| {
                let mut obj = self.branch_json(k);
                extra(k, &mut obj);
                Value::Object(obj)
            })
            .collect()
    }

    pub fn diagnostics(&self, command: &str) -> Map<String, Value> {
        let mut d = Map::new();
        d.insert("command".into(), json!(command));
        d.insert("tol".into(), json!(self.tol));
        d.insert("reference".into(), json!(self.netlist.nodes[self.reference]));
        d.insert(
            "field".into(),
            json!(match self.netlist.field {
                hct_core::netlist::Field::Real => "real",
                hct_core::netlist::Field::Complex => "complex",
            }),
        );
        d
    }
}

/// Replaces triads by branch id from a JSON document with a `branches`
/// array; missing `p`/`q`/`s` keep their netlist values.
pub fn apply_overrides(netlist: &mut Netlist, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("overrides {}: {e}", path.display())))?;
    let entries = doc
        .get("branches")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::parse("overrides: expected a top-level 'branches' array"))?;
    for entry in entries {
        let id = entry
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::parse("overrides: branch entry without a string 'id'"))?;
        let k = netlist.branch_index(id)?;
        let old = *netlist.config.triad(k);
        let coord = |key: &str, current| -> Result<_, CliError> {
            match entry.get(key) {
                None => Ok(current),
                Some(v) => parse_json_complex(v).ok_or_else(|| {
                    CliError::parse(format!("overrides: branch {id}: '{key}' must be [re, im]"))
                }),
            }
        };
        let triad = Triad::new(coord("p", old.p())?, coord("q", old.q())?, coord("s", old.s())?)
            .map_err(|e| CliError::parse(format!("overrides: branch {id}: {e}")))?;
        if netlist.field == hct_core::netlist::Field::Real
            && [triad.p(), triad.q(), triad.s()].iter().any(|z| z.im != 0.0)
        {
            return Err(CliError::parse(format!(
                "overrides: branch {id}: complex value in a real netlist"
            )));
        }
        netlist.config.set_triad(k, triad);
    }
    Ok(())
}
