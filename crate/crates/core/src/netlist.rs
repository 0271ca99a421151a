//! Line-oriented `.hct` netlists.
//!
//! ```text
//! field complex
//! branch 0  N1 N3 vsource v=1
//! branch 1  N1 N2 impedance z=1
//! branch 3b N1 N4 impedance z=-j
//! branch 6  N2 N5 homog p=0 q=1
//! control 2 by 1 alpha=0 beta=40
//! option tol=1e-9 ref=N5 observe=5
//! bridge N1 N2
//! ```
//!
//! Nodes are numbered in natural order of their names (`N2` before `N10`);
//! branches keep declaration order.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::config::{ClassicalElement, Configuration, Triad, C64};
use crate::coupled::{validate_couplings, Coupling};
use crate::error::{Error, Result};
use crate::graph::{CutCyclePair, Digraph};
use crate::solver::Circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Field {
    Real,
    #[default]
    Complex,
}

/// `option` directives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Options {
    pub tol: Option<f64>,
    pub reference: Option<String>,
    pub observe: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub field: Field,
    /// Node names, index = node number.
    pub nodes: Vec<String>,
    /// Branch labels in declaration order.
    pub branch_ids: Vec<String>,
    pub graph: Digraph,
    pub config: Configuration,
    pub couplings: Vec<Coupling>,
    pub options: Options,
    /// Declared bridge-fault node pairs.
    pub bridges: Vec<(usize, usize)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses `a`, `bj`, `a+bj`, `a-bj`, `j`, `-j` (exponents allowed).
pub fn parse_complex(text: &str) -> Option<C64> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('j') else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok(),
    };
    match split {
        Some(k) => Some(C64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

/// Natural order: digit runs compare by value, other runs as text, then
/// the full strings break ties (`N2 < N10`, `3b < 4`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for k in 1..=bytes.len() {
            if k == bytes.len() || bytes[k].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..k]));
                start = k;
            }
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for (&(da, xa), &(db, xb)) in ca.iter().zip(&cb) {
        let ord = match (da, db) {
            (true, true) => {
                let (ta, tb) = (xa.trim_start_matches('0'), xb.trim_start_matches('0'));
                ta.len().cmp(&tb.len()).then(ta.cmp(tb))
            }
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => xa.cmp(xb),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then(a.cmp(b))
}

struct RawBranch {
    line: usize,
    id: String,
    from: String,
    to: String,
    triad: Triad,
}

fn key_values<'a>(
    line: usize,
    tokens: &[&'a str],
    allowed: &[&str],
) -> Result<HashMap<&'a str, C64>> {
    let mut out = HashMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value, got '{tok}'")))?;
        if !allowed.contains(&k) {
            return Err(parse_err(line, format!("unexpected parameter '{k}'")));
        }
        let value = parse_complex(v)
            .ok_or_else(|| parse_err(line, format!("invalid number '{v}' for '{k}'")))?;
        if out.insert(k, value).is_some() {
            return Err(parse_err(line, format!("parameter '{k}' given twice")));
        }
    }
    Ok(out)
}

fn required(line: usize, kv: &HashMap<&str, C64>, key: &str) -> Result<C64> {
    kv.get(key)
        .copied()
        .ok_or_else(|| parse_err(line, format!("missing parameter '{key}'")))
}

fn branch_triad(line: usize, kind: &str, params: &[&str]) -> Result<Triad> {
    let zero = C64::new(0.0, 0.0);
    let opt = |kv: &HashMap<&str, C64>, k: &str| kv.get(k).copied().unwrap_or(zero);
    let element = match kind {
        "homog" => {
            let kv = key_values(line, params, &["p", "q", "s"])?;
            let (p, q) = (required(line, &kv, "p")?, required(line, &kv, "q")?);
            return Triad::new(p, q, opt(&kv, "s")).map_err(|e| parse_err(line, e.to_string()));
        }
        "impedance" => {
            let kv = key_values(line, params, &["z", "vs"])?;
            ClassicalElement::Impedance {
                z: required(line, &kv, "z")?,
                v_s: opt(&kv, "vs"),
            }
        }
        "admittance" => {
            let kv = key_values(line, params, &["y", "is"])?;
            ClassicalElement::Admittance {
                y: required(line, &kv, "y")?,
                i_s: opt(&kv, "is"),
            }
        }
        "vsource" => {
            let kv = key_values(line, params, &["v", "z"])?;
            ClassicalElement::VoltageSource {
                v: required(line, &kv, "v")?,
                z: opt(&kv, "z"),
            }
        }
        "isource" => {
            let kv = key_values(line, params, &["i", "y"])?;
            ClassicalElement::CurrentSource {
                i: required(line, &kv, "i")?,
                y: opt(&kv, "y"),
            }
        }
        other => return Err(parse_err(line, format!("unknown element kind '{other}'"))),
    };
    Triad::from_classical(element).map_err(|e| parse_err(line, e.to_string()))
}

impl Netlist {
    pub fn parse(text: &str) -> Result<Self> {
        let mut field = Field::default();
        let mut options = Options::default();
        let mut raw: Vec<RawBranch> = Vec::new();
        let mut controls: Vec<(usize, String, String, C64, C64)> = Vec::new();
        let mut bridge_lines: Vec<(usize, String, String)> = Vec::new();

        for (idx, full) in text.lines().enumerate() {
            let line = idx + 1;
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens[0] {
                "field" => {
                    field = match tokens.get(1..) {
                        Some(["real"]) => Field::Real,
                        Some(["complex"]) => Field::Complex,
                        _ => return Err(parse_err(line, "expected 'field real' or 'field complex'")),
                    }
                }
                "branch" => {
                    if tokens.len() < 5 {
                        return Err(parse_err(line, "expected 'branch <id> <from> <to> <kind> ...'"));
                    }
                    let (id, from, to) = (tokens[1], tokens[2], tokens[3]);
                    if raw.iter().any(|b| b.id == id) {
                        return Err(Error::DuplicateBranch(id.to_string()));
                    }
                    if from == to {
                        return Err(parse_err(line, format!("branch {id} is a self-loop")));
                    }
                    raw.push(RawBranch {
                        line,
                        id: id.to_string(),
                        from: from.to_string(),
                        to: to.to_string(),
                        triad: branch_triad(line, tokens[4], &tokens[5..])?,
                    });
                }
                "control" => {
                    if tokens.len() < 4 || tokens[2] != "by" {
                        return Err(parse_err(
                            line,
                            "expected 'control <controlled> by <controlling> alpha=<c> beta=<c>'",
                        ));
                    }
                    let kv = key_values(line, &tokens[4..], &["alpha", "beta"])?;
                    let zero = C64::new(0.0, 0.0);
                    controls.push((
                        line,
                        tokens[1].to_string(),
                        tokens[3].to_string(),
                        kv.get("alpha").copied().unwrap_or(zero),
                        kv.get("beta").copied().unwrap_or(zero),
                    ));
                }
                "option" => {
                    for tok in &tokens[1..] {
                        let (k, v) = tok
                            .split_once('=')
                            .ok_or_else(|| parse_err(line, format!("expected key=value, got '{tok}'")))?;
                        match k {
                            "tol" => {
                                let tol: f64 = v
                                    .parse()
                                    .ok()
                                    .filter(|t: &f64| t.is_finite() && *t > 0.0)
                                    .ok_or_else(|| parse_err(line, format!("invalid tolerance '{v}'")))?;
                                options.tol = Some(tol);
                            }
                            "ref" => options.reference = Some(v.to_string()),
                            "observe" => options.observe = Some(v.to_string()),
                            _ => return Err(parse_err(line, format!("unknown option '{k}'"))),
                        }
                    }
                }
                "bridge" => {
                    if tokens.len() != 3 || tokens[1] == tokens[2] {
                        return Err(parse_err(line, "expected 'bridge <node+> <node->' with distinct nodes"));
                    }
                    bridge_lines.push((line, tokens[1].to_string(), tokens[2].to_string()));
                }
                other => return Err(parse_err(line, format!("unknown directive '{other}'"))),
            }
        }

        if raw.is_empty() {
            return Err(parse_err(text.lines().count().max(1), "netlist declares no branches"));
        }
        if field == Field::Real {
            for b in &raw {
                let t = b.triad;
                if [t.p(), t.q(), t.s()].iter().any(|x| x.im != 0.0) {
                    return Err(parse_err(b.line, format!("complex value in branch {} of a real netlist", b.id)));
                }
            }
            for (line, _, _, a, b) in &controls {
                if a.im != 0.0 || b.im != 0.0 {
                    return Err(parse_err(*line, "complex gain in a real netlist"));
                }
            }
        }

        let mut nodes: Vec<String> = raw.iter().flat_map(|b| [b.from.clone(), b.to.clone()]).collect();
        nodes.sort_by(|a, b| natural_cmp(a, b));
        nodes.dedup();
        let node_of = |name: &str| nodes.iter().position(|n| n == name);

        let branches = raw
            .iter()
            .map(|b| (node_of(&b.from).unwrap(), node_of(&b.to).unwrap()))
            .collect();
        let graph = Digraph::new(nodes.len(), branches)?;
        let config = Configuration::new(raw.iter().map(|b| b.triad).collect());
        let branch_ids: Vec<String> = raw.into_iter().map(|b| b.id).collect();

        let branch_of = |line: usize, id: &str| {
            branch_ids
                .iter()
                .position(|b| b == id)
                .ok_or_else(|| parse_err(line, format!("unknown branch {id}")))
        };
        let couplings = controls
            .iter()
            .map(|(line, controlled, controlling, alpha, beta)| {
                Coupling::new(branch_of(*line, controlled)?, branch_of(*line, controlling)?, *alpha, *beta)
                    .map_err(|e| parse_err(*line, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        validate_couplings(&couplings, branch_ids.len())?;

        let bridges = bridge_lines
            .iter()
            .map(|(line, a, b)| {
                let idx = |n: &str| node_of(n).ok_or_else(|| parse_err(*line, format!("unknown node {n}")));
                Ok((idx(a)?, idx(b)?))
            })
            .collect::<Result<Vec<_>>>()?;

        let netlist = Netlist {
            field,
            nodes,
            branch_ids,
            graph,
            config,
            couplings,
            options,
            bridges,
        };
        if let Some(r) = &netlist.options.reference {
            netlist.node_index(r)?;
        }
        if let Some(o) = &netlist.options.observe {
            netlist.branch_index(o)?;
        }
        Ok(netlist)
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn branch_index(&self, id: &str) -> Result<usize> {
        self.branch_ids
            .iter()
            .position(|b| b == id)
            .ok_or_else(|| Error::UnknownBranch(id.to_string()))
    }

    /// Circuit with the default pair at `reference` (else the `ref` option,
    /// else the last node).
    pub fn circuit(&self, reference: Option<&str>) -> Result<Circuit> {
        let reference = match reference.or(self.options.reference.as_deref()) {
            Some(name) => self.node_index(name)?,
            None => self.nodes.len() - 1,
        };
        let pair = CutCyclePair::default_for(&self.graph, reference)?;
        Circuit::with_pair(self.graph.clone(), self.config.clone(), pair)?
            .with_couplings(self.couplings.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        let cases = [
            ("1", c(1.0, 0.0)),
            ("-2.5", c(-2.5, 0.0)),
            ("3j", c(0.0, 3.0)),
            ("j", c(0.0, 1.0)),
            ("-j", c(0.0, -1.0)),
            ("1+2j", c(1.0, 2.0)),
            ("1-2j", c(1.0, -2.0)),
            ("1e-3-2e+2j", c(1e-3, -200.0)),
            ("-1.5e3+j", c(-1500.0, 1.0)),
        ];
        for (text, value) in cases {
            assert_eq!(parse_complex(text), Some(value), "{text}");
        }
        for bad in ["", "abc", "1+", "1+2", "jj", "2k"] {
            assert_eq!(parse_complex(bad), None, "{bad}");
        }
    }

    #[test]
    fn sugar_forms() {
        let text = "\
            # divider\n\
            branch 1 n1 n2 vsource v=1\n\
            branch 2 n2 n1 impedance z=2\n\
            branch 6 n1 n2 homog p=0 q=1  # open\n\
            branch 7 n1 n2 admittance y=0.5 is=1\n\
            branch 8 n1 n2 isource i=3 y=2\n";
        let n = Netlist::parse(text).unwrap();
        let t = |k: usize| *n.config.triad(k);
        assert_eq!(t(0), Triad::real(1.0, 0.0, 1.0).unwrap());
        assert_eq!(t(1), Triad::real(1.0, 2.0, 0.0).unwrap());
        assert_eq!(t(2), Triad::open());
        assert_eq!(t(3), Triad::real(0.5, 1.0, 1.0).unwrap());
        assert_eq!(t(4), Triad::real(2.0, 1.0, 3.0).unwrap());
        assert_eq!(n.nodes, vec!["n1", "n2"]);
        assert_eq!(n.graph.branches()[1], (1, 0));
    }

    #[test]
    fn natural_ordering() {
        let mut ids = vec!["5", "3b", "10", "3a", "0", "4", "x2", "x10", "x", "007"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, vec!["0", "3a", "3b", "4", "5", "007", "10", "x", "x2", "x10"]);
    }

    #[test]
    fn natural_node_order() {
        let n = Netlist::parse("branch a N10 N2 impedance z=1\nbranch b N2 N1 impedance z=1\n").unwrap();
        assert_eq!(n.nodes, vec!["N1", "N2", "N10"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Netlist::parse("field real\nbranch 1 a b homog p=0 q=0\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                msg: "excluded projective point (0:0:1)".into()
            }
        );
        assert!(err.to_string().contains("excluded projective point (0:0:1)"));
        assert!(matches!(
            Netlist::parse("branch 1 a b impedance z=1\nbranch 1 b a impedance z=1\n"),
            Err(Error::DuplicateBranch(id)) if id == "1"
        ));
        assert!(matches!(Netlist::parse("branch 1 a b impedance\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Netlist::parse("\nbranch 1 a b resistor r=1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Netlist::parse("field real\nbranch 1 a b impedance z=j\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(
            Netlist::parse("branch 1 a b impedance z=1\noption ref=c\n"),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            Netlist::parse("branch 1 a b impedance z=1\ncontrol 1 by 9 alpha=1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Netlist::parse("branch 1 a b impedance z=1\nbranch 2 c d impedance z=1\n"),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn controls_options_and_bridges() {
        let text = "\
            branch 1 a g impedance z=1\n\
            branch 2 b g impedance z=2\n\
            branch 3 a b impedance z=3\n\
            control 2 by 1 alpha=0.5 beta=-1\n\
            option tol=1e-10 ref=a observe=3\n\
            bridge a b\n";
        let n = Netlist::parse(text).unwrap();
        assert_eq!(n.couplings, vec![Coupling::new(1, 0, c(0.5, 0.0), c(-1.0, 0.0)).unwrap()]);
        assert_eq!(n.options.tol, Some(1e-10));
        assert_eq!(n.bridges, vec![(0, 1)]);
        let circuit = n.circuit(None).unwrap();
        assert_eq!(circuit.couplings().len(), 1);
        assert_eq!(circuit.pair().k_ab(), 1);
    }
}
