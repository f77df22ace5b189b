//! Line-oriented circuit files.
//!
//! ```text
//! CIRCUIT name=grover2-compiled n=2 paths=a,b
//! HWP theta=22.5 path=a
//! BS paths=a,b
//! PHASE phi=-1.5707963267948966 modes=b:*
//! HWP theta=0 path=a role=oracle
//! PBS paths=*
//! ```
//!
//! Angles are in degrees, phases in radians. A path list is comma separated
//! or `*` for every path. `role=oracle` marks oracle components. Blank lines
//! and text after `#` are ignored. Numbers are written in shortest
//! round-trip form, so writing and re-reading a circuit is exact.

use std::collections::HashMap;

use crate::circuit::{Circuit, Registry};
use crate::elements::{Element, ElementKind, LcState, ModeSet, PathSet, PockelsState, PolSel, Role};
use crate::error::{Error, Result};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn fields(line: usize, tokens: &[&str]) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for t in tokens {
        let Some((k, v)) = t.split_once('=') else {
            return perr(line, format!("expected key=value, found `{t}`"));
        };
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return perr(line, format!("key `{k}` given twice"));
        }
    }
    Ok(out)
}

struct Line<'a> {
    no: usize,
    keyword: &'a str,
    kv: HashMap<String, String>,
}

impl Line<'_> {
    fn take(&mut self, key: &str) -> Result<String> {
        match self.kv.remove(key) {
            Some(v) => Ok(v),
            None => perr(self.no, format!("{} needs `{key}=`", self.keyword)),
        }
    }

    fn take_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.take(key)?;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => perr(self.no, format!("`{key}={v}` is not a finite number")),
        }
    }

    fn finish(self) -> Result<()> {
        match self.kv.keys().min() {
            Some(k) => perr(self.no, format!("unknown key `{k}` for {}", self.keyword)),
            None => Ok(()),
        }
    }
}

fn parse_paths(no: usize, s: &str, reg: &Registry) -> Result<PathSet> {
    if s == "*" {
        return Ok(PathSet::All);
    }
    let mut out = Vec::new();
    for label in s.split(',') {
        match reg.index_of(label) {
            Some(i) => out.push(i),
            None => return perr(no, format!("unknown path `{label}`")),
        }
    }
    Ok(PathSet::of(out))
}

fn parse_pol(no: usize, s: &str) -> Result<PolSel> {
    match s {
        "*" => Ok(PolSel::Both),
        "H" => Ok(PolSel::H),
        "V" => Ok(PolSel::V),
        _ => perr(no, format!("polarization `{s}` is not H, V or *")),
    }
}

fn parse_header(no: usize, text: &str) -> Result<(String, Option<usize>, Registry)> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.first() != Some(&"CIRCUIT") {
        return perr(no, "file must start with a CIRCUIT header");
    }
    let mut line = Line { no, keyword: "CIRCUIT", kv: fields(no, &tokens[1..])? };
    let name = line.kv.remove("name").unwrap_or_else(|| "circuit".to_string());
    let n = match line.kv.remove("n") {
        None => None,
        Some(v) if v == "-" => None,
        Some(v) => match v.parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => return perr(no, format!("`n={v}` is not a qubit count")),
        },
    };
    let labels: Vec<String> = line.take("paths")?.split(',').map(str::to_string).collect();
    line.finish()?;
    let reg = Registry::new(labels).map_err(|e| Error::Parse { line: no, msg: e.to_string() })?;
    Ok((name, n, reg))
}

fn parse_element(no: usize, text: &str, reg: &Registry) -> Result<Element> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut line = Line { no, keyword: tokens[0], kv: fields(no, &tokens[1..])? };
    let role = match line.kv.remove("role").as_deref() {
        None | Some("optic") => Role::Optic,
        Some("oracle") => Role::Oracle,
        Some(other) => return perr(no, format!("unknown role `{other}`")),
    };
    let kind = match line.keyword {
        "HWP" => ElementKind::Hwp {
            theta_deg: line.take_f64("theta")?,
            paths: parse_paths(no, &line.take("path")?, reg)?,
        },
        "BS" => {
            let v = line.take("paths")?;
            let PathSet::Only(p) = parse_paths(no, &v, reg)? else {
                return perr(no, "BS needs two explicit paths");
            };
            // keep the written order: the first path is the transmitted arm
            let labels: Vec<&str> = v.split(',').collect();
            if p.len() != 2 || labels.len() != 2 {
                return perr(no, format!("BS needs exactly two distinct paths, got `{v}`"));
            }
            let a = reg.index_of(labels[0]).expect("checked above");
            let b = reg.index_of(labels[1]).expect("checked above");
            ElementKind::BeamSplitter { a, b }
        }
        "PHASE" => {
            let phi = line.take_f64("phi")?;
            let m = line.take("modes")?;
            let Some((paths, pol)) = m.rsplit_once(':') else {
                return perr(no, format!("`modes={m}` should be <paths>:<H|V|*>"));
            };
            ElementKind::PhaseShift {
                phi,
                modes: ModeSet {
                    paths: parse_paths(no, paths, reg)?,
                    pol: parse_pol(no, pol)?,
                },
            }
        }
        "PBS" => ElementKind::Pbs { paths: parse_paths(no, &line.take("paths")?, reg)? },
        "ROT" => ElementKind::Rotator { paths: parse_paths(no, &line.take("path")?, reg)? },
        "PC" => {
            let state = match line.take("state")?.as_str() {
                "off" => PockelsState::Off,
                "on" => PockelsState::On,
                s => return perr(no, format!("Pockels cell state `{s}` is not on or off")),
            };
            ElementKind::PockelsCell { state, paths: parse_paths(no, &line.take("path")?, reg)? }
        }
        "LC" => {
            let state = match line.take("state")?.as_str() {
                "glass" => LcState::Glass,
                "hwp0" => LcState::Hwp0,
                s => return perr(no, format!("liquid crystal state `{s}` is not glass or hwp0")),
            };
            ElementKind::LiquidCrystal { state, paths: parse_paths(no, &line.take("path")?, reg)? }
        }
        other => return perr(no, format!("unknown element `{other}`")),
    };
    line.finish()?;
    Ok(Element { kind, role })
}

/// Parses a circuit file.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut header = None;
    let mut elements = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match &header {
            None => header = Some(parse_header(no, body)?),
            Some((_, _, reg)) => {
                let e = parse_element(no, body, reg)?;
                e.validate(reg.paths()).map_err(|err| Error::Parse { line: no, msg: err.to_string() })?;
                elements.push(e);
            }
        }
    }
    let Some((name, n, reg)) = header else {
        return perr(1, "empty circuit file");
    };
    Circuit::new(name, n, reg, elements)
}

fn write_paths(p: &PathSet, reg: &Registry) -> String {
    match p {
        PathSet::All => "*".to_string(),
        PathSet::Only(v) => v.iter().map(|&i| reg.label(i)).collect::<Vec<_>>().join(","),
    }
}

fn write_element(e: &Element, reg: &Registry) -> String {
    let mut s = match &e.kind {
        ElementKind::Hwp { theta_deg, paths } => format!("HWP theta={theta_deg} path={}", write_paths(paths, reg)),
        ElementKind::BeamSplitter { a, b } => format!("BS paths={},{}", reg.label(*a), reg.label(*b)),
        ElementKind::PhaseShift { phi, modes } => {
            let pol = match modes.pol {
                PolSel::Both => "*",
                PolSel::H => "H",
                PolSel::V => "V",
            };
            format!("PHASE phi={phi} modes={}:{pol}", write_paths(&modes.paths, reg))
        }
        ElementKind::Pbs { paths } => format!("PBS paths={}", write_paths(paths, reg)),
        ElementKind::Rotator { paths } => format!("ROT path={}", write_paths(paths, reg)),
        ElementKind::PockelsCell { state, paths } => format!("PC state={state} path={}", write_paths(paths, reg)),
        ElementKind::LiquidCrystal { state, paths } => {
            format!("LC state={state} path={}", write_paths(paths, reg))
        }
    };
    if e.is_oracle() {
        s.push_str(" role=oracle");
    }
    s
}

/// Serializes a circuit; `parse_circuit(&write_circuit(c))` reproduces `c`.
pub fn write_circuit(c: &Circuit) -> String {
    let reg = c.registry();
    let n = c.qubits().map_or("-".to_string(), |n| n.to_string());
    let mut out = format!("CIRCUIT name={} n={n} paths={}\n", c.name(), reg.labels().join(","));
    for e in c.elements() {
        out.push_str(&write_element(e, reg));
        out.push('\n');
    }
    out
}
