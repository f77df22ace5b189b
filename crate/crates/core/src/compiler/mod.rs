//! Peephole optimizer for optical circuits.
//!
//! [`compile`] alternates a canonical reordering ([`commute_pass`]) with a
//! sweep over the slot form of the circuit: runs of local elements on a path
//! are fused and re-synthesized, transformations common to both inputs of a
//! beamsplitter are pushed through it, global phases are stripped and
//! identical runs on sibling paths are merged into one multi-path element.
//! Oracle components and PBS readout are opaque barriers. Every result is
//! certified against the input unitary.
//!
//! Counting convention ([`count_elements`]): one per element entry, whatever
//! its path binding, oracle components included, PBS readout excluded.

mod ir;
mod rules;
mod synth;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use rules::{
    rule_set, verified_rule_set, verify_rule, Commute, EliminateIdentity, FuseWaveplateChain, MergePhases,
    MergeSiblingElements, PushThroughBeamsplitter, RewriteRule, StripGlobalPhase, RULE_CHECK_INSTANCES,
};

use crate::circuit::Circuit;
use crate::elements::{Element, ElementKind};
use crate::error::{invalid, Error, Result};
use crate::{ALGEBRAIC_TOL, C64, CIRCUIT_TOL};
use ir::Ir;
use synth::{max_dev, wrap_phase};

/// One rule firing. `position` is the index, in the circuit the sweep started
/// from, of the first element the rewrite touched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleApplication {
    pub rule: String,
    pub position: usize,
}

impl RuleApplication {
    pub(crate) fn new(rule: &str, position: usize) -> Self {
        RuleApplication { rule: rule.to_string(), position }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub input_count: usize,
    pub output_count: usize,
    pub rule_applications: Vec<RuleApplication>,
    pub equivalence_verified: bool,
    pub max_unitary_deviation: f64,
    /// Improving sweeps performed.
    pub sweeps: usize,
}

pub(crate) fn count_list(els: &[Element]) -> usize {
    els.iter().filter(|e| !matches!(e.kind, ElementKind::Pbs { .. })).count()
}

/// Number of optical elements, PBS readout excluded.
pub fn count_elements(c: &Circuit) -> usize {
    count_list(c.elements())
}

/// `(u1 ≈ e^{iα} u2, max entry deviation)` with `α` taken from the
/// largest-magnitude entry of `u1`.
pub(crate) fn matrices_equiv(u1: &DMatrix<C64>, u2: &DMatrix<C64>) -> (bool, f64) {
    let Some((k, z)) = u1.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())) else {
        return (true, 0.0);
    };
    let r = if u2[k].norm() > 0.0 { z / u2[k] } else { C64::new(1.0, 0.0) };
    let r = if r.norm() > 0.0 { r / r.norm() } else { C64::new(1.0, 0.0) };
    let dev = crate::max_or_inf(u1.iter().zip(u2.iter()).map(|(a, b)| (a - b * r).norm()));
    (dev < CIRCUIT_TOL, dev)
}

/// Whether two circuits have the same unitary up to global phase.
pub fn unitary_equiv(c1: &Circuit, c2: &Circuit, tol: f64) -> Result<(bool, f64)> {
    if c1.space().dim() != c2.space().dim() {
        return invalid(format!(
            "circuits act on {} and {} modes",
            c1.space().dim(),
            c2.space().dim()
        ));
    }
    let (_, dev) = matrices_equiv(&c1.unitary(), &c2.unitary());
    Ok((dev < tol, dev))
}

/// Whether `x` and `y` commute, decided from their structure and 2×2 blocks.
/// Oracle components and PBS readout commute with nothing.
pub(crate) fn commutes(x: &Element, y: &Element, paths: usize) -> bool {
    let barrier = |e: &Element| e.is_oracle() || matches!(e.kind, ElementKind::Pbs { .. });
    if barrier(x) || barrier(y) {
        return false;
    }
    let px = x.paths(paths);
    let py = y.paths(paths);
    if !px.iter().any(|p| py.contains(p)) {
        return true;
    }
    match (&x.kind, &y.kind) {
        (ElementKind::BeamSplitter { a, b }, ElementKind::BeamSplitter { a: c, b: d }) => {
            (a == c && b == d) || (a == d && b == c)
        }
        (ElementKind::BeamSplitter { a, b }, _) => local_commutes_with_bs(y, *a, *b),
        (_, ElementKind::BeamSplitter { a, b }) => local_commutes_with_bs(x, *a, *b),
        _ => px.iter().filter(|p| py.contains(p)).all(|&p| {
            let (mx, my) = (x.local_matrix(p).expect("bound"), y.local_matrix(p).expect("bound"));
            max_dev(&(mx * my), &(my * mx)) < ALGEBRAIC_TOL
        }),
    }
}

fn local_commutes_with_bs(l: &Element, a: usize, b: usize) -> bool {
    match (l.local_matrix(a), l.local_matrix(b)) {
        (Some(ma), Some(mb)) => max_dev(&ma, &mb) < ALGEBRAIC_TOL,
        _ => false,
    }
}

/// Reorders commuting elements into canonical order (lowest path first,
/// polarization elements before spatial ones) and merges adjacent phase
/// shifters on identical modes. The unitary is unchanged.
pub fn commute_pass(c: &Circuit) -> Circuit {
    commute_pass_logged(c).0
}

fn commute_pass_logged(c: &Circuit) -> (Circuit, Vec<RuleApplication>) {
    let paths = c.registry().paths();
    let els = c.elements();
    let n = els.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for j in 0..n {
        for i in 0..j {
            if !commutes(&els[i], &els[j], paths) {
                succ[i].push(j);
                indeg[j] += 1;
            }
        }
    }
    let key = |i: usize| {
        let e = &els[i];
        let min_path = e.paths(paths).into_iter().min().unwrap_or(0);
        (min_path, usize::from(!e.is_polarization_only()), i)
    };
    let mut heap: BinaryHeap<Reverse<(usize, usize, usize)>> =
        (0..n).filter(|&i| indeg[i] == 0).map(|i| Reverse(key(i))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, _, i))) = heap.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                heap.push(Reverse(key(j)));
            }
        }
    }

    let mut log = Vec::new();
    if let Some(pos) = order.iter().enumerate().position(|(k, &i)| k != i) {
        log.push(RuleApplication::new("commute", pos));
    }
    let mut out: Vec<(usize, Element)> = Vec::with_capacity(n);
    for i in order {
        let e = els[i].clone();
        if let Some((first, last)) = out.last_mut() {
            if let (ElementKind::PhaseShift { phi: p1, modes: m1 }, ElementKind::PhaseShift { phi: p2, modes: m2 }) =
                (&last.kind, &e.kind)
            {
                if m1 == m2 && !last.is_oracle() && !e.is_oracle() {
                    let phi = wrap_phase(p1 + p2);
                    log.push(RuleApplication::new("merge-phases", *first));
                    if phi == 0.0 {
                        out.pop();
                    } else {
                        *last = Element::phase(phi, m1.clone());
                    }
                    continue;
                }
            }
        }
        out.push((i, e));
    }
    let circuit = c
        .with_elements(out.into_iter().map(|(_, e)| e).collect())
        .expect("reordering keeps bindings valid");
    (circuit, log)
}

/// One optimization sweep over the slot form; returns the input when the
/// sweep finds nothing cheaper.
fn sweep(c: &Circuit) -> (Circuit, Vec<RuleApplication>) {
    let mut ir = Ir::lower(c);
    let mut log = Vec::new();
    let mut last = ir.cost();
    for _ in 0..8 {
        ir.push_pass(&mut log);
        ir.strip_pass(&mut log);
        let now = ir.cost();
        if now == last {
            break;
        }
        last = now;
    }
    match ir.emit() {
        Some(out) if out.count < count_elements(c) => {
            log.extend(out.log);
            (c.with_elements(out.elements).expect("emitted bindings are valid"), log)
        }
        _ => (c.clone(), Vec::new()),
    }
}

/// Rewrites `c` to a fixpoint and certifies the result.
pub fn compile(c: &Circuit) -> Result<(Circuit, CompileReport)> {
    verified_rule_set()?;
    let input_count = count_elements(c);
    let bound = 10 * c.len().max(1);
    let mut cur = c.clone();
    let mut log = Vec::new();
    let mut sweeps = 0;
    loop {
        if sweeps > bound {
            return Err(Error::Internal(format!(
                "compile did not reach a fixpoint within {bound} sweeps"
            )));
        }
        let (cp, cp_log) = commute_pass_logged(&cur);
        let (next, sweep_log) = sweep(&cp);
        if count_elements(&next) < count_elements(&cur) {
            log.extend(cp_log);
            log.extend(sweep_log);
            cur = next;
            sweeps += 1;
        } else {
            break;
        }
    }
    let (ok, dev) = unitary_equiv(c, &cur, CIRCUIT_TOL)?;
    if !ok {
        return Err(Error::Internal(format!(
            "compiled circuit deviates from its input by {dev:e}"
        )));
    }
    let report = CompileReport {
        input_count,
        output_count: count_elements(&cur),
        rule_applications: log,
        equivalence_verified: ok,
        max_unitary_deviation: dev,
        sweeps,
    };
    Ok((cur, report))
}
