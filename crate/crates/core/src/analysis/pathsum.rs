//! Amplitudes as sums over photon trajectories.
//!
//! Every element sends an incoming mode to at most two outgoing modes with
//! the factors of its matrix (`1/√2` transmitted and `i/√2` reflected at a
//! beamsplitter, `±1` or `±1/√2` at a waveplate, and so on). A trajectory is
//! one choice of outgoing mode per element; its amplitude is the product of
//! the factors along it.

use crate::circuit::Circuit;
use crate::elements::{bs_matrix, Element, ElementKind};
use crate::error::{invalid, Error, Result};
use crate::state::{ModeId, Pol};
use crate::C64;

/// Trajectories explored before giving up.
const MAX_TRAJECTORIES: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct PathContribution {
    /// `(element index, mode after the element)` for every element passed.
    pub path: Vec<(usize, ModeId)>,
    pub amplitude: C64,
}

fn branches(e: &Element, m: ModeId) -> Vec<(ModeId, C64)> {
    match &e.kind {
        ElementKind::BeamSplitter { a, b } if m.path == *a || m.path == *b => {
            let u = bs_matrix();
            let col = usize::from(m.path == *b);
            vec![(ModeId::new(*a, m.pol), u[(0, col)]), (ModeId::new(*b, m.pol), u[(1, col)])]
        }
        ElementKind::BeamSplitter { .. } | ElementKind::Pbs { .. } => vec![(m, C64::new(1.0, 0.0))],
        _ => match e.local_matrix(m.path) {
            Some(u) => [Pol::H, Pol::V]
                .into_iter()
                .map(|pol| (ModeId::new(m.path, pol), u[(pol.bit(), m.pol.bit())]))
                .filter(|(_, f)| f.norm() > 0.0)
                .collect(),
            None => vec![(m, C64::new(1.0, 0.0))],
        },
    }
}

fn check_mode(c: &Circuit, m: ModeId) -> Result<()> {
    if m.path >= c.registry().paths() {
        return invalid(format!("mode path {} outside the circuit's {} paths", m.path, c.registry().paths()));
    }
    Ok(())
}

fn explore(
    els: &[(usize, &Element)],
    from: ModeId,
    to: Option<ModeId>,
    out: &mut Vec<PathContribution>,
) -> Result<()> {
    let mut stack = vec![(0usize, from, C64::new(1.0, 0.0), Vec::new())];
    while let Some((k, mode, amp, path)) = stack.pop() {
        if k == els.len() {
            if to.is_none_or(|t| t == mode) {
                out.push(PathContribution { path, amplitude: amp });
            }
            continue;
        }
        if stack.len() + out.len() > MAX_TRAJECTORIES {
            return Err(Error::InvalidArgument("too many trajectories to enumerate".into()));
        }
        let (idx, e) = els[k];
        for (next, f) in branches(e, mode).into_iter().rev() {
            let mut p = path.clone();
            p.push((idx, next));
            stack.push((k + 1, next, amp * f, p));
        }
    }
    Ok(())
}

/// All trajectories from `input` that end in `output`.
pub fn path_contributions(c: &Circuit, input: ModeId, output: ModeId) -> Result<Vec<PathContribution>> {
    check_mode(c, input)?;
    check_mode(c, output)?;
    let els: Vec<(usize, &Element)> = c.elements().iter().enumerate().collect();
    let mut out = Vec::new();
    explore(&els, input, Some(output), &mut out)?;
    Ok(out)
}

/// `|Σ amplitudes|²` over the trajectories from `input` to `output`.
pub fn path_sum_probability(c: &Circuit, input: ModeId, output: ModeId) -> Result<f64> {
    let total: C64 = path_contributions(c, input, output)?.iter().map(|p| p.amplitude).sum();
    Ok(total.norm_sqr())
}

/// Splits the output amplitude by the mode in which each trajectory crosses
/// the oracle: `amplitude = Σ_m coef[m] · A_m` for any diagonal oracle with
/// factors `A_m`. Requires the oracle components to form one contiguous
/// block; the block itself is replaced by the identity.
pub fn oracle_mode_coefficients(c: &Circuit, input: ModeId, output: ModeId) -> Result<Vec<C64>> {
    check_mode(c, input)?;
    check_mode(c, output)?;
    let els = c.elements();
    let first = els
        .iter()
        .position(Element::is_oracle)
        .ok_or_else(|| Error::InvalidArgument(format!("circuit `{}` has no oracle", c.name())))?;
    let last = els.iter().rposition(Element::is_oracle).expect("first exists");
    if !els[first..=last].iter().all(Element::is_oracle) {
        return invalid("oracle components are not contiguous");
    }
    let before: Vec<(usize, &Element)> = els[..first].iter().enumerate().collect();
    let after: Vec<(usize, &Element)> = els.iter().enumerate().skip(last + 1).collect();

    let mut prefix = Vec::new();
    explore(&before, input, None, &mut prefix)?;
    let dim = c.space().dim();
    let mut coef = vec![C64::new(0.0, 0.0); dim];
    for m in c.space().modes() {
        let into: C64 = prefix
            .iter()
            .filter(|p| p.path.last().map_or(input, |s| s.1) == m)
            .map(|p| p.amplitude)
            .sum();
        if into.norm() == 0.0 {
            continue;
        }
        let mut suffix = Vec::new();
        explore(&after, m, Some(output), &mut suffix)?;
        coef[m.index()] = into * suffix.iter().map(|p| p.amplitude).sum::<C64>();
    }
    Ok(coef)
}
