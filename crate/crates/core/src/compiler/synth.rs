//! Re-expressing a 2×2 polarization unitary with as few elements as possible.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::elements::{hwp_matrix, phase_matrix, rotator_matrix, Element, ElementKind, KindTag, LcState, ModeSet, PathSet, PockelsState, PolSel};
use crate::C64;

const STRUCT_EPS: f64 = 1e-10;
const ACCEPT_EPS: f64 = 5e-13;

/// Wraps an angle in radians to `(-π, π]`, snapping to exact zero and to
/// multiples of π/4 when within rounding of them.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    let q = y / (PI / 4.0);
    if (q - q.round()).abs() < 1e-14 {
        y = q.round() * (PI / 4.0);
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    if y.abs() < 1e-13 {
        0.0
    } else {
        y
    }
}

/// HWP angle in degrees reduced to `[0, 180)`, snapped to a 1e-9 degree grid when within rounding noise of it.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(180.0);
    let snapped = (t * 1e9).round() / 1e9;
    if (t - snapped).abs() < 1e-12 {
        t = snapped;
    }
    if t >= 180.0 - 1e-12 {
        t = 0.0;
    }
    if t == 0.0 {
        0.0
    } else {
        t
    }
}

/// One polarization element of a synthesized run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum PolItem {
    Hwp(f64),
    Phase(f64, PolSel),
    Rot,
    Pockels,
    Lc,
}

impl PolItem {
    pub(crate) fn matrix(&self) -> Matrix2<C64> {
        match *self {
            PolItem::Hwp(t) => hwp_matrix(t),
            PolItem::Phase(phi, pol) => phase_matrix(phi, pol),
            PolItem::Rot => rotator_matrix(),
            PolItem::Pockels => PockelsState::On.matrix(),
            PolItem::Lc => LcState::Hwp0.matrix(),
        }
    }

    pub(crate) fn element(&self, paths: PathSet) -> Element {
        match *self {
            PolItem::Hwp(t) => Element::hwp(t, paths),
            PolItem::Phase(phi, pol) => Element::phase(phi, ModeSet { paths, pol }),
            PolItem::Rot => Element::rotator(paths),
            PolItem::Pockels => Element::pockels(PockelsState::On, paths),
            PolItem::Lc => Element::liquid_crystal(LcState::Hwp0, paths),
        }
    }

    fn tag(&self) -> KindTag {
        match self {
            PolItem::Hwp(_) => KindTag::Hwp,
            PolItem::Phase(..) => KindTag::PhaseShift,
            PolItem::Rot => KindTag::Rotator,
            PolItem::Pockels => KindTag::PockelsCell,
            PolItem::Lc => KindTag::LiquidCrystal,
        }
    }
}

/// Element kinds the compiler may emit: those already present in the input.
#[derive(Clone, Debug, Default)]
pub(crate) struct Allowed(BTreeSet<KindTag>);

impl Allowed {
    pub(crate) fn from_elements<'a>(els: impl IntoIterator<Item = &'a Element>) -> Self {
        Allowed(els.into_iter().filter(|e| !e.is_oracle()).map(Element::tag).collect())
    }

    fn has(&self, t: KindTag) -> bool {
        self.0.contains(&t)
    }

    /// Cheapest available realisation of `diag(1, -1)`.
    fn pi_v(&self) -> Option<PolItem> {
        [
            (KindTag::Hwp, PolItem::Hwp(0.0)),
            (KindTag::PhaseShift, PolItem::Phase(PI, PolSel::V)),
            (KindTag::PockelsCell, PolItem::Pockels),
            (KindTag::LiquidCrystal, PolItem::Lc),
        ]
        .into_iter()
        .find(|(t, _)| self.has(*t))
        .map(|(_, i)| i)
    }
}

/// `e^{iα}` times the ordered product of `items` (first item acts first).
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Synth {
    pub alpha: f64,
    pub items: Vec<PolItem>,
}

impl Synth {
    pub(crate) fn cost(&self) -> usize {
        self.items.len() + usize::from(self.alpha != 0.0)
    }

    pub(crate) fn matrix(&self) -> Matrix2<C64> {
        let mut m = Matrix2::identity() * C64::from_polar(1.0, self.alpha);
        for it in &self.items {
            m = it.matrix() * m;
        }
        m
    }
}

pub(crate) fn max_dev(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    crate::max_or_inf((a - b).iter().map(|z| z.norm()))
}

/// `Some(e^{iβ})` when `b = e^{iβ} a`.
pub(crate) fn proportional(a: &Matrix2<C64>, b: &Matrix2<C64>, tol: f64) -> Option<C64> {
    let (k, _) = a.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))?;
    if a[k].norm() < 1e-6 {
        return None;
    }
    let r = b[k] / a[k];
    if r.norm() < 1e-6 {
        return None;
    }
    let r = r / r.norm();
    (max_dev(&(a * r), b) < tol).then_some(r)
}

fn normalize(items: Vec<PolItem>) -> Vec<PolItem> {
    items
        .into_iter()
        .filter_map(|it| match it {
            PolItem::Hwp(t) => Some(PolItem::Hwp(wrap_angle(t))),
            PolItem::Phase(phi, pol) => {
                let w = wrap_phase(phi);
                (w != 0.0).then_some(PolItem::Phase(w, pol))
            }
            other => Some(other),
        })
        .collect()
}

/// Candidate decompositions of `u`, most preferred first within each cost.
fn candidates(u: &Matrix2<C64>, allowed: &Allowed) -> Vec<(f64, Vec<PolItem>)> {
    let mut out: Vec<(f64, Vec<PolItem>)> = Vec::new();
    let off = u[(0, 1)].norm().max(u[(1, 0)].norm());
    let det = u.determinant();

    if off < STRUCT_EPS {
        let (a0, a1) = (u[(0, 0)].arg(), u[(1, 1)].arg());
        let phi = wrap_phase(a1 - a0);
        if phi == 0.0 {
            out.push((a0, vec![]));
        }
        if (phi.abs() - PI).abs() < 1e-12 {
            if let Some(z) = allowed.pi_v() {
                out.push((a0, vec![z]));
            }
            out.push((a1, vec![PolItem::Hwp(90.0)]));
        }
        out.push((a0, vec![PolItem::Phase(phi, PolSel::V)]));
        out.push((a1, vec![PolItem::Phase(-phi, PolSel::H)]));
    }

    // e^{2iα} = -det for reflections, +det for rotations
    let half = det.arg() / 2.0;
    for alpha in [half + PI / 2.0, half - PI / 2.0] {
        let w = u * C64::from_polar(1.0, -alpha);
        let imag = w.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag < STRUCT_EPS && (w[(0, 1)].re - w[(1, 0)].re).abs() < STRUCT_EPS {
            let theta = w[(1, 0)].re.atan2(w[(0, 0)].re).to_degrees() / 2.0;
            out.push((alpha, vec![PolItem::Hwp(theta)]));
        }
    }
    for alpha in [half, half + PI] {
        let w = u * C64::from_polar(1.0, -alpha);
        let imag = w.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag < STRUCT_EPS && (w[(0, 1)].re + w[(1, 0)].re).abs() < STRUCT_EPS {
            if max_dev(&w, &rotator_matrix()) < STRUCT_EPS {
                out.push((alpha, vec![PolItem::Rot]));
            }
            let psi = w[(1, 0)].re.atan2(w[(0, 0)].re).to_degrees();
            if let Some(z) = allowed.pi_v() {
                out.push((alpha, vec![z, PolItem::Hwp(psi / 2.0)]));
            }
        }
    }

    // general form e^{iα} · PhaseV(φ1) · HWP(θ) · PhaseV(φ2)
    let (c, s) = (u[(0, 0)].norm(), u[(1, 0)].norm());
    for sc in [1.0, -1.0] {
        for ss in [1.0, -1.0] {
            let alpha = if c > STRUCT_EPS {
                u[(0, 0)].arg() + if sc < 0.0 { PI } else { 0.0 }
            } else {
                u[(1, 0)].arg() + if ss < 0.0 { PI } else { 0.0 }
            };
            let flip = if ss < 0.0 { PI } else { 0.0 };
            let phi1 = if s > STRUCT_EPS { u[(1, 0)].arg() - alpha - flip } else { 0.0 };
            let phi2 = if s > STRUCT_EPS {
                u[(0, 1)].arg() - alpha - flip
            } else {
                (-u[(1, 1)]).arg() - alpha - phi1
            };
            let theta = (ss * s).atan2(sc * c).to_degrees() / 2.0;
            let items = vec![
                PolItem::Phase(phi2, PolSel::V),
                PolItem::Hwp(theta),
                PolItem::Phase(phi1, PolSel::V),
            ];
            out.push((alpha, items));
        }
    }
    out
}

/// Cheapest decomposition of `u` using only `allowed` kinds, exact to 5e-13.
pub(crate) fn synthesize(u: &Matrix2<C64>, allowed: &Allowed) -> Option<Synth> {
    let mut best: Option<Synth> = None;
    for (alpha, items) in candidates(u, allowed) {
        let items: Vec<PolItem> = normalize(items)
            .into_iter()
            .map(|it| match it {
                PolItem::Phase(phi, PolSel::V) if phi == PI => allowed.pi_v().unwrap_or(it),
                other => other,
            })
            .collect();
        let cand = Synth { alpha: wrap_phase(alpha), items };
        if cand.items.iter().any(|it| !allowed.has(it.tag())) {
            continue;
        }
        if cand.alpha != 0.0 && !allowed.has(KindTag::PhaseShift) {
            continue;
        }
        if max_dev(&cand.matrix(), u) >= ACCEPT_EPS {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => (cand.items.len(), cand.alpha != 0.0) < (b.items.len(), b.alpha != 0.0),
        };
        if better {
            best = Some(cand);
        }
    }
    best
}

/// Single-path elements for a synthesized run: the polarization items, then
/// the path phase.
pub(crate) fn synth_elements(s: &Synth, path: usize) -> Vec<Element> {
    let mut v: Vec<Element> = s.items.iter().map(|it| it.element(PathSet::one(path))).collect();
    if s.alpha != 0.0 {
        v.push(Element::phase(s.alpha, ModeSet::path(path)));
    }
    v
}

/// Quantized parameters used to decide whether two elements are identical.
pub(crate) fn element_key(e: &Element) -> (KindTag, i64, u8) {
    let q = |x: f64| (x * 1e11).round() as i64;
    match &e.kind {
        ElementKind::Hwp { theta_deg, .. } => (KindTag::Hwp, q(wrap_angle(*theta_deg)), 0),
        ElementKind::PhaseShift { phi, modes } => (KindTag::PhaseShift, q(wrap_phase(*phi)), modes.pol as u8),
        ElementKind::BeamSplitter { a, b } => (KindTag::BeamSplitter, (*a as i64) << 32 | *b as i64, 0),
        ElementKind::Pbs { .. } => (KindTag::Pbs, 0, 0),
        ElementKind::Rotator { .. } => (KindTag::Rotator, 0, 0),
        ElementKind::PockelsCell { state, .. } => (KindTag::PockelsCell, 0, *state as u8),
        ElementKind::LiquidCrystal { state, .. } => (KindTag::LiquidCrystal, 0, *state as u8),
    }
}

/// Copy of a local element bound to `paths` instead.
pub(crate) fn rebind(e: &Element, paths: PathSet) -> Element {
    let kind = match &e.kind {
        ElementKind::Hwp { theta_deg, .. } => ElementKind::Hwp { theta_deg: *theta_deg, paths },
        ElementKind::PhaseShift { phi, modes } => ElementKind::PhaseShift {
            phi: *phi,
            modes: ModeSet { paths, pol: modes.pol },
        },
        ElementKind::Pbs { .. } => ElementKind::Pbs { paths },
        ElementKind::Rotator { .. } => ElementKind::Rotator { paths },
        ElementKind::PockelsCell { state, .. } => ElementKind::PockelsCell { state: *state, paths },
        ElementKind::LiquidCrystal { state, .. } => ElementKind::LiquidCrystal { state: *state, paths },
        ElementKind::BeamSplitter { .. } => return e.clone(),
    };
    Element { kind, role: e.role }
}
