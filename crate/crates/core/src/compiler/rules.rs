//! Local rewrite rules and their self-check.
//!
//! Each rule rewrites a short element segment into an equivalent one. The
//! optimizer applies the same transformations in slot form; the rules here
//! are the checked statement of what each transformation is allowed to do.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::synth::{element_key, rebind, synth_elements, synthesize, wrap_phase, Allowed};
use super::{commutes, matrices_equiv};
use crate::elements::{Element, ElementKind, LcState, ModeSet, PathSet, PockelsState, PolSel};
use crate::error::{Error, Result};
use crate::state::ModeSpace;
use crate::{ALGEBRAIC_TOL, C64};

/// A rewrite of a short segment of elements acting on `paths` paths.
pub trait RewriteRule: Send + Sync {
    fn name(&self) -> &'static str;

    /// The replacement, or `None` when the rule does not apply.
    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>>;

    /// A random segment the rule applies to, with its path count.
    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize);
}

fn single_path(e: &Element, paths: usize) -> Option<usize> {
    match e.paths(paths).as_slice() {
        [p] if e.is_local() && !e.is_oracle() && !matches!(e.kind, ElementKind::Pbs { .. }) => Some(*p),
        _ => None,
    }
}

fn random_local(rng: &mut ChaCha8Rng, paths: PathSet) -> Element {
    match rng.random_range(0..6) {
        0 => Element::hwp(rng.random_range(0.0..180.0), paths),
        1 => Element::phase(
            rng.random_range(-4.0..4.0),
            ModeSet { paths, pol: [PolSel::Both, PolSel::H, PolSel::V][rng.random_range(0..3)] },
        ),
        2 => Element::rotator(paths),
        3 => Element::pockels(if rng.random_bool(0.5) { PockelsState::On } else { PockelsState::Off }, paths),
        4 => Element::liquid_crystal(if rng.random_bool(0.5) { LcState::Hwp0 } else { LcState::Glass }, paths),
        _ => Element::hwp(22.5 * rng.random_range(0..8) as f64, paths),
    }
}

/// Any run of local elements on one path becomes at most three
/// polarization elements and a path phase.
pub struct FuseWaveplateChain;

impl RewriteRule for FuseWaveplateChain {
    fn name(&self) -> &'static str {
        "fuse-waveplate-chain"
    }

    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>> {
        let p = single_path(segment.first()?, paths)?;
        if segment.iter().any(|e| single_path(e, paths) != Some(p)) {
            return None;
        }
        let mut m = nalgebra::Matrix2::identity();
        for e in segment {
            m = e.local_matrix(p)? * m;
        }
        let s = synthesize(&m, &Allowed::from_elements(segment))?;
        (s.cost() < segment.len()).then(|| synth_elements(&s, p))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        loop {
            let len = rng.random_range(2..6);
            let seg: Vec<Element> = (0..len).map(|_| random_local(rng, PathSet::one(1))).collect();
            if self.rewrite(&seg, 2).is_some() {
                return (seg, 2);
            }
        }
    }
}

/// Consecutive phase shifters on the same modes add.
pub struct MergePhases;

impl RewriteRule for MergePhases {
    fn name(&self) -> &'static str {
        "merge-phases"
    }

    fn rewrite(&self, segment: &[Element], _paths: usize) -> Option<Vec<Element>> {
        let mut total = 0.0;
        let mut modes: Option<&ModeSet> = None;
        for e in segment {
            let ElementKind::PhaseShift { phi, modes: m } = &e.kind else { return None };
            if e.is_oracle() || modes.is_some_and(|x| x != m) {
                return None;
            }
            modes = Some(m);
            total += phi;
        }
        if segment.len() < 2 {
            return None;
        }
        let phi = wrap_phase(total);
        Some(if phi == 0.0 { vec![] } else { vec![Element::phase(phi, modes?.clone())] })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        let modes = ModeSet {
            paths: PathSet::of([0, 2]),
            pol: [PolSel::Both, PolSel::H, PolSel::V][rng.random_range(0..3)],
        };
        let len = rng.random_range(2..5);
        ((0..len).map(|_| Element::phase(rng.random_range(-7.0..7.0), modes.clone())).collect(), 3)
    }
}

/// Elements that act as the identity are removed.
pub struct EliminateIdentity;

impl RewriteRule for EliminateIdentity {
    fn name(&self) -> &'static str {
        "eliminate-identity"
    }

    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>> {
        let [e] = segment else { return None };
        if e.is_oracle() || !e.is_local() || matches!(e.kind, ElementKind::Pbs { .. }) {
            return None;
        }
        let id = nalgebra::Matrix2::identity();
        e.paths(paths)
            .into_iter()
            .all(|p| e.local_matrix(p).is_some_and(|m| super::synth::max_dev(&m, &id) < ALGEBRAIC_TOL))
            .then(Vec::new)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        let paths = PathSet::one(rng.random_range(0..2));
        let e = match rng.random_range(0..3) {
            0 => Element::phase(2.0 * std::f64::consts::PI * rng.random_range(-2..3) as f64, ModeSet { paths, pol: PolSel::V }),
            1 => Element::pockels(PockelsState::Off, paths),
            _ => Element::liquid_crystal(LcState::Glass, paths),
        };
        (vec![e], 2)
    }
}

/// A phase shared by every mode is unobservable.
pub struct StripGlobalPhase;

impl RewriteRule for StripGlobalPhase {
    fn name(&self) -> &'static str {
        "strip-global-phase"
    }

    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>> {
        let [e] = segment else { return None };
        match &e.kind {
            ElementKind::PhaseShift { modes, .. }
                if !e.is_oracle() && modes.pol == PolSel::Both && modes.paths.resolve(paths).len() == paths =>
            {
                Some(vec![])
            }
            _ => None,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        let paths = rng.random_range(1..5);
        let set = if rng.random_bool(0.5) { PathSet::All } else { PathSet::of(0..paths) };
        (vec![Element::phase(rng.random_range(-4.0..4.0), ModeSet { paths: set, pol: PolSel::Both })], paths)
    }
}

/// A transformation applied identically to both inputs of a beamsplitter
/// commutes with it.
pub struct PushThroughBeamsplitter;

impl RewriteRule for PushThroughBeamsplitter {
    fn name(&self) -> &'static str {
        "push-through-beamsplitter"
    }

    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>> {
        let [x, bs] = segment else { return None };
        let ElementKind::BeamSplitter { a, b } = bs.kind else { return None };
        let ElementKind::BeamSplitter { .. } = x.kind else {
            let mut on = x.paths(paths);
            on.sort_unstable();
            let mut ab = vec![a, b];
            ab.sort_unstable();
            return (on == ab && commutes(x, bs, paths)).then(|| vec![bs.clone(), x.clone()]);
        };
        None
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        loop {
            let x = random_local(rng, PathSet::of([0, 2]));
            let seg = vec![x, Element::bs(2, 0)];
            if self.rewrite(&seg, 3).is_some() {
                return (seg, 3);
            }
        }
    }
}

/// Identical elements at the same position on several paths become one
/// element spanning those paths.
pub struct MergeSiblingElements;

impl RewriteRule for MergeSiblingElements {
    fn name(&self) -> &'static str {
        "merge-sibling-elements"
    }

    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>> {
        let first = segment.first()?;
        if segment.len() < 2 || first.is_oracle() || !first.is_local() {
            return None;
        }
        let key = element_key(first);
        let mut on = Vec::new();
        for e in segment {
            if e.is_oracle() || element_key(e) != key || !e.is_local() {
                return None;
            }
            on.extend(e.paths(paths));
        }
        let n = on.len();
        on.sort_unstable();
        on.dedup();
        if on.len() != n {
            return None;
        }
        let set = if on.len() == paths { PathSet::All } else { PathSet::of(on) };
        Some(vec![rebind(first, set)])
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        let proto = random_local(rng, PathSet::one(0));
        let paths = rng.random_range(2..5);
        let k = rng.random_range(2..=paths);
        ((0..k).map(|p| rebind(&proto, PathSet::one(p))).collect(), paths)
    }
}

/// Adjacent elements that commute may swap.
pub struct Commute;

impl RewriteRule for Commute {
    fn name(&self) -> &'static str {
        "commute"
    }

    fn rewrite(&self, segment: &[Element], paths: usize) -> Option<Vec<Element>> {
        let [x, y] = segment else { return None };
        commutes(x, y, paths).then(|| vec![y.clone(), x.clone()])
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<Element>, usize) {
        loop {
            let pick = |rng: &mut ChaCha8Rng| {
                if rng.random_bool(0.3) {
                    let a = rng.random_range(0..3);
                    Element::bs(a, (a + 1 + rng.random_range(0..2)) % 3)
                } else {
                    let set = if rng.random_bool(0.3) { PathSet::All } else { PathSet::one(rng.random_range(0..3)) };
                    random_local(rng, set)
                }
            };
            let seg = vec![pick(rng), pick(rng)];
            if self.rewrite(&seg, 3).is_some() {
                return (seg, 3);
            }
        }
    }
}

/// All rules, in the order their names appear in compile reports.
pub fn rule_set() -> Vec<Box<dyn RewriteRule>> {
    vec![
        Box::new(FuseWaveplateChain),
        Box::new(MergePhases),
        Box::new(EliminateIdentity),
        Box::new(StripGlobalPhase),
        Box::new(PushThroughBeamsplitter),
        Box::new(MergeSiblingElements),
        Box::new(Commute),
    ]
}

fn segment_unitary(seg: &[Element], paths: usize) -> DMatrix<C64> {
    let dim = ModeSpace::new(paths).expect("paths > 0").dim();
    let mut u = DMatrix::identity(dim, dim);
    for e in seg {
        e.act(&mut u);
    }
    u
}

/// Largest deviation between pattern and replacement over `instances`
/// random instances of the rule.
pub fn verify_rule(rule: &dyn RewriteRule, instances: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (seg, paths) = rule.sample(&mut rng);
        let out = rule.rewrite(&seg, paths).ok_or_else(|| {
            Error::Internal(format!("rule {} rejected its own sample instance", rule.name()))
        })?;
        let (_, dev) = matrices_equiv(&segment_unitary(&seg, paths), &segment_unitary(&out, paths));
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Instances checked per rule when the rule set is first used.
pub const RULE_CHECK_INSTANCES: usize = 100;

/// Checks every rule once per process; later calls return the cached result.
pub fn verified_rule_set() -> Result<()> {
    static CHECK: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    CHECK
        .get_or_init(|| {
            for rule in rule_set() {
                let dev = verify_rule(rule.as_ref(), RULE_CHECK_INSTANCES, 0x5eed).map_err(|e| e.to_string())?;
                if dev >= ALGEBRAIC_TOL {
                    return Err(format!("rule {} deviates by {dev:e}", rule.name()));
                }
            }
            Ok(())
        })
        .clone()
        .map_err(Error::Internal)
}
