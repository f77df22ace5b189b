//! Slot form of a circuit used by the optimizer.
//!
//! Beamsplitters, oracle components and PBS readout are kept as an ordered
//! list of events. Everything else is local to a path, so between two events
//! that touch a path its local elements fuse into one 2×2 matrix: a slot.
//! A slot may be placed anywhere in its interval of gaps, where gap `g` is
//! the position just before event `g`.

use nalgebra::Matrix2;

use super::synth::{element_key, max_dev, proportional, rebind, synth_elements, synthesize, Allowed, Synth};
use super::RuleApplication;
use crate::circuit::Circuit;
use crate::elements::{Element, ElementKind, KindTag, PathSet};
use crate::C64;

const PUSH_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct Event {
    pub element: Element,
    /// Paths whose slots this event separates.
    pub origin: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Slot {
    pub lo: usize,
    pub hi: usize,
    pub m: Matrix2<C64>,
    /// The input elements of this slot while its matrix is untouched.
    pub verbatim: Option<Vec<Element>>,
    pub origin: Option<usize>,
}

impl Slot {
    fn open(lo: usize) -> Self {
        Slot {
            lo,
            hi: lo,
            m: Matrix2::identity(),
            verbatim: Some(Vec::new()),
            origin: None,
        }
    }

    fn set(&mut self, m: Matrix2<C64>) {
        self.m = m;
        self.verbatim = None;
    }

    fn is_identity(&self) -> bool {
        max_dev(&self.m, &Matrix2::identity()) < PUSH_TOL
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Ir {
    pub paths: usize,
    pub events: Vec<Event>,
    pub slots: Vec<Vec<Slot>>,
    pub allowed: Allowed,
    /// Element count of the lowered circuit, the position of its end.
    pub len: usize,
}

fn is_event(e: &Element) -> bool {
    e.is_oracle() || matches!(e.kind, ElementKind::BeamSplitter { .. } | ElementKind::Pbs { .. })
}

/// What a slot emits: its input elements, or a synthesized run.
enum Choice {
    Verbatim(Vec<Element>),
    Synth(Synth),
}

/// One element to place. Units of the same chain keep their order;
/// a chain is the polarization run of a slot, or its path phase.
struct Unit {
    path: usize,
    chain: usize,
    lo: usize,
    hi: usize,
    element: Element,
    origin: Option<usize>,
}

pub(crate) struct Emitted {
    pub elements: Vec<Element>,
    pub count: usize,
    pub log: Vec<RuleApplication>,
}

impl Ir {
    pub(crate) fn lower(c: &Circuit) -> Ir {
        let paths = c.registry().paths();
        let allowed = Allowed::from_elements(c.elements());
        let mut events: Vec<Event> = Vec::new();
        let mut slots: Vec<Vec<Slot>> = (0..paths).map(|_| vec![Slot::open(0)]).collect();
        for (idx, e) in c.elements().iter().enumerate() {
            if is_event(e) {
                let touches = match e.kind {
                    ElementKind::BeamSplitter { a, b } if !e.is_oracle() => {
                        let mut t = vec![a, b];
                        t.sort_unstable();
                        t
                    }
                    _ => (0..paths).collect(),
                };
                let g = events.len();
                for &p in &touches {
                    slots[p].last_mut().expect("open slot").hi = g;
                    slots[p].push(Slot::open(g + 1));
                }
                events.push(Event { element: e.clone(), origin: idx });
                continue;
            }
            for p in e.paths(paths) {
                let s = slots[p].last_mut().expect("open slot");
                s.m = e.local_matrix(p).expect("bound path") * s.m;
                if let Some(v) = s.verbatim.as_mut() {
                    v.push(rebind(e, PathSet::one(p)));
                }
                s.origin = Some(s.origin.map_or(idx, |o| o.min(idx)));
            }
        }
        let end = events.len();
        for ps in &mut slots {
            ps.last_mut().expect("open slot").hi = end;
        }
        Ir { paths, events, slots, allowed, len: c.len() }
    }

    fn choice(&self, s: &Slot) -> Option<Choice> {
        let synth = synthesize(&s.m, &self.allowed);
        match (&s.verbatim, synth) {
            (Some(v), Some(sy)) if sy.cost() < v.len() => Some(Choice::Synth(sy)),
            (Some(v), _) => Some(Choice::Verbatim(v.clone())),
            (None, Some(sy)) => Some(Choice::Synth(sy)),
            (None, None) => None,
        }
    }

    /// Path phase the slot would be emitted with, if it is synthesized.
    pub(crate) fn slot_alpha(&self, s: &Slot) -> Option<f64> {
        synthesize(&s.m, &self.allowed).map(|sy| sy.alpha)
    }

    /// Lowers back to elements, merging identical runs on sibling paths.
    /// `None` if some slot cannot be expressed with the allowed kinds.
    pub(crate) fn emit(&self) -> Option<Emitted> {
        let mut log = Vec::new();
        let mut units: Vec<Unit> = Vec::new();
        let mut chains = 0;
        let mut push_chain = |units: &mut Vec<Unit>, p: usize, s: &Slot, els: Vec<Element>| {
            for element in els {
                units.push(Unit { path: p, chain: chains, lo: s.lo, hi: s.hi, element, origin: s.origin });
            }
            chains += 1;
        };
        for (p, ps) in self.slots.iter().enumerate() {
            for s in ps {
                match self.choice(s)? {
                    Choice::Verbatim(v) => push_chain(&mut units, p, s, v),
                    Choice::Synth(sy) => {
                        if let (Some(v), Some(origin)) = (&s.verbatim, s.origin) {
                            let rule = if sy.cost() == 0 {
                                "eliminate-identity"
                            } else if v.iter().all(|e| e.tag() == KindTag::PhaseShift) {
                                "merge-phases"
                            } else {
                                "fuse-waveplate-chain"
                            };
                            log.push(RuleApplication::new(rule, origin));
                        }
                        let mut els = synth_elements(&sy, p);
                        let phase = (sy.alpha != 0.0).then(|| els.pop().expect("phase element"));
                        push_chain(&mut units, p, s, els);
                        if let Some(ph) = phase {
                            push_chain(&mut units, p, s, vec![ph]);
                        }
                    }
                }
            }
        }

        // Greedy placement: take the ready unit that must be placed soonest,
        // put it as late as allowed and let every ready unit with the same
        // element share that position.
        let keys: Vec<_> = units.iter().map(|u| element_key(&u.element)).collect();
        let mut placed = vec![false; units.len()];
        let mut lo: Vec<usize> = units.iter().map(|u| u.lo).collect();
        let ready = |placed: &[bool], i: usize| i == 0 || units[i - 1].chain != units[i].chain || placed[i - 1];
        let mut blocks: Vec<Vec<Element>> = vec![Vec::new(); self.events.len() + 1];
        loop {
            let next = (0..units.len())
                .filter(|&i| !placed[i] && ready(&placed, i))
                .min_by_key(|&i| (units[i].hi, units[i].path, i));
            let Some(first) = next else { break };
            let point = units[first].hi;
            let members: Vec<usize> = (first..units.len())
                .chain(0..first)
                .filter(|&i| {
                    !placed[i] && ready(&placed, i) && keys[i] == keys[first] && lo[i] <= point && point <= units[i].hi
                })
                .collect();
            let mut paths: Vec<usize> = Vec::new();
            for &i in &members {
                if !paths.contains(&units[i].path) {
                    paths.push(units[i].path);
                    placed[i] = true;
                    if i + 1 < units.len() && units[i + 1].chain == units[i].chain {
                        lo[i + 1] = lo[i + 1].max(point);
                    }
                }
            }
            paths.sort_unstable();
            if paths.len() > 1 {
                if let Some(o) = units[first].origin {
                    log.push(RuleApplication::new("merge-sibling-elements", o));
                }
            }
            let set = if paths.len() == self.paths { PathSet::All } else { PathSet::of(paths.iter().copied()) };
            blocks[point].push(rebind(&units[first].element, set));
        }

        let mut elements = Vec::new();
        for (g, bl) in blocks.into_iter().enumerate() {
            elements.extend(bl);
            if let Some(ev) = self.events.get(g) {
                elements.push(ev.element.clone());
            }
        }
        let count = super::count_list(&elements);
        Some(Emitted { elements, count, log })
    }

    pub(crate) fn cost(&self) -> Option<usize> {
        self.emit().map(|e| e.count)
    }

    fn slot_closing(&self, p: usize, g: usize) -> usize {
        self.slots[p].iter().position(|s| s.hi == g).expect("slot closes at event")
    }

    /// Moves a polarization transformation common to both inputs of the
    /// beamsplitter at event `g` to its outputs (`forward`) or back.
    fn push(&mut self, g: usize, forward: bool) -> bool {
        let ElementKind::BeamSplitter { a, b } = self.events[g].element.kind else {
            return false;
        };
        if self.events[g].element.is_oracle() {
            return false;
        }
        let (ia, ib) = (self.slot_closing(a, g), self.slot_closing(b, g));
        let (sa, sb) = if forward { (ia, ib) } else { (ia + 1, ib + 1) };
        let ua = self.slots[a][sa].m;
        let ub = self.slots[b][sb].m;
        let Some(r) = proportional(&ua, &ub, PUSH_TOL) else {
            return false;
        };
        if self.slots[a][sa].is_identity() {
            return false;
        }
        let (ta, tb) = if forward { (ia + 1, ib + 1) } else { (ia, ib) };
        let scalar_b = Matrix2::identity() * r;
        self.slots[a][sa].set(Matrix2::identity());
        self.slots[b][sb].set(scalar_b);
        let (ma, mb) = (self.slots[a][ta].m, self.slots[b][tb].m);
        if forward {
            self.slots[a][ta].set(ma * ua);
            self.slots[b][tb].set(mb * ua);
        } else {
            self.slots[a][ta].set(ua * ma);
            self.slots[b][tb].set(ua * mb);
        }
        true
    }

    /// Greedy beamsplitter pushes: forward pushes are kept unless they add
    /// elements, backward pushes only when they remove some.
    pub(crate) fn push_pass(&mut self, log: &mut Vec<RuleApplication>) {
        let Some(mut cost) = self.cost() else { return };
        let limit = 50 * (self.events.len() + 1);
        let mut steps = 0;
        let mut changed = true;
        while changed && steps < limit {
            changed = false;
            for g in 0..self.events.len() {
                for forward in [true, false] {
                    steps += 1;
                    let mut trial = self.clone();
                    if !trial.push(g, forward) {
                        continue;
                    }
                    let Some(c) = trial.cost() else { continue };
                    if c < cost || (forward && c == cost) {
                        *self = trial;
                        log.push(RuleApplication::new("push-through-beamsplitter", self.events[g].origin));
                        changed = c < cost || changed;
                        cost = c;
                    }
                }
            }
        }
    }

    fn cut(&self, g: usize) -> Vec<(usize, usize)> {
        (0..self.paths)
            .map(|p| (p, self.slots[p].iter().position(|s| s.lo <= g && g <= s.hi).expect("slot covers gap")))
            .collect()
    }

    /// Distinct nonzero path phases across the cut at gap `g`, most common
    /// first.
    fn cut_phases(&self, g: usize) -> Vec<(usize, f64)> {
        let mut counts: Vec<(usize, f64)> = Vec::new();
        for (p, i) in self.cut(g) {
            let Some(a) = self.slot_alpha(&self.slots[p][i]) else { continue };
            if a == 0.0 {
                continue;
            }
            match counts.iter_mut().find(|(_, x)| (x - a).abs() < 1e-11) {
                Some(e) => e.0 += 1,
                None => counts.push((1, a)),
            }
        }
        counts.sort_by_key(|x| std::cmp::Reverse(x.0));
        counts
    }

    /// Multiplies every slot across the cut at gap `g` by `e^{-i delta}`.
    fn strip(&mut self, g: usize, delta: f64) {
        let z = C64::from_polar(1.0, -delta);
        for (p, i) in self.cut(g) {
            let m = self.slots[p][i].m * z;
            self.slots[p][i].set(m);
        }
    }

    /// Removes the most common path phase across a cut of slots, which is a
    /// global phase, when that lowers the element count.
    pub(crate) fn strip_pass(&mut self, log: &mut Vec<RuleApplication>) {
        let Some(mut cost) = self.cost() else { return };
        let mut improved = true;
        while improved {
            improved = false;
            for g in 0..=self.events.len() {
                let counts = self.cut_phases(g);
                for &(_, delta) in &counts {
                    let mut trial = self.clone();
                    trial.strip(g, delta);
                    if let Some(c) = trial.cost() {
                        if c < cost {
                            *self = trial;
                            cost = c;
                            improved = true;
                            let at = self.events.get(g).map_or(self.len, |e| e.origin);
                            log.push(RuleApplication::new("strip-global-phase", at));
                            break;
                        }
                    }
                }
            }
        }
    }
}
