//! Optical components and their actions on the mode space.
//!
//! Jones matrices act on column vectors `(H, V)`; column `j` of a matrix is
//! the image of basis vector `j`. Beamsplitter matrices act on `(a, b)` in the
//! same way, independently for each polarization.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, Dim, Matrix, Matrix2, StorageMut};

use crate::error::{invalid, Result};
use crate::state::{ModeSpace, PureState};
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Half waveplate with its fast axis at `theta_deg` from horizontal.
pub fn hwp_matrix(theta_deg: f64) -> Matrix2<C64> {
    let (s, co) = sin_cos_deg(2.0 * theta_deg);
    Matrix2::new(c(co, 0.), c(s, 0.), c(s, 0.), c(-co, 0.))
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90.
fn sin_cos_deg(x: f64) -> (f64, f64) {
    let r = x.rem_euclid(360.0);
    if r % 90.0 == 0.0 {
        return match r as u32 {
            0 => (0.0, 1.0),
            90 => (1.0, 0.0),
            180 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
    }
    r.to_radians().sin_cos()
}

/// 50/50 beamsplitter, `a -> (a + ib)/√2`, `b -> (ia + b)/√2`.
pub fn bs_matrix() -> Matrix2<C64> {
    let t = c(FRAC_1_SQRT_2, 0.);
    let r = c(0., FRAC_1_SQRT_2);
    Matrix2::new(t, r, r, t)
}

/// 90° polarization rotator: `H -> V`, `V -> -H`.
pub fn rotator_matrix() -> Matrix2<C64> {
    Matrix2::new(c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.))
}

/// Half-wave retardation with the fast axis horizontal, `diag(1, -1)`.
pub fn pi_v_matrix() -> Matrix2<C64> {
    Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
}

/// Diagonal phase on the selected polarizations of one path.
pub fn phase_matrix(phi: f64, pol: PolSel) -> Matrix2<C64> {
    let p = C64::from_polar(1.0, phi);
    let one = c(1., 0.);
    let zero = c(0., 0.);
    match pol {
        PolSel::Both => Matrix2::new(p, zero, zero, p),
        PolSel::H => Matrix2::new(p, zero, zero, one),
        PolSel::V => Matrix2::new(one, zero, zero, p),
    }
}

/// Pockels cell: glass at 0 kV, half-wave (fast axis horizontal) at 3.9 kV.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PockelsState {
    Off,
    On,
}

/// Liquid-crystal retarder: glass at 5.6 V, half-wave (fast axis horizontal) at 2.2 V.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LcState {
    Glass,
    Hwp0,
}

impl PockelsState {
    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            PockelsState::Off => Matrix2::identity(),
            PockelsState::On => pi_v_matrix(),
        }
    }
}

impl LcState {
    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            LcState::Glass => Matrix2::identity(),
            LcState::Hwp0 => pi_v_matrix(),
        }
    }
}

/// A set of spatial paths, or every path of the enclosing circuit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathSet {
    All,
    Only(Vec<usize>),
}

impl PathSet {
    pub fn one(path: usize) -> Self {
        PathSet::Only(vec![path])
    }

    /// Sorted, de-duplicated set; an empty list is rejected at validation.
    pub fn of(paths: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = paths.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PathSet::Only(v)
    }

    pub fn contains(&self, path: usize) -> bool {
        match self {
            PathSet::All => true,
            PathSet::Only(v) => v.binary_search(&path).is_ok(),
        }
    }

    pub fn resolve(&self, total: usize) -> Vec<usize> {
        match self {
            PathSet::All => (0..total).collect(),
            PathSet::Only(v) => v.clone(),
        }
    }

    fn validate(&self, total: usize) -> Result<()> {
        match self {
            PathSet::All => Ok(()),
            PathSet::Only(v) if v.is_empty() => invalid("element bound to no path"),
            PathSet::Only(v) => match v.iter().find(|&&p| p >= total) {
                Some(p) => invalid(format!("path {p} does not exist ({total} paths)")),
                None => Ok(()),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolSel {
    Both,
    H,
    V,
}

/// Modes touched by a phase shifter: the chosen polarizations of a path set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeSet {
    pub paths: PathSet,
    pub pol: PolSel,
}

impl ModeSet {
    pub fn path(path: usize) -> Self {
        ModeSet {
            paths: PathSet::one(path),
            pol: PolSel::Both,
        }
    }

    pub fn all() -> Self {
        ModeSet {
            paths: PathSet::All,
            pol: PolSel::Both,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElementKind {
    Hwp { theta_deg: f64, paths: PathSet },
    /// `a` takes the transmitted role of the `a -> (a + ib)/√2` convention.
    BeamSplitter { a: usize, b: usize },
    PhaseShift { phi: f64, modes: ModeSet },
    /// Readout: H transmits, V reflects; each (path, pol) becomes a detector.
    Pbs { paths: PathSet },
    Rotator { paths: PathSet },
    PockelsCell { state: PockelsState, paths: PathSet },
    LiquidCrystal { state: LcState, paths: PathSet },
}

/// Whether an element belongs to the oracle. Oracle elements are opaque
/// barriers for the compiler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Role {
    #[default]
    Optic,
    Oracle,
}

/// Element kinds without parameters, used for bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KindTag {
    Hwp,
    BeamSplitter,
    PhaseShift,
    Pbs,
    Rotator,
    PockelsCell,
    LiquidCrystal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    pub role: Role,
}

impl Element {
    pub fn new(kind: ElementKind) -> Self {
        Element {
            kind,
            role: Role::Optic,
        }
    }

    pub fn hwp(theta_deg: f64, paths: PathSet) -> Self {
        Element::new(ElementKind::Hwp { theta_deg, paths })
    }

    pub fn bs(a: usize, b: usize) -> Self {
        Element::new(ElementKind::BeamSplitter { a, b })
    }

    pub fn phase(phi: f64, modes: ModeSet) -> Self {
        Element::new(ElementKind::PhaseShift { phi, modes })
    }

    pub fn pbs(paths: PathSet) -> Self {
        Element::new(ElementKind::Pbs { paths })
    }

    pub fn rotator(paths: PathSet) -> Self {
        Element::new(ElementKind::Rotator { paths })
    }

    pub fn pockels(state: PockelsState, paths: PathSet) -> Self {
        Element::new(ElementKind::PockelsCell { state, paths })
    }

    pub fn liquid_crystal(state: LcState, paths: PathSet) -> Self {
        Element::new(ElementKind::LiquidCrystal { state, paths })
    }

    pub fn as_oracle(mut self) -> Self {
        self.role = Role::Oracle;
        self
    }

    pub fn is_oracle(&self) -> bool {
        self.role == Role::Oracle
    }

    pub fn tag(&self) -> KindTag {
        match self.kind {
            ElementKind::Hwp { .. } => KindTag::Hwp,
            ElementKind::BeamSplitter { .. } => KindTag::BeamSplitter,
            ElementKind::PhaseShift { .. } => KindTag::PhaseShift,
            ElementKind::Pbs { .. } => KindTag::Pbs,
            ElementKind::Rotator { .. } => KindTag::Rotator,
            ElementKind::PockelsCell { .. } => KindTag::PockelsCell,
            ElementKind::LiquidCrystal { .. } => KindTag::LiquidCrystal,
        }
    }

    /// True for elements that act path by path (everything but the beamsplitter).
    pub fn is_local(&self) -> bool {
        !matches!(self.kind, ElementKind::BeamSplitter { .. })
    }

    /// True when the element acts only on polarization.
    pub fn is_polarization_only(&self) -> bool {
        match &self.kind {
            ElementKind::BeamSplitter { .. } => false,
            ElementKind::PhaseShift { modes, .. } => modes.pol != PolSel::Both,
            _ => true,
        }
    }

    /// Paths the element acts on, in a space of `total` paths.
    pub fn paths(&self, total: usize) -> Vec<usize> {
        match &self.kind {
            ElementKind::BeamSplitter { a, b } => vec![*a, *b],
            ElementKind::PhaseShift { modes, .. } => modes.paths.resolve(total),
            ElementKind::Hwp { paths, .. }
            | ElementKind::Pbs { paths }
            | ElementKind::Rotator { paths }
            | ElementKind::PockelsCell { paths, .. }
            | ElementKind::LiquidCrystal { paths, .. } => paths.resolve(total),
        }
    }

    fn path_set(&self) -> Option<&PathSet> {
        match &self.kind {
            ElementKind::BeamSplitter { .. } => None,
            ElementKind::PhaseShift { modes, .. } => Some(&modes.paths),
            ElementKind::Hwp { paths, .. }
            | ElementKind::Pbs { paths }
            | ElementKind::Rotator { paths }
            | ElementKind::PockelsCell { paths, .. }
            | ElementKind::LiquidCrystal { paths, .. } => Some(paths),
        }
    }

    pub fn spans_all_paths(&self) -> bool {
        matches!(self.path_set(), Some(PathSet::All))
    }

    pub fn validate(&self, total: usize) -> Result<()> {
        match &self.kind {
            ElementKind::BeamSplitter { a, b } => {
                if a == b {
                    return invalid(format!("beamsplitter joins path {a} to itself"));
                }
                if let Some(p) = [a, b].into_iter().find(|&&p| p >= total) {
                    return invalid(format!("path {p} does not exist ({total} paths)"));
                }
                Ok(())
            }
            ElementKind::Hwp { theta_deg: x, .. } | ElementKind::PhaseShift { phi: x, .. }
                if !x.is_finite() =>
            {
                invalid("element parameter is not finite")
            }
            _ => self.path_set().expect("local element").validate(total),
        }
    }

    /// 2×2 action on the `(H, V)` modes of `path`, or `None` if the element
    /// does not touch that path. Not defined for beamsplitters.
    pub fn local_matrix(&self, path: usize) -> Option<Matrix2<C64>> {
        match &self.kind {
            ElementKind::BeamSplitter { .. } => None,
            ElementKind::Hwp { theta_deg, paths } => paths.contains(path).then(|| hwp_matrix(*theta_deg)),
            ElementKind::PhaseShift { phi, modes } => {
                modes.paths.contains(path).then(|| phase_matrix(*phi, modes.pol))
            }
            ElementKind::Pbs { paths } => paths.contains(path).then(Matrix2::identity),
            ElementKind::Rotator { paths } => paths.contains(path).then(rotator_matrix),
            ElementKind::PockelsCell { state, paths } => paths.contains(path).then(|| state.matrix()),
            ElementKind::LiquidCrystal { state, paths } => paths.contains(path).then(|| state.matrix()),
        }
    }

    /// Applies the element in place to the rows of `m` (mode-indexed).
    pub(crate) fn act<R: Dim, C: Dim, S: StorageMut<C64, R, C>>(&self, m: &mut Matrix<C64, R, C, S>) {
        let paths = m.nrows() / 2;
        match &self.kind {
            ElementKind::BeamSplitter { a, b } => {
                let u = bs_matrix();
                for pol in 0..2 {
                    mix_rows(m, 2 * a + pol, 2 * b + pol, &u);
                }
            }
            ElementKind::Pbs { .. } => {}
            _ => {
                for p in self.paths(paths) {
                    let u = self.local_matrix(p).expect("bound path");
                    mix_rows(m, 2 * p, 2 * p + 1, &u);
                }
            }
        }
    }
}

pub(crate) fn mix_rows<R: Dim, C: Dim, S: StorageMut<C64, R, C>>(
    m: &mut Matrix<C64, R, C, S>,
    i: usize,
    j: usize,
    u: &Matrix2<C64>,
) {
    for col in 0..m.ncols() {
        let x = m[(i, col)];
        let y = m[(j, col)];
        m[(i, col)] = u[(0, 0)] * x + u[(0, 1)] * y;
        m[(j, col)] = u[(1, 0)] * x + u[(1, 1)] * y;
    }
}

/// Applies `e` to `state`, acting as identity on the modes it does not bind.
pub fn apply_element(state: &PureState, e: &Element) -> Result<PureState> {
    e.validate(state.space().paths())?;
    let mut out = state.clone();
    e.act(out.amplitudes_mut());
    Ok(out)
}

/// Dense unitary of `e` over the full mode space.
pub fn element_unitary(e: &Element, space: ModeSpace) -> Result<DMatrix<C64>> {
    e.validate(space.paths())?;
    let mut m = DMatrix::identity(space.dim(), space.dim());
    e.act(&mut m);
    Ok(m)
}

impl fmt::Display for PockelsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PockelsState::Off => "off",
            PockelsState::On => "on",
        })
    }
}

impl fmt::Display for LcState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LcState::Glass => "glass",
            LcState::Hwp0 => "hwp0",
        })
    }
}
