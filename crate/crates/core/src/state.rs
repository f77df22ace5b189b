//! Optical mode space and quantum states of a single photon.
//!
//! A photon lives in `paths × 2` modes. Modes are ordered path-major,
//! polarization-minor, so mode index `2 * path + pol`. For an `n`-qubit
//! register there are `2^(n-1)` paths and the mode index read in binary is the
//! logical bit string: spatial bits first (most significant bit = outcome at
//! the first beamsplitter), polarization bit last (H = 0, V = 1).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::{ALGEBRAIC_TOL, C64};

/// Norm tolerance accepted when constructing a state from external data.
const INPUT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn bit(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Pol {
        if bit & 1 == 0 {
            Pol::H
        } else {
            Pol::V
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pol::H => "H",
            Pol::V => "V",
        })
    }
}

impl FromStr for Pol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Pol> {
        match s {
            "H" | "h" => Ok(Pol::H),
            "V" | "v" => Ok(Pol::V),
            _ => invalid(format!("unknown polarization `{s}`")),
        }
    }
}

/// One optical mode: a spatial path together with a polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub path: usize,
    pub pol: Pol,
}

impl ModeId {
    pub fn new(path: usize, pol: Pol) -> Self {
        ModeId { path, pol }
    }

    pub fn index(self) -> usize {
        2 * self.path + self.pol.bit()
    }

    pub fn from_index(index: usize) -> Self {
        ModeId {
            path: index / 2,
            pol: Pol::from_bit(index),
        }
    }
}

/// The set of modes available to the photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeSpace {
    paths: usize,
}

impl ModeSpace {
    pub fn new(paths: usize) -> Result<Self> {
        if paths == 0 {
            return invalid("a mode space needs at least one path");
        }
        Ok(ModeSpace { paths })
    }

    /// Mode space of an `n`-qubit register: `2^(n-1)` paths.
    pub fn for_qubits(n: usize) -> Result<Self> {
        if n < 1 {
            return invalid("qubit count must be at least 1");
        }
        if n > 20 {
            return invalid(format!("qubit count {n} is too large to simulate densely"));
        }
        ModeSpace::new(1 << (n - 1))
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn dim(&self) -> usize {
        2 * self.paths
    }

    /// Number of qubits if the path count is a power of two.
    pub fn qubits(&self) -> Option<usize> {
        self.paths
            .is_power_of_two()
            .then(|| self.paths.trailing_zeros() as usize + 1)
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeId> {
        (0..self.dim()).map(ModeId::from_index)
    }
}

/// Default label of path `index` among `total` paths: `a`, `b`, ... while
/// they last, `p<index>` beyond 26 paths.
pub fn default_path_label(index: usize, total: usize) -> String {
    if total <= 26 {
        ((b'a' + index as u8) as char).to_string()
    } else {
        format!("p{index}")
    }
}

/// A fixed-width logical bit string, e.g. a database element `01`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: usize,
    width: usize,
}

impl BitString {
    pub fn new(value: usize, width: usize) -> Result<Self> {
        if width == 0 || width > 20 {
            return invalid(format!("bit string width {width} out of range"));
        }
        if value >> width != 0 {
            return invalid(format!("value {value} does not fit in {width} bits"));
        }
        Ok(BitString { value, width })
    }

    pub fn value(&self) -> usize {
        self.value
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// The mode this bit string labels under the basis convention.
    pub fn mode(&self) -> ModeId {
        ModeId::from_index(self.value)
    }

    /// Detector number (1-based) reading out this element.
    pub fn detector(&self) -> usize {
        self.value + 1
    }

    pub fn all(width: usize) -> Result<Vec<BitString>> {
        let first = BitString::new(0, width)?;
        Ok((0..1usize << first.width)
            .map(|value| BitString { value, width })
            .collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(if (self.value >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return invalid(format!("`{s}` is not a bit string"));
        }
        let value = usize::from_str_radix(s, 2)
            .map_err(|e| Error::InvalidArgument(format!("bad bit string `{s}`: {e}")))?;
        BitString::new(value, s.len())
    }
}

/// Pure single-photon state over a mode space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    space: ModeSpace,
    amps: DVector<C64>,
}

impl PureState {
    pub fn new(space: ModeSpace, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return invalid(format!(
                "amplitude vector has length {}, mode space has {} modes",
                amps.len(),
                space.dim()
            ));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return invalid(format!("state is not normalized (norm {norm})"));
        }
        Ok(PureState { space, amps })
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(space: ModeSpace, amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        PureState::new(space, amps.unscale(norm))
    }

    pub(crate) fn from_raw(space: ModeSpace, amps: DVector<C64>) -> Self {
        debug_assert_eq!(amps.len(), space.dim());
        PureState { space, amps }
    }

    pub fn basis(space: ModeSpace, mode: ModeId) -> Result<Self> {
        if mode.path >= space.paths() {
            return invalid(format!(
                "path {} outside a space of {} paths",
                mode.path,
                space.paths()
            ));
        }
        let mut amps = DVector::zeros(space.dim());
        amps[mode.index()] = C64::new(1.0, 0.0);
        Ok(PureState { space, amps })
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn amplitude(&self, mode: ModeId) -> C64 {
        self.amps[mode.index()]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.space != other.space {
            return invalid("inner product of states on different mode spaces");
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Copy with the global phase rotated so that the first non-negligible
    /// amplitude is real and positive.
    pub fn canonical(&self) -> PureState {
        let mut out = self.clone();
        if let Some(first) = self.amps.iter().find(|a| a.norm() > ALGEBRAIC_TOL) {
            let phase = first.conj() / first.norm();
            out.amps.iter_mut().for_each(|a| *a *= phase);
        }
        out
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    /// Canonical JSON form, see [`StateJson`].
    pub fn to_json(&self, labels: Option<&[String]>) -> StateJson {
        let canon = self.canonical();
        let paths = self.space.paths();
        let labels: Vec<String> = match labels {
            Some(l) if l.len() == paths => l.to_vec(),
            _ => (0..paths).map(|p| default_path_label(p, paths)).collect(),
        };
        StateJson {
            schema_version: 1,
            basis: BasisJson {
                convention: BASIS_DESCRIPTOR.to_string(),
                qubits: self.space.qubits(),
                modes: self
                    .space
                    .modes()
                    .map(|m| format!("{}{}", labels[m.path], m.pol))
                    .collect(),
            },
            amplitudes: canon.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        if !json.amplitudes.len().is_multiple_of(2) || json.amplitudes.is_empty() {
            return invalid("amplitude list must have an even, non-zero length");
        }
        let space = ModeSpace::new(json.amplitudes.len() / 2)?;
        let amps = DVector::from_iterator(
            space.dim(),
            json.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)),
        );
        PureState::new(space, amps)
    }
}

/// Equal superposition of all `2^n` database elements.
pub fn uniform_superposition(n: usize) -> Result<PureState> {
    let space = ModeSpace::for_qubits(n)?;
    let amp = C64::new(1.0 / (space.dim() as f64).sqrt(), 0.0);
    Ok(PureState {
        space,
        amps: DVector::from_element(space.dim(), amp),
    })
}

/// `|⟨s1|s2⟩|`, which is 1 exactly when the states agree up to global phase.
pub fn fidelity_up_to_global_phase(s1: &PureState, s2: &PureState) -> Result<f64> {
    if s1.space.dim() != s2.space.dim() {
        return invalid(format!(
            "dimension mismatch: {} vs {}",
            s1.space.dim(),
            s2.space.dim()
        ));
    }
    Ok(s1.amps.dotc(&s2.amps).norm().min(1.0))
}

pub const BASIS_DESCRIPTOR: &str =
    "path-major, polarization-minor; spatial bits first, polarization bit last (H=0, V=1)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub convention: String,
    pub qubits: Option<usize>,
    pub modes: Vec<String>,
}

/// Serialized state: amplitudes as `[re, im]` pairs in mode order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub schema_version: u32,
    pub basis: BasisJson,
    pub amplitudes: Vec<[f64; 2]>,
}

/// Which degree of freedom survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    Polarization,
    Spatial,
}

/// A density matrix. Over the full mode space it is indexed by mode; after a
/// partial trace it is indexed by the kept subsystem's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let rho = DensityMatrix { matrix };
        rho.validate(ALGEBRAIC_TOL)?;
        Ok(rho)
    }

    #[cfg(test)]
    pub(crate) fn from_raw(matrix: DMatrix<C64>) -> Self {
        DensityMatrix { matrix }
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() || m.nrows() == 0 {
            return invalid("density matrix must be square and non-empty");
        }
        let herm = crate::max_or_inf((m - m.adjoint()).iter().map(|z| z.norm()));
        if herm > tol {
            return invalid(format!("matrix is not Hermitian (deviation {herm:e})"));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return invalid(format!("trace is {tr}, expected 1"));
        }
        let min_eig = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -tol {
            return invalid(format!("negative eigenvalue {min_eig:e}"));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()).unscale(2.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Largest entry-wise deviation from `other`.
    pub fn max_deviation(&self, other: &DMatrix<C64>) -> f64 {
        crate::max_or_inf((&self.matrix - other).iter().map(|z| z.norm()))
    }
}

/// A state handed to [`partial_trace`].
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

/// Reduced density matrix of the kept subsystem (paths × polarization split).
pub fn partial_trace<'a>(state: impl Into<StateRef<'a>>, keep: Subsystem) -> Result<DensityMatrix> {
    match state.into() {
        StateRef::Pure(psi) => Ok(trace_pure(psi.amplitudes(), psi.space().paths(), keep)),
        StateRef::Mixed(rho) => {
            let dim = rho.dim();
            if dim == 0 || dim % 2 != 0 {
                return invalid(format!(
                    "dimension {dim} does not factor as paths x 2 polarizations"
                ));
            }
            Ok(trace_mixed(rho.matrix(), dim / 2, keep))
        }
    }
}

fn trace_pure(amps: &DVector<C64>, paths: usize, keep: Subsystem) -> DensityMatrix {
    let at = |p: usize, s: usize| amps[2 * p + s];
    let m = match keep {
        Subsystem::Polarization => DMatrix::from_fn(2, 2, |s, t| {
            (0..paths).map(|p| at(p, s) * at(p, t).conj()).sum()
        }),
        Subsystem::Spatial => DMatrix::from_fn(paths, paths, |p, q| {
            (0..2).map(|s| at(p, s) * at(q, s).conj()).sum()
        }),
    };
    DensityMatrix { matrix: m }
}

fn trace_mixed(rho: &DMatrix<C64>, paths: usize, keep: Subsystem) -> DensityMatrix {
    let m = match keep {
        Subsystem::Polarization => DMatrix::from_fn(2, 2, |s, t| {
            (0..paths).map(|p| rho[(2 * p + s, 2 * p + t)]).sum()
        }),
        Subsystem::Spatial => DMatrix::from_fn(paths, paths, |p, q| {
            (0..2).map(|s| rho[(2 * p + s, 2 * q + s)]).sum()
        }),
    };
    DensityMatrix { matrix: m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn state(amps: &[C64]) -> PureState {
        let space = ModeSpace::new(amps.len() / 2).unwrap();
        PureState::normalized(space, DVector::from_column_slice(amps)).unwrap()
    }

    #[test]
    fn uniform_amplitudes() {
        let s = uniform_superposition(2).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a - c(0.5, 0.0)).norm() < 1e-15));
        let s = uniform_superposition(1).unwrap();
        assert_eq!(s.space().dim(), 2);
        assert!(s.amplitudes().iter().all(|a| (a.re - FRAC_1_SQRT_2).abs() < 1e-15));
        let s = uniform_superposition(3).unwrap();
        let amp = 1.0 / (2.0 * 2f64.sqrt());
        assert_eq!(s.space().dim(), 8);
        assert!(s.amplitudes().iter().all(|a| (a.re - amp).abs() < 1e-15 && a.im == 0.0));
        assert!(matches!(uniform_superposition(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn basis_convention_n2() {
        let labels: Vec<String> = ModeSpace::for_qubits(2)
            .unwrap()
            .modes()
            .map(|m| format!("{}{}", default_path_label(m.path, 2), m.pol))
            .collect();
        assert_eq!(labels, ["aH", "aV", "bH", "bV"]);
        for (i, bits) in ["00", "01", "10", "11"].iter().enumerate() {
            let b: BitString = bits.parse().unwrap();
            assert_eq!(b.mode().index(), i);
            assert_eq!(b.to_string(), *bits);
        }
    }

    #[test]
    fn bit_string_rejects_garbage() {
        assert!("".parse::<BitString>().is_err());
        assert!("012".parse::<BitString>().is_err());
        assert!(BitString::new(4, 2).is_err());
    }

    #[test]
    fn post_oracle_state_is_maximally_entangled() {
        let s = state(&[c(1., 0.), c(-1., 0.), c(1., 0.), c(1., 0.)]);
        for keep in [Subsystem::Spatial, Subsystem::Polarization] {
            let r = partial_trace(&s, keep).unwrap();
            let half = DMatrix::<C64>::identity(2, 2).scale(0.5);
            assert!(r.max_deviation(&half) < 1e-12);
        }
    }

    #[test]
    fn product_states_stay_pure() {
        let s = PureState::basis(ModeSpace::new(2).unwrap(), ModeId::new(0, Pol::H)).unwrap();
        let r = partial_trace(&s, Subsystem::Polarization).unwrap();
        let proj = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        assert!(r.max_deviation(&proj) < 1e-15);

        let u = uniform_superposition(2).unwrap();
        let r = partial_trace(&u, Subsystem::Polarization).unwrap();
        let plus = DMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(r.max_deviation(&plus) < 1e-15);
        assert!((r.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_mixed_matches_pure() {
        let s = state(&[c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)]);
        let rho = s.to_density();
        for keep in [Subsystem::Spatial, Subsystem::Polarization] {
            let a = partial_trace(&s, keep).unwrap();
            let b = partial_trace(&rho, keep).unwrap();
            assert!(a.max_deviation(b.matrix()) < 1e-15);
        }
        let odd = DensityMatrix::from_raw(DMatrix::identity(3, 3).unscale(3.0));
        assert!(partial_trace(&odd, Subsystem::Spatial).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let s = state(&[c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)]);
        assert!((fidelity_up_to_global_phase(&s, &s).unwrap() - 1.0).abs() < 1e-12);
        let phase = C64::from_polar(1.0, 1.234);
        let t = PureState::new(s.space(), s.amplitudes() * phase).unwrap();
        assert!((fidelity_up_to_global_phase(&s, &t).unwrap() - 1.0).abs() < 1e-12);
        let space = ModeSpace::new(2).unwrap();
        let ah = PureState::basis(space, ModeId::new(0, Pol::H)).unwrap();
        let av = PureState::basis(space, ModeId::new(0, Pol::V)).unwrap();
        assert_eq!(fidelity_up_to_global_phase(&ah, &av).unwrap(), 0.0);
        let big = uniform_superposition(3).unwrap();
        assert!(fidelity_up_to_global_phase(&ah, &big).is_err());
    }

    #[test]
    fn canonical_phase_and_json_roundtrip() {
        let s = state(&[c(0.0, 0.0), c(0.0, -0.6), c(0.8, 0.0), c(0.0, 0.0)]);
        let canon = s.canonical();
        assert!((canon.amplitudes()[1] - c(0.6, 0.0)).norm() < 1e-15);
        let json = s.to_json(None);
        assert_eq!(json.basis.modes, ["aH", "aV", "bH", "bV"]);
        let text = serde_json::to_string(&json).unwrap();
        let back = PureState::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert!((fidelity_up_to_global_phase(&s, &back).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let space = ModeSpace::new(1).unwrap();
        let v = DVector::from_column_slice(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(PureState::new(space, v).is_err());
    }
}
