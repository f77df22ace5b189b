//! Ideal and electro-optic oracles, and the phase-noise model of the oracle
//! optics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::circuit::{compiled_grover2, detector_probabilities, retro_reflection_position, Circuit};
use crate::elements::{Element, LcState, ModeSet, PathSet, PockelsState, PolSel};
use crate::error::{invalid, Error, Result};
use crate::state::{fidelity_up_to_global_phase, uniform_superposition, BitString, Pol, PureState};
use crate::{C64, CIRCUIT_TOL};

/// Generator used by every Monte-Carlo routine. Sample `i` of a run with
/// seed `s` draws from `ChaCha8Rng::seed_from_u64(s)` on stream `i`, so
/// results do not depend on thread scheduling.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = sample index";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleSetting {
    /// Phase flip on one database element.
    Ideal(BitString),
    /// Pockels cell and liquid crystal voltages of the Sagnac oracle (n = 2).
    ElectroOptic { pc: PockelsState, lc: LcState },
}

impl OracleSetting {
    /// The four voltage settings, in the order that marks `00, 01, 10, 11`.
    pub fn electro_optic_settings() -> [OracleSetting; 4] {
        use LcState::*;
        use PockelsState::*;
        [(Off, Hwp0), (On, Glass), (Off, Glass), (On, Hwp0)].map(|(pc, lc)| OracleSetting::ElectroOptic { pc, lc })
    }

    pub fn ideal_settings(n: usize) -> Result<Vec<OracleSetting>> {
        Ok(BitString::all(n)?.into_iter().map(OracleSetting::Ideal).collect())
    }

    /// The element the setting marks, computed from its unitary for the
    /// electro-optic case.
    pub fn marked(&self) -> Result<BitString> {
        match *self {
            OracleSetting::Ideal(m) => Ok(m),
            OracleSetting::ElectroOptic { pc, lc } => oracle_marked_element(pc, lc),
        }
    }

    /// Optical elements realising the oracle in an `n`-qubit circuit, all
    /// tagged with the oracle role.
    ///
    /// The ideal oracle is a single π_V plate (HWP@0) or its H-marking twin
    /// (HWP@90) in the marked path. The electro-optic oracle is a Pockels cell
    /// and a liquid crystal spanning both paths with a rotator in path `b`
    /// between them: path `b` meets PC, rotator, LC in that order, path `a`
    /// meets LC then PC. Both act diagonally on `a`, so the order in which
    /// they are listed does not matter there.
    pub fn elements(&self, n: usize) -> Result<Vec<Element>> {
        match *self {
            OracleSetting::Ideal(m) => {
                if m.width() != n {
                    return invalid(format!("marked element {m} has {} bits, circuit has {n} qubits", m.width()));
                }
                let mode = m.mode();
                let theta = match mode.pol {
                    Pol::V => 0.0,
                    Pol::H => 90.0,
                };
                Ok(vec![Element::hwp(theta, PathSet::one(mode.path)).as_oracle()])
            }
            OracleSetting::ElectroOptic { pc, lc } => {
                if n != 2 {
                    return invalid(format!("the electro-optic oracle is a two-qubit device, got n = {n}"));
                }
                Ok(vec![
                    Element::pockels(pc, PathSet::All).as_oracle(),
                    Element::rotator(PathSet::one(1)).as_oracle(),
                    Element::liquid_crystal(lc, PathSet::All).as_oracle(),
                ])
            }
        }
    }
}

pub fn pockels_voltage(s: PockelsState) -> &'static str {
    match s {
        PockelsState::Off => "0kV",
        PockelsState::On => "3.9kV",
    }
}

pub fn lc_voltage(s: LcState) -> &'static str {
    match s {
        LcState::Glass => "5.6V",
        LcState::Hwp0 => "2.2V",
    }
}

pub fn parse_pockels_voltage(s: &str) -> Result<PockelsState> {
    match s.trim() {
        "0kV" | "0" | "off" => Ok(PockelsState::Off),
        "3.9kV" | "3.9" | "on" => Ok(PockelsState::On),
        other => invalid(format!("Pockels cell voltage `{other}` is not 0kV or 3.9kV")),
    }
}

pub fn parse_lc_voltage(s: &str) -> Result<LcState> {
    match s.trim() {
        "5.6V" | "5.6" | "glass" => Ok(LcState::Glass),
        "2.2V" | "2.2" | "hwp0" => Ok(LcState::Hwp0),
        other => invalid(format!("liquid crystal voltage `{other}` is not 2.2V or 5.6V")),
    }
}

impl fmt::Display for OracleSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OracleSetting::Ideal(m) => write!(f, "ideal:{m}"),
            OracleSetting::ElectroOptic { pc, lc } => write!(f, "eo:{},{}", pockels_voltage(pc), lc_voltage(lc)),
        }
    }
}

impl FromStr for OracleSetting {
    type Err = Error;

    /// `ideal:<bits>` or `eo:<pc>,<lc>`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(bits) = s.strip_prefix("ideal:") {
            return Ok(OracleSetting::Ideal(bits.parse()?));
        }
        if let Some(v) = s.strip_prefix("eo:") {
            let (pc, lc) = v
                .split_once(',')
                .ok_or_else(|| Error::InvalidArgument(format!("`{s}`: expected eo:<pc>,<lc>")))?;
            return Ok(OracleSetting::ElectroOptic {
                pc: parse_pockels_voltage(pc)?,
                lc: parse_lc_voltage(lc)?,
            });
        }
        invalid(format!("oracle `{s}`: expected ideal:<bits> or eo:<pc>,<lc>"))
    }
}

/// Diagonal unitary with −1 on the marked element.
pub fn ideal_oracle_unitary(marked: &BitString, n: usize) -> Result<DMatrix<C64>> {
    if marked.width() != n {
        return invalid(format!("marked element {marked} has {} bits, expected {n}", marked.width()));
    }
    let dim = 1usize << n;
    let mut u = DMatrix::identity(dim, dim);
    u[(marked.value(), marked.value())] = C64::new(-1.0, 0.0);
    Ok(u)
}

/// Net two-qubit unitary of the electro-optic oracle.
pub fn electro_optic_oracle_net(pc: PockelsState, lc: LcState) -> DMatrix<C64> {
    let els = OracleSetting::ElectroOptic { pc, lc }.elements(2).expect("two-qubit device");
    let mut u = DMatrix::identity(4, 4);
    for e in &els {
        e.act(&mut u);
    }
    u
}

/// Which database element the voltage pair marks, found by comparing its
/// action on the uniform superposition with every ideal oracle.
pub fn oracle_marked_element(pc: PockelsState, lc: LcState) -> Result<BitString> {
    let uniform = uniform_superposition(2)?;
    let out = PureState::from_raw(uniform.space(), electro_optic_oracle_net(pc, lc) * uniform.amplitudes());
    for m in BitString::all(2)? {
        let ideal = PureState::from_raw(uniform.space(), ideal_oracle_unitary(&m, 2)? * uniform.amplitudes());
        if (fidelity_up_to_global_phase(&out, &ideal)? - 1.0).abs() < 1e-12 {
            return Ok(m);
        }
    }
    Err(Error::ModelInconsistency(format!(
        "oracle setting ({}, {}) matches no ideal oracle",
        pockels_voltage(pc),
        lc_voltage(lc)
    )))
}

/// Phase noise on the oracle optics: every component adds independent
/// `N(0, σ²)` phases to the H and V modes of each path it touches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return invalid(format!("noise sigma must be finite and non-negative, got {sigma}"));
        }
        Ok(NoiseModel { sigma, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for Monte-Carlo sample `sample`.
    pub fn rng(&self, sample: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(sample);
        rng
    }
}

/// Copy of `elements` with a phase screen after each oracle component. At
/// σ = 0 nothing is drawn and the list is returned unchanged.
fn screen_oracle(elements: Vec<Element>, total: usize, sigma: f64, rng: &mut impl Rng) -> Vec<Element> {
    if sigma == 0.0 {
        return elements;
    }
    let mut out = Vec::with_capacity(elements.len() * 3);
    for e in elements {
        let noisy = e.is_oracle();
        let paths = e.paths(total);
        out.push(e);
        if !noisy {
            continue;
        }
        for p in paths {
            for pol in [PolSel::H, PolSel::V] {
                let z: f64 = rng.sample(StandardNormal);
                let modes = ModeSet { paths: PathSet::one(p), pol };
                out.push(Element::phase(sigma * z, modes).as_oracle());
            }
        }
    }
    out
}

/// Oracle elements with a phase screen after each component. At σ = 0 the
/// noiseless elements are returned unchanged and no numbers are drawn.
pub fn noisy_oracle_elements(
    setting: &OracleSetting,
    n: usize,
    sigma: f64,
    rng: &mut impl Rng,
) -> Result<Vec<Element>> {
    let clean = setting.elements(n)?;
    Ok(screen_oracle(clean, 1usize << (n - 1), sigma, rng))
}

/// `c` with a phase screen after every element whose role is oracle.
pub fn with_oracle_noise(c: &Circuit, sigma: f64, rng: &mut impl Rng) -> Result<Circuit> {
    NoiseModel::new(sigma, 0)?;
    c.with_elements(screen_oracle(c.elements().to_vec(), c.registry().paths(), sigma, rng))
}

/// Detector distribution of `c` averaged over `samples` noise draws; sample
/// `i` uses stream `i` of the model's generator.
pub fn mean_noisy_distribution(c: &Circuit, noise: &NoiseModel, samples: usize) -> Result<Vec<f64>> {
    check_samples(samples)?;
    let runs = if noise.sigma == 0.0 { 1 } else { samples as u64 };
    let dists: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let noisy = with_oracle_noise(c, noise.sigma, &mut noise.rng(i))?;
            Ok(detector_probabilities(&noisy, &noisy.default_input())?
                .into_iter()
                .map(|o| o.probability)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut mean = vec![0.0; dists[0].len()];
    for d in &dists {
        for (m, p) in mean.iter_mut().zip(d) {
            *m += p;
        }
    }
    for m in &mut mean {
        *m /= runs as f64;
    }
    Ok(mean)
}

/// Noisy two-qubit oracle unitary drawn from sample 0 of `noise`.
pub fn noisy_oracle_unitary(setting: &OracleSetting, noise: &NoiseModel) -> Result<DMatrix<C64>> {
    let els = noisy_oracle_elements(setting, 2, noise.sigma, &mut noise.rng(0))?;
    let mut u = DMatrix::identity(4, 4);
    for e in &els {
        e.act(&mut u);
    }
    Ok(u)
}

/// Detector distribution of the compiled two-qubit circuit for one noise draw.
fn noisy_distribution(setting: &OracleSetting, sigma: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let c = compiled_grover2(noisy_oracle_elements(setting, 2, sigma, rng)?)?;
    Ok(detector_probabilities(&c, &c.default_input())?
        .into_iter()
        .map(|o| o.probability)
        .collect())
}

/// Per-sample readout table: row per electro-optic setting, column per
/// detector. All four rows of one sample share its generator.
fn sample_table(sigma: f64, rng: &mut impl Rng) -> Result<[[f64; 4]; 4]> {
    let mut t = [[0.0; 4]; 4];
    for (row, setting) in OracleSetting::electro_optic_settings().iter().enumerate() {
        let p = noisy_distribution(setting, sigma, rng)?;
        t[row].copy_from_slice(&p);
    }
    Ok(t)
}

/// One point of the noise sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisePoint {
    pub sigma: f64,
    /// Probability mass outside the marked detector, averaged over the four
    /// electro-optic settings and all samples.
    pub mean_error: f64,
    /// Standard error of `mean_error` over samples.
    pub stderr: f64,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return invalid("at least one Monte-Carlo sample is required");
    }
    Ok(())
}

/// Per-sample mean error at `sigma`. Sample `i` always uses stream `i`, so
/// the same normal deviates are scaled by every σ of a sweep.
fn sample_errors(sigma: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let noise = NoiseModel::new(sigma, seed)?;
    let marked: Vec<usize> = OracleSetting::electro_optic_settings()
        .iter()
        .map(|s| s.marked().map(|m| m.value()))
        .collect::<Result<_>>()?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let t = sample_table(sigma, &mut noise.rng(i))?;
            Ok(t.iter().zip(&marked).map(|(row, &m)| 1.0 - row[m]).sum::<f64>() / 4.0)
        })
        .collect()
}

/// Mean error and its standard error at each σ of `sigmas`.
pub fn noise_sweep(sigmas: &[f64], samples: usize, seed: u64) -> Result<Vec<NoisePoint>> {
    check_samples(samples)?;
    sigmas
        .iter()
        .map(|&sigma| {
            let errs = sample_errors(sigma, samples, seed)?;
            let s = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / s;
            let var = if errs.len() > 1 {
                errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (s - 1.0)
            } else {
                0.0
            };
            Ok(NoisePoint {
                sigma,
                mean_error: mean,
                stderr: (var / s).sqrt(),
            })
        })
        .collect()
}

/// True when no point falls below an earlier one by more than two combined
/// standard errors.
pub fn is_monotone_within_stderr(points: &[NoisePoint]) -> bool {
    points.windows(2).all(|w| {
        let tol = 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        w[1].mean_error >= w[0].mean_error - tol
    })
}

/// σ at which the mean error first reaches `target`, by linear interpolation
/// between sweep points. `None` if the sweep never reaches it.
pub fn calibrate_sigma(points: &[NoisePoint], target: f64) -> Option<f64> {
    if let Some(p) = points.first().filter(|p| p.mean_error >= target) {
        return Some(p.sigma);
    }
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (a.mean_error < target && b.mean_error >= target).then(|| {
            a.sigma + (target - a.mean_error) / (b.mean_error - a.mean_error) * (b.sigma - a.sigma)
        })
    })
}

/// Grid used by the sweep commands and calibration, in radians.
pub fn default_sigma_grid() -> Vec<f64> {
    (0..=12).map(|i| i as f64 / 40.0).collect()
}

/// Mean error crossing point used for calibration.
pub const TARGET_ERROR: f64 = 0.028;

/// Mean detector probabilities: rows are the electro-optic settings in the
/// order of [`OracleSetting::electro_optic_settings`], columns detectors
/// 1–4, averaged over `samples` noise draws (a single exact run at σ = 0).
pub fn readout_table(sigma: f64, samples: usize, seed: u64) -> Result<[[f64; 4]; 4]> {
    check_samples(samples)?;
    let noise = NoiseModel::new(sigma, seed)?;
    if sigma == 0.0 {
        return sample_table(0.0, &mut noise.rng(0));
    }
    let tables: Vec<[[f64; 4]; 4]> = (0..samples as u64)
        .into_par_iter()
        .map(|i| sample_table(sigma, &mut noise.rng(i)))
        .collect::<Result<_>>()?;
    let mut mean = [[0.0; 4]; 4];
    for t in &tables {
        for (r, row) in t.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                mean[r][c] += v;
            }
        }
    }
    for row in &mut mean {
        for v in row.iter_mut() {
            *v /= samples as f64;
        }
    }
    Ok(mean)
}

/// Compiled two-qubit circuit with `diag(1, e^{iφ})` on every path inserted
/// where the photon is retro-reflected in the second interferometer.
pub fn with_common_birefringence(c: &Circuit, phi: f64) -> Result<Circuit> {
    let at = retro_reflection_position(c)
        .ok_or_else(|| Error::InvalidArgument(format!("circuit `{}` has no retro-reflection point", c.name())))?;
    let mut els = c.elements().to_vec();
    let modes = ModeSet { paths: PathSet::All, pol: PolSel::V };
    els.insert(at, Element::phase(phi, modes));
    c.with_elements(els)
}

/// Whether a birefringent phase `φ` common to every trajectory through the
/// second interferometer leaves all detector probabilities of the compiled
/// two-qubit circuit unchanged, for the ideal and electro-optic settings.
pub fn common_birefringence_invariance_check(phi: f64) -> Result<bool> {
    let mut settings = OracleSetting::ideal_settings(2)?;
    settings.extend(OracleSetting::electro_optic_settings());
    for s in &settings {
        let c = compiled_grover2(s.elements(2)?)?;
        let shifted = with_common_birefringence(&c, phi)?;
        let p0 = detector_probabilities(&c, &c.default_input())?;
        let p1 = detector_probabilities(&shifted, &shifted.default_input())?;
        if p0.iter().zip(&p1).any(|(a, b)| (a.probability - b.probability).abs() > CIRCUIT_TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Phases used by the invariance sweep.
pub fn birefringence_sweep() -> [f64; 6] {
    [0.0, PI / 7.0, PI / 3.0, PI / 2.0, PI, 1.5 * PI]
}
