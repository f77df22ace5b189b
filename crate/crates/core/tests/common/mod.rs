#![allow(dead_code)]

use grover_optics::elements::{LcState, PockelsState};
use grover_optics::{Circuit, Element, ModeSet, PathSet, PolSel, Registry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NICE_ANGLES: [f64; 8] = [0.0, 22.5, 45.0, 67.5, 90.0, 112.5, 135.0, 157.5];
const NICE_PHASES: [f64; 6] = [
    std::f64::consts::FRAC_PI_2,
    -std::f64::consts::FRAC_PI_2,
    std::f64::consts::PI,
    std::f64::consts::FRAC_PI_4,
    -std::f64::consts::FRAC_PI_4,
    0.3,
];

fn paths(rng: &mut ChaCha8Rng, total: usize) -> PathSet {
    if rng.random_bool(0.2) {
        return PathSet::All;
    }
    let chosen: Vec<usize> = (0..total).filter(|_| rng.random_bool(0.5)).collect();
    if chosen.is_empty() {
        PathSet::one(rng.random_range(0..total))
    } else {
        PathSet::of(chosen)
    }
}

fn random_element(rng: &mut ChaCha8Rng, total: usize) -> Element {
    match rng.random_range(0..10) {
        0..=2 => {
            let theta = if rng.random_bool(0.8) {
                NICE_ANGLES[rng.random_range(0..NICE_ANGLES.len())]
            } else {
                rng.random_range(0.0..180.0)
            };
            Element::hwp(theta, paths(rng, total))
        }
        3..=4 => {
            let a = rng.random_range(0..total);
            let mut b = rng.random_range(0..total - 1);
            if b >= a {
                b += 1;
            }
            Element::bs(a, b)
        }
        5..=6 => {
            let phi = NICE_PHASES[rng.random_range(0..NICE_PHASES.len())];
            let pol = [PolSel::Both, PolSel::H, PolSel::V][rng.random_range(0..3)];
            Element::phase(phi, ModeSet { paths: paths(rng, total), pol })
        }
        7 => Element::rotator(paths(rng, total)),
        8 => {
            let s = if rng.random_bool(0.5) { PockelsState::On } else { PockelsState::Off };
            Element::pockels(s, paths(rng, total))
        }
        _ => {
            let s = if rng.random_bool(0.5) { LcState::Glass } else { LcState::Hwp0 };
            Element::liquid_crystal(s, paths(rng, total))
        }
    }
}

/// Random circuit on `n` qubits: a mix of every element kind with mostly
/// special angles, sometimes an oracle block, sometimes a readout.
pub fn random_circuit(seed: u64, n: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reg = Registry::for_qubits(n).unwrap();
    let total = reg.paths();
    let len = rng.random_range(4..28);
    let mut els: Vec<Element> = (0..len).map(|_| random_element(&mut rng, total)).collect();
    if rng.random_bool(0.3) {
        let at = rng.random_range(0..=els.len());
        els.insert(at, Element::hwp(0.0, PathSet::one(0)).as_oracle());
    }
    if rng.random_bool(0.5) {
        els.push(Element::pbs(PathSet::All));
    }
    Circuit::new(format!("random-{seed}"), Some(n), reg, els).unwrap()
}
