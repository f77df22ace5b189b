//! Grover search on a bare amplitude vector, and its closed form.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// `sin²((2k + 1) · asin(1/√N))`, the probability of reading the marked
/// element after `k` iterations.
pub fn grover_success_closed_form(n_db: usize, k: usize) -> Result<f64> {
    if n_db < 2 {
        return invalid(format!("database size {n_db} must be at least 2"));
    }
    let theta = (1.0 / (n_db as f64).sqrt()).asin();
    Ok(((2 * k + 1) as f64 * theta).sin().powi(2))
}

/// Amplitudes after `k` rounds of phase flip on `marked` followed by
/// inversion about the mean `a_i → 2⟨a⟩ − a_i`, from the uniform state.
pub fn abstract_grover_simulate(n_db: usize, marked: usize, k: usize) -> Result<Vec<f64>> {
    if n_db < 2 || !n_db.is_power_of_two() {
        return invalid(format!("database size {n_db} must be a power of two, at least 2"));
    }
    if marked >= n_db {
        return invalid(format!("marked element {marked} outside 0..{n_db}"));
    }
    let mut a = vec![1.0 / (n_db as f64).sqrt(); n_db];
    for _ in 0..k {
        a[marked] = -a[marked];
        let mean = a.iter().sum::<f64>() / n_db as f64;
        for x in &mut a {
            *x = 2.0 * mean - *x;
        }
    }
    Ok(a)
}

/// Candidate iteration counts for `π√N/8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationChoices {
    pub floor: usize,
    pub round: usize,
    pub ceil: usize,
}

pub fn iteration_choices(n_db: usize) -> IterationChoices {
    let x = PI * (n_db as f64).sqrt() / 8.0;
    IterationChoices {
        floor: x.floor() as usize,
        round: x.round() as usize,
        ceil: x.ceil() as usize,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert!((grover_success_closed_form(4, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((grover_success_closed_form(8, 1).unwrap() - 25.0 / 32.0).abs() < 1e-12);
        assert!((grover_success_closed_form(4, 0).unwrap() - 0.25).abs() < 1e-12);
        assert!(grover_success_closed_form(1, 1).is_err());
    }

    #[test]
    fn hand_iteration_for_eight() {
        let a = abstract_grover_simulate(8, 3, 1).unwrap();
        let s = 1.0 / (4.0 * 2f64.sqrt());
        for (i, x) in a.iter().enumerate() {
            let want = if i == 3 { 5.0 * s } else { s };
            assert!((x.abs() - want).abs() < 1e-12);
        }
        let a = abstract_grover_simulate(4, 1, 1).unwrap();
        assert!((a[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(abstract_grover_simulate(6, 0, 1).is_err());
        assert!(abstract_grover_simulate(8, 8, 1).is_err());
    }

    #[test]
    fn iteration_rounding() {
        assert_eq!(iteration_choices(16), IterationChoices { floor: 1, round: 2, ceil: 2 });
        assert_eq!(iteration_choices(4), IterationChoices { floor: 0, round: 1, ceil: 1 });
    }
}
