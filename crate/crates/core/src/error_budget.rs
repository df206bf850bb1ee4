//! Physical-qubit Pauli error budget.
//!
//! The budget has three parts: the post-selected carving infidelity, a term
//! linear in the resource-state size `N` (measurement error, dephasing over
//! the operation time and any other per-qubit contribution, lumped as
//! `epsilon_n`), and a size-independent gate term bounded by four heralded
//! gate infidelities per qubit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::resource_states::carving_infidelity;

/// Largest resource-state size considered by [`max_feasible_n`] when the
/// per-qubit error vanishes.
pub const MAX_RESOURCE_SIZE: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorParams {
    /// Measurement infidelity.
    pub measurement_infidelity: f64,
    /// Operation time, seconds.
    pub op_time: f64,
    /// Dephasing time, seconds.
    pub coherence_time: f64,
    /// Post-selected infidelity of the heralded gate.
    pub gate_infidelity: f64,
    /// Any further error per qubit that scales with `N`.
    pub extra_per_qubit: f64,
}

impl Default for ErrorParams {
    fn default() -> Self {
        ErrorParams {
            measurement_infidelity: 0.0,
            op_time: 0.0,
            coherence_time: 1.5,
            gate_infidelity: 0.0,
            extra_per_qubit: 0.0,
        }
    }
}

impl ErrorParams {
    /// Parameters whose whole per-qubit error is the lumped `epsilon_n`.
    pub fn lumped(epsilon_n: f64, gate_infidelity: f64) -> Self {
        ErrorParams {
            extra_per_qubit: epsilon_n,
            gate_infidelity,
            ..ErrorParams::default()
        }
    }

    pub fn epsilon_n(&self) -> f64 {
        self.measurement_infidelity + self.op_time / self.coherence_time + self.extra_per_qubit
    }

    pub fn gate_term(&self) -> f64 {
        4.0 * self.gate_infidelity
    }

    fn fixed_error(&self, n_qubits: u32) -> f64 {
        n_qubits as f64 * self.epsilon_n() + self.gate_term()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliBudget {
    pub carving_term: f64,
    pub per_qubit_term: f64,
    pub gate_term: f64,
    pub total: f64,
}

pub fn pauli_error(cooperativity: f64, n_qubits: u32, params: &ErrorParams) -> PauliBudget {
    let carving_term = carving_infidelity(cooperativity, n_qubits);
    let per_qubit_term = n_qubits as f64 * params.epsilon_n();
    let gate_term = params.gate_term();
    PauliBudget {
        carving_term,
        per_qubit_term,
        gate_term,
        total: carving_term + per_qubit_term + gate_term,
    }
}

/// Largest `N >= 2` whose non-carving error stays strictly below `target`.
///
/// The carving term can be pushed under any positive margin by raising the
/// cooperativity, so it does not enter. Returns `None` when even `N = 2`
/// fails, and caps at [`MAX_RESOURCE_SIZE`] when the per-qubit error is zero.
pub fn max_feasible_n(target: f64, params: &ErrorParams) -> Option<u32> {
    let feasible = |n: u32| params.fixed_error(n) < target;
    if !feasible(2) {
        return None;
    }
    let eps = params.epsilon_n();
    if eps <= 0.0 {
        return Some(MAX_RESOURCE_SIZE);
    }
    let estimate = ((target - params.gate_term()) / eps).floor();
    let mut n = estimate.clamp(2.0, MAX_RESOURCE_SIZE as f64) as u32;
    // Rounding in the estimate can be off by one either way.
    while n > 2 && !feasible(n) {
        n -= 1;
    }
    while n < MAX_RESOURCE_SIZE && feasible(n + 1) {
        n += 1;
    }
    Some(n)
}

/// Cooperativity at which the total budget for `n_qubits` equals `target`:
/// `C = -(pi^2/8) N ln(target - N eps_n - 4 eps_g)`.
///
/// Returns `None` when the non-carving error already reaches `target`. When
/// the margin is at least 1 the carving term never binds and the result is 0.
pub fn solve_cooperativity(n_qubits: u32, target: f64, params: &ErrorParams) -> Option<f64> {
    let margin = target - params.fixed_error(n_qubits);
    if !(margin > 0.0) {
        return None;
    }
    let c = -(PI * PI / 8.0) * n_qubits as f64 * margin.ln();
    Some(c.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_max_n(target: f64, params: &ErrorParams, limit: u32) -> Option<u32> {
        (2..=limit).filter(|&n| params.fixed_error(n) < target).max()
    }

    #[test]
    fn epsilon_n_groups_terms() {
        let p = ErrorParams {
            measurement_infidelity: 1e-5,
            op_time: 1.5e-5,
            coherence_time: 1.5,
            gate_infidelity: 2e-4,
            extra_per_qubit: 1e-5,
        };
        assert!((p.epsilon_n() - 3e-5).abs() < 1e-18);
        assert!((p.gate_term() - 8e-4).abs() < 1e-18);
    }

    #[test]
    fn operating_point_budget() {
        let b = pauli_error(160.0, 15, &ErrorParams::lumped(3e-5, 0.0));
        assert!((b.carving_term - 1.76e-4).abs() / 1.76e-4 < 0.01);
        assert!((b.per_qubit_term - 4.5e-4).abs() < 1e-15);
        assert_eq!(b.gate_term, 0.0);
        assert!((b.total - 6.26e-4).abs() / 6.26e-4 < 0.01);
        assert!(b.total <= 6.7e-4);
    }

    #[test]
    fn budget_limits() {
        let b = pauli_error(1e9, 15, &ErrorParams::default());
        assert!(b.total < 1e-300);
        let b = pauli_error(0.0, 9, &ErrorParams::lumped(1e-5, 1e-4));
        assert_eq!(b.carving_term, 1.0);
        assert!(b.total >= 1.0);
    }

    #[test]
    fn max_feasible_examples() {
        assert_eq!(max_feasible_n(6.7e-4, &ErrorParams::lumped(5.5e-5, 0.0)), Some(12));
        assert_eq!(max_feasible_n(6.7e-4, &ErrorParams::lumped(0.0, 1e-3)), None);
        assert_eq!(max_feasible_n(6.7e-4, &ErrorParams::lumped(1e-5, 0.0)), Some(66));
        assert_eq!(
            max_feasible_n(6.7e-4, &ErrorParams::lumped(0.0, 0.0)),
            Some(MAX_RESOURCE_SIZE)
        );
    }

    #[test]
    fn max_feasible_matches_scan() {
        for &(t, e, g) in &[
            (6.7e-4, 5.5e-5, 0.0),
            (6.7e-4, 3e-5, 1e-5),
            (1e-3, 7e-6, 0.0),
            (6.7e-4, 1e-5, 0.0),
            (1e-2, 3.3e-4, 1e-4),
        ] {
            let p = ErrorParams::lumped(e, g);
            assert_eq!(max_feasible_n(t, &p), brute_force_max_n(t, &p, 100_000), "{t} {e} {g}");
        }
    }

    #[test]
    fn solve_examples() {
        let c = solve_cooperativity(15, 6.7e-4, &ErrorParams::lumped(3e-5, 0.0)).unwrap();
        assert!((c - 155.8).abs() < 0.5, "{c}");
        assert_eq!(solve_cooperativity(13, 6.7e-4, &ErrorParams::lumped(5.5e-5, 0.0)), None);
        let c = solve_cooperativity(2, 1.0, &ErrorParams::lumped(1e-9, 0.0)).unwrap();
        assert!(c < 1e-6);
    }

    #[test]
    fn solve_round_trips() {
        let p = ErrorParams::lumped(3e-5, 1e-5);
        for n in 2..=18 {
            let c = solve_cooperativity(n, 6.7e-4, &p).unwrap();
            let total = pauli_error(c, n, &p).total;
            assert!(((total - 6.7e-4) / 6.7e-4).abs() < 1e-12);
        }
    }
}
