//! Star-graph resource states: leaf bookkeeping and carving closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of leaf groups used by partitioned allocation, one per lattice bond.
pub const DIRECTIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMode {
    /// Any leaf may serve any bond.
    Redistribution,
    /// Leaves are pre-assigned to one of four bond directions.
    Partitioning,
}

impl AllocationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationMode::Redistribution => "redistribution",
            AllocationMode::Partitioning => "partitioning",
        }
    }
}

impl std::fmt::Display for AllocationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Remaining leaf budget of one star graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarLedger {
    n_qubits: u32,
    leaves_remaining: u32,
    mode: AllocationMode,
    group_remaining: [u32; DIRECTIONS],
}

impl StarLedger {
    /// A fresh star graph of `n_qubits` qubits (one centre plus `n_qubits - 1`
    /// leaves). Partitioned groups are filled round-robin, so lower direction
    /// indices receive the remainder.
    pub fn new(n_qubits: u32, mode: AllocationMode) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::invalid(
                "n_qubits",
                format!("need at least 2 qubits, got {n_qubits}"),
            ));
        }
        let leaves = n_qubits - 1;
        let base = leaves / DIRECTIONS as u32;
        let extra = leaves % DIRECTIONS as u32;
        let mut group_remaining = [base; DIRECTIONS];
        for g in group_remaining.iter_mut().take(extra as usize) {
            *g += 1;
        }
        Ok(StarLedger {
            n_qubits,
            leaves_remaining: leaves,
            mode,
            group_remaining,
        })
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn mode(&self) -> AllocationMode {
        self.mode
    }

    pub fn leaves_remaining(&self) -> u32 {
        self.leaves_remaining
    }

    pub fn leaves_used(&self) -> u32 {
        self.n_qubits - 1 - self.leaves_remaining
    }

    pub fn groups(&self) -> [u32; DIRECTIONS] {
        self.group_remaining
    }

    /// Whether a leaf is available for a bond in `direction` (0..4).
    #[inline]
    pub fn can_supply(&self, direction: usize) -> bool {
        match self.mode {
            AllocationMode::Redistribution => self.leaves_remaining > 0,
            AllocationMode::Partitioning => self.group_remaining[direction] > 0,
        }
    }

    /// Spend one leaf on `direction`. Returns `false` and leaves the ledger
    /// untouched when no suitable leaf is left.
    #[inline]
    pub fn consume_leaf(&mut self, direction: usize) -> bool {
        if !self.can_supply(direction) {
            return false;
        }
        if self.mode == AllocationMode::Partitioning {
            self.group_remaining[direction] -= 1;
        }
        self.leaves_remaining -= 1;
        true
    }
}

pub fn new_star(n_qubits: u32, mode: AllocationMode) -> Result<StarLedger> {
    StarLedger::new(n_qubits, mode)
}

/// Post-selected infidelity of carving an `n_qubits` GHZ state at
/// cooperativity `c`: `exp(-(8/pi^2) c / n)`.
pub fn carving_infidelity(cooperativity: f64, n_qubits: u32) -> f64 {
    (-(8.0 / (PI * PI)) * cooperativity / n_qubits as f64).exp()
}

/// Success-probability form of the carving tradeoff, `(1/P_s)^(-C/N)`.
///
/// Agrees with [`carving_infidelity`] at `P_s = exp(-8/pi^2)`.
pub fn carving_tradeoff(success_probability: f64, cooperativity: f64, n_qubits: u32) -> f64 {
    success_probability.powf(cooperativity / n_qubits as f64)
}

/// Success probability at which [`carving_tradeoff`] reproduces
/// [`carving_infidelity`].
pub fn calibrated_success_probability() -> f64 {
    (-8.0 / (PI * PI)).exp()
}

/// Single-atom cooperativity `g^2 / (kappa * gamma)`.
pub fn cooperativity_from_physical(g: f64, kappa: f64, gamma: f64) -> Result<f64> {
    for (name, v) in [("g", g), ("kappa", kappa), ("gamma", gamma)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(name, format!("rate must be positive, got {v}")));
        }
    }
    Ok(g * g / (kappa * gamma))
}

/// Carving parameters expressed as cooperativity plus heralded success
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarvingModel {
    cooperativity: f64,
    success_probability: f64,
}

impl CarvingModel {
    pub fn new(cooperativity: f64, success_probability: f64) -> Result<Self> {
        if !(cooperativity > 0.0) {
            return Err(Error::invalid("cooperativity", "must be positive"));
        }
        if !(success_probability > 0.0 && success_probability <= 1.0) {
            return Err(Error::invalid("success_probability", "must lie in (0, 1]"));
        }
        Ok(CarvingModel {
            cooperativity,
            success_probability,
        })
    }

    pub fn cooperativity(&self) -> f64 {
        self.cooperativity
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    pub fn infidelity(&self, n_qubits: u32) -> f64 {
        carving_tradeoff(self.success_probability, self.cooperativity, n_qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() <= rel
    }

    #[test]
    fn new_star_budgets() {
        let s = new_star(15, AllocationMode::Redistribution).unwrap();
        assert_eq!(s.leaves_remaining(), 14);
        assert_eq!(
            new_star(13, AllocationMode::Partitioning).unwrap().groups(),
            [3, 3, 3, 3]
        );
        assert_eq!(
            new_star(15, AllocationMode::Partitioning).unwrap().groups(),
            [4, 4, 3, 3]
        );
        assert!(new_star(1, AllocationMode::Redistribution).is_err());
        assert!(new_star(0, AllocationMode::Partitioning).is_err());
    }

    #[test]
    fn redistribution_exhausts() {
        let mut s = new_star(2, AllocationMode::Redistribution).unwrap();
        assert!(s.consume_leaf(3));
        assert!(!s.consume_leaf(0));
        assert_eq!(s.leaves_remaining(), 0);
    }

    #[test]
    fn partitioning_isolates_groups() {
        // N = 2 puts the single leaf in group 0.
        let mut s = new_star(2, AllocationMode::Partitioning).unwrap();
        assert_eq!(s.groups(), [1, 0, 0, 0]);
        assert!(!s.consume_leaf(1));
        assert_eq!(s.groups(), [1, 0, 0, 0]);
        assert!(s.consume_leaf(0));
        assert_eq!(s.groups(), [0, 0, 0, 0]);
        assert_eq!(s.leaves_remaining(), 0);
    }

    #[test]
    fn carving_infidelity_values() {
        assert_eq!(carving_infidelity(0.0, 7), 1.0);
        // exp(-0.8105694691 * 10.6666...) and exp(-0.8105694691 * 10)
        assert!(rel_close(carving_infidelity(160.0, 15), 1.7581568825e-4, 1e-9));
        assert!(rel_close(carving_infidelity(120.0, 12), 3.0181548885e-4, 1e-9));
        assert!(rel_close(carving_infidelity(160.0, 15), 1.76e-4, 0.01));
        assert!(rel_close(carving_infidelity(120.0, 12), 3.02e-4, 0.01));
    }

    #[test]
    fn carving_tradeoff_values() {
        assert_eq!(carving_tradeoff(1.0, 123.0, 9), 1.0);
        let p = calibrated_success_probability();
        assert!(rel_close(p, 0.4446, 1e-3));
        assert!(rel_close(carving_tradeoff(p, 100.0, 10), 3.02e-4, 0.01));
        assert!(rel_close(
            carving_tradeoff(p, 100.0, 10),
            carving_infidelity(100.0, 10),
            1e-12
        ));
        assert!(rel_close(carving_tradeoff(0.5, 160.0, 15), 6.15e-4, 0.01));
    }

    #[test]
    fn cooperativity_examples() {
        assert_eq!(cooperativity_from_physical(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(cooperativity_from_physical(2.0, 1.0, 1.0).unwrap(), 4.0);
        assert_eq!(cooperativity_from_physical(10.0, 2.0, 5.0).unwrap(), 10.0);
        assert!(cooperativity_from_physical(0.0, 1.0, 1.0).is_err());
        assert!(cooperativity_from_physical(1.0, -1.0, 1.0).is_err());
        assert!(cooperativity_from_physical(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn carving_model_validates() {
        assert!(CarvingModel::new(0.0, 0.5).is_err());
        assert!(CarvingModel::new(10.0, 0.0).is_err());
        assert!(CarvingModel::new(10.0, 1.5).is_err());
        let m = CarvingModel::new(160.0, 0.5).unwrap();
        assert!(rel_close(m.infidelity(15), 6.15e-4, 0.01));
    }
}
