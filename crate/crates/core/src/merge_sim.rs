//! Monte Carlo merging of star graphs into the cluster state.
//!
//! Each trial gives every lattice node a fresh [`StarLedger`] and walks the
//! edges in the configured order. An edge is attempted with the heralded
//! gate until it succeeds or one endpoint has no usable leaf left; every
//! attempt, successful or not, costs one leaf at each endpoint. Failed
//! edges are then resolved adaptively by marking one endpoint as lost.
//!
//! Trial `i` draws from ChaCha8 stream `i` seeded by the master seed, so a
//! run is reproducible regardless of how trials are scheduled over workers.

use rand::distr::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resource_states::{AllocationMode, StarLedger};
use crate::rhg_lattice::RhgLattice;

/// Below this cooperativity the `6/sqrt(C)` failure law exceeds one.
pub const CLAMP_COOPERATIVITY: f64 = 36.0;

const LOSS_STREAM_SALT: u64 = 0x6c6f_7373_5f70_6173;

/// Heralded gate failure probability `min(1, 6/sqrt(C))`.
pub fn gate_failure_prob(cooperativity: f64) -> Result<f64> {
    GateModel::new(cooperativity).map(|g| g.failure_probability())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateModel {
    cooperativity: f64,
    failure_probability: f64,
    clamped: bool,
}

impl GateModel {
    pub fn new(cooperativity: f64) -> Result<Self> {
        if !(cooperativity > 0.0) || cooperativity.is_nan() {
            return Err(Error::invalid(
                "cooperativity",
                format!("must be positive, got {cooperativity}"),
            ));
        }
        let raw = 6.0 / cooperativity.sqrt();
        let clamped = raw > 1.0;
        if clamped {
            log::warn!("cooperativity {cooperativity} < {CLAMP_COOPERATIVITY}: gate failure probability clamped to 1");
        }
        Ok(GateModel {
            cooperativity,
            failure_probability: raw.min(1.0),
            clamped,
        })
    }

    pub fn cooperativity(&self) -> f64 {
        self.cooperativity
    }

    pub fn failure_probability(&self) -> f64 {
        self.failure_probability
    }

    /// True when `6/sqrt(C)` had to be clamped to 1.
    pub fn clamped(&self) -> bool {
        self.clamped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeOrder {
    /// Fresh uniform permutation of the edges in every trial.
    ShuffledPerTrial,
    /// Edge index order.
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeConfig {
    pub cooperativity: f64,
    pub n_qubits: u32,
    pub mode: AllocationMode,
    pub edge_order: EdgeOrder,
    pub trials: u64,
    pub master_seed: u64,
}

impl MergeConfig {
    pub fn new(cooperativity: f64, n_qubits: u32, mode: AllocationMode) -> Self {
        MergeConfig {
            cooperativity,
            n_qubits,
            mode,
            edge_order: EdgeOrder::ShuffledPerTrial,
            trials: 10_000,
            master_seed: 0,
        }
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_edge_order(mut self, edge_order: EdgeOrder) -> Self {
        self.edge_order = edge_order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        GateModel::new(self.cooperativity)?;
        if self.n_qubits < 2 {
            return Err(Error::invalid("n_qubits", "need at least 2 qubits"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeStatus {
    Success,
    Failed,
}

/// Nodes removed by the adaptive loss pass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LostNodes {
    mask: Vec<bool>,
    count: usize,
}

impl LostNodes {
    fn with_len(len: usize) -> Self {
        LostNodes {
            mask: vec![false; len],
            count: 0,
        }
    }

    fn reset(&mut self, len: usize) {
        self.mask.clear();
        self.mask.resize(len, false);
        self.count = 0;
    }

    /// Returns true if `node` was not lost before.
    fn insert(&mut self, node: usize) -> bool {
        let fresh = !self.mask[node];
        if fresh {
            self.mask[node] = true;
            self.count += 1;
        }
        fresh
    }

    pub fn contains(&self, node: usize) -> bool {
        self.mask.get(node).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub edge_status: Vec<EdgeStatus>,
    pub attempts_total: u64,
    /// Gate attempts spent on each edge.
    pub edge_attempts: Vec<u32>,
    /// Leaves spent by each node.
    pub leaves_used: Vec<u32>,
    pub lost_nodes: LostNodes,
}

impl TrialOutcome {
    pub fn failed_edges(&self) -> usize {
        self.edge_status.iter().filter(|&&s| s == EdgeStatus::Failed).count()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.edge_status.is_empty() {
            return 0.0;
        }
        self.failed_edges() as f64 / self.edge_status.len() as f64
    }

    pub fn loss_fraction(&self) -> f64 {
        if self.leaves_used.is_empty() {
            return 0.0;
        }
        self.lost_nodes.len() as f64 / self.leaves_used.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeFailureStats {
    pub mean_failure_fraction: f64,
    pub std_error: f64,
    pub loss_fraction_mean: f64,
    pub trials: u64,
}

/// RNG used for the edge pass of trial `trial_index`.
pub fn merge_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// RNG used for the adaptive loss pass of trial `trial_index`.
pub fn loss_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ LOSS_STREAM_SALT);
    rng.set_stream(trial_index);
    rng
}

/// Reusable per-worker buffers.
struct Workspace<'a> {
    lattice: &'a RhgLattice,
    config: MergeConfig,
    gate: Bernoulli,
    blank: StarLedger,
    ledgers: Vec<StarLedger>,
    order: Vec<usize>,
    status: Vec<EdgeStatus>,
    attempts: Vec<u32>,
    lost: LostNodes,
    attempts_total: u64,
}

impl<'a> Workspace<'a> {
    fn new(lattice: &'a RhgLattice, config: MergeConfig) -> Result<Self> {
        config.validate()?;
        let gate = GateModel::new(config.cooperativity)?;
        let gate =
            Bernoulli::new(gate.failure_probability()).map_err(|e| Error::invalid("cooperativity", e.to_string()))?;
        let blank = StarLedger::new(config.n_qubits, config.mode)?;
        Ok(Workspace {
            lattice,
            config,
            gate,
            blank,
            ledgers: Vec::with_capacity(lattice.node_count()),
            order: Vec::with_capacity(lattice.edge_count()),
            status: Vec::with_capacity(lattice.edge_count()),
            attempts: Vec::with_capacity(lattice.edge_count()),
            lost: LostNodes::with_len(lattice.node_count()),
            attempts_total: 0,
        })
    }

    fn merge<R: Rng>(&mut self, rng: &mut R) {
        let lattice = self.lattice;
        let n_edges = lattice.edge_count();
        self.ledgers.clear();
        self.ledgers.resize(lattice.node_count(), self.blank);
        self.order.clear();
        self.order.extend(0..n_edges);
        if self.config.edge_order == EdgeOrder::ShuffledPerTrial {
            self.order.shuffle(rng);
        }
        self.status.clear();
        self.status.resize(n_edges, EdgeStatus::Failed);
        self.attempts.clear();
        self.attempts.resize(n_edges, 0);
        self.lost.reset(lattice.node_count());
        self.attempts_total = 0;

        let edges = lattice.edges();
        for &e in &self.order {
            let (a, b) = edges[e];
            let (sa, sb) = lattice.edge_slots(e);
            let (sa, sb) = (sa as usize, sb as usize);
            loop {
                if !self.ledgers[a].can_supply(sa) || !self.ledgers[b].can_supply(sb) {
                    break;
                }
                self.ledgers[a].consume_leaf(sa);
                self.ledgers[b].consume_leaf(sb);
                self.attempts[e] += 1;
                self.attempts_total += 1;
                if !self.gate.sample(rng) {
                    self.status[e] = EdgeStatus::Success;
                    break;
                }
            }
        }
    }

    fn apply_loss<R: Rng>(&mut self, rng: &mut R) {
        mark_losses(&self.status, self.lattice, &mut self.lost, rng);
    }

    fn run(&mut self, trial_index: u64) -> (f64, f64) {
        let seed = self.config.master_seed;
        self.merge(&mut merge_rng(seed, trial_index));
        self.apply_loss(&mut loss_rng(seed, trial_index));
        let failed = self.status.iter().filter(|&&s| s == EdgeStatus::Failed).count();
        let n_edges = self.status.len().max(1) as f64;
        let n_nodes = self.ledgers.len().max(1) as f64;
        (failed as f64 / n_edges, self.lost.len() as f64 / n_nodes)
    }

    fn outcome(&self) -> TrialOutcome {
        TrialOutcome {
            edge_status: self.status.clone(),
            attempts_total: self.attempts_total,
            edge_attempts: self.attempts.clone(),
            leaves_used: self.ledgers.iter().map(StarLedger::leaves_used).collect(),
            lost_nodes: self.lost.clone(),
        }
    }
}

fn mark_losses<R: Rng>(status: &[EdgeStatus], lattice: &RhgLattice, lost: &mut LostNodes, rng: &mut R) {
    for (e, &s) in status.iter().enumerate() {
        if s == EdgeStatus::Failed {
            let (a, b) = lattice.edges()[e];
            lost.insert(if rng.random_bool(0.5) { a } else { b });
        }
    }
}

/// Run the edge pass of one trial. `lost_nodes` is left empty; see
/// [`apply_adaptive_loss`].
pub fn simulate_trial(lattice: &RhgLattice, config: &MergeConfig, trial_index: u64) -> Result<TrialOutcome> {
    let mut ws = Workspace::new(lattice, *config)?;
    ws.merge(&mut merge_rng(config.master_seed, trial_index));
    Ok(ws.outcome())
}

/// For each failed edge, in edge order, mark one endpoint chosen uniformly at
/// random as lost.
pub fn apply_adaptive_loss<R: Rng>(mut outcome: TrialOutcome, lattice: &RhgLattice, rng: &mut R) -> TrialOutcome {
    if outcome.lost_nodes.mask.len() != lattice.node_count() {
        outcome.lost_nodes = LostNodes::with_len(lattice.node_count());
    }
    mark_losses(&outcome.edge_status, lattice, &mut outcome.lost_nodes, rng);
    outcome
}

/// Both passes of trial `trial_index`, using the same streams as
/// [`run_trials`].
pub fn run_trial(lattice: &RhgLattice, config: &MergeConfig, trial_index: u64) -> Result<TrialOutcome> {
    let mut ws = Workspace::new(lattice, *config)?;
    ws.run(trial_index);
    Ok(ws.outcome())
}

/// Aggregate `config.trials` independent trials on the current rayon pool.
pub fn run_trials(lattice: &RhgLattice, config: &MergeConfig) -> Result<EdgeFailureStats> {
    // Fail fast on bad input before fanning out.
    Workspace::new(lattice, *config)?;
    let per_trial: Vec<(f64, f64)> = (0..config.trials)
        .into_par_iter()
        .map_init(
            || Workspace::new(lattice, *config).expect("validated above"),
            |ws, i| ws.run(i),
        )
        .collect();
    Ok(summarize(&per_trial))
}

fn summarize(per_trial: &[(f64, f64)]) -> EdgeFailureStats {
    let n = per_trial.len() as f64;
    let mean = per_trial.iter().map(|t| t.0).sum::<f64>() / n;
    let loss = per_trial.iter().map(|t| t.1).sum::<f64>() / n;
    let std_error = if per_trial.len() > 1 {
        let var = per_trial.iter().map(|t| (t.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    EdgeFailureStats {
        mean_failure_fraction: mean,
        std_error,
        loss_fraction_mean: loss,
        trials: per_trial.len() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rhg_lattice::{build_lattice, LatticeSpec};

    #[test]
    fn gate_failure_examples() {
        assert_eq!(gate_failure_prob(36.0).unwrap(), 1.0);
        assert!((gate_failure_prob(100.0).unwrap() - 0.6).abs() < 1e-15);
        assert!((gate_failure_prob(160.0).unwrap() - 0.4743).abs() < 1e-4);
        assert!(GateModel::new(10.0).unwrap().clamped());
        assert!(!GateModel::new(36.0).unwrap().clamped());
        assert_eq!(gate_failure_prob(10.0).unwrap(), 1.0);
        assert!(gate_failure_prob(0.0).is_err());
        assert!(gate_failure_prob(-4.0).is_err());
    }

    #[test]
    fn perfect_gate_single_attempts() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        for mode in [AllocationMode::Redistribution, AllocationMode::Partitioning] {
            // 6/sqrt(f64::MAX) is below the Bernoulli resolution: the gate never fails.
            let cfg = MergeConfig::new(f64::MAX, 5, mode).with_seed(3);
            let out = simulate_trial(&lat, &cfg, 0).unwrap();
            assert!(out.edge_status.iter().all(|&s| s == EdgeStatus::Success));
            assert!(out.edge_attempts.iter().all(|&a| a == 1));
            assert!(out
                .leaves_used
                .iter()
                .enumerate()
                .all(|(n, &u)| u as usize == lat.degree(n)));
        }
    }

    #[test]
    fn certain_failure_burns_leaves() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let n = 9;
        let cfg = MergeConfig::new(20.0, n, AllocationMode::Redistribution);
        let out = simulate_trial(&lat, &cfg, 1).unwrap();
        assert!(out.edge_status.iter().all(|&s| s == EdgeStatus::Failed));
        let budget = lat.node_count() as u64 * (n as u64 - 1);
        assert!(out.attempts_total <= budget / 2);
    }

    #[test]
    fn two_leaves_give_a_maximal_allocation() {
        let lat = build_lattice(LatticeSpec::periodic(1)).unwrap();
        for order in [EdgeOrder::Lexicographic, EdgeOrder::ShuffledPerTrial] {
            let cfg = MergeConfig::new(f64::MAX, 3, AllocationMode::Redistribution).with_edge_order(order);
            for t in 0..20 {
                let out = simulate_trial(&lat, &cfg, t).unwrap();
                // At most one leaf per endpoint per success: 6 nodes x 2 leaves.
                assert!(out.failed_edges() >= 6);
                assert!(out.leaves_used.iter().all(|&u| u <= 2));
                // Greedy is maximal: every failed edge has an exhausted endpoint.
                for (e, &(a, b)) in lat.edges().iter().enumerate() {
                    if out.edge_status[e] == EdgeStatus::Failed {
                        assert!(out.leaves_used[a] == 2 || out.leaves_used[b] == 2);
                    }
                }
            }
        }
    }

    #[test]
    fn loss_pass_cases() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let n_edges = lat.edge_count();
        let blank = TrialOutcome {
            edge_status: vec![EdgeStatus::Success; n_edges],
            attempts_total: 0,
            edge_attempts: vec![1; n_edges],
            leaves_used: vec![0; lat.node_count()],
            lost_nodes: LostNodes::default(),
        };
        let mut rng = loss_rng(0, 0);
        let out = apply_adaptive_loss(blank.clone(), &lat, &mut rng);
        assert!(out.lost_nodes.is_empty());

        // Pairwise-disjoint failed edges lose one node each.
        let mut used = vec![false; lat.node_count()];
        let mut disjoint = blank.clone();
        let mut k = 0;
        for (e, &(a, b)) in lat.edges().iter().enumerate() {
            if !used[a] && !used[b] {
                used[a] = true;
                used[b] = true;
                disjoint.edge_status[e] = EdgeStatus::Failed;
                k += 1;
            }
        }
        let out = apply_adaptive_loss(disjoint, &lat, &mut rng);
        assert_eq!(out.lost_nodes.len(), k);
    }

    #[test]
    fn shared_endpoint_loss_is_one_or_two() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let inc = lat.incident_edges(0);
        let mut outcome = TrialOutcome {
            edge_status: vec![EdgeStatus::Success; lat.edge_count()],
            attempts_total: 0,
            edge_attempts: vec![0; lat.edge_count()],
            leaves_used: vec![0; lat.node_count()],
            lost_nodes: LostNodes::default(),
        };
        outcome.edge_status[inc[0]] = EdgeStatus::Failed;
        outcome.edge_status[inc[1]] = EdgeStatus::Failed;
        let mut seen = [false; 3];
        for s in 0..64 {
            let out = apply_adaptive_loss(outcome.clone(), &lat, &mut loss_rng(9, s));
            let l = out.lost_nodes.len();
            assert!(l == 1 || l == 2);
            seen[l] = true;
        }
        assert!(seen[1] && seen[2]);
    }

    #[test]
    fn run_trials_is_deterministic() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let cfg = MergeConfig::new(100.0, 9, AllocationMode::Redistribution)
            .with_trials(50)
            .with_seed(42);
        let a = run_trials(&lat, &cfg).unwrap();
        let b = run_trials(&lat, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, 50);
        assert!(a.std_error > 0.0);
        let c = run_trials(&lat, &cfg.with_seed(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn run_trials_rejects_bad_config() {
        let lat = build_lattice(LatticeSpec::periodic(1)).unwrap();
        let cfg = MergeConfig::new(100.0, 9, AllocationMode::Redistribution);
        assert!(run_trials(&lat, &cfg.with_trials(0)).is_err());
        assert!(run_trials(&lat, &MergeConfig { n_qubits: 1, ..cfg }).is_err());
        assert!(run_trials(
            &lat,
            &MergeConfig {
                cooperativity: 0.0,
                ..cfg
            }
        )
        .is_err());
    }

    #[test]
    fn single_trial_has_zero_std_error() {
        let lat = build_lattice(LatticeSpec::periodic(1)).unwrap();
        let cfg = MergeConfig::new(100.0, 9, AllocationMode::Partitioning).with_trials(1);
        assert_eq!(run_trials(&lat, &cfg).unwrap().std_error, 0.0);
    }

    #[test]
    fn run_trial_matches_aggregate() {
        let lat = build_lattice(LatticeSpec::periodic(2)).unwrap();
        let cfg = MergeConfig::new(64.0, 9, AllocationMode::Redistribution)
            .with_trials(3)
            .with_seed(5);
        let fractions: Vec<(f64, f64)> = (0..3)
            .map(|i| {
                let t = run_trial(&lat, &cfg, i).unwrap();
                (t.failure_fraction(), t.loss_fraction())
            })
            .collect();
        assert_eq!(run_trials(&lat, &cfg).unwrap(), summarize(&fractions));
    }
}
