//! Level curves over the (cooperativity, resource size) plane.
//!
//! Partitioned edge failure has a closed form and its level curves are
//! inverted directly. Redistribution is only available through Monte Carlo,
//! so its curves come from a bisection on `C` that treats the estimator as
//! monotone in expectation: the bracket moves only when the target sits
//! outside the `sigma`-band of the midpoint estimate, and the trial count is
//! multiplied by four while the band straddles it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_budget::{max_feasible_n, pauli_error, solve_cooperativity, ErrorParams, PauliBudget};
use crate::merge_sim::{run_trials, EdgeFailureStats, EdgeOrder, GateModel, MergeConfig, CLAMP_COOPERATIVITY};
use crate::resource_states::AllocationMode;
use crate::rhg_lattice::RhgLattice;

/// Literature thresholds and the default targets one decade below them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConstants {
    pub edge_failure_threshold: f64,
    pub pauli_threshold: f64,
}

impl ThresholdConstants {
    pub const LITERATURE: ThresholdConstants = ThresholdConstants {
        edge_failure_threshold: 0.145,
        pauli_threshold: 0.0067,
    };

    pub fn edge_target(&self) -> f64 {
        self.edge_failure_threshold / 10.0
    }

    pub fn pauli_target(&self) -> f64 {
        self.pauli_threshold / 10.0
    }
}

pub const EDGE_FAILURE_TARGET: f64 = 0.0145;
pub const PAULI_TARGET: f64 = 6.7e-4;

/// Expected edge failure of partitioned merging, `p_f^((N-1)/4)`.
///
/// For `C <= 36` the gate always fails and the result is 1.
pub fn partition_edge_failure(cooperativity: f64, n_qubits: u32) -> f64 {
    match GateModel::new(cooperativity) {
        Ok(gate) => gate.failure_probability().powf((n_qubits as f64 - 1.0) / 4.0),
        Err(_) => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Closed-form partitioned edge failure.
    PartitionAnalytic,
    /// Monte Carlo edge failure under the given allocation.
    MonteCarlo(AllocationMode),
    /// Closed-form Pauli error budget.
    Pauli,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::PartitionAnalytic => "partition_analytic",
            CurveKind::MonteCarlo(AllocationMode::Redistribution) => "redistribution_mc",
            CurveKind::MonteCarlo(AllocationMode::Partitioning) => "partitioning_mc",
            CurveKind::Pauli => "pauli",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Resource size. Real-valued on analytic partition curves.
    pub n: f64,
    /// Smallest integer size reaching the target on analytic curves.
    pub n_ceil: Option<u32>,
    /// `None` when the target is not reachable in the search range.
    pub c: Option<f64>,
    /// Confidence half-width on `c` for Monte Carlo points.
    pub c_half_width: Option<f64>,
    pub trials: u64,
    pub unreachable: bool,
}

impl CurvePoint {
    fn exact(n: f64, c: f64) -> Self {
        CurvePoint {
            n,
            n_ceil: None,
            c: Some(c),
            c_half_width: None,
            trials: 0,
            unreachable: false,
        }
    }

    fn unreachable(n: f64) -> Self {
        CurvePoint {
            n,
            n_ceil: None,
            c: None,
            c_half_width: None,
            trials: 0,
            unreachable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub kind: CurveKind,
    pub target: f64,
    /// Sorted by `n`.
    pub points: Vec<CurvePoint>,
}

impl LevelCurve {
    pub fn point_at(&self, n: u32) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.n == n as f64)
    }
}

fn check_target(target: f64, name: &'static str) -> Result<()> {
    if target > 0.0 && target <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("target must lie in (0, 1], got {target}")))
    }
}

/// Analytic partition curve: `N(C) = 1 + 4 ln(target) / ln(6/sqrt(C))` for
/// each `C > 36`.
pub fn partition_level_curve(target: f64, c_values: &[f64]) -> Result<LevelCurve> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid("target", format!("must lie in (0, 1), got {target}")));
    }
    let mut points: Vec<CurvePoint> = c_values
        .iter()
        .filter(|&&c| c > CLAMP_COOPERATIVITY)
        .map(|&c| {
            let n = 1.0 + 4.0 * target.ln() / (6.0 / c.sqrt()).ln();
            CurvePoint {
                n_ceil: Some(n.ceil() as u32),
                ..CurvePoint::exact(n, c)
            }
        })
        .collect();
    points.sort_by(|a, b| a.n.total_cmp(&b.n));
    Ok(LevelCurve {
        kind: CurveKind::PartitionAnalytic,
        target,
        points,
    })
}

/// An edge-failure estimate at a given cooperativity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// A function of `C` observed with noise whose expectation decreases in `C`.
pub trait NoisyObjective: Sync {
    fn estimate(&self, cooperativity: f64, trials: u64) -> Result<Estimate>;
}

/// Noise-free partitioned edge failure, used to validate the bisection.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticPartition {
    pub n_qubits: u32,
}

impl NoisyObjective for AnalyticPartition {
    fn estimate(&self, cooperativity: f64, trials: u64) -> Result<Estimate> {
        Ok(Estimate {
            mean: partition_edge_failure(cooperativity, self.n_qubits),
            std_error: 0.0,
            trials,
        })
    }
}

/// Monte Carlo edge failure on a lattice.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloObjective<'a> {
    pub lattice: &'a RhgLattice,
    pub n_qubits: u32,
    pub mode: AllocationMode,
    pub edge_order: EdgeOrder,
    pub master_seed: u64,
}

impl NoisyObjective for MonteCarloObjective<'_> {
    fn estimate(&self, cooperativity: f64, trials: u64) -> Result<Estimate> {
        let config = MergeConfig {
            cooperativity,
            n_qubits: self.n_qubits,
            mode: self.mode,
            edge_order: self.edge_order,
            trials,
            master_seed: self.master_seed,
        };
        let stats = run_trials(self.lattice, &config)?;
        Ok(Estimate {
            mean: stats.mean_failure_fraction,
            std_error: stats.std_error,
            trials,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionSettings {
    pub c_min: f64,
    pub c_max: f64,
    /// Stop once the bracket is narrower than this.
    pub resolution: f64,
    pub initial_trials: u64,
    pub max_trials: u64,
    /// Width of the decision band in standard errors.
    pub sigma: f64,
}

impl Default for BisectionSettings {
    fn default() -> Self {
        BisectionSettings {
            c_min: CLAMP_COOPERATIVITY,
            c_max: 1000.0,
            resolution: 0.5,
            initial_trials: 64,
            max_trials: 4096,
            sigma: 3.0,
        }
    }
}

impl BisectionSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_min > 0.0 && self.c_max > self.c_min) {
            return Err(Error::invalid("c_search", "need 0 < c_min < c_max"));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::invalid("c_resolution", "must be positive"));
        }
        if self.initial_trials == 0 || self.max_trials < self.initial_trials {
            return Err(Error::invalid("max_trials", "need 1 <= initial_trials <= max_trials"));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::invalid("sigma", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootEstimate {
    pub cooperativity: f64,
    pub half_width: f64,
    /// Trial count of the last evaluation.
    pub trials: u64,
    pub evaluations: usize,
}

/// Find `C` where the objective crosses `target`. `None` when the target is
/// not reached even at `c_max`.
pub fn noisy_bisect<O: NoisyObjective + ?Sized>(
    objective: &O,
    target: f64,
    settings: &BisectionSettings,
) -> Result<Option<RootEstimate>> {
    settings.validate()?;
    let band = |e: &Estimate| settings.sigma * e.std_error;
    let mut trials = settings.initial_trials;
    let mut evaluations = 0;

    let top = objective.estimate(settings.c_max, trials)?;
    evaluations += 1;
    if top.mean - band(&top) > target {
        return Ok(None);
    }
    let bottom = objective.estimate(settings.c_min, trials)?;
    evaluations += 1;
    if bottom.mean + band(&bottom) <= target {
        return Ok(Some(RootEstimate {
            cooperativity: settings.c_min,
            half_width: 0.0,
            trials,
            evaluations,
        }));
    }

    let (mut lo, mut hi) = (settings.c_min, settings.c_max);
    while hi - lo > settings.resolution {
        let mid = 0.5 * (lo + hi);
        loop {
            let est = objective.estimate(mid, trials)?;
            evaluations += 1;
            if est.mean - band(&est) > target {
                lo = mid;
                break;
            }
            if est.mean + band(&est) < target {
                hi = mid;
                break;
            }
            if est.std_error == 0.0 {
                // Exact hit on a noise-free objective.
                return Ok(Some(RootEstimate {
                    cooperativity: mid,
                    half_width: 0.0,
                    trials,
                    evaluations,
                }));
            }
            if trials.saturating_mul(4) > settings.max_trials {
                // Target is statistically indistinguishable from the
                // midpoint at the trial cap; report the whole bracket.
                return Ok(Some(RootEstimate {
                    cooperativity: mid,
                    half_width: 0.5 * (hi - lo),
                    trials,
                    evaluations,
                }));
            }
            trials *= 4;
        }
    }
    Ok(Some(RootEstimate {
        cooperativity: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
        trials,
        evaluations,
    }))
}

/// Simulation settings shared by Monte Carlo curves and sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub edge_order: EdgeOrder,
    pub master_seed: u64,
    pub bisection: BisectionSettings,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            edge_order: EdgeOrder::ShuffledPerTrial,
            master_seed: 0,
            bisection: BisectionSettings::default(),
        }
    }
}

/// Per-`N` Monte Carlo level curve under `mode`.
pub fn monte_carlo_level_curve(
    target: f64,
    n_values: &[u32],
    lattice: &RhgLattice,
    mode: AllocationMode,
    settings: &SimSettings,
) -> Result<LevelCurve> {
    check_target(target, "edge_target")?;
    settings.bisection.validate()?;
    let mut points = n_values
        .par_iter()
        .map(|&n| {
            let objective = MonteCarloObjective {
                lattice,
                n_qubits: n,
                mode,
                edge_order: settings.edge_order,
                master_seed: settings.master_seed,
            };
            let root = noisy_bisect(&objective, target, &settings.bisection)?;
            Ok(match root {
                Some(r) => CurvePoint {
                    c_half_width: Some(r.half_width),
                    trials: r.trials,
                    ..CurvePoint::exact(n as f64, r.cooperativity)
                },
                None => {
                    log::warn!(
                        "N = {n}: edge failure {target} not reached by C = {}",
                        settings.bisection.c_max
                    );
                    CurvePoint::unreachable(n as f64)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.n.total_cmp(&b.n));
    Ok(LevelCurve {
        kind: CurveKind::MonteCarlo(mode),
        target,
        points,
    })
}

pub fn redistribution_level_curve(
    target: f64,
    n_values: &[u32],
    lattice: &RhgLattice,
    settings: &SimSettings,
) -> Result<LevelCurve> {
    monte_carlo_level_curve(target, n_values, lattice, AllocationMode::Redistribution, settings)
}

/// Cooperativity reaching `target` Pauli error for each `N`.
pub fn pauli_level_curve(target: f64, n_values: &[u32], params: &ErrorParams) -> Result<LevelCurve> {
    check_target(target, "pauli_target")?;
    let mut points: Vec<CurvePoint> = n_values
        .iter()
        .map(|&n| match solve_cooperativity(n, target, params) {
            Some(c) => CurvePoint::exact(n as f64, c),
            None => CurvePoint::unreachable(n as f64),
        })
        .collect();
    points.sort_by(|a, b| a.n.total_cmp(&b.n));
    Ok(LevelCurve {
        kind: CurveKind::Pauli,
        target,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub n: u32,
    pub c_edge: Option<f64>,
    pub c_edge_half_width: Option<f64>,
    pub c_pauli: Option<f64>,
    /// `max(c_edge, c_pauli)` when both exist.
    pub c_required: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub edge_target: f64,
    pub pauli_target: f64,
    pub frontier: Vec<FrontierPoint>,
    /// Feasible point with the smallest required cooperativity, ties to
    /// smaller `N`.
    pub recommended: Option<FrontierPoint>,
}

impl Intersection {
    pub fn feasible_count(&self) -> usize {
        self.frontier.iter().filter(|p| p.feasible).count()
    }
}

/// Combine a precomputed edge-failure curve with the Pauli budget.
pub fn intersect_with_curve(edge_curve: &LevelCurve, pauli_target: f64, params: &ErrorParams) -> Result<Intersection> {
    check_target(pauli_target, "pauli_target")?;
    let n_cap = max_feasible_n(pauli_target, params);
    let frontier: Vec<FrontierPoint> = edge_curve
        .points
        .iter()
        .map(|p| {
            let n = p.n.round() as u32;
            let c_pauli = solve_cooperativity(n, pauli_target, params);
            let c_required = match (p.c, c_pauli) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
            let within_cap = n_cap.is_some_and(|cap| n <= cap);
            FrontierPoint {
                n,
                c_edge: p.c,
                c_edge_half_width: p.c_half_width,
                c_pauli,
                c_required,
                feasible: c_required.is_some() && within_cap,
            }
        })
        .collect();
    let mut recommended: Option<FrontierPoint> = None;
    for p in frontier.iter().filter(|p| p.feasible) {
        let better = match recommended {
            None => true,
            Some(r) => p.c_required < r.c_required || (p.c_required == r.c_required && p.n < r.n),
        };
        if better {
            recommended = Some(*p);
        }
    }
    Ok(Intersection {
        edge_target: edge_curve.target,
        pauli_target,
        frontier,
        recommended,
    })
}

/// Per-`N` frontier of the redistribution edge curve and the Pauli budget.
pub fn find_intersection(
    edge_target: f64,
    pauli_target: f64,
    params: &ErrorParams,
    n_values: &[u32],
    lattice: &RhgLattice,
    settings: &SimSettings,
) -> Result<Intersection> {
    let edge_curve = redistribution_level_curve(edge_target, n_values, lattice, settings)?;
    intersect_with_curve(&edge_curve, pauli_target, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub n_values: Vec<u32>,
    pub modes: Vec<AllocationMode>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c_values: (1..=30).map(|k| 10.0 * k as f64).collect(),
            n_values: (9..=21).collect(),
            modes: vec![AllocationMode::Redistribution, AllocationMode::Partitioning],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() {
            return Err(Error::invalid("grid_c", "must not be empty"));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("grid_n", "must not be empty"));
        }
        if self.modes.is_empty() {
            return Err(Error::invalid("sweep_modes", "must not be empty"));
        }
        if !self.c_values.iter().all(|&c| c > 0.0) || !self.c_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("grid_c", "must be positive and strictly ascending"));
        }
        if !self.n_values.iter().all(|&n| n >= 2) || !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("grid_n", "must be >= 2 and strictly ascending"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub c: f64,
    pub n: u32,
    pub mode: AllocationMode,
    pub edge_failure: EdgeFailureStats,
    pub pauli: PauliBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub grid: GridSpec,
    pub master_seed: u64,
    /// Ordered by C, then N, then mode as listed in `grid.modes`.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, c: f64, n: u32, mode: AllocationMode) -> Option<&SweepCell> {
        self.cells.iter().find(|x| x.c == c && x.n == n && x.mode == mode)
    }
}

/// Monte Carlo edge failure and Pauli budget for every grid cell. Every cell
/// uses the same master seed.
pub fn run_sweep(
    grid: &GridSpec,
    lattice: &RhgLattice,
    params: &ErrorParams,
    trials: u64,
    settings: &SimSettings,
) -> Result<SweepGrid> {
    grid.validate()?;
    let mut jobs = Vec::with_capacity(grid.c_values.len() * grid.n_values.len() * grid.modes.len());
    for &c in &grid.c_values {
        for &n in &grid.n_values {
            for &mode in &grid.modes {
                jobs.push((c, n, mode));
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(c, n, mode)| {
            let config = MergeConfig {
                cooperativity: c,
                n_qubits: n,
                mode,
                edge_order: settings.edge_order,
                trials,
                master_seed: settings.master_seed,
            };
            Ok(SweepCell {
                c,
                n,
                mode,
                edge_failure: run_trials(lattice, &config)?,
                pauli: pauli_error(c, n, params),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        grid: grid.clone(),
        master_seed: settings.master_seed,
        cells,
    })
}
