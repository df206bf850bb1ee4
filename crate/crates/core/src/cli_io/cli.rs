//! Command-line surface of the `rhg-cluster` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::cli_io::config::{load_config, OutputFormat, RunConfig};
use crate::cli_io::emit::{
    budget_table, curves_table, intersections_table, point_table, sweep_table, write_text, Table,
};
use crate::cli_io::plot::{render_svg, Glyph, Heatmap, Marker, PlotCurve, PlotSpec, EDGE_COLOR, PAULI_COLOR};
use crate::contours::{
    intersect_with_curve, partition_level_curve, pauli_level_curve, redistribution_level_curve, run_sweep,
};
use crate::error::{Error, Result};
use crate::error_budget::{max_feasible_n, pauli_error, solve_cooperativity, ErrorParams};
use crate::merge_sim::run_trials;
use crate::resource_states::AllocationMode;
use crate::rhg_lattice::build_lattice;

#[derive(Debug, Parser)]
#[command(
    name = "rhg-cluster",
    version,
    about = "Merge star-graph resource states into RHG cluster states"
)]
pub struct Cli {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    EdgeFailure,
    Pauli,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the lattice, print its statistics and optionally dump it as JSON.
    Lattice,
    /// Monte Carlo edge failure at the configured (C, N, mode).
    Simulate,
    /// Edge failure and Pauli budget over the (C, N) grid.
    Sweep,
    /// Level curves: analytic partitioning, Monte Carlo redistribution, Pauli.
    Contour,
    /// Operating points where both targets are met.
    Intersect,
    /// Pauli error budget at the configured (C, N).
    Budget,
    /// SVG of the level curves and operating points.
    Plot {
        /// Sweep results (JSON) to draw as a heatmap.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "edge-failure")]
        quantity: Quantity,
        /// Heatmap allocation mode for edge failure.
        #[arg(long, default_value = "redistribution")]
        mode: String,
        /// Skip the level curves and draw only the heatmap.
        #[arg(long)]
        heatmap_only: bool,
    },
}

impl Cli {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        if let Some(workers) = self.workers {
            config.workers = Some(workers);
        }
        if let Some(format) = self.format {
            config.format = format;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Run a parsed command line, writing to `config.out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let config = cli.resolve_config()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build()?;
    pool.install(|| execute(&cli.command, &config, stdout))
}

fn deliver(text: &str, config: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<()> {
    match &config.out {
        Some(path) => write_text(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn deliver_table(table: &Table, config: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<()> {
    deliver(&table.render(config.format)?, config, stdout)
}

fn execute(command: &Command, config: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let params = config.error_params();
    match command {
        Command::Lattice => {
            let lattice = build_lattice(config.lattice_spec())?;
            let stats = serde_json::to_string_pretty(&lattice.stats())? + "\n";
            if let Some(path) = &config.out {
                write_text(path, &(serde_json::to_string(&lattice.dump())? + "\n"))?;
            }
            stdout.write_all(stats.as_bytes()).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
        Command::Simulate => {
            let lattice = build_lattice(config.lattice_spec())?;
            let merge = config.merge_config();
            let stats = run_trials(&lattice, &merge)?;
            let pauli = pauli_error(merge.cooperativity, merge.n_qubits, &params);
            let table = point_table(
                merge.cooperativity,
                merge.n_qubits,
                merge.mode,
                &stats,
                &pauli,
                merge.master_seed,
            );
            deliver_table(&table, config, stdout)
        }
        Command::Sweep => {
            let lattice = build_lattice(config.lattice_spec())?;
            let grid = run_sweep(
                &config.grid_spec(),
                &lattice,
                &params,
                config.trials,
                &config.sim_settings(),
            )?;
            deliver_table(&sweep_table(&grid), config, stdout)
        }
        Command::Contour => {
            let lattice = build_lattice(config.lattice_spec())?;
            let partition = partition_level_curve(config.edge_target, &config.grid_c)?;
            let redistribution =
                redistribution_level_curve(config.edge_target, &config.grid_n, &lattice, &config.sim_settings())?;
            let pauli = pauli_level_curve(config.pauli_target, &config.grid_n, &params)?;
            deliver_table(&curves_table(&[partition, redistribution, pauli]), config, stdout)
        }
        Command::Intersect => {
            let lattice = build_lattice(config.lattice_spec())?;
            let edge =
                redistribution_level_curve(config.edge_target, &config.grid_n, &lattice, &config.sim_settings())?;
            let ix = intersect_with_curve(&edge, config.pauli_target, &params)?;
            deliver_table(&intersections_table(&[(params.epsilon_n(), ix)]), config, stdout)
        }
        Command::Budget => {
            let pauli = pauli_error(config.cooperativity, config.n_qubits, &params);
            let table = budget_table(
                config.cooperativity,
                config.n_qubits,
                params.epsilon_n(),
                &pauli,
                config.pauli_target,
                max_feasible_n(config.pauli_target, &params),
                solve_cooperativity(config.n_qubits, config.pauli_target, &params),
            );
            deliver_table(&table, config, stdout)
        }
        Command::Plot {
            input,
            quantity,
            mode,
            heatmap_only,
        } => {
            let mut spec = if *heatmap_only {
                PlotSpec::new("")
            } else {
                operating_region_plot(config)?
            };
            if let Some(path) = input {
                let mode = parse_mode(mode)?;
                spec.heatmap = Some(heatmap_from_sweep_json(path, *quantity, mode)?);
            }
            deliver(&render_svg(&spec)?, config, stdout)
        }
    }
}

fn parse_mode(s: &str) -> Result<AllocationMode> {
    match s {
        "redistribution" => Ok(AllocationMode::Redistribution),
        "partitioning" => Ok(AllocationMode::Partitioning),
        other => Err(Error::invalid("mode", format!("unknown allocation mode `{other}`"))),
    }
}

/// Edge-failure level curve with the Pauli curve and recommended operating
/// point for each `plot_epsilon_n`.
pub fn operating_region_plot(config: &RunConfig) -> Result<PlotSpec> {
    let lattice = build_lattice(config.lattice_spec())?;
    let edge = redistribution_level_curve(config.edge_target, &config.grid_n, &lattice, &config.sim_settings())?;
    let mut spec = PlotSpec::new(format!(
        "edge failure {} and Pauli error {} level curves",
        crate::cli_io::format_sig(config.edge_target),
        crate::cli_io::format_sig(config.pauli_target)
    ));
    spec.curves.push(PlotCurve::from_level_curve(
        &edge,
        format!(
            "edge failure {} (redistribution)",
            crate::cli_io::format_sig(config.edge_target)
        ),
        EDGE_COLOR,
    ));
    let glyphs = [Glyph::Cross, Glyph::Diamond];
    for (k, &eps) in config.plot_epsilon_n.iter().enumerate() {
        // The lumped value replaces any itemised per-qubit terms.
        let params = ErrorParams::lumped(eps, config.gate_infidelity);
        let pauli = pauli_level_curve(config.pauli_target, &config.grid_n, &params)?;
        let label = format!(
            "Pauli {}, eps_N {}",
            crate::cli_io::format_sig(config.pauli_target),
            crate::cli_io::format_sig(eps)
        );
        let mut curve = PlotCurve::from_level_curve(&pauli, label.clone(), PAULI_COLOR);
        if k % 2 == 1 {
            curve.color = "#b0b0b0".to_string();
        }
        spec.curves.push(curve);
        if let Some(rec) = intersect_with_curve(&edge, config.pauli_target, &params)?.recommended {
            spec.markers.push(Marker {
                c: rec.c_required.unwrap_or_default(),
                n: rec.n as f64,
                glyph: glyphs[k % glyphs.len()],
                label: format!(
                    "N={} C={}",
                    rec.n,
                    crate::cli_io::format_sig(rec.c_required.unwrap_or_default())
                ),
            });
        }
    }
    Ok(spec)
}

/// Rebuild a heatmap from the JSON records written by `sweep`.
pub fn heatmap_from_sweep_json(path: &Path, quantity: Quantity, mode: AllocationMode) -> Result<Heatmap> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let records: Vec<Value> = serde_json::from_str(&text)?;
    let mut cells: Vec<(f64, u32, f64)> = Vec::new();
    for r in &records {
        let field = |k: &str| r.get(k).cloned().unwrap_or(Value::Null);
        let (Some(c), Some(n)) = (field("C").as_f64(), field("N").as_u64()) else {
            return Err(Error::invalid("input", "sweep record without C/N"));
        };
        let value = match quantity {
            Quantity::EdgeFailure => {
                if field("mode").as_str() != Some(mode.as_str()) {
                    continue;
                }
                field("edge_failure_mean").as_f64()
            }
            Quantity::Pauli => field("pauli_total").as_f64(),
        };
        if let Some(v) = value {
            cells.push((c, n as u32, v));
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyPlot("no matching sweep records"));
    }
    let mut c_values: Vec<f64> = cells.iter().map(|x| x.0).collect();
    c_values.sort_by(f64::total_cmp);
    c_values.dedup();
    let mut n_values: Vec<u32> = cells.iter().map(|x| x.1).collect();
    n_values.sort_unstable();
    n_values.dedup();
    let mut values = vec![f64::NAN; c_values.len() * n_values.len()];
    for (c, n, v) in cells {
        let ic = c_values.iter().position(|&x| x == c).expect("collected above");
        let in_ = n_values.iter().position(|&x| x == n).expect("collected above");
        values[in_ * c_values.len() + ic] = v;
    }
    let label = match quantity {
        Quantity::EdgeFailure => format!("log10 edge failure ({mode})"),
        Quantity::Pauli => "log10 Pauli error".to_string(),
    };
    Ok(Heatmap {
        label,
        c_values,
        n_values,
        values,
    })
}
