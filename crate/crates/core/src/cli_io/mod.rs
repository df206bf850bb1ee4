//! Configuration, command-line surface, result files and plots.

pub mod cli;
pub mod config;
pub mod emit;
pub mod plot;

pub use config::{config_to_json, load_config, parse_config, OutputFormat, RunConfig};
pub use emit::{emit_results, format_sig, Table};
pub use plot::{emit_plot, render_svg, PlotSpec};
