//! Construction of fault-tolerant RHG cluster states from star-graph resource
//! states merged with a probabilistic heralded gate.
//!
//! The crate is organised bottom-up:
//!
//! - [`rhg_lattice`] builds the degree-4 cluster-state graph.
//! - [`resource_states`] tracks the leaf budget of each star-graph resource
//!   state and evaluates the carving infidelity closed forms.
//! - [`merge_sim`] is the Monte Carlo engine that attempts every lattice edge
//!   and reports edge-failure and loss statistics.
//! - [`error_budget`] evaluates the per-qubit Pauli error budget and its
//!   inversions.
//! - [`contours`] extracts level curves over the (cooperativity, size) plane
//!   and locates operating points.
//! - [`cli_io`] holds configuration, result emission and SVG plotting.

// Negated float comparisons are the NaN-rejecting form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod contours;
pub mod error;
pub mod error_budget;
pub mod merge_sim;
pub mod resource_states;
pub mod rhg_lattice;

pub use error::{Error, Result};
