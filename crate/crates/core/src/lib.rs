//! Replay-attack detection for automotive Ethernet AVTP streams.
//!
//! The pipeline runs capture → labelled packets → delta-feature windows →
//! CNN score → verdict:
//!
//! - [`ingest`] reads classic PCAP files and label sidecars, and synthesizes
//!   benign AVTP streams with injected replay frames.
//! - [`features`] turns consecutive 58-byte headers into `w × 116` windows.
//! - [`nn`] runs the baseline, student and ultra-light detectors over
//!   dense, pruned or int8 weights.
//! - [`metrics`] scores detectors (accuracy, precision, recall, F1, ROC, AUROC).
//! - [`bench`] times single-sample inference and derives throughput and
//!   samples/s/W figures.
//! - [`cli`] wires these into the `avtp-ids` commands.
//!
//! See the crate's `examples/` directory for one runnable program per stage.

pub mod bench;
pub mod cli;
pub mod features;
pub mod ingest;
pub mod metrics;
pub mod nn;
