use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use avtp_ids::bench;
use avtp_ids::cli::{self, BenchArgs, DetectArgs, EvalArgs, FeaturesArgs, SynthArgs};
use avtp_ids::features::DEFAULT_WINDOW;
use avtp_ids::metrics::DEFAULT_THRESHOLD;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "avtp-ids", version, about = "Replay-attack detection for AVTP captures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn parse_ethertype(s: &str) -> Result<u16, String> {
    let t = s.trim_start_matches("0x").trim_start_matches("0X");
    u16::from_str_radix(t, 16).map_err(|e| format!("bad EtherType {s:?}: {e}"))
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic capture with injected replay frames and its label sidecar.
    Synth {
        #[arg(long, default_value_t = 10_000)]
        n_benign: usize,
        /// Number of injected 36-packet replay frames.
        #[arg(long, default_value_t = 2)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a capture into a feature dump.
    Features {
        #[arg(long)]
        pcap: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        /// Keep only frames with this EtherType (hex), e.g. 22f0.
        #[arg(long, value_parser = parse_ethertype)]
        ethertype: Option<u16>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every window of a capture, one verdict line per window.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        pcap: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_parser = parse_ethertype)]
        ethertype: Option<u16>,
    },
    /// Compute metrics for a model over a labelled feature dump.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time single-window inference and report throughput and efficiency.
    Bench {
        /// Model files; defaults to the five built-in variants.
        #[arg(long = "model")]
        models: Vec<PathBuf>,
        #[arg(long, default_value = "local")]
        host: String,
        #[arg(long, default_value_t = 65.0)]
        tdp: f64,
        #[arg(long, default_value_t = bench::DEFAULT_WARMUP)]
        warmup: usize,
        /// Passes over the inputs; omitted means 10,000 calls or 10 s.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = bench::REALTIME_THRESHOLD_US)]
        threshold_us: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pcap: Option<PathBuf>,
        #[arg(long)]
        end_to_end: bool,
        #[arg(long, default_value_t = 64)]
        inputs: usize,
    },
}

fn run(cmd: Cmd) -> anyhow::Result<()> {
    match cmd {
        Cmd::Synth { n_benign, frames, seed, out } => {
            let s = cli::cmd_synth(&SynthArgs { n_benign, frames, seed, out })?;
            eprintln!(
                "wrote {} packets ({} benign, {} injected) to {} and {}",
                s.packets,
                s.benign,
                s.injected,
                s.pcap.display(),
                s.labels.display()
            );
        }
        Cmd::Features { pcap, labels, window, ethertype, out } => {
            let n = cli::cmd_features(&FeaturesArgs { pcap, labels, window, ethertype, out: out.clone() })?;
            eprintln!("wrote {n} windows to {}", out.display());
        }
        Cmd::Detect { model, pcap, labels, window, threshold, ethertype } => {
            let args = DetectArgs { model, pcap, labels, window, threshold, ethertype };
            let mut out = io::stdout().lock();
            let s = cli::cmd_detect(&args, &mut out)?;
            eprintln!("{} windows, {} alerts", s.windows, s.alerts);
        }
        Cmd::Eval { model, features, threshold, out } => {
            let r = cli::cmd_eval(&EvalArgs { model, features, threshold, out })?;
            println!("{}", r.to_json_pretty());
        }
        Cmd::Bench { models, host, tdp, warmup, reps, threshold_us, seed, pcap, end_to_end, inputs } => {
            let args = BenchArgs {
                models,
                host,
                tdp_w: tdp,
                warmup,
                reps,
                threshold_us,
                seed,
                pcap,
                end_to_end,
                inputs,
            };
            let rows = cli::cmd_bench(&args)?;
            print!("{}", bench::render_report(&rows, threshold_us));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd).context("avtp-ids") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
