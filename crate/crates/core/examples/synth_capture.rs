//! Writes a synthetic AVTP capture with injected replay frames.
//!
//! cargo run --example synth_capture -- [out.pcap] [n_benign] [frames] [seed]

use std::env;
use std::path::PathBuf;

use avtp_ids::cli::{cmd_synth, SynthArgs};

fn main() -> anyhow::Result<()> {
    let mut args = env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| {
        env::temp_dir().join("avtp-synth.pcap").display().to_string()
    }));
    let n_benign = args.next().map_or(Ok(5_000), |s| s.parse())?;
    let frames = args.next().map_or(Ok(4), |s| s.parse())?;
    let seed = args.next().map_or(Ok(1), |s| s.parse())?;

    let s = cmd_synth(&SynthArgs {
        n_benign,
        frames,
        seed,
        out,
    })?;
    println!("capture: {}", s.pcap.display());
    println!("labels:  {}", s.labels.display());
    println!("{} packets, {} benign, {} injected", s.packets, s.benign, s.injected);
    Ok(())
}
