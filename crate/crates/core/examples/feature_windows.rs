//! Turns a labelled stream into delta-feature windows and a feature dump.
//!
//! cargo run --example feature_windows -- [window]

use std::env;

use avtp_ids::features::{build_windows, delta, expand_nibbles, read_dump, write_dump};
use avtp_ids::ingest::{label_capture, synth_corpus, Label, SEQ_OFFSET};

fn main() -> anyhow::Result<()> {
    let w: usize = env::args().nth(1).map_or(Ok(44), |s| s.parse())?;
    let capture = synth_corpus(400, 2, 11);
    let packets = label_capture(&capture.to_raw(), Some(&capture.labels), None)?;

    // Benign counters step by one; a replayed frame breaks the pattern at its edges.
    println!("counter deltas around the first injection:");
    let first = packets.iter().position(|p| p.label == Label::Injected).unwrap();
    for t in first - 2..first + 3 {
        let d = delta(&packets[t - 1].header, &packets[t].header)?;
        let n = expand_nibbles(&d);
        println!(
            "  packet {t} label {} delta {:3} nibbles ({}, {})",
            packets[t].label.as_u8(),
            d.0[SEQ_OFFSET],
            n[2 * SEQ_OFFSET],
            n[2 * SEQ_OFFSET + 1]
        );
    }

    let windows = build_windows(&packets, w)?;
    let injected = windows.iter().filter(|m| m.label == Label::Injected).count();
    println!(
        "{} packets -> {} windows of {}x{} ({injected} labelled injected)",
        packets.len(),
        windows.len(),
        windows[0].rows(),
        windows[0].cols()
    );

    let dump = write_dump(&windows, w)?;
    let back = read_dump(&dump)?;
    println!("feature dump: {} bytes, {} windows read back", dump.len(), back.windows.len());
    Ok(())
}
