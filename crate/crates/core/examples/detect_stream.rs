//! Online detection: packets arrive one by one, each completed window is
//! scored immediately, and labelled results are summarised at the end.
//!
//! cargo run --release --example detect_stream -- [model.aeid]
//! Without a model file a seeded ultra-light model is used.

use std::{env, fs};

use avtp_ids::features::{WindowBuilder, DEFAULT_WINDOW};
use avtp_ids::ingest::{extract_avtp, parse_pcap, synth_corpus, write_pcap, Label};
use avtp_ids::metrics::MetricsReport;
use avtp_ids::nn::{load_model, Architecture, Scratch, DEFAULT_INPUT};

fn main() -> anyhow::Result<()> {
    let model = match env::args().nth(1) {
        Some(p) => load_model(&fs::read(&p)?, &p)?,
        None => Architecture::UltraLight.build(DEFAULT_INPUT, 1)?,
    };
    let capture = synth_corpus(1_000, 3, 21);
    let raw = parse_pcap(&write_pcap(&capture.to_raw(), 0))?;

    let mut builder = WindowBuilder::new(DEFAULT_WINDOW)?;
    let mut scratch = Scratch::new();
    let (mut labels, mut scores) = (Vec::new(), Vec::new());
    for (i, (frame, label)) in raw.iter().zip(&capture.labels).enumerate() {
        let packet = extract_avtp(frame, *label, i as u64)?;
        if let Some(window) = builder.push(packet) {
            let score = model.infer(&window, &mut scratch)?;
            if window.label == Label::Injected && labels.last() != Some(&Label::Injected) {
                println!("window {}: first injected window, score {score:.6}", scores.len());
            }
            labels.push(window.label);
            scores.push(score as f64);
        }
    }
    let r = MetricsReport::evaluate(&labels, &scores, 0.5)?;
    println!("{} windows scored by {}", scores.len(), model.name());
    println!("{}", r.to_json_pretty());
    Ok(())
}
