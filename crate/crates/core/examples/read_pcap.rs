//! Parses a capture and prints the first AVTP headers.
//!
//! cargo run --example read_pcap -- [capture.pcap]
//! Without an argument a small synthetic capture is parsed from memory.

use std::{env, fs};

use avtp_ids::ingest::{
    ethertype, label_capture, parse_pcap, synth_corpus, write_pcap, ETHERTYPE_AVTP, SEQ_OFFSET,
};

fn main() -> anyhow::Result<()> {
    let bytes = match env::args().nth(1) {
        Some(path) => fs::read(path)?,
        None => write_pcap(&synth_corpus(64, 1, 3).to_raw(), 0),
    };
    let raw = parse_pcap(&bytes)?;
    let avtp = raw.iter().filter(|p| ethertype(&p.payload) == Some(ETHERTYPE_AVTP)).count();
    println!("{} records, {avtp} AVTP", raw.len());

    let packets = label_capture(&raw, None, Some(ETHERTYPE_AVTP))?;
    println!("{:>5} {:>10} {:>4}  first 24 header bytes", "seq", "time_us", "ctr");
    for (p, r) in packets.iter().zip(&raw).take(12) {
        let head: String = p.header[..24].iter().map(|b| format!("{b:02x}")).collect();
        println!(
            "{:>5} {:>10} {:>4}  {head}",
            p.seq_index, r.timestamp_us, p.header[SEQ_OFFSET]
        );
    }
    Ok(())
}
