//! Getting labelled AVTP packets into memory: PCAP captures with label
//! sidecars, or synthetic streams with injected replay frames.

mod avtp;
pub mod pcap;
mod synth;

use thiserror::Error;

pub use avtp::{
    ethertype, extract_avtp, label_capture, parse_labels, write_labels, AvtpPacket, Label,
    ETHERTYPE_AVTP, HEADER_LEN,
};
pub use pcap::{parse_pcap, write_pcap, RawPacket};
pub use synth::{
    inject_replay, synth_benign, synth_benign_frames, synth_corpus, BenignStream,
    LabeledCapture, ReplayFrame, PACKET_INTERVAL_US, REPLAY_FRAME_PACKETS, SEQ_OFFSET,
    SYNTH_FRAME_LEN, TIMESTAMP_OFFSET, TIMESTAMP_STRIDE,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("not a pcap file (magic {0:#010x})")]
    BadMagic(u32),
    #[error("pcap global header truncated")]
    TruncatedHeader,
    #[error("record {index} truncated: needs {needed} bytes, {available} remain")]
    TruncatedRecord {
        index: usize,
        needed: usize,
        available: usize,
    },
    #[error("packet of {len} bytes is shorter than the {needed}-byte header")]
    TooShort { len: usize, needed: usize },
    #[error("replay frame packet {index} has only {len} bytes")]
    FrameTooShortPacket { index: usize, len: usize },
    #[error("injection point {at} beyond stream length {len}")]
    InjectOutOfRange { at: usize, len: usize },
    #[error("label file line {line}: expected 0 or 1, got {text:?}")]
    BadLabel { line: usize, text: String },
    #[error("{labels} labels for {packets} packets")]
    LabelCount { packets: usize, labels: usize },
}
