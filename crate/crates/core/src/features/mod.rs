//! Delta features over sliding packet windows.
//!
//! Each packet after the first contributes one row: the byte-wise
//! difference against its predecessor modulo 256, split into high and low
//! nibbles (58 bytes → 116 columns) and scaled to `[0, 1]`. A window of `w`
//! consecutive rows becomes one model input, labelled by its newest packet.

mod dump;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ingest::{AvtpPacket, Label, HEADER_LEN};

pub use dump::{read_dump, write_dump, FeatureDump, DUMP_MAGIC, DUMP_VERSION};

/// Columns per row: two nibbles per header byte.
pub const COLS: usize = 2 * HEADER_LEN;
pub const DEFAULT_WINDOW: usize = 44;
pub const MIN_WINDOW: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("delta inputs must both be {HEADER_LEN} bytes (got {prev} and {curr})")]
    LengthMismatch { prev: usize, curr: usize },
    #[error("stream of {len} packets is too short for window {w} (needs {w} + 1)")]
    StreamTooShort { len: usize, w: usize },
    #[error("window {0} is smaller than the minimum of {MIN_WINDOW}")]
    WindowTooSmall(usize),
    #[error("nibble value {value} at index {index} outside 0..=15")]
    OutOfRange { index: usize, value: u8 },
    #[error("feature dump: {0}")]
    Format(String),
}

/// Per-byte change between two consecutive headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaVector(pub [u8; HEADER_LEN]);

pub fn delta(prev: &[u8], curr: &[u8]) -> Result<DeltaVector, FeatureError> {
    if prev.len() != HEADER_LEN || curr.len() != HEADER_LEN {
        return Err(FeatureError::LengthMismatch {
            prev: prev.len(),
            curr: curr.len(),
        });
    }
    let mut d = [0u8; HEADER_LEN];
    for (k, out) in d.iter_mut().enumerate() {
        *out = curr[k].wrapping_sub(prev[k]);
    }
    Ok(DeltaVector(d))
}

/// High nibble at `2k`, low nibble at `2k + 1`.
pub fn expand_nibbles(d: &DeltaVector) -> [u8; COLS] {
    let mut out = [0u8; COLS];
    for (k, b) in d.0.iter().enumerate() {
        out[2 * k] = b >> 4;
        out[2 * k + 1] = b & 0x0F;
    }
    out
}

pub fn normalize(raw: &[u8]) -> Result<Vec<f32>, FeatureError> {
    raw.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 15 {
                Err(FeatureError::OutOfRange { index, value })
            } else {
                Ok(value as f32 / 15.0)
            }
        })
        .collect()
}

fn packet_row(prev: &AvtpPacket, curr: &AvtpPacket) -> [f32; COLS] {
    let d = delta(&prev.header, &curr.header).expect("headers are fixed length");
    let mut row = [0f32; COLS];
    for (o, n) in row.iter_mut().zip(expand_nibbles(&d)) {
        *o = n as f32 / 15.0;
    }
    row
}

/// A `rows × COLS` row-major model input with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    values: Vec<f32>,
    pub label: Label,
}

impl FeatureMatrix {
    /// Wraps already-normalized values; every value must lie in `[0, 1]`.
    pub fn new(rows: usize, values: Vec<f32>, label: Label) -> Result<Self, FeatureError> {
        if values.len() != rows * COLS {
            return Err(FeatureError::Format(format!(
                "{} values for a {rows}x{COLS} matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(FeatureError::Format(format!(
                "value {} at {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(FeatureMatrix {
            rows,
            values,
            label,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        COLS
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.values[r * COLS..(r + 1) * COLS]
    }
}

/// Builds every stride-1 window of `w` delta rows over `stream`.
///
/// `N` packets give `N - 1` delta rows and `N - w` windows; window `t`
/// covers packets `t+1 ..= t+w` and carries the label of packet `t+w`.
pub fn build_windows(stream: &[AvtpPacket], w: usize) -> Result<Vec<FeatureMatrix>, FeatureError> {
    if w < MIN_WINDOW {
        return Err(FeatureError::WindowTooSmall(w));
    }
    if stream.len() < w + 1 {
        return Err(FeatureError::StreamTooShort {
            len: stream.len(),
            w,
        });
    }
    let rows: Vec<f32> = stream
        .windows(2)
        .flat_map(|p| packet_row(&p[0], &p[1]))
        .collect();
    let windows = (0..stream.len() - w)
        .map(|t| FeatureMatrix {
            rows: w,
            values: rows[t * COLS..(t + w) * COLS].to_vec(),
            label: stream[t + w].label,
        })
        .collect();
    Ok(windows)
}

/// `count` benign-labelled windows of independent uniform nibbles, for
/// calibration and timing where real traffic is not needed.
pub fn random_windows(count: usize, rows: usize, seed: u64) -> Vec<FeatureMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| FeatureMatrix {
            rows,
            values: (0..rows * COLS)
                .map(|_| rng.gen_range(0u8..16) as f32 / 15.0)
                .collect(),
            label: Label::Benign,
        })
        .collect()
}

/// Incremental form of [`build_windows`] for packet-at-a-time detection.
///
/// After the first `w + 1` packets, every push yields the window whose
/// newest packet is the one just pushed.
pub struct WindowBuilder {
    w: usize,
    prev: Option<AvtpPacket>,
    rows: VecDeque<[f32; COLS]>,
}

impl WindowBuilder {
    pub fn new(w: usize) -> Result<Self, FeatureError> {
        if w < MIN_WINDOW {
            return Err(FeatureError::WindowTooSmall(w));
        }
        Ok(WindowBuilder {
            w,
            prev: None,
            rows: VecDeque::with_capacity(w + 1),
        })
    }

    pub fn push(&mut self, packet: AvtpPacket) -> Option<FeatureMatrix> {
        let label = packet.label;
        let Some(prev) = self.prev.replace(packet) else {
            return None;
        };
        self.rows
            .push_back(packet_row(&prev, self.prev.as_ref().expect("just set")));
        if self.rows.len() > self.w {
            self.rows.pop_front();
        }
        if self.rows.len() == self.w {
            let values = self.rows.iter().flatten().copied().collect();
            return Some(FeatureMatrix {
                rows: self.w,
                values,
                label,
            });
        }
        None
    }
}
