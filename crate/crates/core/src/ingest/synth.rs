//! Deterministic stand-in for recorded AVTP video traffic and replay
//! injection.
//!
//! Synthetic frames are 438 bytes long. The 58-byte prefix is laid out as:
//!
//! ```text
//!  0..18  VLAN-tagged Ethernet header, EtherType 0x22F0   (fixed)
//! 18..20  AVTP subtype (CVF) and sv/version/tv flags       (fixed)
//! 20      sequence_num, +1 per packet                      (counter)
//! 21      tu                                               (fixed)
//! 22..30  stream_id                                        (fixed)
//! 30..34  avtp_timestamp, big-endian, +TIMESTAMP_STRIDE    (counter)
//! 34..58  drawn from the seeded generator
//! ```
//!
//! The remaining 380 bytes are generator output as well. Everything is a
//! pure function of `(n, seed)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::avtp::{AvtpPacket, Label, HEADER_LEN};
use super::{IngestError, RawPacket};

pub const SYNTH_FRAME_LEN: usize = 438;
pub const SEQ_OFFSET: usize = 20;
pub const TIMESTAMP_OFFSET: usize = 30;
/// AVTP presentation-time advance per packet, in nanoseconds (8 kHz class A).
pub const TIMESTAMP_STRIDE: u32 = 125_000;
/// Capture-time spacing between synthetic packets.
pub const PACKET_INTERVAL_US: u64 = 125;
/// Packets per replayed video frame.
pub const REPLAY_FRAME_PACKETS: usize = 36;

const PREFIX: [u8; 30] = [
    0x91, 0xE0, 0xF0, 0x00, 0xFE, 0x00, // dst: AVTP multicast
    0x02, 0x1B, 0xC5, 0x00, 0x00, 0x01, // src
    0x81, 0x00, 0x60, 0x02, // 802.1Q, PCP 3, VID 2
    0x22, 0xF0, // AVTP
    0x03, 0x81, // subtype CVF, sv=1 tv=1
    0x00, // sequence_num placeholder
    0x00, // tu
    0x02, 0x1B, 0xC5, 0x00, 0x00, 0x01, 0x00, 0x01, // stream_id
];

// Mixed into the seed when recording the frame an attacker replays.
const REPLAY_SEED_SALT: u64 = 0x5EED_F00D_0000_0000;

/// Generator state for one synthetic stream.
pub struct BenignStream {
    rng: ChaCha8Rng,
    seq: u8,
    timestamp: u32,
}

impl BenignStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = rng.gen::<u8>();
        let timestamp = rng.gen::<u32>();
        BenignStream { rng, seq, timestamp }
    }

    /// Sequence counter of the next packet.
    pub fn next_seq(&self) -> u8 {
        self.seq
    }

    pub fn next_frame(&mut self) -> Vec<u8> {
        let mut frame = vec![0u8; SYNTH_FRAME_LEN];
        frame[..PREFIX.len()].copy_from_slice(&PREFIX);
        frame[SEQ_OFFSET] = self.seq;
        frame[TIMESTAMP_OFFSET..TIMESTAMP_OFFSET + 4].copy_from_slice(&self.timestamp.to_be_bytes());
        self.rng.fill_bytes(&mut frame[TIMESTAMP_OFFSET + 4..]);
        self.seq = self.seq.wrapping_add(1);
        self.timestamp = self.timestamp.wrapping_add(TIMESTAMP_STRIDE);
        frame
    }
}

/// `n` full-length benign frames.
pub fn synth_benign_frames(n: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut s = BenignStream::new(seed);
    (0..n).map(|_| s.next_frame()).collect()
}

pub fn synth_benign(n: usize, seed: u64) -> Vec<AvtpPacket> {
    synth_benign_frames(n, seed)
        .iter()
        .enumerate()
        .map(|(i, f)| {
            AvtpPacket::from_prefix(f, Label::Benign, i as u64)
                .expect("synthetic frames are longer than the header")
        })
        .collect()
}

/// An ordered burst of previously captured frames re-sent by an attacker.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplayFrame {
    pub packets: Vec<Vec<u8>>,
}

impl ReplayFrame {
    pub fn new(packets: Vec<Vec<u8>>) -> Self {
        ReplayFrame { packets }
    }

    /// A [`REPLAY_FRAME_PACKETS`]-packet frame recorded from a separate
    /// synthetic stream. `index` selects which recording, so repeated
    /// attacks can replay different frames.
    pub fn recorded(seed: u64, index: u64) -> Self {
        Self::recorded_with_len(seed, index, REPLAY_FRAME_PACKETS)
    }

    pub fn recorded_with_len(seed: u64, index: u64, len: usize) -> Self {
        let s = seed ^ REPLAY_SEED_SALT ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        ReplayFrame::new(synth_benign_frames(len, s))
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    fn check(&self) -> Result<(), IngestError> {
        match self.packets.iter().position(|p| p.len() < HEADER_LEN) {
            Some(index) => Err(IngestError::FrameTooShortPacket {
                index,
                len: self.packets[index].len(),
            }),
            None => Ok(()),
        }
    }
}

/// Inserts `frame` at position `at`, labelling its packets injected and
/// renumbering `seq_index` to stay contiguous.
pub fn inject_replay(
    stream: &[AvtpPacket],
    frame: &ReplayFrame,
    at: usize,
) -> Result<Vec<AvtpPacket>, IngestError> {
    if at > stream.len() {
        return Err(IngestError::InjectOutOfRange {
            at,
            len: stream.len(),
        });
    }
    frame.check()?;
    let injected = frame.packets.iter().map(|p| {
        AvtpPacket::from_prefix(p, Label::Injected, 0).expect("checked above")
    });
    let out = stream[..at]
        .iter()
        .cloned()
        .chain(injected)
        .chain(stream[at..].iter().cloned())
        .enumerate()
        .map(|(i, mut p)| {
            p.seq_index = i as u64;
            p
        })
        .collect();
    Ok(out)
}

/// Full-length frames with per-frame labels, ready to be written as a
/// capture plus label sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledCapture {
    pub frames: Vec<Vec<u8>>,
    pub labels: Vec<Label>,
}

impl LabeledCapture {
    pub fn benign(frames: Vec<Vec<u8>>) -> Self {
        let labels = vec![Label::Benign; frames.len()];
        LabeledCapture { frames, labels }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn inject(&mut self, frame: &ReplayFrame, at: usize) -> Result<(), IngestError> {
        if at > self.frames.len() {
            return Err(IngestError::InjectOutOfRange {
                at,
                len: self.frames.len(),
            });
        }
        frame.check()?;
        self.frames.splice(at..at, frame.packets.iter().cloned());
        self.labels
            .splice(at..at, std::iter::repeat(Label::Injected).take(frame.len()));
        Ok(())
    }

    pub fn injected_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Injected).count()
    }

    /// Raw packets spaced [`PACKET_INTERVAL_US`] apart.
    pub fn to_raw(&self) -> Vec<RawPacket> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| RawPacket {
                timestamp_us: i as u64 * PACKET_INTERVAL_US,
                payload: f.clone(),
            })
            .collect()
    }
}

/// `n_benign` benign frames with `attacks` replayed frames spread evenly
/// through the stream. Injection points sit at `k·n_benign/(attacks+1)`
/// in benign-packet terms for `k = 1..=attacks`.
pub fn synth_corpus(n_benign: usize, attacks: usize, seed: u64) -> LabeledCapture {
    let mut cap = LabeledCapture::benign(synth_benign_frames(n_benign, seed));
    for k in 1..=attacks {
        let frame = ReplayFrame::recorded(seed, k as u64);
        let benign_pos = k * n_benign / (attacks + 1);
        let at = benign_pos + (k - 1) * REPLAY_FRAME_PACKETS;
        cap.inject(&frame, at).expect("position within stream");
    }
    cap
}
