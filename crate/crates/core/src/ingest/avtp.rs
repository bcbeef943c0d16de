use super::{IngestError, RawPacket};

/// Bytes of each frame kept for detection.
pub const HEADER_LEN: usize = 58;

/// EtherType carried by AVTP frames.
pub const ETHERTYPE_AVTP: u16 = 0x22F0;
const ETHERTYPE_VLAN: u16 = 0x8100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    Benign = 0,
    Injected = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Benign),
            1 => Some(Label::Injected),
            _ => None,
        }
    }
}

/// The 58-byte prefix of one frame plus its ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AvtpPacket {
    pub header: [u8; HEADER_LEN],
    pub label: Label,
    pub seq_index: u64,
}

impl AvtpPacket {
    /// Builds a packet from the first [`HEADER_LEN`] bytes of `bytes`.
    pub fn from_prefix(bytes: &[u8], label: Label, seq_index: u64) -> Result<Self, IngestError> {
        let prefix = bytes.get(..HEADER_LEN).ok_or(IngestError::TooShort {
            len: bytes.len(),
            needed: HEADER_LEN,
        })?;
        let mut header = [0u8; HEADER_LEN];
        header.copy_from_slice(prefix);
        Ok(AvtpPacket {
            header,
            label,
            seq_index,
        })
    }
}

pub fn extract_avtp(p: &RawPacket, label: Label, seq: u64) -> Result<AvtpPacket, IngestError> {
    AvtpPacket::from_prefix(&p.payload, label, seq)
}

/// EtherType of an Ethernet II frame, looking through a single 802.1Q tag.
pub fn ethertype(frame: &[u8]) -> Option<u16> {
    let at = |o: usize| frame.get(o..o + 2).map(|b| u16::from_be_bytes([b[0], b[1]]));
    match at(12)? {
        ETHERTYPE_VLAN => at(16),
        t => Some(t),
    }
}

/// Parses a label sidecar: one `0` or `1` per line, line `i` labelling
/// packet `i`. Blank trailing lines and `\r\n` endings are tolerated.
pub fn parse_labels(text: &str) -> Result<Vec<Label>, IngestError> {
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match line.trim_end_matches('\r') {
            "0" => labels.push(Label::Benign),
            "1" => labels.push(Label::Injected),
            "" if text.lines().skip(i).all(|l| l.trim().is_empty()) => break,
            other => {
                return Err(IngestError::BadLabel {
                    line: i + 1,
                    text: other.to_string(),
                })
            }
        }
    }
    Ok(labels)
}

pub fn write_labels<'a>(labels: impl IntoIterator<Item = &'a Label>) -> String {
    let mut s = String::new();
    for l in labels {
        s.push(if *l == Label::Injected { '1' } else { '0' });
        s.push('\n');
    }
    s
}

/// Pairs raw frames with labels and cuts them to AVTP packets.
///
/// With `ethertype_filter` set, frames of other EtherTypes are dropped
/// together with their labels. `labels` may be `None`, meaning all benign.
pub fn label_capture(
    raw: &[RawPacket],
    labels: Option<&[Label]>,
    ethertype_filter: Option<u16>,
) -> Result<Vec<AvtpPacket>, IngestError> {
    if let Some(l) = labels {
        if l.len() != raw.len() {
            return Err(IngestError::LabelCount {
                packets: raw.len(),
                labels: l.len(),
            });
        }
    }
    let mut out = Vec::with_capacity(raw.len());
    for (i, p) in raw.iter().enumerate() {
        if let Some(want) = ethertype_filter {
            if ethertype(&p.payload) != Some(want) {
                continue;
            }
        }
        let label = labels.map_or(Label::Benign, |l| l[i]);
        out.push(extract_avtp(p, label, out.len() as u64)?);
    }
    Ok(out)
}
