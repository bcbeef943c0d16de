//! Binary interchange for feature windows.
//!
//! Little-endian layout:
//!
//! ```text
//! "AEFG" | u32 version = 1 | u32 count | u16 w | u16 cols
//! count × ( u8 label | w·cols × f32, row-major )
//! ```

use super::{FeatureError, FeatureMatrix, COLS};
use crate::ingest::Label;

pub const DUMP_MAGIC: &[u8; 4] = b"AEFG";
pub const DUMP_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDump {
    pub w: usize,
    pub windows: Vec<FeatureMatrix>,
}

/// Serializes `windows`, which must all have `w` rows.
pub fn write_dump(windows: &[FeatureMatrix], w: usize) -> Result<Vec<u8>, FeatureError> {
    if let Some(bad) = windows.iter().find(|m| m.rows() != w) {
        return Err(FeatureError::Format(format!(
            "window with {} rows in a w={w} dump",
            bad.rows()
        )));
    }
    let w16 = u16::try_from(w).map_err(|_| FeatureError::Format(format!("w={w} too large")))?;
    let count = u32::try_from(windows.len())
        .map_err(|_| FeatureError::Format("too many windows".into()))?;

    let mut out = Vec::with_capacity(HEADER_LEN + windows.len() * (1 + 4 * w * COLS));
    out.extend_from_slice(DUMP_MAGIC);
    out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&w16.to_le_bytes());
    out.extend_from_slice(&(COLS as u16).to_le_bytes());
    for m in windows {
        out.push(m.label.as_u8());
        for v in m.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_dump(bytes: &[u8]) -> Result<FeatureDump, FeatureError> {
    let fmt = |s: String| FeatureError::Format(s);
    if bytes.len() < HEADER_LEN {
        return Err(fmt(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != DUMP_MAGIC {
        return Err(fmt(format!("bad magic {:02x?}", &bytes[..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
    let version = u32_at(4);
    if version != DUMP_VERSION {
        return Err(fmt(format!("unsupported version {version}")));
    }
    let count = u32_at(8) as usize;
    let w = u16_at(12) as usize;
    let cols = u16_at(14) as usize;
    if cols != COLS {
        return Err(fmt(format!("expected {COLS} columns, header says {cols}")));
    }
    let per = 1 + 4 * w * cols;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count * per {
        return Err(fmt(format!(
            "{count} windows need {} body bytes, found {}",
            count * per,
            body.len()
        )));
    }

    let windows = body
        .chunks_exact(per)
        .enumerate()
        .map(|(i, rec)| {
            let label = Label::from_u8(rec[0])
                .ok_or_else(|| fmt(format!("window {i}: label {}", rec[0])))?;
            let values = rec[1..]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            FeatureMatrix::new(w, values, label)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureDump { w, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_windows;
    use crate::ingest::{inject_replay, synth_benign, ReplayFrame};

    #[test]
    fn round_trip() {
        let s = inject_replay(&synth_benign(30, 3), &ReplayFrame::recorded(3, 0), 20).unwrap();
        let wins = build_windows(&s, 8).unwrap();
        let bytes = write_dump(&wins, 8).unwrap();
        assert_eq!(&bytes[..4], b"AEFG");
        assert_eq!(bytes.len(), 16 + wins.len() * (1 + 4 * 8 * 116));
        let back = read_dump(&bytes).unwrap();
        assert_eq!(back.w, 8);
        assert_eq!(back.windows, wins);
    }

    #[test]
    fn rejects_damage() {
        let wins = build_windows(&synth_benign(12, 3), 4).unwrap();
        let good = write_dump(&wins, 4).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(read_dump(&bad).is_err());

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(read_dump(&bad).is_err());

        assert!(read_dump(&good[..good.len() - 1]).is_err());

        let mut bad = good.clone();
        bad[16] = 7;
        assert!(read_dump(&bad).is_err());

        assert!(write_dump(&wins, 5).is_err());
    }
}
