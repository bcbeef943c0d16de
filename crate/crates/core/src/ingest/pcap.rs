//! Classic libpcap capture files.
//!
//! Both byte orders and both timestamp resolutions (microsecond magic
//! `0xA1B2C3D4`, nanosecond magic `0xA1B23C4D`) are accepted. Nanosecond
//! timestamps are floored to microseconds. PCAPNG is not supported.
//!
//! See <https://wiki.wireshark.org/Development/LibpcapFileFormat>.

use super::IngestError;

pub const MAGIC_USEC: u32 = 0xA1B2_C3D4;
pub const MAGIC_NSEC: u32 = 0xA1B2_3C4D;

pub const GLOBAL_HEADER_LEN: usize = 24;
pub const RECORD_HEADER_LEN: usize = 16;

/// Minimum Ethernet header length.
pub const MIN_FRAME_LEN: usize = 14;

/// Link type written by [`write_pcap`]: Ethernet.
pub const LINKTYPE_ETHERNET: u32 = 1;

/// One captured frame as it appeared on the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPacket {
    /// Microseconds since the first record of the capture.
    pub timestamp_us: u64,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endian {
    Little,
    Big,
}

impl Endian {
    fn u32(self, b: &[u8]) -> u32 {
        let a = [b[0], b[1], b[2], b[3]];
        match self {
            Endian::Little => u32::from_le_bytes(a),
            Endian::Big => u32::from_be_bytes(a),
        }
    }
}

/// Global header fields that matter for decoding records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcapHeader {
    pub nanosecond: bool,
    pub snaplen: u32,
    pub linktype: u32,
    endian: Endian,
}

impl PcapHeader {
    pub fn is_big_endian(&self) -> bool {
        self.endian == Endian::Big
    }
}

pub fn parse_header(bytes: &[u8]) -> Result<PcapHeader, IngestError> {
    if bytes.len() < 4 {
        return Err(IngestError::BadMagic(0));
    }
    let le = u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    let (endian, nanosecond) = match le {
        MAGIC_USEC => (Endian::Little, false),
        MAGIC_NSEC => (Endian::Little, true),
        m if m.swap_bytes() == MAGIC_USEC => (Endian::Big, false),
        m if m.swap_bytes() == MAGIC_NSEC => (Endian::Big, true),
        m => return Err(IngestError::BadMagic(m)),
    };
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(IngestError::TruncatedHeader);
    }
    Ok(PcapHeader {
        nanosecond,
        snaplen: endian.u32(&bytes[16..20]),
        linktype: endian.u32(&bytes[20..24]),
        endian,
    })
}

/// Parses a whole capture held in memory.
///
/// Records are returned in file order with their bytes untouched. The
/// first record defines time zero.
pub fn parse_pcap(bytes: &[u8]) -> Result<Vec<RawPacket>, IngestError> {
    let header = parse_header(bytes)?;
    let mut packets = Vec::new();
    let mut offset = GLOBAL_HEADER_LEN;
    let mut origin: Option<u64> = None;
    let mut last_us = 0u64;

    while offset < bytes.len() {
        let remaining = bytes.len() - offset;
        if remaining < RECORD_HEADER_LEN {
            return Err(IngestError::TruncatedRecord {
                index: packets.len(),
                needed: RECORD_HEADER_LEN,
                available: remaining,
            });
        }
        let rec = &bytes[offset..offset + RECORD_HEADER_LEN];
        let ts_sec = header.endian.u32(&rec[0..4]) as u64;
        let ts_frac = header.endian.u32(&rec[4..8]) as u64;
        let incl_len = header.endian.u32(&rec[8..12]) as usize;
        offset += RECORD_HEADER_LEN;

        let available = bytes.len() - offset;
        if incl_len > available {
            return Err(IngestError::TruncatedRecord {
                index: packets.len(),
                needed: incl_len,
                available,
            });
        }
        let payload = bytes[offset..offset + incl_len].to_vec();
        offset += incl_len;

        let frac_us = if header.nanosecond { ts_frac / 1000 } else { ts_frac };
        let absolute = ts_sec * 1_000_000 + frac_us;
        let base = *origin.get_or_insert(absolute);
        // Out-of-order records are clamped so timestamps never go backwards.
        let ts = absolute.saturating_sub(base).max(last_us);
        last_us = ts;

        packets.push(RawPacket { timestamp_us: ts, payload });
    }
    Ok(packets)
}

/// Writes a little-endian microsecond capture with Ethernet link type.
///
/// `start_us` is added to every timestamp so the file carries a plausible
/// absolute time; [`parse_pcap`] removes it again.
pub fn write_pcap(packets: &[RawPacket], start_us: u64) -> Vec<u8> {
    let body: usize = packets
        .iter()
        .map(|p| RECORD_HEADER_LEN + p.payload.len())
        .sum();
    let snaplen = packets
        .iter()
        .map(|p| p.payload.len() as u32)
        .max()
        .unwrap_or(0)
        .max(65_535);

    let mut out = Vec::with_capacity(GLOBAL_HEADER_LEN + body);
    out.extend_from_slice(&MAGIC_USEC.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&snaplen.to_le_bytes());
    out.extend_from_slice(&LINKTYPE_ETHERNET.to_le_bytes());

    for p in packets {
        let t = start_us + p.timestamp_us;
        let len = p.payload.len() as u32;
        out.extend_from_slice(&((t / 1_000_000) as u32).to_le_bytes());
        out.extend_from_slice(&((t % 1_000_000) as u32).to_le_bytes());
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&p.payload);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, big: bool) -> Vec<u8> {
        let mut h = Vec::new();
        let put = |h: &mut Vec<u8>, v: u32| {
            if big {
                h.extend_from_slice(&v.to_be_bytes())
            } else {
                h.extend_from_slice(&v.to_le_bytes())
            }
        };
        put(&mut h, magic);
        put(&mut h, if big { 0x0002_0004 } else { 0x0004_0002 });
        put(&mut h, 0);
        put(&mut h, 0);
        put(&mut h, 65_535);
        put(&mut h, 1);
        h
    }

    fn record(h: &mut Vec<u8>, big: bool, sec: u32, frac: u32, data: &[u8]) {
        for v in [sec, frac, data.len() as u32, data.len() as u32] {
            if big {
                h.extend_from_slice(&v.to_be_bytes())
            } else {
                h.extend_from_slice(&v.to_le_bytes())
            }
        }
        h.extend_from_slice(data);
    }

    #[test]
    fn header_only_is_empty() {
        let h = header(MAGIC_USEC, false);
        assert!(parse_pcap(&h).unwrap().is_empty());
    }

    #[test]
    fn zero_magic_is_rejected() {
        let mut h = header(MAGIC_USEC, false);
        h[..4].copy_from_slice(&[0, 0, 0, 0]);
        assert!(matches!(parse_pcap(&h), Err(IngestError::BadMagic(0))));
    }

    #[test]
    fn big_endian_nanosecond_floors_to_micros() {
        let mut f = header(MAGIC_NSEC, true);
        record(&mut f, true, 10, 999, &[1u8; 60]);
        record(&mut f, true, 10, 2_500_999, &[2u8; 60]);
        let pk = parse_pcap(&f).unwrap();
        assert!(parse_header(&f).unwrap().is_big_endian());
        assert_eq!(pk.len(), 2);
        assert_eq!(pk[0].timestamp_us, 0);
        assert_eq!(pk[1].timestamp_us, 2_500);
        assert_eq!(pk[1].payload, vec![2u8; 60]);
    }

    #[test]
    fn truncated_record_body() {
        let mut f = header(MAGIC_USEC, false);
        record(&mut f, false, 0, 0, &[0u8; 100]);
        f.truncate(f.len() - 1);
        match parse_pcap(&f) {
            Err(IngestError::TruncatedRecord { index, needed, available }) => {
                assert_eq!((index, needed, available), (0, 100, 99));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_record_header() {
        let mut f = header(MAGIC_USEC, false);
        f.extend_from_slice(&[0u8; 7]);
        assert!(matches!(
            parse_pcap(&f),
            Err(IngestError::TruncatedRecord { needed: 16, available: 7, .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let packets: Vec<RawPacket> = (0..5u64)
            .map(|i| RawPacket {
                timestamp_us: i * 125,
                payload: vec![i as u8; 64 + i as usize],
            })
            .collect();
        let file = write_pcap(&packets, 1_700_000_000_000_000);
        assert_eq!(parse_pcap(&file).unwrap(), packets);
    }
}
