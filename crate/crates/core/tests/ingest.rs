use std::collections::HashMap;
use std::time::Duration;

use avtp_ids::ingest::{
    extract_avtp, inject_replay, parse_pcap, synth_benign, synth_benign_frames, synth_corpus,
    write_pcap, IngestError, Label, RawPacket, ReplayFrame, HEADER_LEN, SEQ_OFFSET,
    SYNTH_FRAME_LEN,
};
use pcap_file::pcap::{PcapHeader, PcapPacket, PcapWriter};
use pcap_file::{Endianness, TsResolution};
use proptest::prelude::*;

fn reference_pcap(records: &[(Duration, Vec<u8>)], endianness: Endianness, ts: TsResolution) -> Vec<u8> {
    let header = PcapHeader {
        endianness,
        ts_resolution: ts,
        ..PcapHeader::default()
    };
    let mut w = PcapWriter::with_header(Vec::new(), header).unwrap();
    for (t, data) in records {
        w.write_packet(&PcapPacket::new(*t, data.len() as u32, data)).unwrap();
    }
    w.into_writer()
}

#[test]
fn one_438_byte_record_from_reference_writer() {
    let frame = synth_benign_frames(1, 3).remove(0);
    assert_eq!(frame.len(), 438);
    for (e, ts) in [
        (Endianness::Little, TsResolution::MicroSecond),
        (Endianness::Big, TsResolution::MicroSecond),
        (Endianness::Little, TsResolution::NanoSecond),
        (Endianness::Big, TsResolution::NanoSecond),
    ] {
        let bytes = reference_pcap(&[(Duration::from_micros(1_500), frame.clone())], e, ts);
        let pkts = parse_pcap(&bytes).unwrap();
        assert_eq!(pkts.len(), 1, "{e:?} {ts:?}");
        assert_eq!(pkts[0].payload.len(), 438);
        assert_eq!(pkts[0].payload, frame);
        assert_eq!(pkts[0].timestamp_us, 0);
    }
}

#[test]
fn reference_writer_timestamps_floor_nanoseconds() {
    let f = vec![0u8; 60];
    let recs = vec![
        (Duration::new(10, 1_999), f.clone()),
        (Duration::new(10, 5_999), f.clone()),
        (Duration::new(11, 0), f),
    ];
    let bytes = reference_pcap(&recs, Endianness::Big, TsResolution::NanoSecond);
    let ts: Vec<u64> = parse_pcap(&bytes).unwrap().iter().map(|p| p.timestamp_us).collect();
    // 10 s + 1 µs is time zero
    assert_eq!(ts, vec![0, 4, 999_999]);
}

#[test]
fn header_only_and_bad_magic() {
    let empty = reference_pcap(&[], Endianness::Little, TsResolution::MicroSecond);
    assert!(parse_pcap(&empty).unwrap().is_empty());
    let mut bad = empty.clone();
    bad[..4].copy_from_slice(&[0, 0, 0, 0]);
    assert!(matches!(parse_pcap(&bad), Err(IngestError::BadMagic(0))));
}

#[test]
fn own_writer_matches_reference_writer() {
    let frames = synth_benign_frames(5, 9);
    let raw: Vec<RawPacket> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| RawPacket {
            timestamp_us: i as u64 * 125,
            payload: f.clone(),
        })
        .collect();
    let start = 1_700_000_000_000_000u64;
    let recs: Vec<_> = raw
        .iter()
        .map(|p| (Duration::from_micros(start + p.timestamp_us), p.payload.clone()))
        .collect();
    let reference = reference_pcap(&recs, Endianness::Little, TsResolution::MicroSecond);
    let ours = write_pcap(&raw, start);
    // Both carry the same records; only the snaplen field may differ.
    assert_eq!(ours.len(), reference.len());
    assert_eq!(ours[24..], reference[24..]);
    assert_eq!(parse_pcap(&ours).unwrap(), parse_pcap(&reference).unwrap());
}

#[test]
fn extract_constant_and_ascending_payloads() {
    let p = RawPacket {
        timestamp_us: 0,
        payload: vec![0xAA; 438],
    };
    assert_eq!(extract_avtp(&p, Label::Benign, 0).unwrap().header, [0xAA; 58]);

    let asc: Vec<u8> = (0..438).map(|i| (i % 256) as u8).collect();
    let p = RawPacket {
        timestamp_us: 0,
        payload: asc.clone(),
    };
    assert_eq!(extract_avtp(&p, Label::Injected, 4).unwrap().header[..], asc[..58]);

    let short = RawPacket {
        timestamp_us: 0,
        payload: vec![0; 57],
    };
    assert!(matches!(
        extract_avtp(&short, Label::Benign, 0),
        Err(IngestError::TooShort { len: 57, .. })
    ));
}

#[test]
fn synth_counter_follows_base() {
    assert!(synth_benign(0, 1).is_empty());
    assert_eq!(synth_benign(2, 7), synth_benign(2, 7));
    let s = synth_benign(100, 1);
    let c0 = s[0].header[SEQ_OFFSET];
    for (i, p) in s.iter().enumerate() {
        assert_eq!(p.header[SEQ_OFFSET], c0.wrapping_add(i as u8));
        assert_eq!(p.label, Label::Benign);
    }
}

#[test]
fn inject_positions() {
    let stream = synth_benign(10, 2);
    let frame = ReplayFrame::recorded(2, 1);
    let out = inject_replay(&stream, &frame, 5).unwrap();
    assert_eq!(out.len(), 46);
    let labels: Vec<u8> = out.iter().map(|p| p.label.as_u8()).collect();
    let expect: Vec<u8> = [vec![0; 5], vec![1; 36], vec![0; 5]].concat();
    assert_eq!(labels, expect);

    assert_eq!(inject_replay(&stream, &ReplayFrame::new(vec![]), 3).unwrap(), stream);
    let end = inject_replay(&stream, &frame, 10).unwrap();
    assert!(end[10..].iter().all(|p| p.label == Label::Injected));
    assert!(matches!(
        inject_replay(&stream, &frame, 11),
        Err(IngestError::InjectOutOfRange { at: 11, len: 10 })
    ));
}

#[test]
fn corpus_with_two_frames_has_72_injected() {
    let c = synth_corpus(1000, 2, 5);
    assert_eq!(c.len(), 1072);
    assert_eq!(c.injected_count(), 72);
    assert!(c.frames.iter().all(|f| f.len() == SYNTH_FRAME_LEN));
    assert_eq!(synth_corpus(1000, 0, 5).injected_count(), 0);
}

proptest! {
    #[test]
    fn file_length_is_headers_plus_payloads(
        lens in prop::collection::vec(14usize..600, 0..20),
        big in any::<bool>(),
    ) {
        let recs: Vec<_> = lens
            .iter()
            .enumerate()
            .map(|(i, &n)| (Duration::from_micros(i as u64 * 10), vec![i as u8; n]))
            .collect();
        let e = if big { Endianness::Big } else { Endianness::Little };
        let bytes = reference_pcap(&recs, e, TsResolution::MicroSecond);
        let pkts = parse_pcap(&bytes).unwrap();
        let total: usize = 24 + pkts.iter().map(|p| 16 + p.payload.len()).sum::<usize>();
        prop_assert_eq!(total, bytes.len());
    }

    #[test]
    fn extract_always_58_bytes(payload in prop::collection::vec(any::<u8>(), 58..700)) {
        let p = RawPacket { timestamp_us: 0, payload: payload.clone() };
        let a = extract_avtp(&p, Label::Benign, 0).unwrap();
        prop_assert_eq!(a.header.len(), HEADER_LEN);
        prop_assert_eq!(&a.header[..], &payload[..58]);
    }

    #[test]
    fn inject_preserves_benign_multiset(
        n in 0usize..60,
        frame_len in 0usize..40,
        at_frac in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let stream = synth_benign(n, seed);
        let frame = ReplayFrame::recorded_with_len(seed, 0, frame_len);
        let at = ((n as f64) * at_frac) as usize;
        let out = inject_replay(&stream, &frame, at).unwrap();
        let count = |ps: &mut dyn Iterator<Item = [u8; 58]>| {
            let mut m = HashMap::new();
            for h in ps {
                *m.entry(h).or_insert(0) += 1;
            }
            m
        };
        let before = count(&mut stream.iter().map(|p| p.header));
        let after = count(&mut out.iter().filter(|p| p.label == Label::Benign).map(|p| p.header));
        prop_assert_eq!(before, after);
        prop_assert_eq!(out.iter().filter(|p| p.label == Label::Injected).count(), frame_len);
    }

    #[test]
    fn synth_is_pure(n in 0usize..50, seed in any::<u64>()) {
        prop_assert_eq!(synth_benign(n, seed), synth_benign(n, seed));
    }
}
