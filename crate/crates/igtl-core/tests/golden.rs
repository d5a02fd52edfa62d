//! Golden wire fixtures: complete frames generated by an independent
//! encoder (separate language, bit-serial CRC), decoded here and
//! re-encoded byte-for-byte. Any layout or endianness drift in the codecs
//! fails against these files rather than against the codecs themselves.

use igtl_core::{
    frame_message, parse_frame, Body, CapabilityBody, CoordinateSystem, Endianness, ImageBody,
    PositionBody, ScalarType, StatusBody, Timestamp, TransformBody, XMarker, XMarkerListBody,
    HEADER_SIZE,
};

fn fixture(name: &str) -> Vec<u8> {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read(&path).unwrap_or_else(|e| panic!("fixture {path}: {e}"))
}

/// Parses a fixture, checks the envelope, and returns the decoded body
/// after asserting that re-encoding reproduces the file exactly.
fn decode_and_reencode(
    name: &str,
    expected_type: &str,
    expected_device: &str,
    expected_ts: Timestamp,
) -> Body {
    let raw = fixture(name);
    let (header, body_bytes) = parse_frame(&raw).unwrap();
    assert_eq!(header.version, 1);
    assert_eq!(header.type_name, expected_type);
    assert_eq!(header.device_name, expected_device);
    assert_eq!(header.timestamp, expected_ts);
    assert_eq!(raw.len(), HEADER_SIZE + header.body_size as usize);

    let body = Body::decode(&header.type_name, body_bytes).unwrap();
    let reencoded = frame_message(
        &header.type_name,
        &header.device_name,
        header.timestamp,
        &body.encode().unwrap(),
    )
    .unwrap();
    assert_eq!(reencoded, raw, "{name}: re-encoding drifted from the file");
    body
}

#[test]
fn transform_fixture() {
    let ts = Timestamp {
        seconds: 1_234_567_890,
        fraction: 0x8000_0000,
    };
    let body = decode_and_reencode("transform.igtl", "TRANSFORM", "Tracker", ts);
    assert_eq!(
        body,
        Body::Transform(TransformBody {
            translation: [10.5, -4.25, 2.0],
            ..TransformBody::identity()
        })
    );

    // The stored CRC is the independently computed one.
    let raw = fixture("transform.igtl");
    let (header, _) = parse_frame(&raw).unwrap();
    assert_eq!(header.crc, 0x91B8_7DF2_FF04_96B5);
}

#[test]
fn position_fixture() {
    let ts = Timestamp {
        seconds: 100,
        fraction: 0,
    };
    let body = decode_and_reencode("position.igtl", "POSITION", "Pointer", ts);
    assert_eq!(
        body,
        Body::Position(PositionBody {
            position: [1.5, -2.5, 3.25],
            quaternion: [0.5, -0.5, 0.5, 0.5],
        })
    );

    let raw = fixture("position.igtl");
    let (header, _) = parse_frame(&raw).unwrap();
    assert_eq!(header.crc, 0xBB8A_FA2E_B7FC_5E8A);
}

#[test]
fn status_fixture() {
    let ts = Timestamp {
        seconds: 7,
        fraction: 0,
    };
    let body = decode_and_reencode("status.igtl", "STATUS", "Device", ts);
    assert_eq!(
        body,
        Body::Status(StatusBody {
            code: 1,
            subcode: -5,
            error_name: "OK".to_string(),
            status_message: "ready".to_string(),
        })
    );
    assert_eq!(fixture("status.igtl").len(), HEADER_SIZE + 30 + 5);
}

#[test]
fn capability_fixture() {
    let ts = Timestamp {
        seconds: 8,
        fraction: 0,
    };
    let body = decode_and_reencode("capability.igtl", "CAPABILITY", "igtl", ts);
    assert_eq!(body, Body::Capability(CapabilityBody::supported()));
    assert_eq!(fixture("capability.igtl").len(), HEADER_SIZE + 6 * 12);
}

#[test]
fn image_fixture() {
    let ts = Timestamp {
        seconds: 9,
        fraction: 0,
    };
    let body = decode_and_reencode("image.igtl", "IMAGE", "Imager", ts);
    let expected = ImageBody::full_volume(
        [2, 2, 2],
        ScalarType::Uint8,
        1,
        vec![0, 1, 1, 2, 1, 2, 2, 3],
    )
    .unwrap();
    assert_eq!(expected.endianness, Endianness::Big);
    assert_eq!(expected.coordinate_system, CoordinateSystem::Ras);
    assert_eq!(body, Body::Image(expected));
    assert_eq!(fixture("image.igtl").len(), HEADER_SIZE + 72 + 8);
}

#[test]
fn xmarkerlist_fixture() {
    let ts = Timestamp {
        seconds: 11,
        fraction: 0,
    };
    let body = decode_and_reencode("xmarkerlist.igtl", "XMARKERLIST", "Markers", ts);
    assert_eq!(
        body,
        Body::XMarkerList(XMarkerListBody {
            markers: vec![
                XMarker {
                    position: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                    vector: [0.5, 0.0, -0.5],
                    marker_type: 7,
                    name: "tip".to_string(),
                },
                XMarker {
                    position: [-1.0, -2.0, -3.0, 0.0, 0.0, 0.0],
                    vector: [0.0, 1.0, 0.0],
                    marker_type: -2,
                    name: "ref".to_string(),
                },
            ],
        })
    );
    assert_eq!(fixture("xmarkerlist.igtl").len(), HEADER_SIZE + 2 * 60);
}

#[test]
fn mixed_capture_fixture_statuses() {
    use igtl_core::{CaptureReader, EntryStatus};

    let raw = fixture("capture_mixed.igtl");
    let entries: Vec<_> = CaptureReader::new(&raw[..])
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(entries.len(), 3);

    assert_eq!(entries[0].header.type_name, "BOGUSTYPE");
    assert_eq!(entries[0].header.device_name, "Mystery");
    assert_eq!(entries[0].status, EntryStatus::UnknownType);
    assert_eq!(entries[0].body, (0u8..16).collect::<Vec<_>>());

    assert!(matches!(entries[1].status, EntryStatus::Decoded(_)));

    // Third frame: stored CRC was flipped by one bit, body left intact.
    match &entries[2].status {
        EntryStatus::CrcMismatch { computed_crc } => {
            assert_eq!(*computed_crc, entries[2].header.crc ^ 0x01);
        }
        other => panic!("expected CrcMismatch, got {other:?}"),
    }
}
