//! Whole-message framing: header + body in one buffer.

use super::crc::crc64;
use super::header::{
    decode_header, encode_header, MessageHeader, Timestamp, WireError, HEADER_SIZE,
    PROTOCOL_VERSION,
};

/// Builds a complete wire frame around `body`, computing `body_size` and
/// the body CRC.
pub fn frame_message(
    type_name: &str,
    device_name: &str,
    timestamp: Timestamp,
    body: &[u8],
) -> Result<Vec<u8>, WireError> {
    let header = MessageHeader {
        version: PROTOCOL_VERSION,
        type_name: type_name.to_string(),
        device_name: device_name.to_string(),
        timestamp,
        body_size: body.len() as u64,
        crc: crc64(body),
    };
    let mut frame = Vec::with_capacity(HEADER_SIZE + body.len());
    frame.extend_from_slice(&encode_header(&header)?);
    frame.extend_from_slice(body);
    Ok(frame)
}

/// Splits one frame into its header and body slice.
///
/// `data` must hold at least the full frame; bytes past the body (for
/// example the next message in a capture) are ignored.
pub fn parse_frame(data: &[u8]) -> Result<(MessageHeader, &[u8]), WireError> {
    let header = decode_header(data)?;
    let body_end = HEADER_SIZE as u64 + header.body_size;
    if (data.len() as u64) < body_end {
        return Err(WireError::TruncatedBody {
            expected: header.body_size,
            got: data.len() - HEADER_SIZE,
        });
    }
    let body = &data[HEADER_SIZE..HEADER_SIZE + header.body_size as usize];
    Ok((header, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bodiless_frame_is_just_a_header() {
        let frame = frame_message("GET_STATUS", "console", Timestamp::UNSET, &[]).unwrap();
        assert_eq!(frame.len(), HEADER_SIZE);
        let (header, body) = parse_frame(&frame).unwrap();
        assert_eq!(header.body_size, 0);
        assert_eq!(header.crc, 0);
        assert!(body.is_empty());
    }

    #[test]
    fn truncated_body_is_reported() {
        let frame = frame_message("STATUS", "dev", Timestamp::UNSET, &[1, 2, 3, 4]).unwrap();
        assert_eq!(
            parse_frame(&frame[..frame.len() - 1]),
            Err(WireError::TruncatedBody {
                expected: 4,
                got: 3
            })
        );
    }

    #[test]
    fn trailing_bytes_are_left_alone() {
        let mut stream = frame_message("STATUS", "dev", Timestamp::UNSET, &[9; 5]).unwrap();
        stream.extend_from_slice(&[0xAA; 7]);
        let (header, body) = parse_frame(&stream).unwrap();
        assert_eq!(header.body_size, 5);
        assert_eq!(body, &[9; 5]);
    }

    proptest! {
        #[test]
        fn frame_round_trips(
            type_name in "[ -~]{1,12}",
            device_name in "[ -~]{0,20}",
            seconds in any::<u32>(),
            fraction in any::<u32>(),
            body in proptest::collection::vec(any::<u8>(), 0..256),
        ) {
            let ts = Timestamp { seconds, fraction };
            let frame = frame_message(&type_name, &device_name, ts, &body).unwrap();
            prop_assert_eq!(frame.len(), HEADER_SIZE + body.len());

            let (header, parsed_body) = parse_frame(&frame).unwrap();
            prop_assert_eq!(header.type_name, type_name);
            prop_assert_eq!(header.device_name, device_name);
            prop_assert_eq!(header.timestamp, ts);
            prop_assert_eq!(header.body_size, body.len() as u64);
            prop_assert_eq!(header.crc, crc64(&body));
            prop_assert_eq!(parsed_body, body.as_slice());
        }
    }
}
