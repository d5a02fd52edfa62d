//! The fixed 58-byte message header.
//!
//! Layout, all fields big-endian:
//!
//! ```text
//! offset  size  field
//!      0     2  version        (1 for this protocol revision)
//!      2    12  type_name      (printable ASCII, NUL-padded)
//!     14    20  device_name    (printable ASCII, NUL-padded)
//!     34     4  timestamp      seconds since the Unix epoch
//!     38     4  timestamp      fraction, units of 2^-32 s
//!     42     8  body_size      bytes of body following the header
//!     50     8  crc            CRC-64 over the body bytes
//! ```

use thiserror::Error;

/// Size of the encoded header in bytes.
pub const HEADER_SIZE: usize = 58;
/// Protocol revision spoken by this crate.
pub const PROTOCOL_VERSION: u16 = 1;
/// Width of the `type_name` field.
pub const TYPE_NAME_SIZE: usize = 12;
/// Width of the `device_name` field.
pub const DEVICE_NAME_SIZE: usize = 20;

const FRACTION_UNITS: f64 = 4_294_967_296.0; // 2^32

/// Errors from header and frame codecs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WireError {
    /// A name does not fit its fixed-width field.
    #[error("{field} is {len} bytes; the field holds at most {max}")]
    NameTooLong {
        field: &'static str,
        len: usize,
        max: usize,
    },
    /// A name holds bytes outside printable ASCII.
    #[error("{field} contains non-printable or non-ASCII bytes")]
    NonAscii { field: &'static str },
    /// Fewer than [`HEADER_SIZE`] bytes where a header was expected.
    #[error("header requires {HEADER_SIZE} bytes, got {got}")]
    TruncatedHeader { got: usize },
    /// A frame ends before the body length promised by its header.
    #[error("frame body requires {expected} bytes, got {got}")]
    TruncatedBody { expected: u64, got: usize },
    /// The header's version field is not [`PROTOCOL_VERSION`].
    #[error("unsupported protocol version {version}")]
    UnsupportedVersion { version: u16 },
    /// A received name field is not NUL-padded printable ASCII.
    #[error("{field} field is not NUL-padded printable ASCII")]
    MalformedName { field: &'static str },
    /// A timestamp cannot be represented in 32.32 fixed point.
    #[error("timestamp {value} is outside [0, 2^32) seconds")]
    OutOfRange { value: f64 },
}

/// Fixed-point 32.32 timestamp: seconds since the Unix epoch plus a
/// fraction in units of 2^-32 seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp {
    pub seconds: u32,
    pub fraction: u32,
}

impl Timestamp {
    /// The zero timestamp, used when a sender has no clock to report.
    pub const UNSET: Timestamp = Timestamp {
        seconds: 0,
        fraction: 0,
    };

    /// Converts seconds-since-epoch to fixed point, rounding the fraction
    /// to the nearest 2^-32 step. The round-trip through [`to_seconds`]
    /// stays within 2^-32 of the input.
    ///
    /// [`to_seconds`]: Timestamp::to_seconds
    pub fn from_seconds(value: f64) -> Result<Self, WireError> {
        if !value.is_finite() || !(0.0..FRACTION_UNITS).contains(&value) {
            return Err(WireError::OutOfRange { value });
        }
        let whole = value.floor();
        let frac = ((value - whole) * FRACTION_UNITS).round();
        let mut seconds = whole as u32;
        let fraction = if frac >= FRACTION_UNITS {
            // Rounding carried into the next second.
            seconds = seconds
                .checked_add(1)
                .ok_or(WireError::OutOfRange { value })?;
            0
        } else {
            frac as u32
        };
        Ok(Timestamp { seconds, fraction })
    }

    /// Converts back to floating-point seconds since the epoch.
    pub fn to_seconds(self) -> f64 {
        self.seconds as f64 + self.fraction as f64 / FRACTION_UNITS
    }

    /// Reads the system clock. Falls back to [`Timestamp::UNSET`] if the
    /// clock sits before the epoch.
    pub fn now() -> Self {
        match std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH) {
            Ok(elapsed) => Timestamp {
                seconds: elapsed.as_secs() as u32,
                fraction: (((elapsed.subsec_nanos() as u64) << 32) / 1_000_000_000) as u32,
            },
            Err(_) => Timestamp::UNSET,
        }
    }
}

/// Decoded form of the 58-byte header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageHeader {
    pub version: u16,
    pub type_name: String,
    pub device_name: String,
    pub timestamp: Timestamp,
    /// Length in bytes of the body that follows.
    pub body_size: u64,
    /// CRC-64 over the body bytes.
    pub crc: u64,
}

impl MessageHeader {
    /// Builds a version-1 header for `body`, filling in its length and CRC.
    pub fn new(
        type_name: impl Into<String>,
        device_name: impl Into<String>,
        timestamp: Timestamp,
        body: &[u8],
    ) -> Self {
        MessageHeader {
            version: PROTOCOL_VERSION,
            type_name: type_name.into(),
            device_name: device_name.into(),
            timestamp,
            body_size: body.len() as u64,
            crc: super::crc64(body),
        }
    }
}

/// Appends `name` to `buf` NUL-padded to `width`, validating length and
/// character set.
pub(crate) fn write_name(
    buf: &mut Vec<u8>,
    name: &str,
    width: usize,
    field: &'static str,
) -> Result<(), WireError> {
    let bytes = name.as_bytes();
    if bytes.len() > width {
        return Err(WireError::NameTooLong {
            field,
            len: bytes.len(),
            max: width,
        });
    }
    if !bytes.iter().all(|&b| (0x20..=0x7E).contains(&b)) {
        return Err(WireError::NonAscii { field });
    }
    buf.extend_from_slice(bytes);
    buf.resize(buf.len() + (width - bytes.len()), 0);
    Ok(())
}

/// Reads a NUL-padded name field, rejecting embedded NULs and bytes
/// outside printable ASCII.
pub(crate) fn read_name(bytes: &[u8], field: &'static str) -> Result<String, WireError> {
    let end = bytes.iter().position(|&b| b == 0).unwrap_or(bytes.len());
    let (name, padding) = bytes.split_at(end);
    if !padding.iter().all(|&b| b == 0) {
        return Err(WireError::MalformedName { field });
    }
    if !name.iter().all(|&b| (0x20..=0x7E).contains(&b)) {
        return Err(WireError::MalformedName { field });
    }
    Ok(String::from_utf8(name.to_vec()).expect("printable ASCII is valid UTF-8"))
}

/// Encodes `header` into its 58-byte wire form.
pub fn encode_header(header: &MessageHeader) -> Result<[u8; HEADER_SIZE], WireError> {
    let mut buf = Vec::with_capacity(HEADER_SIZE);
    buf.extend_from_slice(&header.version.to_be_bytes());
    write_name(&mut buf, &header.type_name, TYPE_NAME_SIZE, "type_name")?;
    write_name(
        &mut buf,
        &header.device_name,
        DEVICE_NAME_SIZE,
        "device_name",
    )?;
    buf.extend_from_slice(&header.timestamp.seconds.to_be_bytes());
    buf.extend_from_slice(&header.timestamp.fraction.to_be_bytes());
    buf.extend_from_slice(&header.body_size.to_be_bytes());
    buf.extend_from_slice(&header.crc.to_be_bytes());
    Ok(buf.try_into().expect("header layout totals 58 bytes"))
}

/// Decodes a header, requiring [`PROTOCOL_VERSION`].
pub fn decode_header(data: &[u8]) -> Result<MessageHeader, WireError> {
    let header = decode_header_raw(data)?;
    if header.version != PROTOCOL_VERSION {
        return Err(WireError::UnsupportedVersion {
            version: header.version,
        });
    }
    Ok(header)
}

/// Decodes a header without checking the version field, so callers can
/// inspect (and skip past) messages from protocol revisions this crate
/// does not speak.
pub fn decode_header_raw(data: &[u8]) -> Result<MessageHeader, WireError> {
    if data.len() < HEADER_SIZE {
        return Err(WireError::TruncatedHeader { got: data.len() });
    }
    let version = u16::from_be_bytes([data[0], data[1]]);
    let type_name = read_name(&data[2..14], "type_name")?;
    let device_name = read_name(&data[14..34], "device_name")?;
    let seconds = u32::from_be_bytes(data[34..38].try_into().unwrap());
    let fraction = u32::from_be_bytes(data[38..42].try_into().unwrap());
    let body_size = u64::from_be_bytes(data[42..50].try_into().unwrap());
    let crc = u64::from_be_bytes(data[50..58].try_into().unwrap());
    Ok(MessageHeader {
        version,
        type_name,
        device_name,
        timestamp: Timestamp { seconds, fraction },
        body_size,
        crc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_header() -> MessageHeader {
        MessageHeader {
            version: 1,
            type_name: "TRANSFORM".to_string(),
            device_name: "Tracker".to_string(),
            timestamp: Timestamp {
                seconds: 1_234_567_890,
                fraction: 0x8000_0000,
            },
            body_size: 48,
            crc: 0x91B8_7DF2_FF04_96B5,
        }
    }

    #[test]
    fn golden_header_bytes() {
        let mut expected = Vec::with_capacity(HEADER_SIZE);
        expected.extend_from_slice(&[0x00, 0x01]);
        expected.extend_from_slice(b"TRANSFORM\0\0\0");
        expected.extend_from_slice(b"Tracker\0\0\0\0\0\0\0\0\0\0\0\0\0");
        expected.extend_from_slice(&[0x49, 0x96, 0x02, 0xD2]); // 1234567890
        expected.extend_from_slice(&[0x80, 0x00, 0x00, 0x00]); // half a second
        expected.extend_from_slice(&48u64.to_be_bytes());
        expected.extend_from_slice(&0x91B8_7DF2_FF04_96B5u64.to_be_bytes());
        assert_eq!(expected.len(), HEADER_SIZE);

        let encoded = encode_header(&sample_header()).unwrap();
        assert_eq!(encoded.as_slice(), expected.as_slice());
        assert_eq!(decode_header(&encoded).unwrap(), sample_header());
    }

    #[test]
    fn name_bounds_are_enforced() {
        let mut header = sample_header();
        header.type_name = "THIRTEENCHARS".to_string(); // 13 bytes
        assert_eq!(
            encode_header(&header),
            Err(WireError::NameTooLong {
                field: "type_name",
                len: 13,
                max: TYPE_NAME_SIZE,
            })
        );

        let mut header = sample_header();
        header.device_name = "tr\u{00e4}cker".to_string();
        assert!(matches!(
            encode_header(&header),
            Err(WireError::NonAscii {
                field: "device_name"
            })
        ));
    }

    #[test]
    fn twelve_byte_type_name_uses_the_full_field() {
        let mut header = sample_header();
        header.type_name = "XMARKERLIST2".to_string(); // exactly 12 bytes
        let encoded = encode_header(&header).unwrap();
        assert_eq!(&encoded[2..14], b"XMARKERLIST2");
        assert_eq!(decode_header(&encoded).unwrap().type_name, "XMARKERLIST2");
    }

    #[test]
    fn version_gate() {
        let mut encoded = encode_header(&sample_header()).unwrap();
        encoded[0] = 0x00;
        encoded[1] = 0x03;
        assert_eq!(
            decode_header(&encoded),
            Err(WireError::UnsupportedVersion { version: 3 })
        );
        // The raw decoder hands back the header for skip logic instead.
        assert_eq!(decode_header_raw(&encoded).unwrap().version, 3);
    }

    #[test]
    fn truncated_and_malformed_headers_are_rejected() {
        let encoded = encode_header(&sample_header()).unwrap();
        assert_eq!(
            decode_header(&encoded[..57]),
            Err(WireError::TruncatedHeader { got: 57 })
        );

        // A byte after the NUL padding starts.
        let mut resumed = encoded;
        resumed[13] = b'X'; // type_name is "TRANSFORM\0\0X"
        assert_eq!(
            decode_header(&resumed),
            Err(WireError::MalformedName { field: "type_name" })
        );
    }

    #[test]
    fn timestamp_fixed_point_examples() {
        let ts = Timestamp::from_seconds(0.5).unwrap();
        assert_eq!(
            ts,
            Timestamp {
                seconds: 0,
                fraction: 0x8000_0000
            }
        );
        assert_eq!(ts.to_seconds(), 0.5);

        // Rounding can carry into the seconds field.
        let nearly_two = 2.0 - 2f64.powi(-52);
        let ts = Timestamp::from_seconds(nearly_two).unwrap();
        assert_eq!(
            ts,
            Timestamp {
                seconds: 2,
                fraction: 0
            }
        );
        assert!((ts.to_seconds() - nearly_two).abs() < 2f64.powi(-32));
    }

    #[test]
    fn timestamp_range_is_enforced() {
        for bad in [
            -1.0,
            -f64::MIN_POSITIVE,
            4_294_967_296.0,
            f64::NAN,
            f64::INFINITY,
        ] {
            assert!(matches!(
                Timestamp::from_seconds(bad),
                Err(WireError::OutOfRange { .. })
            ));
        }
        // The largest f64 below 2^32 still converts.
        let top = f64::from_bits(4_294_967_296.0f64.to_bits() - 1);
        assert!(Timestamp::from_seconds(top).is_ok());
    }

    proptest! {
        #[test]
        fn header_round_trips(
            type_name in "[ -~]{0,12}",
            device_name in "[ -~]{0,20}",
            seconds in any::<u32>(),
            fraction in any::<u32>(),
            body_size in any::<u64>(),
            crc in any::<u64>(),
        ) {
            let header = MessageHeader {
                version: PROTOCOL_VERSION,
                type_name,
                device_name,
                timestamp: Timestamp { seconds, fraction },
                body_size,
                crc,
            };
            let encoded = encode_header(&header).unwrap();
            prop_assert_eq!(decode_header(&encoded).unwrap(), header);
        }

        #[test]
        fn timestamp_round_trip_error_is_below_one_tick(value in 0f64..4_294_967_296.0) {
            let ts = Timestamp::from_seconds(value).unwrap();
            let back = ts.to_seconds();
            prop_assert!((back - value).abs() < 2f64.powi(-32),
                "{} -> {:?} -> {} drifted", value, ts, back);
        }
    }
}
