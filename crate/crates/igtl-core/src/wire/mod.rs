//! Wire-level codec: CRC-64, the 58-byte message header, and framing.
//!
//! Everything on the wire is big-endian. A complete message is
//!
//! ```text
//! +----------------+----------------+
//! | header (58 B)  | body (N bytes) |
//! +----------------+----------------+
//! ```
//!
//! where the header records the body length and a CRC-64 over the body
//! bytes. [`frame_message`] and [`parse_frame`] operate on whole messages;
//! [`encode_header`] / [`decode_header`] handle the header alone.

mod crc;
mod frame;
mod header;

pub use crc::crc64;
pub use frame::{frame_message, parse_frame};
pub use header::{
    decode_header, decode_header_raw, encode_header, MessageHeader, Timestamp, WireError,
    DEVICE_NAME_SIZE, HEADER_SIZE, PROTOCOL_VERSION, TYPE_NAME_SIZE,
};

pub(crate) use header::{read_name, write_name};
