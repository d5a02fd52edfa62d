//! Typed message bodies and their exact binary codecs.
//!
//! Each body type encodes to the big-endian layout its `type_name`
//! promises and decodes back bit-for-bit: `decode(encode(b)) == b` for
//! every valid body. Pose fields are stored as `f32` exactly as they
//! travel on the wire; higher-precision math lives in [`crate::pose`].

mod capability;
mod image;
mod position;
mod status;
mod transform;
mod xmarker;

pub use capability::CapabilityBody;
pub use image::{CoordinateSystem, Endianness, ImageBody, ScalarType, IMAGE_SUBHEADER_SIZE};
pub use position::{PositionBody, POSITION_BODY_SIZE};
pub use status::{StatusBody, STATUS_CODE_OK, STATUS_ERROR_NAME_SIZE};
pub use transform::{TransformBody, TRANSFORM_BODY_SIZE};
pub use xmarker::{XMarker, XMarkerListBody, XMARKER_RECORD_SIZE};

use crate::wire::{MessageHeader, Timestamp};
use thiserror::Error;

/// Message type names this crate can decode.
pub const KNOWN_TYPE_NAMES: [&str; 6] = [
    "TRANSFORM",
    "POSITION",
    "STATUS",
    "CAPABILITY",
    "IMAGE",
    "XMARKERLIST",
];

/// True if `name` is one of [`KNOWN_TYPE_NAMES`].
pub fn is_known_type(name: &str) -> bool {
    KNOWN_TYPE_NAMES.contains(&name)
}

/// Errors from body codecs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BodyError {
    /// A field value violates the type's constraints.
    #[error("invalid {field}: {reason}")]
    InvalidBody { field: &'static str, reason: String },
    /// The body length does not match the type's layout.
    #[error("{type_name} body is {got} bytes; expected {expected}")]
    BodyLengthMismatch {
        type_name: &'static str,
        expected: String,
        got: usize,
    },
    /// An embedded string field is not valid NUL-padded printable ASCII
    /// (or, for free-length text, not valid UTF-8).
    #[error("{field} string field is malformed")]
    MalformedString { field: &'static str },
    /// The type name has no decoder in this crate.
    #[error("{name:?} is not a known message type")]
    UnknownType { name: String },
}

pub(crate) fn push_f32(buf: &mut Vec<u8>, value: f32) {
    buf.extend_from_slice(&value.to_be_bytes());
}

/// Reads the big-endian `f32` at `offset`. Callers validate lengths first.
pub(crate) fn take_f32(data: &[u8], offset: usize) -> f32 {
    f32::from_be_bytes(data[offset..offset + 4].try_into().unwrap())
}

/// A decoded message body, tagged by wire type.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Transform(TransformBody),
    Position(PositionBody),
    Status(StatusBody),
    Capability(CapabilityBody),
    Image(ImageBody),
    XMarkerList(XMarkerListBody),
}

impl Body {
    /// The wire `type_name` for this body.
    pub fn type_name(&self) -> &'static str {
        match self {
            Body::Transform(_) => "TRANSFORM",
            Body::Position(_) => "POSITION",
            Body::Status(_) => "STATUS",
            Body::Capability(_) => "CAPABILITY",
            Body::Image(_) => "IMAGE",
            Body::XMarkerList(_) => "XMARKERLIST",
        }
    }

    /// Encodes the body into its exact wire bytes.
    pub fn encode(&self) -> Result<Vec<u8>, BodyError> {
        match self {
            Body::Transform(b) => Ok(b.encode()),
            Body::Position(b) => b.encode(),
            Body::Status(b) => b.encode(),
            Body::Capability(b) => b.encode(),
            Body::Image(b) => b.encode(),
            Body::XMarkerList(b) => b.encode(),
        }
    }

    /// Decodes `data` according to `type_name`.
    ///
    /// Returns [`BodyError::UnknownType`] for names outside
    /// [`KNOWN_TYPE_NAMES`]; the session layer turns that into a skip
    /// rather than an error.
    pub fn decode(type_name: &str, data: &[u8]) -> Result<Body, BodyError> {
        match type_name {
            "TRANSFORM" => TransformBody::decode(data).map(Body::Transform),
            "POSITION" => PositionBody::decode(data).map(Body::Position),
            "STATUS" => StatusBody::decode(data).map(Body::Status),
            "CAPABILITY" => CapabilityBody::decode(data).map(Body::Capability),
            "IMAGE" => ImageBody::decode(data).map(Body::Image),
            "XMARKERLIST" => XMarkerListBody::decode(data).map(Body::XMarkerList),
            other => Err(BodyError::UnknownType {
                name: other.to_string(),
            }),
        }
    }
}

/// A complete message: header plus decoded body.
///
/// The header's `body_size` and `crc` always describe the encoded body,
/// so a received message can be re-sent verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub header: MessageHeader,
    pub body: Body,
}

impl Message {
    /// Builds a message around `body`, encoding it once to fill in the
    /// header's length and CRC fields.
    pub fn new(
        device_name: impl Into<String>,
        timestamp: Timestamp,
        body: Body,
    ) -> Result<Self, BodyError> {
        let encoded = body.encode()?;
        let header = MessageHeader::new(body.type_name(), device_name, timestamp, &encoded);
        Ok(Message { header, body })
    }
}
