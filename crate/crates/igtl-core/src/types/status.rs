//! `STATUS`: device status report.
//!
//! Body layout (at least 30 bytes):
//!
//! ```text
//! offset  size  field
//!      0     2  code          (u16; 1 means OK)
//!      2     8  subcode       (i64, device-specific detail)
//!     10    20  error_name    (printable ASCII, NUL-padded)
//!     30     N  status_message (free-length UTF-8, no terminator)
//! ```

use super::BodyError;
use crate::wire::{read_name, write_name, WireError};

/// Minimum body size: the fixed fields with an empty message.
const FIXED_SIZE: usize = 30;

/// Width of the `error_name` field.
pub const STATUS_ERROR_NAME_SIZE: usize = 20;

/// Conventional `code` value for "everything is fine".
pub const STATUS_CODE_OK: u16 = 1;

/// A status report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusBody {
    pub code: u16,
    pub subcode: i64,
    /// Short machine-readable tag, at most 20 ASCII bytes.
    pub error_name: String,
    /// Free-length human-readable text.
    pub status_message: String,
}

impl StatusBody {
    /// An OK report with the given message text.
    pub fn ok(message: impl Into<String>) -> Self {
        StatusBody {
            code: STATUS_CODE_OK,
            subcode: 0,
            error_name: "OK".to_string(),
            status_message: message.into(),
        }
    }

    /// Encodes to the fixed fields followed by the message text.
    pub fn encode(&self) -> Result<Vec<u8>, BodyError> {
        let mut buf = Vec::with_capacity(FIXED_SIZE + self.status_message.len());
        buf.extend_from_slice(&self.code.to_be_bytes());
        buf.extend_from_slice(&self.subcode.to_be_bytes());
        write_name(
            &mut buf,
            &self.error_name,
            STATUS_ERROR_NAME_SIZE,
            "error_name",
        )
        .map_err(|e| match e {
            WireError::NameTooLong { len, .. } => BodyError::InvalidBody {
                field: "error_name",
                reason: format!("{len} bytes exceeds the {STATUS_ERROR_NAME_SIZE}-byte field"),
            },
            _ => BodyError::InvalidBody {
                field: "error_name",
                reason: "must be printable ASCII".to_string(),
            },
        })?;
        buf.extend_from_slice(self.status_message.as_bytes());
        Ok(buf)
    }

    /// Decodes a body of at least 30 bytes.
    pub fn decode(data: &[u8]) -> Result<Self, BodyError> {
        if data.len() < FIXED_SIZE {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "STATUS",
                expected: format!("at least {FIXED_SIZE}"),
                got: data.len(),
            });
        }
        let code = u16::from_be_bytes(data[0..2].try_into().unwrap());
        let subcode = i64::from_be_bytes(data[2..10].try_into().unwrap());
        let error_name =
            read_name(&data[10..30], "error_name").map_err(|_| BodyError::MalformedString {
                field: "error_name",
            })?;
        let status_message = std::str::from_utf8(&data[FIXED_SIZE..])
            .map_err(|_| BodyError::MalformedString {
                field: "status_message",
            })?
            .to_string();
        Ok(StatusBody {
            code,
            subcode,
            error_name,
            status_message,
        })
    }
}
