//! `POSITION`: a point plus orientation quaternion.
//!
//! Body layout is seven big-endian `f32`s (28 bytes): position `x, y, z`
//! in millimeters, then the unit quaternion `qx, qy, qz, qw`. The scalar
//! part comes last on the wire, matching the `(x, y, z, w)` component
//! order used throughout this crate.

use super::{push_f32, take_f32, BodyError};

/// Exact body size in bytes.
pub const POSITION_BODY_SIZE: usize = 28;

/// A position/orientation sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionBody {
    /// Position in millimeters.
    pub position: [f32; 3],
    /// Orientation quaternion `(x, y, z, w)`.
    pub quaternion: [f32; 4],
}

impl PositionBody {
    /// Encodes to the 28-byte layout. The quaternion components must be
    /// finite; unit norm is the sender's promise, not re-derived here, so
    /// received bodies can be re-encoded bit-for-bit.
    pub fn encode(&self) -> Result<Vec<u8>, BodyError> {
        if self.quaternion.iter().any(|q| !q.is_finite()) {
            return Err(BodyError::InvalidBody {
                field: "quaternion",
                reason: "components must be finite".to_string(),
            });
        }
        let mut buf = Vec::with_capacity(POSITION_BODY_SIZE);
        for &p in &self.position {
            push_f32(&mut buf, p);
        }
        for &q in &self.quaternion {
            push_f32(&mut buf, q);
        }
        Ok(buf)
    }

    /// Decodes a 28-byte body.
    pub fn decode(data: &[u8]) -> Result<Self, BodyError> {
        if data.len() != POSITION_BODY_SIZE {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "POSITION",
                expected: POSITION_BODY_SIZE.to_string(),
                got: data.len(),
            });
        }
        Ok(PositionBody {
            position: [take_f32(data, 0), take_f32(data, 4), take_f32(data, 8)],
            quaternion: [
                take_f32(data, 12),
                take_f32(data, 16),
                take_f32(data, 20),
                take_f32(data, 24),
            ],
        })
    }
}
