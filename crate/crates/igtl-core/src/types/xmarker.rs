//! `XMARKERLIST`: a user-defined extension type carrying fiducial
//! markers.
//!
//! Extension types use names outside the base set; this one packs a list
//! of fixed 60-byte marker records:
//!
//! ```text
//! offset  size  field
//!      0    24  position  (6 x f32: two anchor points, mm)
//!     24    12  direction (3 x f32 unit vector)
//!     36     4  marker_type (i32)
//!     40    20  name      (printable ASCII, NUL-padded)
//! ```

use super::{push_f32, take_f32, BodyError};
use crate::wire::{read_name, write_name, WireError};

/// Size of one packed marker record.
pub const XMARKER_RECORD_SIZE: usize = 60;

const NAME_SIZE: usize = 20;

/// One fiducial marker.
#[derive(Debug, Clone, PartialEq)]
pub struct XMarker {
    /// Two anchor points, `(x1, y1, z1, x2, y2, z2)` in millimeters.
    pub position: [f32; 6],
    /// Direction unit vector.
    pub vector: [f32; 3],
    /// Device-specific marker class.
    pub marker_type: i32,
    /// Label, at most 20 ASCII bytes.
    pub name: String,
}

/// A list of markers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct XMarkerListBody {
    pub markers: Vec<XMarker>,
}

impl XMarkerListBody {
    /// Encodes to `60 * markers.len()` bytes.
    pub fn encode(&self) -> Result<Vec<u8>, BodyError> {
        let mut buf = Vec::with_capacity(self.markers.len() * XMARKER_RECORD_SIZE);
        for marker in &self.markers {
            for &p in &marker.position {
                push_f32(&mut buf, p);
            }
            for &v in &marker.vector {
                push_f32(&mut buf, v);
            }
            buf.extend_from_slice(&marker.marker_type.to_be_bytes());
            write_name(&mut buf, &marker.name, NAME_SIZE, "marker name").map_err(|e| match e {
                WireError::NameTooLong { len, .. } => BodyError::InvalidBody {
                    field: "name",
                    reason: format!("{len} bytes exceeds the {NAME_SIZE}-byte field"),
                },
                _ => BodyError::InvalidBody {
                    field: "name",
                    reason: "must be printable ASCII".to_string(),
                },
            })?;
        }
        Ok(buf)
    }

    /// Decodes a body whose length is a multiple of 60.
    pub fn decode(data: &[u8]) -> Result<Self, BodyError> {
        if !data.len().is_multiple_of(XMARKER_RECORD_SIZE) {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "XMARKERLIST",
                expected: "a multiple of 60".to_string(),
                got: data.len(),
            });
        }
        let markers = data
            .chunks_exact(XMARKER_RECORD_SIZE)
            .map(|record| {
                let mut position = [0f32; 6];
                for (i, p) in position.iter_mut().enumerate() {
                    *p = take_f32(record, i * 4);
                }
                let vector = [
                    take_f32(record, 24),
                    take_f32(record, 28),
                    take_f32(record, 32),
                ];
                let marker_type = i32::from_be_bytes(record[36..40].try_into().unwrap());
                let name = read_name(&record[40..60], "marker name").map_err(|_| {
                    BodyError::MalformedString {
                        field: "marker name",
                    }
                })?;
                Ok(XMarker {
                    position,
                    vector,
                    marker_type,
                    name,
                })
            })
            .collect::<Result<Vec<_>, BodyError>>()?;
        Ok(XMarkerListBody { markers })
    }
}
