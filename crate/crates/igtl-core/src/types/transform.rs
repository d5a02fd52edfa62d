//! `TRANSFORM`: a rigid pose as a 3x3 rotation plus translation.
//!
//! Body layout is twelve big-endian `f32`s (48 bytes) in column order:
//! the three rotation columns first, then the translation vector, i.e.
//! the first three columns of a 4x4 homogeneous matrix. Millimeters.

use super::{push_f32, take_f32, BodyError};

/// Exact body size in bytes.
pub const TRANSFORM_BODY_SIZE: usize = 48;

/// A rigid transform. `rotation[r][c]` is row `r`, column `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformBody {
    pub rotation: [[f32; 3]; 3],
    /// Translation in millimeters.
    pub translation: [f32; 3],
}

impl TransformBody {
    /// Identity rotation, zero translation.
    pub fn identity() -> Self {
        TransformBody {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0, 0.0, 0.0],
        }
    }

    /// Encodes to the 48-byte column-major layout.
    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(TRANSFORM_BODY_SIZE);
        for col in 0..3 {
            for row in 0..3 {
                push_f32(&mut buf, self.rotation[row][col]);
            }
        }
        for &t in &self.translation {
            push_f32(&mut buf, t);
        }
        buf
    }

    /// Decodes a 48-byte body. Matrix entries are taken as-is; whether the
    /// rotation part is orthonormal is up to the caller (see
    /// [`is_rigid`](TransformBody::is_rigid)).
    pub fn decode(data: &[u8]) -> Result<Self, BodyError> {
        if data.len() != TRANSFORM_BODY_SIZE {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "TRANSFORM",
                expected: TRANSFORM_BODY_SIZE.to_string(),
                got: data.len(),
            });
        }
        let mut rotation = [[0f32; 3]; 3];
        for (col, column) in data[..36].chunks_exact(12).enumerate() {
            for (row, cell) in column.chunks_exact(4).enumerate() {
                rotation[row][col] = f32::from_be_bytes(cell.try_into().expect("4-byte cell"));
            }
        }
        let translation = [take_f32(data, 36), take_f32(data, 40), take_f32(data, 44)];
        Ok(TransformBody {
            rotation,
            translation,
        })
    }

    /// True if the rotation block is orthonormal with determinant +1,
    /// within `tolerance` (checked in `f64`).
    pub fn is_rigid(&self, tolerance: f64) -> bool {
        let m: Vec<Vec<f64>> = self
            .rotation
            .iter()
            .map(|row| row.iter().map(|&v| v as f64).collect())
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot - expected).abs() > tolerance {
                    return false;
                }
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        (det - 1.0).abs() <= tolerance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_wire_pattern() {
        // Column-major: entries 0, 4, 8 are the diagonal.
        let encoded = TransformBody::identity().encode();
        assert_eq!(encoded.len(), TRANSFORM_BODY_SIZE);
        for (i, chunk) in encoded.chunks_exact(4).enumerate() {
            let value = f32::from_be_bytes(chunk.try_into().unwrap());
            let expected = if i == 0 || i == 4 || i == 8 { 1.0 } else { 0.0 };
            assert_eq!(value, expected, "entry {i}");
        }
    }

    #[test]
    fn translation_sits_in_the_last_column() {
        let body = TransformBody {
            translation: [10.5, -4.25, 2.0],
            ..TransformBody::identity()
        };
        let encoded = body.encode();
        assert_eq!(&encoded[36..40], &10.5f32.to_be_bytes());
        assert_eq!(&encoded[40..44], &(-4.25f32).to_be_bytes());
        assert_eq!(&encoded[44..48], &2.0f32.to_be_bytes());
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert_eq!(
            TransformBody::decode(&[0; 47]),
            Err(BodyError::BodyLengthMismatch {
                type_name: "TRANSFORM",
                expected: "48".to_string(),
                got: 47,
            })
        );
    }

    #[test]
    fn rigidity_check() {
        assert!(TransformBody::identity().is_rigid(1e-6));

        // A pure reflection has determinant -1.
        let mut reflected = TransformBody::identity();
        reflected.rotation[2][2] = -1.0;
        assert!(!reflected.is_rigid(1e-6));

        let mut scaled = TransformBody::identity();
        scaled.rotation[0][0] = 1.01;
        assert!(!scaled.is_rigid(1e-6));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(values in proptest::collection::vec(any::<f32>(), 12)) {
            let body = TransformBody {
                rotation: [
                    [values[0], values[1], values[2]],
                    [values[3], values[4], values[5]],
                    [values[6], values[7], values[8]],
                ],
                translation: [values[9], values[10], values[11]],
            };
            let decoded = TransformBody::decode(&body.encode()).unwrap();
            // Compare bit patterns so NaNs round-trip too.
            for r in 0..3 {
                for c in 0..3 {
                    prop_assert_eq!(decoded.rotation[r][c].to_bits(), body.rotation[r][c].to_bits());
                }
            }
            for i in 0..3 {
                prop_assert_eq!(decoded.translation[i].to_bits(), body.translation[i].to_bits());
            }
        }
    }
}
