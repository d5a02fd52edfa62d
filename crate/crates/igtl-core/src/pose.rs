//! Conversions between the two pose representations on the wire:
//! unit quaternions (`POSITION`) and rotation matrices (`TRANSFORM`).
//!
//! All math runs in `f64` even though the wire carries `f32`, so the
//! conversion itself adds no loss beyond the final narrowing. Quaternions
//! are `(x, y, z, w)` with the scalar last, matching
//! [`PositionBody::quaternion`](crate::types::PositionBody).

use crate::types::{PositionBody, TransformBody};
use thiserror::Error;

/// Tolerance for deciding whether a matrix is a rotation: each entry of
/// `M^T M` may deviate from the identity by this much, and the
/// determinant from +1. Generous enough for matrices that went through
/// `f32` on the wire.
const ORTHONORMAL_TOLERANCE: f64 = 1e-4;

/// Errors from pose conversions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    /// The quaternion has (near-)zero norm and carries no orientation.
    #[error("cannot orient by a zero-length quaternion")]
    ZeroQuaternion,
    /// The matrix is not orthonormal with determinant +1.
    #[error("matrix is not a rotation: {reason}")]
    NotARotation { reason: String },
}

/// Converts a quaternion `(x, y, z, w)` to a rotation matrix.
///
/// The quaternion is normalised first; only a (near-)zero norm is an
/// error. For a 90-degree turn about +z, `q = (0, 0, √2/2, √2/2)`, the
/// first column of the result is `(0, 1, 0)`.
pub fn quaternion_to_rotation(q: [f64; 4]) -> Result<[[f64; 3]; 3], PoseError> {
    let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    if !norm.is_finite() || norm < 1e-12 {
        return Err(PoseError::ZeroQuaternion);
    }
    let [x, y, z, w] = [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm];
    Ok([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

/// Extracts the quaternion of a rotation matrix, scalar part
/// non-negative.
///
/// The matrix must be orthonormal with determinant +1 (within a small
/// tolerance); reflections and scaled matrices are rejected. The
/// extraction branches on the largest diagonal term so it stays
/// well-conditioned near 180-degree rotations, where the scalar part
/// vanishes. `q` and `-q` encode the same rotation; the result fixes the
/// sign by `w >= 0`, breaking the `w == 0` tie so the first non-zero
/// vector component is positive.
pub fn rotation_to_quaternion(m: [[f64; 3]; 3]) -> Result<[f64; 4], PoseError> {
    for i in 0..3 {
        for j in i..3 {
            let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if !dot.is_finite() || (dot - expected).abs() > ORTHONORMAL_TOLERANCE {
                return Err(PoseError::NotARotation {
                    reason: format!(
                        "columns {i} and {j} have dot product {dot}, expected {expected}"
                    ),
                });
            }
        }
    }
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (det - 1.0).abs() > ORTHONORMAL_TOLERANCE {
        return Err(PoseError::NotARotation {
            reason: format!("determinant is {det}, expected +1"),
        });
    }

    let trace = m[0][0] + m[1][1] + m[2][2];
    let (mut x, mut y, mut z, mut w);
    if trace > 0.0 {
        let s = (trace + 1.0).sqrt() * 2.0; // 4w
        w = 0.25 * s;
        x = (m[2][1] - m[1][2]) / s;
        y = (m[0][2] - m[2][0]) / s;
        z = (m[1][0] - m[0][1]) / s;
    } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
        let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0; // 4x
        w = (m[2][1] - m[1][2]) / s;
        x = 0.25 * s;
        y = (m[0][1] + m[1][0]) / s;
        z = (m[0][2] + m[2][0]) / s;
    } else if m[1][1] > m[2][2] {
        let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0; // 4y
        w = (m[0][2] - m[2][0]) / s;
        x = (m[0][1] + m[1][0]) / s;
        y = 0.25 * s;
        z = (m[1][2] + m[2][1]) / s;
    } else {
        let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0; // 4z
        w = (m[1][0] - m[0][1]) / s;
        x = (m[0][2] + m[2][0]) / s;
        y = (m[1][2] + m[2][1]) / s;
        z = 0.25 * s;
    }

    let norm = (x * x + y * y + z * z + w * w).sqrt();
    x /= norm;
    y /= norm;
    z /= norm;
    w /= norm;

    let flip = if w != 0.0 {
        w < 0.0
    } else {
        // 180-degree rotations: w is exactly zero for both of +-q, so pick
        // the one whose first non-zero vector component is positive.
        [x, y, z]
            .iter()
            .find(|&&c| c != 0.0)
            .is_some_and(|&c| c < 0.0)
    };
    if flip {
        Ok([-x, -y, -z, -w])
    } else {
        Ok([x, y, z, w])
    }
}

/// Re-expresses a `POSITION` body as the equivalent `TRANSFORM`: the
/// quaternion becomes the rotation block and the position is copied
/// into the translation unchanged.
pub fn position_as_transform(p: &PositionBody) -> Result<TransformBody, PoseError> {
    let q = [
        p.quaternion[0] as f64,
        p.quaternion[1] as f64,
        p.quaternion[2] as f64,
        p.quaternion[3] as f64,
    ];
    let m = quaternion_to_rotation(q)?;
    let mut rotation = [[0f32; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            rotation[r][c] = m[r][c] as f32;
        }
    }
    Ok(TransformBody {
        rotation,
        translation: p.position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// Sandwich-product oracle: rotates `v` by `q v q*` using quaternion
    /// multiplication only, no matrix.
    fn rotate_by_quaternion(q: [f64; 4], v: [f64; 3]) -> [f64; 3] {
        fn mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
            let [ax, ay, az, aw] = a;
            let [bx, by, bz, bw] = b;
            [
                aw * bx + ax * bw + ay * bz - az * by,
                aw * by - ax * bz + ay * bw + az * bx,
                aw * bz + ax * by - ay * bx + az * bw,
                aw * bw - ax * bx - ay * by - az * bz,
            ]
        }
        let conj = [-q[0], -q[1], -q[2], q[3]];
        let rotated = mul(mul(q, [v[0], v[1], v[2], 0.0]), conj);
        [rotated[0], rotated[1], rotated[2]]
    }

    fn apply(m: [[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    #[test]
    fn quarter_turn_about_z() {
        let q = [0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        let m = quaternion_to_rotation(q).unwrap();
        // First column: where the x axis lands.
        assert!((m[0][0]).abs() < 1e-12);
        assert!((m[1][0] - 1.0).abs() < 1e-12);
        assert!((m[2][0]).abs() < 1e-12);
    }

    #[test]
    fn identity_matrix_gives_identity_quaternion() {
        let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(
            rotation_to_quaternion(identity).unwrap(),
            [0.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn half_turn_has_zero_scalar_part_with_fixed_sign() {
        // 180 degrees about x: diag(1, -1, -1).
        let m = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        let q = rotation_to_quaternion(m).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-12);
        assert!(q[1].abs() < 1e-12 && q[2].abs() < 1e-12);
        assert_eq!(q[3], 0.0);
    }

    #[test]
    fn non_unit_quaternions_are_normalised() {
        let scaled = [0.0, 0.0, 3.0 * FRAC_1_SQRT_2, 3.0 * FRAC_1_SQRT_2];
        let unit = [0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        let a = quaternion_to_rotation(scaled).unwrap();
        let b = quaternion_to_rotation(unit).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert!((a[r][c] - b[r][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert_eq!(
            quaternion_to_rotation([0.0, 0.0, 0.0, 0.0]),
            Err(PoseError::ZeroQuaternion)
        );
        assert_eq!(
            quaternion_to_rotation([0.0, 0.0, 1e-13, 0.0]),
            Err(PoseError::ZeroQuaternion)
        );

        // Reflection: determinant -1.
        let reflection = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(matches!(
            rotation_to_quaternion(reflection),
            Err(PoseError::NotARotation { .. })
        ));

        // Uniform scale: columns are not unit length.
        let scaled = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        assert!(matches!(
            rotation_to_quaternion(scaled),
            Err(PoseError::NotARotation { .. })
        ));
    }

    #[test]
    fn position_body_converts_with_exact_translation() {
        let p = PositionBody {
            position: [1.5, -2.5, 3.25],
            quaternion: [0.5, -0.5, 0.5, 0.5],
        };
        let t = position_as_transform(&p).unwrap();
        assert_eq!(t.translation, p.position);
        assert!(t.is_rigid(1e-6));

        let zero = PositionBody {
            position: [0.0; 3],
            quaternion: [0.0; 4],
        };
        assert_eq!(position_as_transform(&zero), Err(PoseError::ZeroQuaternion));
    }

    /// Strategy: quaternions safely away from zero norm, then normalised.
    fn unit_quaternion() -> impl Strategy<Value = [f64; 4]> {
        [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0].prop_filter_map(
            "norm too small",
            |q| {
                let norm = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
                (norm > 0.1).then(|| [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm])
            },
        )
    }

    proptest! {
        #[test]
        fn matrix_agrees_with_sandwich_product(q in unit_quaternion(), v in [-100.0f64..100.0, -100.0f64..100.0, -100.0f64..100.0]) {
            let m = quaternion_to_rotation(q).unwrap();
            let via_matrix = apply(m, v);
            let via_quaternion = rotate_by_quaternion(q, v);
            for i in 0..3 {
                prop_assert!((via_matrix[i] - via_quaternion[i]).abs() < 1e-9,
                    "component {}: {} vs {}", i, via_matrix[i], via_quaternion[i]);
            }
        }

        #[test]
        fn round_trip_recovers_the_rotation(q in unit_quaternion()) {
            let m = quaternion_to_rotation(q).unwrap();
            let back = rotation_to_quaternion(m).unwrap();
            // q and -q are the same rotation, so compare via |dot| == 1.
            let dot: f64 = (0..4).map(|i| q[i] * back[i]).sum();
            prop_assert!((dot.abs() - 1.0).abs() < 1e-9, "dot = {}", dot);
            prop_assert!(back[3] >= 0.0, "scalar part must be canonical, got {:?}", back);
        }
    }
}
