//! `IMAGE`: a 3-D (or 2-D with depth 1) image block.
//!
//! Body layout is a 72-byte sub-header followed by raw pixel data:
//!
//! ```text
//! offset  size  field
//!      0     2  sub-header version (1)
//!      2     1  num_components     (1..=4, e.g. 3 for RGB)
//!      3     1  scalar_type        (see [`ScalarType`])
//!      4     1  pixel endianness   (1 = big, 2 = little)
//!      5     1  coordinate system  (1 = RAS, 2 = LPS)
//!      6     6  matrix size i,j,k  (3 x u16 voxels)
//!     12    36  axis directions    (3 x 3 x f32, mm)
//!     48    12  origin             (3 x f32, mm)
//!     60     6  subvolume offset   (3 x u16)
//!     66     6  subvolume size     (3 x u16)
//!     72     N  pixel data, index i varying fastest
//! ```
//!
//! The sub-header itself is always big-endian; the endianness byte only
//! governs the pixel samples. Pixel bytes are carried verbatim either
//! way, so round-trips are exact.

use super::{push_f32, take_f32, BodyError};

/// Size of the fixed sub-header before the pixel data.
pub const IMAGE_SUBHEADER_SIZE: usize = 72;

const SUBHEADER_VERSION: u16 = 1;

/// Pixel sample type codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarType {
    Int8 = 2,
    Uint8 = 3,
    Int16 = 4,
    Uint16 = 5,
    Int32 = 6,
    Uint32 = 7,
    Float32 = 10,
    Float64 = 11,
}

impl ScalarType {
    /// Bytes per sample.
    pub fn byte_size(self) -> usize {
        match self {
            ScalarType::Int8 | ScalarType::Uint8 => 1,
            ScalarType::Int16 | ScalarType::Uint16 => 2,
            ScalarType::Int32 | ScalarType::Uint32 | ScalarType::Float32 => 4,
            ScalarType::Float64 => 8,
        }
    }

    /// The wire code for this scalar type.
    pub fn wire_value(self) -> u8 {
        self as u8
    }

    /// Looks up a wire code.
    pub fn from_wire(value: u8) -> Option<Self> {
        Some(match value {
            2 => ScalarType::Int8,
            3 => ScalarType::Uint8,
            4 => ScalarType::Int16,
            5 => ScalarType::Uint16,
            6 => ScalarType::Int32,
            7 => ScalarType::Uint32,
            10 => ScalarType::Float32,
            11 => ScalarType::Float64,
            _ => return None,
        })
    }
}

impl std::fmt::Display for ScalarType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalarType::Int8 => "int8",
            ScalarType::Uint8 => "uint8",
            ScalarType::Int16 => "int16",
            ScalarType::Uint16 => "uint16",
            ScalarType::Int32 => "int32",
            ScalarType::Uint32 => "uint32",
            ScalarType::Float32 => "float32",
            ScalarType::Float64 => "float64",
        })
    }
}

/// Byte order of the pixel samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endianness {
    Big = 1,
    Little = 2,
}

impl Endianness {
    fn from_wire(value: u8) -> Option<Self> {
        match value {
            1 => Some(Endianness::Big),
            2 => Some(Endianness::Little),
            _ => None,
        }
    }
}

/// Anatomical coordinate convention for the axis directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateSystem {
    Ras = 1,
    Lps = 2,
}

impl CoordinateSystem {
    fn from_wire(value: u8) -> Option<Self> {
        match value {
            1 => Some(CoordinateSystem::Ras),
            2 => Some(CoordinateSystem::Lps),
            _ => None,
        }
    }
}

/// An image body. `pixel_data` covers the subvolume only, with index `i`
/// varying fastest, then `j`, then `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBody {
    pub num_components: u8,
    pub scalar_type: ScalarType,
    pub endianness: Endianness,
    pub coordinate_system: CoordinateSystem,
    /// Full volume extent in voxels, `(i, j, k)`.
    pub matrix_size: [u16; 3],
    /// Direction vectors of the i, j, k axes, scaled by voxel pitch (mm).
    pub axes: [[f32; 3]; 3],
    /// Position of the first voxel (mm).
    pub origin: [f32; 3],
    pub subvolume_offset: [u16; 3],
    pub subvolume_size: [u16; 3],
    pub pixel_data: Vec<u8>,
}

impl ImageBody {
    /// Builds a body describing a whole volume (subvolume == full matrix)
    /// with axis-aligned 1 mm voxels at the origin, big-endian samples,
    /// RAS coordinates.
    pub fn full_volume(
        matrix_size: [u16; 3],
        scalar_type: ScalarType,
        num_components: u8,
        pixel_data: Vec<u8>,
    ) -> Result<Self, BodyError> {
        let body = ImageBody {
            num_components,
            scalar_type,
            endianness: Endianness::Big,
            coordinate_system: CoordinateSystem::Ras,
            matrix_size,
            axes: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            origin: [0.0, 0.0, 0.0],
            subvolume_offset: [0, 0, 0],
            subvolume_size: matrix_size,
            pixel_data,
        };
        body.validate()?;
        Ok(body)
    }

    /// Pixel bytes the subvolume must carry.
    pub fn expected_pixel_len(&self) -> u64 {
        self.subvolume_size
            .iter()
            .map(|&d| d as u64)
            .product::<u64>()
            * self.num_components as u64
            * self.scalar_type.byte_size() as u64
    }

    fn validate(&self) -> Result<(), BodyError> {
        if !(1..=4).contains(&self.num_components) {
            return Err(BodyError::InvalidBody {
                field: "num_components",
                reason: format!("{} is outside 1..=4", self.num_components),
            });
        }
        for axis in 0..3 {
            let end = self.subvolume_offset[axis] as u32 + self.subvolume_size[axis] as u32;
            if end > self.matrix_size[axis] as u32 {
                return Err(BodyError::InvalidBody {
                    field: "subvolume_size",
                    reason: format!(
                        "axis {axis}: offset {} + size {} exceeds matrix extent {}",
                        self.subvolume_offset[axis],
                        self.subvolume_size[axis],
                        self.matrix_size[axis],
                    ),
                });
            }
        }
        let expected = self.expected_pixel_len();
        if self.pixel_data.len() as u64 != expected {
            return Err(BodyError::InvalidBody {
                field: "pixel_data",
                reason: format!(
                    "{} bytes, but the subvolume needs {expected}",
                    self.pixel_data.len()
                ),
            });
        }
        Ok(())
    }

    /// Encodes to the 72-byte sub-header plus pixel data.
    pub fn encode(&self) -> Result<Vec<u8>, BodyError> {
        self.validate()?;
        let mut buf = Vec::with_capacity(IMAGE_SUBHEADER_SIZE + self.pixel_data.len());
        buf.extend_from_slice(&SUBHEADER_VERSION.to_be_bytes());
        buf.push(self.num_components);
        buf.push(self.scalar_type.wire_value());
        buf.push(self.endianness as u8);
        buf.push(self.coordinate_system as u8);
        for &d in &self.matrix_size {
            buf.extend_from_slice(&d.to_be_bytes());
        }
        for axis in &self.axes {
            for &v in axis {
                push_f32(&mut buf, v);
            }
        }
        for &o in &self.origin {
            push_f32(&mut buf, o);
        }
        for &d in &self.subvolume_offset {
            buf.extend_from_slice(&d.to_be_bytes());
        }
        for &d in &self.subvolume_size {
            buf.extend_from_slice(&d.to_be_bytes());
        }
        debug_assert_eq!(buf.len(), IMAGE_SUBHEADER_SIZE);
        buf.extend_from_slice(&self.pixel_data);
        Ok(buf)
    }

    /// Decodes a sub-header plus exactly-matching pixel data.
    pub fn decode(data: &[u8]) -> Result<Self, BodyError> {
        if data.len() < IMAGE_SUBHEADER_SIZE {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "IMAGE",
                expected: format!("at least {IMAGE_SUBHEADER_SIZE}"),
                got: data.len(),
            });
        }
        let scalar_type = ScalarType::from_wire(data[3]).ok_or_else(|| BodyError::InvalidBody {
            field: "scalar_type",
            reason: format!("unknown code {}", data[3]),
        })?;
        let endianness = Endianness::from_wire(data[4]).ok_or_else(|| BodyError::InvalidBody {
            field: "endianness",
            reason: format!("unknown code {}", data[4]),
        })?;
        let coordinate_system =
            CoordinateSystem::from_wire(data[5]).ok_or_else(|| BodyError::InvalidBody {
                field: "coordinate_system",
                reason: format!("unknown code {}", data[5]),
            })?;
        let read_u16 =
            |offset: usize| u16::from_be_bytes(data[offset..offset + 2].try_into().unwrap());
        let matrix_size = [read_u16(6), read_u16(8), read_u16(10)];
        let mut axes = [[0f32; 3]; 3];
        for (a, axis) in axes.iter_mut().enumerate() {
            for (c, value) in axis.iter_mut().enumerate() {
                *value = take_f32(data, 12 + (a * 3 + c) * 4);
            }
        }
        let origin = [take_f32(data, 48), take_f32(data, 52), take_f32(data, 56)];
        let subvolume_offset = [read_u16(60), read_u16(62), read_u16(64)];
        let subvolume_size = [read_u16(66), read_u16(68), read_u16(70)];

        let body = ImageBody {
            num_components: data[2],
            scalar_type,
            endianness,
            coordinate_system,
            matrix_size,
            axes,
            origin,
            subvolume_offset,
            subvolume_size,
            pixel_data: data[IMAGE_SUBHEADER_SIZE..].to_vec(),
        };
        // Distinguish a length mismatch (truncated/padded pixel block) from
        // field-level violations.
        let expected = body.expected_pixel_len();
        if body.pixel_data.len() as u64 != expected {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "IMAGE",
                expected: format!("{}", IMAGE_SUBHEADER_SIZE as u64 + expected),
                got: data.len(),
            });
        }
        body.validate()?;
        Ok(body)
    }
}
