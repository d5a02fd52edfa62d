//! `CAPABILITY`: the list of message types an endpoint can handle.
//!
//! Body layout is a packed array of 12-byte NUL-padded type names — the
//! same field format as the header's `type_name` — so the body size is
//! always a multiple of 12.

use super::BodyError;
use crate::wire::{read_name, write_name, TYPE_NAME_SIZE};

/// Advertised message types.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CapabilityBody {
    pub types: Vec<String>,
}

impl CapabilityBody {
    /// A capability list naming every type this crate decodes.
    pub fn supported() -> Self {
        CapabilityBody {
            types: super::KNOWN_TYPE_NAMES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    /// Encodes to `12 * types.len()` bytes.
    pub fn encode(&self) -> Result<Vec<u8>, BodyError> {
        let mut buf = Vec::with_capacity(self.types.len() * TYPE_NAME_SIZE);
        for name in &self.types {
            write_name(&mut buf, name, TYPE_NAME_SIZE, "capability entry").map_err(|_| {
                BodyError::InvalidBody {
                    field: "types",
                    reason: format!("{name:?} is not a type name of at most 12 ASCII bytes"),
                }
            })?;
        }
        Ok(buf)
    }

    /// Decodes a body whose length is a multiple of 12.
    pub fn decode(data: &[u8]) -> Result<Self, BodyError> {
        if !data.len().is_multiple_of(TYPE_NAME_SIZE) {
            return Err(BodyError::BodyLengthMismatch {
                type_name: "CAPABILITY",
                expected: "a multiple of 12".to_string(),
                got: data.len(),
            });
        }
        let types = data
            .chunks_exact(TYPE_NAME_SIZE)
            .map(|chunk| {
                read_name(chunk, "capability entry").map_err(|_| BodyError::MalformedString {
                    field: "capability entry",
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CapabilityBody { types })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supported_list_round_trips() {
        let body = CapabilityBody::supported();
        let encoded = body.encode().unwrap();
        assert_eq!(encoded.len(), 6 * TYPE_NAME_SIZE);
        assert_eq!(&encoded[0..9], b"TRANSFORM");
        assert_eq!(CapabilityBody::decode(&encoded).unwrap(), body);
    }

    #[test]
    fn empty_list_is_an_empty_body() {
        let body = CapabilityBody { types: vec![] };
        let encoded = body.encode().unwrap();
        assert!(encoded.is_empty());
        assert_eq!(CapabilityBody::decode(&encoded).unwrap(), body);
    }

    #[test]
    fn ragged_length_is_rejected() {
        assert!(matches!(
            CapabilityBody::decode(&[0; 13]),
            Err(BodyError::BodyLengthMismatch {
                type_name: "CAPABILITY",
                got: 13,
                ..
            })
        ));
    }

    #[test]
    fn oversized_entry_is_rejected() {
        let body = CapabilityBody {
            types: vec!["THIRTEENCHARS".to_string()],
        };
        assert!(matches!(
            body.encode(),
            Err(BodyError::InvalidBody { field: "types", .. })
        ));
    }
}
