//! Capture files: a raw concatenation of framed messages, read back for
//! offline inspection and replay.
//!
//! The reader applies the same per-message tolerance as a live session —
//! unknown types, foreign versions, CRC mismatches, and malformed bodies
//! are reported entry by entry, not treated as file corruption — but a
//! file that ends mid-message is an error, since nothing after that point
//! can be trusted.

use std::io::{self, Read};

use thiserror::Error;

use crate::types::{is_known_type, Body, BodyError};
use crate::wire::{
    crc64, decode_header_raw, MessageHeader, WireError, HEADER_SIZE, PROTOCOL_VERSION,
};

/// Errors that stop a capture read.
#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("capture ends {got} bytes into a {HEADER_SIZE}-byte header at offset {offset}")]
    TruncatedHeader { offset: u64, got: usize },
    #[error("capture ends {got} bytes into a {expected}-byte body at offset {offset}")]
    TruncatedBody {
        offset: u64,
        expected: u64,
        got: usize,
    },
    #[error("unparseable header at offset {offset}: {source}")]
    MalformedHeader { offset: u64, source: WireError },
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Per-entry verdict, mirroring live-session outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryStatus {
    /// Known type, CRC verified, body decoded.
    Decoded(Body),
    /// Type name outside the known set.
    UnknownType,
    /// Header carries a protocol revision this crate does not speak.
    UnsupportedVersion,
    /// Stored CRC disagrees with the body bytes.
    CrcMismatch { computed_crc: u64 },
    /// Known type and good CRC, but the body violates its layout.
    MalformedBody { error: BodyError },
}

/// One message read from a capture.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureEntry {
    /// Byte offset of the entry's header in the file.
    pub offset: u64,
    pub header: MessageHeader,
    /// Raw body bytes, present whatever the status (hex dumps want them).
    pub body: Vec<u8>,
    pub status: EntryStatus,
}

/// Streaming reader over concatenated frames.
#[derive(Debug)]
pub struct CaptureReader<R> {
    reader: R,
    offset: u64,
}

impl<R: Read> CaptureReader<R> {
    pub fn new(reader: R) -> Self {
        CaptureReader { reader, offset: 0 }
    }

    /// Reads the next entry, or `None` at a clean end of file.
    pub fn next_entry(&mut self) -> Result<Option<CaptureEntry>, CaptureError> {
        let offset = self.offset;
        let mut header_buf = [0u8; HEADER_SIZE];
        match read_up_to(&mut self.reader, &mut header_buf)? {
            0 => return Ok(None),
            got if got < HEADER_SIZE => return Err(CaptureError::TruncatedHeader { offset, got }),
            _ => {}
        }
        self.offset += HEADER_SIZE as u64;

        let header = decode_header_raw(&header_buf)
            .map_err(|source| CaptureError::MalformedHeader { offset, source })?;

        let mut body = vec![0u8; header.body_size as usize];
        let got = read_up_to(&mut self.reader, &mut body)?;
        if (got as u64) < header.body_size {
            return Err(CaptureError::TruncatedBody {
                offset,
                expected: header.body_size,
                got,
            });
        }
        self.offset += header.body_size;

        let status = if header.version != PROTOCOL_VERSION {
            EntryStatus::UnsupportedVersion
        } else if !is_known_type(&header.type_name) {
            EntryStatus::UnknownType
        } else {
            let computed_crc = crc64(&body);
            if computed_crc != header.crc {
                EntryStatus::CrcMismatch { computed_crc }
            } else {
                match Body::decode(&header.type_name, &body) {
                    Ok(decoded) => EntryStatus::Decoded(decoded),
                    Err(error) => EntryStatus::MalformedBody { error },
                }
            }
        };

        Ok(Some(CaptureEntry {
            offset,
            header,
            body,
            status,
        }))
    }
}

impl<R: Read> Iterator for CaptureReader<R> {
    type Item = Result<CaptureEntry, CaptureError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_entry().transpose()
    }
}

/// Reads until `buf` is full or EOF; returns how many bytes landed.
fn read_up_to<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize, io::Error> {
    let mut got = 0;
    while got < buf.len() {
        match reader.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(got)
}
