//! CRC-64 body checksum.
//!
//! The header carries a CRC-64 computed over the body bytes with the
//! ECMA-182 parameters: polynomial `0x42F0E1EBA9EA3693`, initial register
//! zero, no input or output reflection, no final XOR. The check value for
//! `b"123456789"` is `0x6C40DF5F0B497347`.

const POLY: u64 = 0x42F0_E1EB_A9EA_3693;

/// Byte-at-a-time lookup table, generated at compile time by clocking the
/// shift register eight bits for every possible top byte.
const TABLE: [u64; 256] = {
    let mut table = [0u64; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u64) << 56;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & (1 << 63) != 0 {
                (crc << 1) ^ POLY
            } else {
                crc << 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
};

/// Computes the CRC-64 of `data`.
///
/// An empty slice yields zero, which is also the value the header carries
/// for bodiless messages.
pub fn crc64(data: &[u8]) -> u64 {
    let mut crc = 0u64;
    for &byte in data {
        let index = ((crc >> 56) as u8 ^ byte) as usize;
        crc = TABLE[index] ^ (crc << 8);
    }
    crc
}
