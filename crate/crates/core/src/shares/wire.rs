//! Canonical byte layout for share bundles, stable for diffing
//! transcripts across runs.
//!
//! Header: magic (4 bytes), version (u16 LE), m (u32 LE), δ (IEEE-754
//! f64 LE; -1.0 when the functionality takes no δ), party id (u8).
//! Body: bit fields packed LSB-first in declared field order — coin
//! share matrix row-major, then the defense share fields in bundle
//! order — with no padding between fields; the final byte is
//! zero-padded.

use super::bits::{BitMatrix, BitPacker, BitString, BitUnpacker};
use super::{ThreeShareBundle, TwoShareBundle};
use thiserror::Error;

pub const MAGIC_TWO: &[u8; 4] = b"FFS2";
pub const MAGIC_THREE: &[u8; 4] = b"FFS3";
pub const WIRE_VERSION: u16 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum WireError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u16),
    #[error("truncated payload")]
    Truncated,
    #[error("bad field value: {0}")]
    BadField(&'static str),
}

fn push_header(out: &mut Vec<u8>, magic: &[u8; 4], m: u32, delta: f64, party: u8) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&WIRE_VERSION.to_le_bytes());
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&delta.to_le_bytes());
    out.push(party);
}

struct Header {
    m: u32,
    delta: f64,
    party: u8,
    body_at: usize,
}

fn read_header(bytes: &[u8], magic: &[u8; 4]) -> Result<Header, WireError> {
    if bytes.len() < 19 {
        return Err(WireError::Truncated);
    }
    if &bytes[0..4] != magic {
        return Err(WireError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != WIRE_VERSION {
        return Err(WireError::BadVersion(version));
    }
    let m = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
    let delta = f64::from_le_bytes(bytes[10..18].try_into().unwrap());
    let party = bytes[18];
    Ok(Header {
        m,
        delta,
        party,
        body_at: 19,
    })
}

impl TwoShareBundle {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        push_header(&mut out, MAGIC_TWO, self.m, self.delta, self.party);
        let mut p = BitPacker::default();
        self.coin_shares.pack_into(&mut p);
        self.defense_shares[0].pack_into(&mut p);
        self.defense_shares[1].pack_into(&mut p);
        out.extend_from_slice(&p.finish());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let h = read_header(bytes, MAGIC_TWO)?;
        if h.m == 0 {
            return Err(WireError::BadField("m"));
        }
        let width = super::CoinEncoding::new(h.m).width();
        let mut u = BitUnpacker::new(&bytes[h.body_at..]);
        let coin_shares =
            BitMatrix::unpack_from(&mut u, h.m as usize, width).ok_or(WireError::Truncated)?;
        let d0 =
            BitString::unpack_from(&mut u, h.m as usize + 1).ok_or(WireError::Truncated)?;
        let d1 =
            BitString::unpack_from(&mut u, h.m as usize + 1).ok_or(WireError::Truncated)?;
        let b = Self {
            party: h.party,
            m: h.m,
            delta: h.delta,
            coin_shares,
            defense_shares: [d0, d1],
        };
        b.validate().map_err(|_| WireError::BadField("bundle"))?;
        Ok(b)
    }
}

impl ThreeShareBundle {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        // the three-party functionality takes no δ parameter
        push_header(&mut out, MAGIC_THREE, self.m, -1.0, self.party);
        let mut p = BitPacker::default();
        self.coin_shares.pack_into(&mut p);
        for mat in &self.pair_defense_shares {
            mat.pack_into(&mut p);
        }
        out.extend_from_slice(&p.finish());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let h = read_header(bytes, MAGIC_THREE)?;
        if h.m == 0 {
            return Err(WireError::BadField("m"));
        }
        let width = super::CoinEncoding::new(h.m).width();
        let row_len = TwoShareBundle::row_len(h.m);
        let mut u = BitUnpacker::new(&bytes[h.body_at..]);
        let coin_shares =
            BitMatrix::unpack_from(&mut u, h.m as usize, width).ok_or(WireError::Truncated)?;
        let mut mats = Vec::with_capacity(6);
        for _ in 0..6 {
            mats.push(
                BitMatrix::unpack_from(&mut u, h.m as usize, row_len)
                    .ok_or(WireError::Truncated)?,
            );
        }
        let b = Self {
            party: h.party,
            m: h.m,
            coin_shares,
            pair_defense_shares: mats,
        };
        b.validate().map_err(|_| WireError::BadField("bundle"))?;
        Ok(b)
    }
}
