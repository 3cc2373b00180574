//! XOR secret sharing and the share-generating dealer functionalities.
//!
//! Three honest-dealer functionalities are provided:
//!
//! * [`two_share_gen`] — coins plus independently sampled per-round
//!   defense bits, the input dealer of the basic two-party protocol.
//! * [`hid_two_share_gen`] — the hiding variant: all of one party's
//!   defenses derive from a single hidden ±1 vector through fresh random
//!   subsets, so leaked defenses reveal little about the target value.
//! * [`three_share_gen`] — coins plus, per round and per pair of
//!   parties, a fresh hiding two-party share set, all split three ways.
//!
//! Dealer randomness is consumed in a fixed documented order (see each
//! generator), so a transcript is a deterministic function of
//! (parameters, seed).

mod bits;
mod gen;
mod wire;

pub use bits::{BitMatrix, BitPacker, BitString, BitUnpacker};
pub use gen::{
    hid_two_share_gen, three_share_gen, two_share_gen, DealerCtx, HidDeal, InnerDealInfo,
    SubsetSampling, ThreeCtx, ThreeDeal, TwoDeal,
};
pub use wire::WireError;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ShareError {
    #[error("need at least 2 shares, got {0}")]
    TooFewShares(usize),
    #[error("share length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("coin encoding out of range: {0}")]
    CoinOutOfRange(u64),
    #[error("malformed bundle: {0}")]
    MalformedBundle(String),
}

/// Split a secret into k shares whose XOR is the secret; any k-1 of them
/// are jointly uniform.
pub fn xor_split(secret: &BitString, k: usize, rng: &mut impl RngCore) -> Vec<BitString> {
    assert!(k >= 2, "k-of-k sharing needs k >= 2");
    let mut shares = Vec::with_capacity(k);
    let mut last = secret.clone();
    for _ in 0..k - 1 {
        let s = BitString::random(rng, secret.len());
        last.xor_assign(&s);
        shares.push(s);
    }
    shares.push(last);
    shares
}

pub fn xor_reconstruct(shares: &[BitString]) -> Result<BitString, ShareError> {
    if shares.len() < 2 {
        return Err(ShareError::TooFewShares(shares.len()));
    }
    let mut out = shares[0].clone();
    for s in &shares[1..] {
        if s.len() != out.len() {
            return Err(ShareError::LengthMismatch(out.len(), s.len()));
        }
        out.xor_assign(s);
    }
    Ok(out)
}

/// Fixed-width encoding of round coins. A round-i coin lies in
/// [-ml(i), ml(i)] ⊆ [-m, m]; every round uses the same width
/// ceil(log2(2m+1)) with offset encoding c + m, so XOR shares of coins
/// are well-typed bit strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinEncoding {
    m: u32,
}

impl CoinEncoding {
    pub fn new(m: u32) -> Self {
        Self { m }
    }

    pub fn width(&self) -> usize {
        let span = 2 * self.m as u64 + 1;
        (64 - span.leading_zeros()) as usize
    }

    pub fn encode(&self, coin: i64) -> u64 {
        debug_assert!(coin.abs() <= self.m as i64);
        (coin + self.m as i64) as u64
    }

    pub fn decode(&self, raw: u64) -> Result<i64, ShareError> {
        if raw > 2 * self.m as u64 {
            return Err(ShareError::CoinOutOfRange(raw));
        }
        Ok(raw as i64 - self.m as i64)
    }
}

/// One party's output of the two-party share generators: XOR shares of
/// the m round coins, and shares of both parties' defense bit vectors
/// (m round entries plus the terminal entry).
///
/// `defense_shares[z]` is this party's share vector of party z's
/// defenses. The terminal entry (index m) of a party's **own** defense
/// vector holds the dealt bit itself; the counterpart's share of it is
/// fixed to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoShareBundle {
    pub party: u8,
    pub m: u32,
    pub delta: f64,
    pub coin_shares: BitMatrix,
    pub defense_shares: [BitString; 2],
}

impl TwoShareBundle {
    pub fn encoding(&self) -> CoinEncoding {
        CoinEncoding::new(self.m)
    }

    pub fn validate(&self) -> Result<(), ShareError> {
        let enc = self.encoding();
        if self.party > 1 {
            return Err(ShareError::MalformedBundle(format!(
                "party id {} out of range",
                self.party
            )));
        }
        if self.coin_shares.rows() != self.m as usize || self.coin_shares.cols() != enc.width() {
            return Err(ShareError::MalformedBundle("coin share shape".into()));
        }
        for d in &self.defense_shares {
            if d.len() != self.m as usize + 1 {
                return Err(ShareError::MalformedBundle("defense share length".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(ShareError::MalformedBundle("delta out of range".into()));
        }
        Ok(())
    }

    /// Flatten into the pair-defense row layout: coin shares row-major,
    /// then the two defense vectors.
    pub fn to_row(&self) -> BitString {
        let enc = self.encoding();
        let width = enc.width();
        let mlen = self.m as usize;
        let total = mlen * width + 2 * (mlen + 1);
        let mut row = BitString::zeroed(total);
        let mut at = 0;
        for r in 0..mlen {
            row.set_bits(at, width, self.coin_shares.get_row_bits(r, 0, width));
            at += width;
        }
        for d in &self.defense_shares {
            for i in 0..=mlen {
                row.set(at, d.get(i));
                at += 1;
            }
        }
        row
    }

    /// Inverse of [`Self::to_row`]; `party` and `delta` are supplied by
    /// context.
    pub fn from_row(row: &BitString, m: u32, party: u8, delta: f64) -> Result<Self, ShareError> {
        let enc = CoinEncoding::new(m);
        let width = enc.width();
        let mlen = m as usize;
        let total = mlen * width + 2 * (mlen + 1);
        if row.len() != total {
            return Err(ShareError::LengthMismatch(row.len(), total));
        }
        let mut coin_shares = BitMatrix::zeroed(mlen, width);
        let mut at = 0;
        for r in 0..mlen {
            coin_shares.set_row_bits(r, 0, width, row.get_bits(at, width));
            at += width;
        }
        let mut defense_shares = [BitString::zeroed(mlen + 1), BitString::zeroed(mlen + 1)];
        for d in &mut defense_shares {
            for i in 0..=mlen {
                d.set(i, row.get(at));
                at += 1;
            }
        }
        Ok(Self {
            party,
            m,
            delta,
            coin_shares,
            defense_shares,
        })
    }

    /// Bit length of the flattened row for round parameter m.
    pub fn row_len(m: u32) -> usize {
        let width = CoinEncoding::new(m).width();
        m as usize * width + 2 * (m as usize + 1)
    }
}

/// One party's output of the three-party share generator: XOR shares of
/// the coins and of the six per-pair defense matrices. Matrix index
/// order is (0,1), (0,2), (1,0), (1,2), (2,0), (2,1); row i of matrix
/// (z,z') is this party's share of party z's flattened two-party input
/// against pair (z,z') dealt for round i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeShareBundle {
    pub party: u8,
    pub m: u32,
    pub coin_shares: BitMatrix,
    pub pair_defense_shares: Vec<BitMatrix>,
}

/// Index of ordered pair (z, z'), z != z', in the bundle layout.
pub fn pair_index(z: u8, zp: u8) -> usize {
    debug_assert!(z < 3 && zp < 3 && z != zp);
    let ordered = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
    ordered.iter().position(|&p| p == (z, zp)).unwrap()
}

impl ThreeShareBundle {
    pub fn encoding(&self) -> CoinEncoding {
        CoinEncoding::new(self.m)
    }

    pub fn validate(&self) -> Result<(), ShareError> {
        let enc = self.encoding();
        if self.party > 2 {
            return Err(ShareError::MalformedBundle(format!(
                "party id {} out of range",
                self.party
            )));
        }
        if self.coin_shares.rows() != self.m as usize || self.coin_shares.cols() != enc.width() {
            return Err(ShareError::MalformedBundle("coin share shape".into()));
        }
        if self.pair_defense_shares.len() != 6 {
            return Err(ShareError::MalformedBundle("pair matrix count".into()));
        }
        let row_len = TwoShareBundle::row_len(self.m);
        for mat in &self.pair_defense_shares {
            if mat.rows() != self.m as usize || mat.cols() != row_len {
                return Err(ShareError::MalformedBundle("pair matrix shape".into()));
            }
        }
        Ok(())
    }
}
