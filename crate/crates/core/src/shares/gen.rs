//! The share-generating dealer functionalities.
//!
//! # Randomness order
//!
//! Each generator consumes its RNG in a fixed order so transcripts are
//! reproducible from (parameters, seed).
//!
//! `two_share_gen(m, δ)`:
//! 1. terminal defenses: party 0's bit, then party 1's (threshold coins);
//! 2. per round i = 1..m: coin (ml(i) ±1 draws), defenses d⁰ then d¹
//!    (threshold coins), then splits: coin share #0 (width bits),
//!    d⁰ share #0 (1 bit), d¹ share #0 (1 bit).
//!
//! `hid_two_share_gen(m, δ)`:
//! 1. hidden vectors v⁰ then v¹ (2·ms(1) ±1 draws each);
//! 2. terminal subsets: party 0's ms(1)-subset, then party 1's;
//! 3. per round i = 1..m: coin, subset for d⁰, subset for d¹, then the
//!    same split order as above.
//!
//! `three_share_gen(m)`: per round i = 1..m: coin; one full
//! `hid_two_share_gen(m, δᵢ)` per pair in order (0,1), (0,2), (1,2);
//! then splits: coin shares #0 and #1 (width bits each), and per pair in
//! order, row shares #0 and #1 for the (z,z') side then the (z',z) side.
//!
//! # Subset sampling modes
//!
//! [`SubsetSampling::Explicit`] draws each random subset by partial
//! Fisher–Yates over [2·ms(1)] (one bounded-uniform draw per element) and
//! sums the selected hidden-vector entries. [`SubsetSampling::WeightOnly`]
//! draws the subset weight directly: conditioned on the hidden vector
//! having `a` positive entries, the number of positives in a uniform
//! l-subset is hypergeometric, so one inverse-CDF draw per subset yields
//! a weight with exactly the same law. The bundle distribution is
//! identical in both modes (the subsets themselves never leave the
//! dealer); only the RNG consumption pattern differs. `WeightOnly` keeps
//! large Monte Carlo runs affordable and does not materialize the hidden
//! vectors.

use super::{BitMatrix, BitString, CoinEncoding, ThreeShareBundle, TwoShareBundle};
use crate::numerics::{ber_pmf, ber_tail, sbias, BiasEps, Prob, RoundParam};
use crate::rng::{coin, index, pm_coin};
use crate::scalar::ProbKernel;
use rand::RngCore;
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

/// How the hiding generator draws its random subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetSampling {
    /// Partial Fisher–Yates; materializes subsets and hidden vectors.
    #[default]
    Explicit,
    /// One hypergeometric inverse-CDF draw per subset weight.
    WeightOnly,
}

/// Inverse-CDF sampler over an arithmetic progression of integer values.
/// Thresholds are cumulative probabilities in fixed-point 2^-64.
pub(crate) struct CdfTable {
    offset: i64,
    step: i64,
    thresholds: Vec<u64>,
}

impl CdfTable {
    pub(crate) fn from_pmf(offset: i64, step: i64, pmf: &[f64]) -> Self {
        let mut thresholds = Vec::with_capacity(pmf.len());
        let mut acc = 0.0f64;
        for &p in pmf {
            acc += p.max(0.0);
            let t = (acc * 18_446_744_073_709_551_616.0).min(u64::MAX as f64) as u64;
            thresholds.push(t);
        }
        if let Some(last) = thresholds.last_mut() {
            *last = u64::MAX;
        }
        Self {
            offset,
            step,
            thresholds,
        }
    }

    #[inline]
    pub(crate) fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = rng.next_u64();
        let idx = self.thresholds.partition_point(|&t| t <= u);
        self.offset + self.step * idx as i64
    }
}

/// Dealer-internal values of one two-party deal, exposed for measurement
/// oracles and tests; honest protocol runs never see these.
#[derive(Debug, Clone)]
pub struct TwoDeal {
    pub delta: f64,
    pub eps: f64,
    pub coins: Vec<i64>,
    /// d^z_i for z in {0,1}, rounds 1..=m.
    pub defenses: [Vec<u8>; 2],
    /// terminal defense bit of each party (its own share of entry m+1).
    pub terminals: [u8; 2],
}

/// [`TwoDeal`] plus the hiding generator's internals.
#[derive(Debug, Clone)]
pub struct HidDeal {
    pub two: TwoDeal,
    /// w(v^z) for z in {0,1}.
    pub hidden_weights: [i64; 2],
    /// The vectors themselves; present in `Explicit` mode only.
    pub hidden_vectors: Option<[Vec<i8>; 2]>,
}

/// Compact record of one inner deal inside the three-party dealer.
#[derive(Debug, Clone, Copy)]
pub struct InnerDealInfo {
    pub delta: f64,
    pub eps: f64,
    pub hidden_weights: [i64; 2],
    pub terminals: [u8; 2],
}

/// Dealer-internal values of one three-party deal.
#[derive(Debug, Clone)]
pub struct ThreeDeal {
    pub coins: Vec<i64>,
    pub deltas: Vec<f64>,
    /// Per round, pairs in order (0,1), (0,2), (1,2).
    pub inner: Vec<[InnerDealInfo; 3]>,
}

/// Precomputed context for repeated deals with one (m, δ): the bias ε,
/// per-round conditional-value tables, and (in `WeightOnly` mode)
/// inverse-CDF tables.
pub struct DealerCtx {
    pub m: RoundParam,
    pub delta: f64,
    pub eps: f64,
    mode: SubsetSampling,
    /// deltas[i-1][y + ms1] = ber_tail(ms(i+1), eps, -y): the conditional
    /// one-probability after the round-i coins summed to y.
    delta_rows: Vec<Vec<f64>>,
    /// WeightOnly: coin-sum tables per round, positives-count table for
    /// the hidden vector, hypergeometric count tables keyed by (a, l).
    coin_cdf: Vec<CdfTable>,
    vec_count_cdf: Option<CdfTable>,
    hyp_cdf: RefCell<HashMap<(u32, u32), Rc<CdfTable>>>,
}

impl DealerCtx {
    pub fn new(m: RoundParam, delta: Prob, mode: SubsetSampling) -> Self {
        let eps = sbias(m.total_coins(), delta).value();
        Self::with_eps(m, delta.value(), eps, mode)
    }

    /// Used when ε was already computed (or must be pinned externally).
    pub fn with_eps(m: RoundParam, delta: f64, eps: f64, mode: SubsetSampling) -> Self {
        let ms1 = m.total_coins() as i64;
        let eps_b = BiasEps::new(eps).expect("bias in range");
        let mut delta_rows = Vec::with_capacity(m.m() as usize);
        for i in 1..=m.m() {
            let rem = m.ms(i + 1);
            let reach = (ms1 - m.ms(i + 1) as i64).min(ms1);
            let mut row = vec![0.0; (2 * ms1 + 1) as usize];
            for (idx, slot) in row.iter_mut().enumerate() {
                let y = idx as i64 - ms1;
                if y.abs() <= reach {
                    *slot = ber_tail(rem, eps_b, -y);
                }
            }
            delta_rows.push(row);
        }
        let mut coin_cdf = Vec::new();
        let mut vec_count_cdf = None;
        if mode == SubsetSampling::WeightOnly {
            for i in 1..=m.m() {
                let ml = m.ml(i);
                let pmf: Vec<f64> = (0..=ml)
                    .map(|j| ber_pmf(ml, eps_b, 2 * j as i64 - ml as i64))
                    .collect();
                coin_cdf.push(CdfTable::from_pmf(-(ml as i64), 2, &pmf));
            }
            let n = 2 * m.total_coins();
            let pmf: Vec<f64> = (0..=n)
                .map(|j| ber_pmf(n, eps_b, 2 * j as i64 - n as i64))
                .collect();
            vec_count_cdf = Some(CdfTable::from_pmf(0, 1, &pmf));
        }
        Self {
            m,
            delta: delta.clamp(0.0, 1.0),
            eps,
            mode,
            delta_rows,
            coin_cdf,
            vec_count_cdf,
            hyp_cdf: RefCell::new(HashMap::new()),
        }
    }

    pub fn mode(&self) -> SubsetSampling {
        self.mode
    }

    /// Conditional one-probability δ_i given the coins of rounds 1..=i
    /// summed to y.
    pub fn delta_round(&self, i: u32, y: i64) -> f64 {
        let ms1 = self.m.total_coins() as i64;
        self.delta_rows[(i - 1) as usize][(y + ms1) as usize]
    }

    fn sample_coin(&self, i: u32, rng: &mut impl RngCore) -> i64 {
        match self.mode {
            SubsetSampling::Explicit => {
                let mut s = 0i64;
                for _ in 0..self.m.ml(i) {
                    s += pm_coin(rng, self.eps);
                }
                s
            }
            SubsetSampling::WeightOnly => self.coin_cdf[(i - 1) as usize].sample(rng),
        }
    }

    fn hyp_table(&self, a: u32, l: u32) -> Rc<CdfTable> {
        let n = 2 * self.m.total_coins();
        let mut cache = self.hyp_cdf.borrow_mut();
        cache
            .entry((a, l))
            .or_insert_with(|| {
                let p = 2 * a as i64 - n as i64;
                let pmf: Vec<f64> = (0..=l)
                    .map(|j| f64::hyp_pmf(n, p, l, 2 * j as i64 - l as i64))
                    .collect();
                Rc::new(CdfTable::from_pmf(-(l as i64), 2, &pmf))
            })
            .clone()
    }

    /// Generate one plain two-party deal.
    pub fn two_share_gen(
        &self,
        rng: &mut impl RngCore,
    ) -> ((TwoShareBundle, TwoShareBundle), TwoDeal) {
        let m = self.m.m() as usize;
        let enc = CoinEncoding::new(self.m.m());
        let width = enc.width();

        // 1. terminal defenses
        let term0 = coin(rng, self.delta) as u8;
        let term1 = coin(rng, self.delta) as u8;

        let mut b0 = empty_two_bundle(0, self.m.m(), self.delta, width);
        let mut b1 = empty_two_bundle(1, self.m.m(), self.delta, width);
        b0.defense_shares[0].set(m, term0);
        b1.defense_shares[1].set(m, term1);

        let mut coins = Vec::with_capacity(m);
        let mut defenses = [Vec::with_capacity(m), Vec::with_capacity(m)];
        let mut sum = 0i64;
        for i in 1..=self.m.m() {
            // 2a. coin
            let c = self.sample_coin(i, rng);
            sum += c;
            coins.push(c);
            // 2b. defenses, independent given the coins
            let delta_i = self.delta_round(i, sum);
            let d0 = coin(rng, delta_i) as u8;
            let d1 = coin(rng, delta_i) as u8;
            defenses[0].push(d0);
            defenses[1].push(d1);
            // 2c. splits
            split_round(&mut b0, &mut b1, i, enc.encode(c), width, d0, d1, rng);
        }
        let deal = TwoDeal {
            delta: self.delta,
            eps: self.eps,
            coins,
            defenses,
            terminals: [term0, term1],
        };
        ((b0, b1), deal)
    }

    /// Generate one hiding two-party deal.
    pub fn hid_two_share_gen(
        &self,
        rng: &mut impl RngCore,
    ) -> ((TwoShareBundle, TwoShareBundle), HidDeal) {
        let mut b0 = empty_two_bundle(0, self.m.m(), self.delta, CoinEncoding::new(self.m.m()).width());
        let mut b1 = empty_two_bundle(1, self.m.m(), self.delta, CoinEncoding::new(self.m.m()).width());
        let deal = self.hid_fill(&mut b0, &mut b1, rng);
        ((b0, b1), deal)
    }

    /// Core of the hiding generator, writing into caller-provided
    /// bundles (reused by the three-party dealer to avoid churn).
    fn hid_fill(
        &self,
        b0: &mut TwoShareBundle,
        b1: &mut TwoShareBundle,
        rng: &mut impl RngCore,
    ) -> HidDeal {
        let m = self.m.m() as usize;
        let ms1 = self.m.total_coins();
        let n = 2 * ms1;
        let enc = CoinEncoding::new(self.m.m());
        let width = enc.width();

        // 1. hidden vectors (or just their positive counts)
        let mut vectors: Option<[Vec<i8>; 2]> = None;
        let counts: [u32; 2] = match self.mode {
            SubsetSampling::Explicit => {
                let mut vs = [Vec::with_capacity(n as usize), Vec::with_capacity(n as usize)];
                let mut cnt = [0u32; 2];
                for z in 0..2 {
                    for _ in 0..n {
                        let e = pm_coin(rng, self.eps) as i8;
                        if e == 1 {
                            cnt[z] += 1;
                        }
                        vs[z].push(e);
                    }
                }
                vectors = Some(vs);
                cnt
            }
            SubsetSampling::WeightOnly => {
                let t = self.vec_count_cdf.as_ref().expect("WeightOnly tables");
                [t.sample(rng) as u32, t.sample(rng) as u32]
            }
        };
        let hidden_weights = [
            2 * counts[0] as i64 - n as i64,
            2 * counts[1] as i64 - n as i64,
        ];

        let mut scratch = SubsetScratch::new(n);
        let mut subset_weight = |z: usize, l: u32, rng: &mut dyn RngCore| -> i64 {
            match self.mode {
                SubsetSampling::Explicit => {
                    scratch.weight_of_subset(vectors.as_ref().unwrap()[z].as_slice(), l, rng)
                }
                SubsetSampling::WeightOnly => {
                    if l == 0 {
                        0
                    } else {
                        self.hyp_table(counts[z], l).sample(rng)
                    }
                }
            }
        };

        // 2. terminal defenses from ms(1)-size subsets
        let term0 = (subset_weight(0, ms1, rng) >= 0) as u8;
        let term1 = (subset_weight(1, ms1, rng) >= 0) as u8;
        b0.defense_shares[0].set(m, term0);
        b1.defense_shares[1].set(m, term1);

        // 3. rounds
        let mut coins = Vec::with_capacity(m);
        let mut defenses = [Vec::with_capacity(m), Vec::with_capacity(m)];
        let mut sum = 0i64;
        for i in 1..=self.m.m() {
            let c = self.sample_coin(i, rng);
            sum += c;
            coins.push(c);
            let l = self.m.ms(i + 1);
            let d0 = (sum + subset_weight(0, l, rng) >= 0) as u8;
            let d1 = (sum + subset_weight(1, l, rng) >= 0) as u8;
            defenses[0].push(d0);
            defenses[1].push(d1);
            split_round(b0, b1, i, enc.encode(c), width, d0, d1, rng);
        }

        HidDeal {
            two: TwoDeal {
                delta: self.delta,
                eps: self.eps,
                coins,
                defenses,
                terminals: [term0, term1],
            },
            hidden_weights,
            hidden_vectors: vectors,
        }
    }
}

fn empty_two_bundle(party: u8, m: u32, delta: f64, width: usize) -> TwoShareBundle {
    TwoShareBundle {
        party,
        m,
        delta,
        coin_shares: BitMatrix::zeroed(m as usize, width),
        defense_shares: [
            BitString::zeroed(m as usize + 1),
            BitString::zeroed(m as usize + 1),
        ],
    }
}

/// Split one round's coin and defense bits between the two bundles:
/// share #0 is fresh randomness, share #1 the XOR complement.
#[allow(clippy::too_many_arguments)]
fn split_round(
    b0: &mut TwoShareBundle,
    b1: &mut TwoShareBundle,
    i: u32,
    coin_encoded: u64,
    width: usize,
    d0: u8,
    d1: u8,
    rng: &mut impl RngCore,
) {
    let r = (i - 1) as usize;
    let coin_share0 = rng.next_u64() & ((1u64 << width) - 1);
    b0.coin_shares.set_row_bits(r, 0, width, coin_share0);
    b1.coin_shares.set_row_bits(r, 0, width, coin_encoded ^ coin_share0);
    let s = rng.next_u64();
    let d0_share0 = (s & 1) as u8;
    let d1_share0 = ((s >> 1) & 1) as u8;
    b0.defense_shares[0].set(r, d0_share0);
    b1.defense_shares[0].set(r, d0 ^ d0_share0);
    b0.defense_shares[1].set(r, d1_share0);
    b1.defense_shares[1].set(r, d1 ^ d1_share0);
}

/// Partial Fisher–Yates over [0, n) with undo, so repeated subset draws
/// reuse one array.
struct SubsetScratch {
    perm: Vec<u32>,
    touched: Vec<(u32, u32)>,
}

impl SubsetScratch {
    fn new(n: u32) -> Self {
        Self {
            perm: (0..n).collect(),
            touched: Vec::with_capacity(n as usize),
        }
    }

    fn weight_of_subset(&mut self, v: &[i8], l: u32, rng: &mut dyn RngCore) -> i64 {
        let n = self.perm.len() as u32;
        debug_assert!(l <= n);
        let mut w = 0i64;
        self.touched.clear();
        for k in 0..l {
            let j = k + index(rng, n - k);
            self.perm.swap(k as usize, j as usize);
            self.touched.push((k, j));
            w += v[self.perm[k as usize] as usize] as i64;
        }
        for &(k, j) in self.touched.iter().rev() {
            self.perm.swap(k as usize, j as usize);
        }
        w
    }
}

/// One-shot plain two-party deal (terminal outcome probability δ).
pub fn two_share_gen(
    m: RoundParam,
    delta: Prob,
    rng: &mut impl RngCore,
) -> ((TwoShareBundle, TwoShareBundle), TwoDeal) {
    DealerCtx::new(m, delta, SubsetSampling::Explicit).two_share_gen(rng)
}

/// One-shot hiding two-party deal.
pub fn hid_two_share_gen(
    m: RoundParam,
    delta: Prob,
    rng: &mut impl RngCore,
) -> ((TwoShareBundle, TwoShareBundle), HidDeal) {
    DealerCtx::new(m, delta, SubsetSampling::Explicit).hid_two_share_gen(rng)
}

/// Precomputed context for repeated three-party deals: unbiased coin
/// tables and a cache of inner dealer contexts keyed by the coin prefix
/// that fixes δ_i.
pub struct ThreeCtx {
    pub m: RoundParam,
    mode: SubsetSampling,
    outer: DealerCtx,
    inner: RefCell<HashMap<(u32, i64), Rc<DealerCtx>>>,
}

impl ThreeCtx {
    pub fn new(m: RoundParam, mode: SubsetSampling) -> Self {
        let outer = DealerCtx::with_eps(m, 0.5, 0.0, mode);
        Self {
            m,
            mode,
            outer,
            inner: RefCell::new(HashMap::new()),
        }
    }

    fn inner_ctx(&self, i: u32, y: i64) -> Rc<DealerCtx> {
        let mut cache = self.inner.borrow_mut();
        cache
            .entry((i, y))
            .or_insert_with(|| {
                let delta = self.outer.delta_round(i, y);
                Rc::new(DealerCtx::new(
                    self.m,
                    Prob::new(delta).expect("tail in range"),
                    self.mode,
                ))
            })
            .clone()
    }

    pub fn generate(&self, rng: &mut impl RngCore) -> ([ThreeShareBundle; 3], ThreeDeal) {
        let m = self.m.m() as usize;
        let enc = CoinEncoding::new(self.m.m());
        let width = enc.width();
        let row_len = TwoShareBundle::row_len(self.m.m());

        let mut bundles: [ThreeShareBundle; 3] = std::array::from_fn(|z| ThreeShareBundle {
            party: z as u8,
            m: self.m.m(),
            coin_shares: BitMatrix::zeroed(m, width),
            pair_defense_shares: (0..6).map(|_| BitMatrix::zeroed(m, row_len)).collect(),
        });

        let mut coins = Vec::with_capacity(m);
        let mut deltas = Vec::with_capacity(m);
        let mut inner_all = Vec::with_capacity(m);
        let mut sum = 0i64;
        let mut scratch0 = empty_two_bundle(0, self.m.m(), 0.0, width);
        let mut scratch1 = empty_two_bundle(1, self.m.m(), 0.0, width);

        for i in 1..=self.m.m() {
            // coin
            let c = self.outer.sample_coin(i, rng);
            sum += c;
            coins.push(c);
            let delta_i = self.outer.delta_round(i, sum);
            deltas.push(delta_i);
            let ictx = self.inner_ctx(i, sum);

            // one hiding deal per pair, order (0,1), (0,2), (1,2)
            let mut infos: Vec<InnerDealInfo> = Vec::with_capacity(3);
            let mut rows: Vec<(BitString, BitString)> = Vec::with_capacity(3);
            for _pair in 0..3 {
                reset_two_bundle(&mut scratch0, ictx.delta);
                reset_two_bundle(&mut scratch1, ictx.delta);
                let deal = ictx.hid_fill(&mut scratch0, &mut scratch1, rng);
                infos.push(InnerDealInfo {
                    delta: ictx.delta,
                    eps: ictx.eps,
                    hidden_weights: deal.hidden_weights,
                    terminals: deal.two.terminals,
                });
                rows.push((scratch0.to_row(), scratch1.to_row()));
            }

            // splits: coin shares #0, #1; then per pair the row shares
            let r = (i - 1) as usize;
            let mask = (1u64 << width) - 1;
            let s0 = rng.next_u64() & mask;
            let s1 = rng.next_u64() & mask;
            bundles[0].coin_shares.set_row_bits(r, 0, width, s0);
            bundles[1].coin_shares.set_row_bits(r, 0, width, s1);
            bundles[2]
                .coin_shares
                .set_row_bits(r, 0, width, enc.encode(c) ^ s0 ^ s1);

            for (pair_idx, (z, zp)) in [(0u8, 1u8), (0, 2), (1, 2)].iter().enumerate() {
                let (row_a, row_b) = &rows[pair_idx];
                split_row_three(&mut bundles, super::pair_index(*z, *zp), r, row_a, rng);
                split_row_three(&mut bundles, super::pair_index(*zp, *z), r, row_b, rng);
            }
            inner_all.push([infos[0], infos[1], infos[2]]);
        }

        let deal = ThreeDeal {
            coins,
            deltas,
            inner: inner_all,
        };
        (bundles, deal)
    }
}

fn reset_two_bundle(b: &mut TwoShareBundle, delta: f64) {
    b.delta = delta;
    for r in 0..b.coin_shares.rows() {
        let w = b.coin_shares.cols();
        b.coin_shares.set_row_bits(r, 0, w, 0);
    }
    b.defense_shares[0].fill_zero();
    b.defense_shares[1].fill_zero();
}

/// Three-way split of one pair-defense row into matrix row `r` of the
/// target matrices: shares #0 and #1 fresh, #2 the XOR complement.
fn split_row_three(
    bundles: &mut [ThreeShareBundle; 3],
    mat: usize,
    r: usize,
    value: &BitString,
    rng: &mut impl RngCore,
) {
    bundles[0].pair_defense_shares[mat].randomize_row(r, rng);
    bundles[1].pair_defense_shares[mat].randomize_row(r, rng);
    let m2 = &mut bundles[2].pair_defense_shares[mat];
    m2.set_row(r, value);
    let row0 = bundles[0].pair_defense_shares[mat].row_to_bitstring(r);
    let row1 = bundles[1].pair_defense_shares[mat].row_to_bitstring(r);
    bundles[2].pair_defense_shares[mat].xor_row_assign(r, &row0);
    bundles[2].pair_defense_shares[mat].xor_row_assign(r, &row1);
}

/// One-shot three-party deal.
pub fn three_share_gen(
    m: RoundParam,
    rng: &mut impl RngCore,
) -> ([ThreeShareBundle; 3], ThreeDeal) {
    ThreeCtx::new(m, SubsetSampling::Explicit).generate(rng)
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{DetRng, DetRngExt};
    use crate::shares::{pair_index, xor_reconstruct};

    fn reconstruct_coins(b0: &TwoShareBundle, b1: &TwoShareBundle) -> Vec<i64> {
        let enc = b0.encoding();
        let width = enc.width();
        (0..b0.m as usize)
            .map(|r| {
                let raw =
                    b0.coin_shares.get_row_bits(r, 0, width) ^ b1.coin_shares.get_row_bits(r, 0, width);
                enc.decode(raw).unwrap()
            })
            .collect()
    }

    #[test]
    fn two_share_gen_reconstructs() {
        let m = RoundParam::strict(5).unwrap();
        let mut rng = DetRng::for_trial(11, 0);
        for _ in 0..50 {
            let ((b0, b1), deal) = two_share_gen(m, Prob::HALF, &mut rng);
            b0.validate().unwrap();
            b1.validate().unwrap();
            assert_eq!(reconstruct_coins(&b0, &b1), deal.coins);
            for (i, &c) in deal.coins.iter().enumerate() {
                let ml = m.ml(i as u32 + 1) as i64;
                assert!(c.abs() <= ml && (c - ml).rem_euclid(2) == 0);
            }
            for z in 0..2 {
                for i in 0..5usize {
                    let d = b0.defense_shares[z].get(i) ^ b1.defense_shares[z].get(i);
                    assert_eq!(d, deal.defenses[z][i]);
                }
            }
            // terminal: own share is the dealt bit, the other share zero
            assert_eq!(b0.defense_shares[0].get(5), deal.terminals[0]);
            assert_eq!(b1.defense_shares[0].get(5), 0);
            assert_eq!(b1.defense_shares[1].get(5), deal.terminals[1]);
            assert_eq!(b0.defense_shares[1].get(5), 0);
        }
    }

    #[test]
    fn delta_one_forces_everything() {
        let m = RoundParam::strict(5).unwrap();
        let mut rng = DetRng::for_trial(12, 0);
        let ((_, _), deal) = two_share_gen(m, Prob::new(1.0).unwrap(), &mut rng);
        assert_eq!(deal.eps, 1.0);
        for (i, &c) in deal.coins.iter().enumerate() {
            assert_eq!(c, m.ml(i as u32 + 1) as i64); // all coins +ml(i)
        }
        assert!(deal.defenses.iter().all(|v| v.iter().all(|&d| d == 1)));
        assert_eq!(deal.terminals, [1, 1]);

        let ((_, _), hdeal) = hid_two_share_gen(m, Prob::new(1.0).unwrap(), &mut rng);
        assert!(hdeal.two.defenses.iter().all(|v| v.iter().all(|&d| d == 1)));
        assert_eq!(hdeal.two.terminals, [1, 1]);
    }

    #[test]
    fn generators_are_deterministic() {
        let m = RoundParam::strict(5).unwrap();
        let a = two_share_gen(m, Prob::HALF, &mut DetRng::for_trial(9, 3)).0;
        let b = two_share_gen(m, Prob::HALF, &mut DetRng::for_trial(9, 3)).0;
        assert_eq!(a, b);
        let ha = hid_two_share_gen(m, Prob::HALF, &mut DetRng::for_trial(9, 4)).0;
        let hb = hid_two_share_gen(m, Prob::HALF, &mut DetRng::for_trial(9, 4)).0;
        assert_eq!(ha, hb);
        let ta = three_share_gen(m, &mut DetRng::for_trial(9, 5)).0;
        let tb = three_share_gen(m, &mut DetRng::for_trial(9, 5)).0;
        assert_eq!(ta, tb);
    }

    #[test]
    fn hid_round_defense_last_round_is_outcome() {
        // at i = m the subset is empty, so d^z_m = [sum >= 0]
        let m = RoundParam::strict(5).unwrap();
        let mut rng = DetRng::for_trial(13, 0);
        for _ in 0..100 {
            let ((_, _), deal) = hid_two_share_gen(m, Prob::HALF, &mut rng);
            let total: i64 = deal.two.coins.iter().sum();
            let out = (total >= 0) as u8;
            assert_eq!(deal.two.defenses[0][4], out);
            assert_eq!(deal.two.defenses[1][4], out);
        }
    }

    #[test]
    fn weight_only_matches_explicit_law() {
        // same (m, δ): defense-bit one-frequencies per round agree across
        // modes within MC error
        let m = RoundParam::strict(5).unwrap();
        let delta = Prob::new(0.3).unwrap();
        let trials = 20_000u32;
        let mut freqs = Vec::new();
        for mode in [SubsetSampling::Explicit, SubsetSampling::WeightOnly] {
            let ctx = DealerCtx::new(m, delta, mode);
            let mut rng = DetRng::for_trial(77, mode as u64);
            let mut ones = vec![0u32; 5];
            let mut term_ones = 0u32;
            for _ in 0..trials {
                let ((_, _), deal) = ctx.hid_two_share_gen(&mut rng);
                for i in 0..5 {
                    ones[i] += deal.two.defenses[0][i] as u32;
                }
                term_ones += deal.two.terminals[0] as u32;
            }
            freqs.push((
                ones.iter().map(|&o| o as f64 / trials as f64).collect::<Vec<_>>(),
                term_ones as f64 / trials as f64,
            ));
        }
        for i in 0..5 {
            assert!(
                (freqs[0].0[i] - freqs[1].0[i]).abs() < 0.02,
                "round {i}: {:?} vs {:?}",
                freqs[0].0,
                freqs[1].0
            );
        }
        assert!((freqs[0].1 - freqs[1].1).abs() < 0.02);
    }

    #[test]
    fn three_share_gen_reconstructs() {
        let m = RoundParam::strict(5).unwrap();
        let mut rng = DetRng::for_trial(14, 0);
        let (bundles, deal) = three_share_gen(m, &mut rng);
        for b in &bundles {
            b.validate().unwrap();
        }
        let enc = bundles[0].encoding();
        let width = enc.width();
        // coins reconstruct to the dealt values
        for r in 0..5usize {
            let raw = bundles[0].coin_shares.get_row_bits(r, 0, width)
                ^ bundles[1].coin_shares.get_row_bits(r, 0, width)
                ^ bundles[2].coin_shares.get_row_bits(r, 0, width);
            assert_eq!(enc.decode(raw).unwrap(), deal.coins[r]);
        }
        // each pair row reconstructs to a valid two-party input pair whose
        // terminal defense matches the dealt inner terminal
        for r in 0..5usize {
            for (pi, (z, zp)) in [(0u8, 1u8), (0, 2), (1, 2)].iter().enumerate() {
                let info = deal.inner[r][pi];
                for (side, owner) in [(0u8, *z), (1u8, *zp)] {
                    let mat = pair_index(
                        if side == 0 { *z } else { *zp },
                        if side == 0 { *zp } else { *z },
                    );
                    let row = xor_reconstruct(&[
                        bundles[0].pair_defense_shares[mat].row_to_bitstring(r),
                        bundles[1].pair_defense_shares[mat].row_to_bitstring(r),
                        bundles[2].pair_defense_shares[mat].row_to_bitstring(r),
                    ])
                    .unwrap();
                    let inner =
                        TwoShareBundle::from_row(&row, 5, side, info.delta).unwrap();
                    inner.validate().unwrap();
                    // the inner bundle's own terminal share is the dealt bit
                    assert_eq!(
                        inner.defense_shares[side as usize].get(5),
                        info.terminals[side as usize],
                        "round {r} pair ({z},{zp}) owner {owner}"
                    );
                }
            }
        }
        // deltas consistent with coins
        let mut sum = 0i64;
        for (r, &c) in deal.coins.iter().enumerate() {
            sum += c;
            let expect = ber_tail(m.ms(r as u32 + 2), BiasEps::ZERO, -sum);
            assert!((deal.deltas[r] - expect).abs() < 1e-15);
        }
    }
}
