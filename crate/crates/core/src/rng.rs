//! Deterministic randomness.
//!
//! Every sampled artifact in the crate is a function of (parameters,
//! seed). A master seed keys a ChaCha8 stream; independent trials use
//! the trial index as the ChaCha stream number, so trial t of seed s is
//! reproducible without generating trials 0..t-1.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type DetRng = ChaCha8Rng;

/// RNG namespaces, so different consumers of one seed never share a
/// stream. Stream number = (ns << 56) | trial.
#[derive(Debug, Clone, Copy)]
pub enum Ns {
    Trial = 0,
    Dealer = 1,
    Policy = 2,
    Fallback = 3,
}

pub trait DetRngExt {
    fn for_trial(seed: u64, trial: u64) -> DetRng;
    fn for_ns(seed: u64, ns: Ns, trial: u64) -> DetRng;
}

impl DetRngExt for DetRng {
    fn for_trial(seed: u64, trial: u64) -> DetRng {
        Self::for_ns(seed, Ns::Trial, trial)
    }

    fn for_ns(seed: u64, ns: Ns, trial: u64) -> DetRng {
        debug_assert!(trial < 1 << 56);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((ns as u64) << 56) | trial);
        rng
    }
}

/// Bernoulli draw with fixed-point threshold semantics: true with
/// probability round(p·2^64)/2^64.
#[inline]
pub fn coin<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        return false;
    }
    if p >= 1.0 {
        return true;
    }
    let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
    rng.next_u64() < threshold
}

/// A ±1 coin with bias eps: +1 with probability (1+eps)/2.
#[inline]
pub fn pm_coin<R: RngCore + ?Sized>(rng: &mut R, eps: f64) -> i64 {
    if coin(rng, (1.0 + eps) / 2.0) {
        1
    } else {
        -1
    }
}

/// Sum of n ±1 coins with bias eps, drawn coin by coin.
pub fn pm_sum<R: RngCore + ?Sized>(rng: &mut R, n: u32, eps: f64) -> i64 {
    let mut s = 0i64;
    for _ in 0..n {
        s += pm_coin(rng, eps);
    }
    s
}

/// Uniform index in [0, bound) (Lemire's method).
#[inline]
pub fn index<R: RngCore + ?Sized>(rng: &mut R, bound: u32) -> u32 {
    debug_assert!(bound > 0);
    loop {
        let x = rng.next_u32();
        let m = (x as u64) * (bound as u64);
        let low = m as u32;
        if low >= bound || low >= (u32::MAX - bound + 1) % bound {
            return (m >> 32) as u32;
        }
    }
}

/// Uniform coin as a bit.
#[inline]
pub fn bit<R: RngCore + ?Sized>(rng: &mut R) -> u8 {
    (rng.next_u32() & 1) as u8
}

/// Wilson score interval at 99% confidence for `ones` successes out of
/// `n` trials.
pub fn wilson99(ones: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 2.575_829_303_548_900_4;
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = ones as f64 / nf;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Chi-squared statistic of observed ones against per-bin Bernoulli
/// expectations; returns (statistic, degrees of freedom). Bins with
/// expected count below 5 on either side are pooled away.
pub fn chi2_bernoulli_bins(bins: &[(u64, u64, f64)]) -> (f64, u64) {
    let mut stat = 0.0;
    let mut dof = 0u64;
    for &(ones, total, p) in bins {
        let e1 = total as f64 * p;
        let e0 = total as f64 * (1.0 - p);
        if e1 < 5.0 || e0 < 5.0 {
            continue;
        }
        let o1 = ones as f64;
        let o0 = (total - ones) as f64;
        stat += (o1 - e1).powi(2) / e1 + (o0 - e0).powi(2) / e0;
        dof += 1;
    }
    (stat, dof)
}
