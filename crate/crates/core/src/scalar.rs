//! Scalar abstraction: the probability kernels run either in `f64`
//! (log-space internals, any size) or in exact arbitrary-precision
//! rationals (desk-scale oracles, exact measurement).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::special;

/// Field-like scalar with order, used by the generic probability code.
pub trait Scalar:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact lift of an `f64` (used to feed bisection outputs into the
    /// rational engine).
    fn from_f64_exact(v: f64) -> Self;
    fn abs_val(&self) -> Self;
    fn as_f64(&self) -> f64;
    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64_exact(v: f64) -> Self {
        v
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64_exact(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Distribution kernels implemented per scalar. `eps` is the ±1 coin bias:
/// a coin is +1 with probability (1+eps)/2. The binomial here is the sum
/// of `n` such coins, supported on {-n, ..., n} with the parity of `n`.
pub trait ProbKernel: Scalar {
    /// Pr[sum of n coins = k]; zero off support.
    fn ber_pmf(n: u32, eps: &Self, k: i64) -> Self;
    /// Pr[sum of n coins >= k].
    fn ber_tail(n: u32, eps: &Self, k: i64) -> Self;
    /// Hypergeometric weight pmf: an l-subset of a ±1 vector of length n
    /// and weight p. Caller validates |p| <= n, p ≡ n (mod 2), l <= n.
    fn hyp_pmf(n: u32, p: i64, l: u32, k: i64) -> Self;
    /// Pr[subset weight >= k].
    fn hyp_tail(n: u32, p: i64, l: u32, k: i64) -> Self;
}

/// Smallest support point of the n-coin sum that is >= k, or None if the
/// support lies entirely below k.
fn support_floor(n: u32, k: i64) -> Option<i64> {
    let n = n as i64;
    if k > n {
        return None;
    }
    let t = if k <= -n {
        -n
    } else if (k - n).rem_euclid(2) == 0 {
        k
    } else {
        k + 1
    };
    Some(t)
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

impl ProbKernel for f64 {
    fn ber_pmf(n: u32, eps: &Self, k: i64) -> Self {
        let nn = n as i64;
        if k.abs() > nn || (k - nn).rem_euclid(2) != 0 {
            return 0.0;
        }
        let j = ((nn + k) / 2) as u64; // number of +1 coins
        let p = (1.0 + eps) / 2.0;
        let q = (1.0 - eps) / 2.0;
        if p == 0.0 {
            return if j == 0 { 1.0 } else { 0.0 };
        }
        if q == 0.0 {
            return if j == n as u64 { 1.0 } else { 0.0 };
        }
        (special::ln_choose(n as u64, j) + j as f64 * p.ln() + (n as u64 - j) as f64 * q.ln())
            .exp()
    }

    fn ber_tail(n: u32, eps: &Self, k: i64) -> Self {
        let nn = n as i64;
        let Some(t0) = support_floor(n, k) else {
            return 0.0;
        };
        let upper_terms = (nn - t0) / 2 + 1;
        let total_terms = nn + 1;
        if upper_terms * 2 <= total_terms + 1 {
            kahan_sum((0..upper_terms).map(|s| Self::ber_pmf(n, eps, t0 + 2 * s)))
        } else {
            let lower_terms = total_terms - upper_terms;
            let below = kahan_sum((0..lower_terms).map(|s| Self::ber_pmf(n, eps, t0 - 2 - 2 * s)));
            (1.0 - below).clamp(0.0, 1.0)
        }
    }

    fn hyp_pmf(n: u32, p: i64, l: u32, k: i64) -> Self {
        let ll = l as i64;
        if k.abs() > ll || (k - ll).rem_euclid(2) != 0 {
            return 0.0;
        }
        let a = ((n as i64 + p) / 2) as u64; // +1 entries
        let b = n as u64 - a;
        let j = ((ll + k) / 2) as u64; // +1 entries picked
        let picked_minus = l as u64 - j;
        if j > a || picked_minus > b {
            return 0.0;
        }
        (special::ln_choose(a, j) + special::ln_choose(b, picked_minus)
            - special::ln_choose(n as u64, l as u64))
            .exp()
    }

    fn hyp_tail(n: u32, p: i64, l: u32, k: i64) -> Self {
        let ll = l as i64;
        if k > ll {
            return 0.0;
        }
        if k <= -ll {
            return 1.0;
        }
        let t0 = if (k - ll).rem_euclid(2) == 0 { k } else { k + 1 };
        let upper_terms = (ll - t0) / 2 + 1;
        let total_terms = ll + 1;
        if upper_terms * 2 <= total_terms + 1 {
            kahan_sum((0..upper_terms).map(|s| Self::hyp_pmf(n, p, l, t0 + 2 * s)))
        } else {
            let lower_terms = total_terms - upper_terms;
            let below =
                kahan_sum((0..lower_terms).map(|s| Self::hyp_pmf(n, p, l, t0 - 2 - 2 * s)));
            (1.0 - below).clamp(0.0, 1.0)
        }
    }
}

/// Exact binomial coefficient.
pub fn big_choose(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn rational_pow(base: &BigRational, exp: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

impl ProbKernel for BigRational {
    fn ber_pmf(n: u32, eps: &Self, k: i64) -> Self {
        let nn = n as i64;
        if k.abs() > nn || (k - nn).rem_euclid(2) != 0 {
            return Self::zero();
        }
        let j = ((nn + k) / 2) as u64;
        let two = BigRational::from_int(2);
        let p = (Self::one() + eps.clone()) / two.clone();
        let q = (Self::one() - eps.clone()) / two;
        BigRational::from_integer(big_choose(n as u64, j))
            * rational_pow(&p, j)
            * rational_pow(&q, n as u64 - j)
    }

    fn ber_tail(n: u32, eps: &Self, k: i64) -> Self {
        let nn = n as i64;
        let Some(t0) = support_floor(n, k) else {
            return Self::zero();
        };
        let mut acc = Self::zero();
        let mut t = t0;
        while t <= nn {
            acc += Self::ber_pmf(n, eps, t);
            t += 2;
        }
        acc
    }

    fn hyp_pmf(n: u32, p: i64, l: u32, k: i64) -> Self {
        let ll = l as i64;
        if k.abs() > ll || (k - ll).rem_euclid(2) != 0 {
            return Self::zero();
        }
        let a = ((n as i64 + p) / 2) as u64;
        let b = n as u64 - a;
        let j = ((ll + k) / 2) as u64;
        let picked_minus = l as u64 - j;
        if j > a || picked_minus > b {
            return Self::zero();
        }
        BigRational::new(
            big_choose(a, j) * big_choose(b, picked_minus),
            big_choose(n as u64, l as u64),
        )
    }

    fn hyp_tail(n: u32, p: i64, l: u32, k: i64) -> Self {
        let ll = l as i64;
        if k > ll {
            return Self::zero();
        }
        let t0 = if k <= -ll {
            -ll
        } else if (k - ll).rem_euclid(2) == 0 {
            k
        } else {
            k + 1
        };
        let mut acc = Self::zero();
        let mut t = t0;
        while t <= ll {
            acc += Self::hyp_pmf(n, p, l, t);
            t += 2;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    #[test]
    fn support_floor_edges() {
        assert_eq!(support_floor(3, -3), Some(-3));
        assert_eq!(support_floor(3, -4), Some(-3));
        assert_eq!(support_floor(3, 0), Some(1));
        assert_eq!(support_floor(3, 1), Some(1));
        assert_eq!(support_floor(3, 4), None);
        assert_eq!(support_floor(0, 0), Some(0));
        assert_eq!(support_floor(0, 1), None);
    }

    #[test]
    fn rational_matches_f64_small() {
        let eps_f = 0.25f64;
        let eps_r = Exact::from_ratio(1, 4);
        for n in [0u32, 1, 2, 5, 9] {
            for k in -(n as i64 + 1)..=(n as i64 + 1) {
                let a = f64::ber_pmf(n, &eps_f, k);
                let b = Exact::ber_pmf(n, &eps_r, k).as_f64();
                assert!((a - b).abs() < 1e-13, "pmf n={n} k={k}: {a} vs {b}");
                let a = f64::ber_tail(n, &eps_f, k);
                let b = Exact::ber_tail(n, &eps_r, k).as_f64();
                assert!((a - b).abs() < 1e-13, "tail n={n} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hyp_rational_matches_f64_small() {
        for n in [2u32, 4, 6, 10] {
            for p in (-(n as i64)..=n as i64).step_by(2) {
                for l in 0..=n {
                    for k in -(l as i64)..=l as i64 {
                        let a = f64::hyp_pmf(n, p, l, k);
                        let b = Exact::hyp_pmf(n, p, l, k).as_f64();
                        assert!((a - b).abs() < 1e-13, "n={n} p={p} l={l} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn big_choose_values() {
        assert_eq!(big_choose(6, 3), BigInt::from(20));
        assert_eq!(big_choose(30, 15), BigInt::from(155117520u64));
        assert_eq!(big_choose(5, 0), BigInt::one());
    }
}
