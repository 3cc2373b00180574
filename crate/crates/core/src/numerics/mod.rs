//! Probability kernels for the weighted coin-flipping analysis.
//!
//! Conventions (used consistently across the crate):
//!
//! * A ±1 coin with bias `eps` takes the value +1 with probability
//!   (1+eps)/2. The "binomial" here is the sum of `n` such coins,
//!   supported on {-n, ..., n} with the parity of `n`.
//! * `ber_tail(n, eps, k)` is the **upper** tail Pr[sum >= k].
//! * `normal_upper(x)` is the **upper** tail of the standard normal,
//!   ∫_x^∞ φ(t) dt. Note this is the complement of the usual CDF
//!   convention; every internal use follows the upper-tail reading, so
//!   larger arguments always mean smaller probabilities.
//! * For a schedule of `m` rounds, round `i` flips `ml(i) = m+1-i` coins
//!   and `ms(i) = Σ_{j>=i} ml(j)` coins remain from round `i` on.

mod validate;

pub use validate::{validate_estimates, EstimateRow, ValidationGrid};

use crate::scalar::ProbKernel;
use crate::special;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("round parameter must satisfy m >= 1, got {0}")]
    BadRoundParam(u32),
    #[error("strict mode requires m ≡ 1 (mod 4), got m = {0}")]
    NotStrict(u32),
    #[error("bias must lie in [-1, 1], got {0}")]
    BadBias(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    BadProb(f64),
    #[error("hypergeometric parameters invalid: n={n}, p={p}, l={l}")]
    BadHypergeometric { n: u32, p: i64, l: u32 },
}

/// Round parameter of the weighted protocols and games.
///
/// In strict mode `m ≡ 1 (mod 4)`, which makes the total coin count
/// `ms(1) = m(m+1)/2` odd, so an unbiased coin schedule can never tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundParam {
    m: u32,
    strict: bool,
}

impl RoundParam {
    /// Any m >= 1, strict-mode flag off.
    pub fn new(m: u32) -> Result<Self, NumericsError> {
        if m < 1 {
            return Err(NumericsError::BadRoundParam(m));
        }
        Ok(Self { m, strict: false })
    }

    /// Requires m ≡ 1 (mod 4).
    pub fn strict(m: u32) -> Result<Self, NumericsError> {
        if m < 1 {
            return Err(NumericsError::BadRoundParam(m));
        }
        if m % 4 != 1 {
            return Err(NumericsError::NotStrict(m));
        }
        Ok(Self { m, strict: true })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Coins flipped in round i (1-based): ml(i) = m+1-i.
    pub fn ml(&self, i: u32) -> u32 {
        debug_assert!((1..=self.m).contains(&i));
        self.m + 1 - i
    }

    /// Coins remaining from round i on: ms(i) = (m+1-i)(m+2-i)/2, with
    /// ms(m+1) = 0.
    pub fn ms(&self, i: u32) -> u32 {
        debug_assert!((1..=self.m + 1).contains(&i));
        let a = self.m + 1 - i;
        a * (a + 1) / 2
    }

    /// Total number of coins, ms(1).
    pub fn total_coins(&self) -> u32 {
        self.ms(1)
    }
}

/// Coin bias in [-1, 1]; the corresponding ±1 coin is +1 with probability
/// (1+ε)/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEps(f64);

impl BiasEps {
    pub fn new(eps: f64) -> Result<Self, NumericsError> {
        if !(-1.0..=1.0).contains(&eps) || eps.is_nan() {
            return Err(NumericsError::BadBias(eps));
        }
        Ok(Self(eps))
    }

    pub const ZERO: BiasEps = BiasEps(0.0);

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prob(f64);

impl Prob {
    pub fn new(p: f64) -> Result<Self, NumericsError> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(NumericsError::BadProb(p));
        }
        Ok(Self(p))
    }

    pub const HALF: Prob = Prob(0.5);

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Pr[sum of n ±1 coins with bias eps equals k]. Zero off support.
pub fn ber_pmf(n: u32, eps: BiasEps, k: i64) -> f64 {
    f64::ber_pmf(n, &eps.value(), k)
}

/// Upper tail Pr[sum >= k] of the n-coin sum.
pub fn ber_tail(n: u32, eps: BiasEps, k: i64) -> f64 {
    f64::ber_tail(n, &eps.value(), k)
}

/// Tolerance of the `sbias` inversion.
pub const SBIAS_TOL: f64 = 1e-12;

/// The bias ε with `ber_tail(n, ε, 0) = delta`, found by bisection
/// (the tail at 0 is monotone nondecreasing in ε).
///
/// Exact endpoints: `sbias(n, 0) = -1`, `sbias(n, 1) = 1`, and
/// `sbias(n, 1/2) = 0` for odd n.
pub fn sbias(n: u32, delta: Prob) -> BiasEps {
    let d = delta.value();
    if d == 0.0 {
        return BiasEps(-1.0);
    }
    if d == 1.0 {
        return BiasEps(1.0);
    }
    if d == 0.5 && n % 2 == 1 {
        return BiasEps(0.0);
    }
    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f64::ber_tail(n, &mid, 0) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BiasEps(0.5 * (lo + hi))
}

/// Hypergeometric pmf: weight of a uniform l-subset of a fixed ±1 vector
/// of length n and weight p.
pub fn hyp_pmf(n: u32, p: i64, l: u32, k: i64) -> Result<f64, NumericsError> {
    check_hyp(n, p, l)?;
    Ok(f64::hyp_pmf(n, p, l, k))
}

/// Upper tail Pr[subset weight >= k].
pub fn hyp_tail(n: u32, p: i64, l: u32, k: i64) -> Result<f64, NumericsError> {
    check_hyp(n, p, l)?;
    Ok(f64::hyp_tail(n, p, l, k))
}

fn check_hyp(n: u32, p: i64, l: u32) -> Result<(), NumericsError> {
    if p.unsigned_abs() > n as u64 || (p - n as i64).rem_euclid(2) != 0 || l > n {
        return Err(NumericsError::BadHypergeometric { n, p, l });
    }
    Ok(())
}

/// Standard normal **upper** tail, Φ(x) = (1/√(2π)) ∫_x^∞ e^{-t²/2} dt.
pub fn normal_upper(x: f64) -> f64 {
    0.5 * special::erfc(x / std::f64::consts::SQRT_2)
}

/// Tables of game values for a fixed (m, eps): `tail(i, y)` =
/// Pr[remaining sum from round i+1 on >= -y] = ber_tail(ms(i+1), eps, -y).
///
/// `i` ranges over 0..=m (i = 0 gives the value of the untouched game) and
/// `y` over the sums reachable after rounds 1..=i.
pub struct ValueTable {
    pub m: RoundParam,
    pub eps: BiasEps,
    rows: Vec<Vec<f64>>, // rows[i][y + ms1] for |y| <= ms1
}

impl ValueTable {
    pub fn build(m: RoundParam, eps: BiasEps) -> Self {
        let ms1 = m.total_coins() as i64;
        let mut rows = Vec::with_capacity(m.m() as usize + 1);
        for i in 0..=m.m() {
            let remaining = m.ms(i + 1);
            let mut row = vec![0.0; (2 * ms1 + 1) as usize];
            for (idx, slot) in row.iter_mut().enumerate() {
                let y = idx as i64 - ms1;
                *slot = ber_tail(remaining, eps, -y);
            }
            rows.push(row);
        }
        Self { m, eps, rows }
    }

    /// Value after rounds 1..=i produced partial sum y.
    pub fn value(&self, i: u32, y: i64) -> f64 {
        let ms1 = self.m.total_coins() as i64;
        debug_assert!(y.abs() <= ms1);
        self.rows[i as usize][(y + ms1) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::Exact;

    /// Brute-force pmf: enumerate all 2^n sign patterns with product
    /// weights. Independent oracle for the log-space path.
    fn ber_pmf_brute(n: u32, eps: f64, k: i64) -> f64 {
        let p = (1.0 + eps) / 2.0;
        let mut total = 0.0;
        for mask in 0u64..(1 << n) {
            let ones = mask.count_ones() as i64;
            let sum = 2 * ones - n as i64;
            if sum == k {
                total += p.powi(ones as i32) * (1.0 - p).powi((n as i64 - ones) as i32);
            }
        }
        total
    }

    #[test]
    fn ber_pmf_examples() {
        assert!((ber_pmf(2, BiasEps::ZERO, 0) - 0.5).abs() < 1e-15);
        assert!((ber_pmf(1, BiasEps::new(1.0).unwrap(), 1) - 1.0).abs() < 1e-15);
        let expect = ber_pmf_brute(5, 0.2, 3);
        assert!((ber_pmf(5, BiasEps::new(0.2).unwrap(), 3) - expect).abs() < 1e-14);
        // off support
        assert_eq!(ber_pmf(5, BiasEps::ZERO, 2), 0.0);
        assert_eq!(ber_pmf(5, BiasEps::ZERO, 7), 0.0);
    }

    #[test]
    fn ber_tail_examples() {
        assert!((ber_tail(3, BiasEps::ZERO, 0) - 0.5).abs() < 1e-15);
        assert!((ber_tail(4, BiasEps::ZERO, -4) - 1.0).abs() < 1e-15);
        let eps = BiasEps::new(0.2).unwrap();
        let expect: f64 = [1i64, 3, 5].iter().map(|&k| ber_pmf_brute(5, 0.2, k)).sum();
        assert!((ber_tail(5, eps, 1) - expect).abs() < 1e-14);
        // n = 0 edge
        assert_eq!(ber_tail(0, BiasEps::ZERO, 0), 1.0);
        assert_eq!(ber_tail(0, BiasEps::ZERO, 1), 0.0);
        assert_eq!(ber_tail(0, BiasEps::ZERO, -1), 1.0);
    }

    #[test]
    fn ber_pmf_sums_to_one() {
        for n in [1u32, 7, 23, 60] {
            for eps in [-0.9, -0.3, 0.0, 0.41, 0.97] {
                let e = BiasEps::new(eps).unwrap();
                let total: f64 = (-(n as i64)..=n as i64).map(|k| ber_pmf(n, e, k)).sum();
                assert!((total - 1.0).abs() < 1e-12, "n={n} eps={eps}: {total}");
            }
        }
    }

    #[test]
    fn ber_tail_monotone_and_telescoping() {
        let eps = BiasEps::new(-0.35).unwrap();
        for n in [6u32, 15] {
            for k in -(n as i64)..=(n as i64) {
                let a = ber_tail(n, eps, k);
                let b = ber_tail(n, eps, k + 1);
                assert!(a >= b - 1e-15);
                // tail(k) - tail(k+2) = pmf(k) + pmf(k+1), one term zero
                let lhs = a - ber_tail(n, eps, k + 2);
                let rhs = ber_pmf(n, eps, k) + ber_pmf(n, eps, k + 1);
                assert!((lhs - rhs).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sbias_examples() {
        // odd total: exactly zero
        assert_eq!(sbias(15, Prob::HALF).value(), 0.0);
        assert_eq!(sbias(3, Prob::new(1.0).unwrap()).value(), 1.0);
        assert_eq!(sbias(3, Prob::new(0.0).unwrap()).value(), -1.0);
        let eps = sbias(5, Prob::new(0.7).unwrap());
        assert!((ber_tail(5, eps, 0) - 0.7).abs() <= SBIAS_TOL);
    }

    #[test]
    fn sbias_round_trip_grid() {
        for n in [4u32, 5, 6, 15, 45, 91] {
            for delta in [0.01, 0.2, 0.3, 0.5, 0.7, 0.93, 0.999] {
                let d = Prob::new(delta).unwrap();
                let eps = sbias(n, d);
                assert!(
                    (ber_tail(n, eps, 0) - delta).abs() <= SBIAS_TOL,
                    "n={n} delta={delta}"
                );
            }
        }
    }

    /// Enumerate all l-subsets of a concrete ±1 vector: oracle for hyp.
    fn hyp_pmf_brute(n: u32, p: i64, l: u32, k: i64) -> f64 {
        let ones = ((n as i64 + p) / 2) as u32;
        let v: Vec<i64> = (0..n).map(|i| if i < ones { 1 } else { -1 }).collect();
        let mut hits = 0u64;
        let mut total = 0u64;
        for mask in 0u64..(1 << n) {
            if mask.count_ones() != l {
                continue;
            }
            total += 1;
            let w: i64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| v[i as usize]).sum();
            if w == k {
                hits += 1;
            }
        }
        hits as f64 / total as f64
    }

    #[test]
    fn hyp_examples() {
        assert!((hyp_pmf(2, 0, 1, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((hyp_pmf(4, 0, 2, 0).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((hyp_pmf(6, 6, 3, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((hyp_tail(4, 0, 2, -2).unwrap() - 1.0).abs() < 1e-15);
        assert!((hyp_tail(4, 0, 2, 1).unwrap() - 1.0 / 6.0).abs() < 1e-14);
        // brute-force cross check
        for (n, p, l) in [(6u32, 2i64, 3u32), (8, -4, 5), (10, 0, 4)] {
            for k in -(l as i64)..=(l as i64) {
                let got = hyp_pmf(n, p, l, k).unwrap();
                let want = hyp_pmf_brute(n, p, l, k);
                assert!((got - want).abs() < 1e-13, "n={n} p={p} l={l} k={k}");
            }
        }
    }

    #[test]
    fn hyp_rejects_bad_params() {
        assert!(hyp_pmf(4, 5, 2, 0).is_err());
        assert!(hyp_pmf(4, 1, 2, 0).is_err()); // parity mismatch
        assert!(hyp_tail(4, 0, 5, 0).is_err()); // l > n
    }

    #[test]
    fn hyp_pmf_sums_to_one() {
        for n in [10u32, 31, 60] {
            for p in [-(n as i64), -3 + (n as i64 % 2) as i64 * 0, 0, 7, n as i64] {
                let p = if (p - n as i64).rem_euclid(2) != 0 { p + 1 } else { p };
                if p.abs() > n as i64 {
                    continue;
                }
                for l in [0u32, 1, n / 2, n] {
                    let total: f64 = (-(l as i64)..=l as i64)
                        .map(|k| hyp_pmf(n, p, l, k).unwrap())
                        .sum();
                    assert!((total - 1.0).abs() < 1e-12, "n={n} p={p} l={l}");
                }
            }
        }
    }

    #[test]
    fn hyp_mean_identity() {
        // mean of the subset weight is l*p/n
        for (n, p, l) in [(20u32, 4i64, 7u32), (31, -5, 13), (12, 0, 6)] {
            let mean: f64 = (-(l as i64)..=l as i64)
                .map(|k| k as f64 * hyp_pmf(n, p, l, k).unwrap())
                .sum();
            let expect = l as f64 * p as f64 / n as f64;
            assert!((mean - expect).abs() < 1e-10, "n={n} p={p} l={l}");
        }
    }

    /// Adaptive Simpson quadrature of the defining integral; oracle for
    /// the erfc-based implementation.
    fn normal_upper_quad(x: f64) -> f64 {
        fn phi(t: f64) -> f64 {
            (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
        }
        fn simpson(a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (phi(a) + 4.0 * phi(0.5 * (a + b)) + phi(b))
        }
        fn adapt(a: f64, b: f64, whole: f64, depth: u32) -> f64 {
            let mid = 0.5 * (a + b);
            let l = simpson(a, mid);
            let r = simpson(mid, b);
            if depth == 0 || (l + r - whole).abs() < 1e-13 {
                l + r + (l + r - whole) / 15.0
            } else {
                adapt(a, mid, l, depth - 1) + adapt(mid, b, r, depth - 1)
            }
        }
        // integrate up to x + 40 sigma
        let hi = x.max(0.0) + 40.0;
        adapt(x, hi, simpson(x, hi), 40)
    }

    #[test]
    fn normal_upper_examples() {
        assert!((normal_upper(0.0) - 0.5).abs() < 1e-14);
        assert!(normal_upper(40.0) <= 1e-300);
        let quad = normal_upper_quad(1.0);
        assert!((normal_upper(1.0) - quad).abs() < 1e-11);
        assert!((normal_upper(1.0) - 0.158_655_253_931_457_07).abs() < 1e-12);
        for x in [-3.0, -0.7, 0.3, 2.2] {
            assert!((normal_upper(x) + normal_upper(-x) - 1.0).abs() < 1e-12);
            assert!((normal_upper(x) - normal_upper_quad(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn mixture_identity_binomial_hypergeometric() {
        // Subsampling l of 2N biased coins uniformly yields l biased coins:
        // Σ_p ber_pmf(2N, ε, p) · hyp_tail(2N, p, l, k) = ber_tail(l, ε, k).
        for big_n in [3u32, 10, 25] {
            let n = 2 * big_n;
            for eps in [0.0, -0.3, 0.55] {
                let e = BiasEps::new(eps).unwrap();
                for l in [0u32, 1, big_n, n] {
                    for k in [-(l as i64), -1, 0, 2, l as i64] {
                        let mix: f64 = (-(n as i64)..=n as i64)
                            .map(|p| {
                                let w = ber_pmf(n, e, p);
                                if w == 0.0 {
                                    0.0
                                } else {
                                    w * hyp_tail(n, p, l, k).unwrap()
                                }
                            })
                            .sum();
                        let direct = ber_tail(l, e, k);
                        assert!(
                            (mix - direct).abs() < 1e-10,
                            "N={big_n} eps={eps} l={l} k={k}: {mix} vs {direct}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mixture_identity_exact_rational() {
        // Same identity, exactly, in rationals.
        let eps = Exact::from_ratio(1, 3);
        let n = 12u32;
        for l in [0u32, 3, 7] {
            for k in [-2i64, 0, 1] {
                let mut mix = Exact::from_int(0);
                for p in -(n as i64)..=n as i64 {
                    mix = mix
                        + Exact::ber_pmf(n, &eps, p) * Exact::hyp_tail(n, p, l, k);
                }
                assert_eq!(mix, Exact::ber_tail(l, &eps, k), "l={l} k={k}");
            }
        }
    }

    #[test]
    fn round_param_ml_ms() {
        let m = RoundParam::strict(5).unwrap();
        assert_eq!(m.ml(1), 5);
        assert_eq!(m.ml(5), 1);
        assert_eq!(m.ms(1), 15);
        assert_eq!(m.ms(5), 1);
        assert_eq!(m.ms(6), 0);
        assert_eq!(m.total_coins() % 2, 1); // strict => odd
        assert!(RoundParam::strict(4).is_err());
        assert!(RoundParam::new(0).is_err());
        // ms(i) = Σ_{j>=i} ml(j)
        for i in 1..=5u32 {
            let direct: u32 = (i..=5).map(|j| m.ml(j)).sum();
            assert_eq!(m.ms(i), direct);
        }
    }

    #[test]
    fn value_table_matches_direct() {
        let m = RoundParam::strict(5).unwrap();
        let eps = BiasEps::new(0.1).unwrap();
        let t = ValueTable::build(m, eps);
        for i in 0..=5u32 {
            for y in [-15i64, -4, 0, 3, 15] {
                let want = ber_tail(m.ms(i + 1), eps, -y);
                assert!((t.value(i, y) - want).abs() < 1e-15);
            }
        }
    }
}
