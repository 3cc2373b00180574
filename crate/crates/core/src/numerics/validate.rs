//! Numeric validation of the analytic estimates and inequalities the
//! bias bounds rest on, evaluated with exact tails on finite grids.
//!
//! Hard inequalities must hold pointwise; approximation statements are
//! checked by fitting the implied constant over the grid and reporting
//! it. All logarithms are base two.

use super::{ber_pmf, ber_tail, hyp_tail, normal_upper, sbias, BiasEps, Prob, RoundParam};
use crate::rng::{DetRng, DetRngExt};
use rand::Rng as _;

/// One checked grid point (or summary line).
#[derive(Debug, Clone)]
pub struct EstimateRow {
    pub proposition: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl EstimateRow {
    pub fn csv_header() -> &'static str {
        "proposition,params,lhs,rhs,margin,pass"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.17e},{:.17e},{:.17e},{}",
            self.proposition, self.params, self.lhs, self.rhs, self.margin, self.pass
        )
    }
}

/// Empirical caps on the implied constants of the approximation
/// statements, measured over the default grid with headroom. A fitted
/// constant above its cap signals a numerics regression.
pub const CAP_PMF_NORMAL_APPROX: f64 = 1.0;
pub const CAP_PMF_RATIO_APPROX: f64 = 2.0;
pub const CAP_SBIAS_LINEARIZATION: f64 = 1.0;
pub const CAP_EXP_MOMENT_BOUND: f64 = 8.0;
pub const CAP_TAIL_NORMAL_APPROX: f64 = 1.0;

/// Grid description; `Default` covers every proposition's stated range
/// at desk scale.
#[derive(Debug, Clone)]
pub struct ValidationGrid {
    /// Sizes for the ±1-sum binomial checks.
    pub ber_ns: Vec<u32>,
    /// Population sizes for the hypergeometric checks (must be even).
    pub hyp_ns: Vec<u32>,
    /// Round parameters for the exponential-moment check.
    pub round_ms: Vec<u32>,
    /// Number of random instances of the weighted partial-sum inequality.
    pub partial_sum_instances: u32,
    pub seed: u64,
}

impl Default for ValidationGrid {
    fn default() -> Self {
        Self {
            ber_ns: vec![50, 101, 200, 401, 800],
            hyp_ns: vec![30, 90, 182],
            round_ms: vec![25, 49, 101],
            partial_sum_instances: 200,
            seed: 0xFA1F,
        }
    }
}

fn log2f(n: u32) -> f64 {
    (n as f64).log2()
}

/// Evaluate every check on the grid; never aborts, reports rows.
pub fn validate_estimates(grid: &ValidationGrid) -> Vec<EstimateRow> {
    let mut rows = Vec::new();
    pmf_normal_approx(grid, &mut rows);
    pmf_ratio_approx(grid, &mut rows);
    tail_lipschitz(grid, &mut rows);
    sbias_linearization(grid, &mut rows);
    exp_moment_bound(grid, &mut rows);
    tail_normal_approx(grid, &mut rows);
    hoeffding_binomial(grid, &mut rows);
    hoeffding_hypergeometric(grid, &mut rows);
    weighted_partial_sum(grid, &mut rows);
    rows
}

fn push_fit(rows: &mut Vec<EstimateRow>, name: &str, max_implied: f64, cap: f64) {
    rows.push(EstimateRow {
        proposition: format!("{name}-fitted"),
        params: "max-over-grid".into(),
        lhs: max_implied,
        rhs: cap,
        margin: cap - max_implied,
        pass: max_implied <= cap,
    });
}

/// pmf(n,eps,t) ≈ sqrt(2/pi)/sqrt(n) · exp(-(t-εn)²/2n), with relative
/// error ξ·(ε²|t| + 1/n + |t|³/n² + ε⁴n) on |t| ≤ n^(3/5), |ε| ≤ n^(-2/5).
fn pmf_normal_approx(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    let mut max_implied = 0.0f64;
    for &n in &grid.ber_ns {
        let t_max = (n as f64).powf(0.6).floor() as i64;
        let e_max = (n as f64).powf(-0.4);
        for frac in [0.0, 0.3, 1.0, -0.7] {
            let eps = e_max * frac;
            let e = BiasEps::new(eps).unwrap();
            for t in (-t_max..=t_max).step_by(3) {
                if (t - n as i64).rem_euclid(2) != 0 {
                    continue;
                }
                let pmf = ber_pmf(n, e, t);
                let nf = n as f64;
                let approx = (2.0 / std::f64::consts::PI).sqrt() / nf.sqrt()
                    * (-(t as f64 - eps * nf).powi(2) / (2.0 * nf)).exp();
                let rel_err = (pmf / approx - 1.0).abs();
                let formula = eps * eps * t.abs() as f64
                    + 1.0 / nf
                    + (t.abs() as f64).powi(3) / (nf * nf)
                    + eps.powi(4) * nf;
                let implied = rel_err / formula;
                max_implied = max_implied.max(implied);
                if t.abs() == t_max || t == 0 || (t - n as i64).rem_euclid(2) == 0 && t == 1 {
                    rows.push(EstimateRow {
                        proposition: "pmf-normal-approx".into(),
                        params: format!("n={n};eps={eps:.4};t={t}"),
                        lhs: rel_err,
                        rhs: formula,
                        margin: implied,
                        pass: implied <= CAP_PMF_NORMAL_APPROX,
                    });
                }
            }
        }
    }
    push_fit(rows, "pmf-normal-approx", max_implied, CAP_PMF_NORMAL_APPROX);
}

/// pmf(n,eps,t-x')/pmf(n,eps,t-x) ≈ exp((-2(t-εn)x + x² + 2(t-εn)x' - x'²)/2n)
/// with relative error φ·log^1.5(n)/sqrt(n) on the c=1 domain.
fn pmf_ratio_approx(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    let mut max_implied = 0.0f64;
    for &n in &grid.ber_ns {
        let nf = n as f64;
        let bound = (nf * log2f(n)).sqrt().floor() as i64;
        let eps = 0.5 * (log2f(n) / nf).sqrt();
        let e = BiasEps::new(eps).unwrap();
        let formula = log2f(n).powf(1.5) / nf.sqrt();
        for t in [0i64, bound / 2, bound] {
            for x in [-bound, 0, bound / 3] {
                for xp in [bound, -bound / 2] {
                    let tx = t - x;
                    let txp = t - xp;
                    if tx.abs() > n as i64
                        || txp.abs() > n as i64
                        || (tx - n as i64).rem_euclid(2) != 0
                        || (txp - n as i64).rem_euclid(2) != 0
                    {
                        continue;
                    }
                    let num = ber_pmf(n, e, txp);
                    let den = ber_pmf(n, e, tx);
                    if den == 0.0 {
                        continue;
                    }
                    let t0 = t as f64 - eps * nf;
                    let approx = ((-2.0 * t0 * x as f64 + (x * x) as f64
                        + 2.0 * t0 * xp as f64
                        - (xp * xp) as f64)
                        / (2.0 * nf))
                        .exp();
                    let rel_err = (num / den / approx - 1.0).abs();
                    let implied = rel_err / formula;
                    max_implied = max_implied.max(implied);
                    rows.push(EstimateRow {
                        proposition: "pmf-ratio-approx".into(),
                        params: format!("n={n};t={t};x={x};x'={xp}"),
                        lhs: rel_err,
                        rhs: formula,
                        margin: implied,
                        pass: implied <= CAP_PMF_RATIO_APPROX,
                    });
                }
            }
        }
    }
    push_fit(rows, "pmf-ratio-approx", max_implied, CAP_PMF_RATIO_APPROX);
}

/// |tail(n,eps,k) - tail(n,eps,k')| <= |k-k'|/sqrt(n). Hard inequality.
fn tail_lipschitz(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    for &n in &grid.ber_ns {
        let k_max = (n as f64).powf(0.6).floor() as i64;
        let e_max = (n as f64).powf(-0.4);
        for frac in [0.0, 1.0, -0.5] {
            let e = BiasEps::new(e_max * frac).unwrap();
            for k in (-k_max..=k_max).step_by((k_max as usize / 8).max(1)) {
                for kp in [-k_max, 0, 3, k_max] {
                    let lhs = (ber_tail(n, e, k) - ber_tail(n, e, kp)).abs();
                    let rhs = (k - kp).abs() as f64 / (n as f64).sqrt();
                    rows.push(EstimateRow {
                        proposition: "tail-lipschitz".into(),
                        params: format!("n={n};eps={:.4};k={k};k'={kp}", e.value()),
                        lhs,
                        rhs,
                        margin: rhs - lhs,
                        pass: lhs <= rhs,
                    });
                }
            }
        }
    }
}

/// sbias(n', tail(n,eps,k)) ≈ (εn - k)/sqrt(n·n') with error
/// φ·log^1.5(n)/sqrt(n·n') on the c=1 domain.
fn sbias_linearization(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    let mut max_implied = 0.0f64;
    for &n in &grid.ber_ns {
        let nf = n as f64;
        for npf in [1.0, 4.0, 9.0] {
            let np = (nf * npf) as u32;
            let k_max = (nf * log2f(n)).sqrt().floor() as i64;
            let eps = 0.5 * (log2f(n) / nf).sqrt();
            let e = BiasEps::new(eps).unwrap();
            for k in [-k_max, 0, k_max / 2, k_max] {
                if (k - n as i64).rem_euclid(2) != 0 {
                    continue;
                }
                let delta = ber_tail(n, e, k);
                let got = sbias(np, Prob::new(delta).unwrap()).value();
                let lin = (eps * nf - k as f64) / (nf * np as f64).sqrt();
                let err = (got - lin).abs();
                let formula = log2f(n).powf(1.5) / (nf * np as f64).sqrt();
                let implied = err / formula;
                max_implied = max_implied.max(implied);
                rows.push(EstimateRow {
                    proposition: "sbias-linearization".into(),
                    params: format!("n={n};n'={np};k={k}"),
                    lhs: err,
                    rhs: formula,
                    margin: implied,
                    pass: implied <= CAP_SBIAS_LINEARIZATION,
                });
            }
        }
    }
    push_fit(rows, "sbias-linearization", max_implied, CAP_SBIAS_LINEARIZATION);
}

/// E[exp((αx + βx² + α'x' + β'x'²)/ms(i+1)) | x' typical] stays within
/// 1 ± φ·sqrt(log m / ml(i))·(1 + |x|/sqrt(ml(i))).
fn exp_moment_bound(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    let mut max_implied = 0.0f64;
    for &m in &grid.round_ms {
        let rp = RoundParam::new(m).unwrap();
        let lg = log2f(m);
        let horizon = m - (lg.powf(2.5).floor() as u32).min(m - 1);
        for i in [1u32, m / 4 + 1, horizon.max(1)] {
            let ml = rp.ml(i) as f64;
            let msi = rp.ms(i) as f64;
            let msi1 = rp.ms(i + 1) as f64;
            if msi1 == 0.0 {
                continue;
            }
            let eps = (lg / msi).sqrt().min(1.0);
            let e = BiasEps::new(eps).unwrap();
            let s_bound = (ml * lg).sqrt().floor() as i64;
            let a_bound = (msi * lg).sqrt().floor() as i64;
            // conditional distribution of x' on the typical set
            let support: Vec<i64> = (-(rp.ml(i) as i64)..=rp.ml(i) as i64)
                .filter(|x| x.abs() <= s_bound && (x - rp.ml(i) as i64).rem_euclid(2) == 0)
                .collect();
            let mass: f64 = support.iter().map(|&x| ber_pmf(rp.ml(i), e, x)).sum();
            if mass == 0.0 {
                continue;
            }
            // the conditioning must not raise E|x'|
            let e_abs_cond: f64 = support
                .iter()
                .map(|&x| x.abs() as f64 * ber_pmf(rp.ml(i), e, x))
                .sum::<f64>()
                / mass;
            let e_abs: f64 = (-(rp.ml(i) as i64)..=rp.ml(i) as i64)
                .map(|x| x.abs() as f64 * ber_pmf(rp.ml(i), e, x))
                .sum();
            if e_abs_cond > e_abs {
                continue;
            }
            for &x in &[0i64, s_bound / 2, -s_bound] {
                for (alpha, alphap, beta, betap) in [
                    (a_bound, a_bound, 1i64, 1i64),
                    (-a_bound, a_bound, -1, 1),
                    (a_bound / 2, -a_bound, 0, -1),
                ] {
                    let val: f64 = support
                        .iter()
                        .map(|&xp| {
                            ber_pmf(rp.ml(i), e, xp)
                                * ((alpha * x + beta * x * x + alphap * xp + betap * xp * xp)
                                    as f64
                                    / msi1)
                                    .exp()
                        })
                        .sum::<f64>()
                        / mass;
                    let err = (val - 1.0).abs();
                    let formula = (lg / ml).sqrt() * (1.0 + x.abs() as f64 / ml.sqrt());
                    let implied = err / formula;
                    max_implied = max_implied.max(implied);
                    rows.push(EstimateRow {
                        proposition: "exp-moment-bound".into(),
                        params: format!("m={m};i={i};x={x};a={alpha};a'={alphap};b={beta};b'={betap}"),
                        lhs: err,
                        rhs: formula,
                        margin: implied,
                        pass: implied <= CAP_EXP_MOMENT_BOUND,
                    });
                }
            }
        }
    }
    push_fit(rows, "exp-moment-bound", max_implied, CAP_EXP_MOMENT_BOUND);
}

/// tail(n,eps,k) ≈ Φ((k-εn)/sqrt(n)) with error
/// φ·log^1.5(n)/sqrt(n)·exp(-(k-εn)²/2n) (Φ is the normal upper tail).
fn tail_normal_approx(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    let mut max_implied = 0.0f64;
    for &n in &grid.ber_ns {
        let nf = n as f64;
        let k_max = (nf * log2f(n)).sqrt().floor() as i64;
        let eps = 0.5 * (log2f(n) / nf).sqrt();
        for e_val in [0.0, eps, -eps] {
            let e = BiasEps::new(e_val).unwrap();
            for k in [-k_max, -k_max / 3, 0, 1, k_max / 2, k_max] {
                let lhs_val = ber_tail(n, e, k);
                let z = (k as f64 - e_val * nf) / nf.sqrt();
                let approx = normal_upper(z);
                let err = (lhs_val - approx).abs();
                let formula = log2f(n).powf(1.5) / nf.sqrt() * (-z * z / 2.0).exp();
                let implied = err / formula;
                max_implied = max_implied.max(implied);
                rows.push(EstimateRow {
                    proposition: "tail-normal-approx".into(),
                    params: format!("n={n};eps={e_val:.4};k={k}"),
                    lhs: err,
                    rhs: formula,
                    margin: implied,
                    pass: implied <= CAP_TAIL_NORMAL_APPROX,
                });
            }
        }
    }
    push_fit(rows, "tail-normal-approx", max_implied, CAP_TAIL_NORMAL_APPROX);
}

/// Pr[|x - εn| >= t] <= 2·exp(-t²/2n). Hard inequality.
fn hoeffding_binomial(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    for &n in &grid.ber_ns {
        for eps in [0.0, 0.1, -0.62] {
            let e = BiasEps::new(eps).unwrap();
            let mean = eps * n as f64;
            let t_hi = (3.0 * (n as f64).sqrt()).ceil() as i64;
            for t in (1..=t_hi).step_by((t_hi as usize / 10).max(1)) {
                let up = ber_tail(n, e, (mean + t as f64).ceil() as i64);
                let down = 1.0 - ber_tail(n, e, (mean - t as f64).floor() as i64 + 1);
                let lhs = up + down;
                let rhs = 2.0 * (-(t * t) as f64 / (2.0 * n as f64)).exp();
                rows.push(EstimateRow {
                    proposition: "hoeffding-binomial".into(),
                    params: format!("n={n};eps={eps:.2};t={t}"),
                    lhs,
                    rhs,
                    margin: rhs - lhs,
                    pass: lhs <= rhs,
                });
            }
        }
    }
}

/// Hoeffding for the subset weight w of an l-subset, mean μ = l·p/n:
/// each one-sided tail Pr[±(w - μ) >= t] is at most exp(-t²/2l), and the
/// two-sided event carries the usual leading factor 2. (The one-sided
/// form is the one every internal argument uses; the two-sided form
/// without the factor 2 is false already at l odd, p = 0, t = 1, where
/// the weight can never hit its mean.)
fn hoeffding_hypergeometric(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    for &n in &grid.hyp_ns {
        for p in [0i64, (n as i64 / 4) & !1, n as i64 - 2] {
            let p = if (p - n as i64).rem_euclid(2) != 0 { p + 1 } else { p };
            for l in [n / 4, n / 2, n - 1] {
                let mu = l as f64 * p as f64 / n as f64;
                let t_hi = (3.0 * (l as f64).sqrt()).ceil() as i64;
                for t in (1..=t_hi).step_by((t_hi as usize / 6).max(1)) {
                    let up = hyp_tail(n, p, l, (mu + t as f64).ceil() as i64).unwrap();
                    let down =
                        1.0 - hyp_tail(n, p, l, (mu - t as f64).floor() as i64 + 1).unwrap();
                    let one_sided_bound = (-(t * t) as f64 / (2.0 * l as f64)).exp();
                    let lhs = up.max(down);
                    rows.push(EstimateRow {
                        proposition: "hoeffding-hypergeometric-onesided".into(),
                        params: format!("n={n};p={p};l={l};t={t}"),
                        lhs,
                        rhs: one_sided_bound,
                        margin: one_sided_bound - lhs,
                        pass: lhs <= one_sided_bound,
                    });
                    let lhs2 = up + down;
                    let rhs2 = 2.0 * one_sided_bound;
                    rows.push(EstimateRow {
                        proposition: "hoeffding-hypergeometric".into(),
                        params: format!("n={n};p={p};l={l};t={t}"),
                        lhs: lhs2,
                        rhs: rhs2,
                        margin: rhs2 - lhs2,
                        pass: lhs2 <= rhs2,
                    });
                }
            }
        }
    }
}

/// Random admissible instances of: nonnegative p_j with
/// Σ_{j>=i} p_j <= α(n+1-i) for all i in {k..n} imply
/// Σ p_j/(n+1-j) <= α·Σ 1/(n+1-j).
fn weighted_partial_sum(grid: &ValidationGrid, rows: &mut Vec<EstimateRow>) {
    let mut rng = DetRng::for_trial(grid.seed, 7);
    for inst in 0..grid.partial_sum_instances {
        let n = rng.random_range(2u32..40) as usize;
        let k = rng.random_range(1u32..=n as u32) as usize;
        let alpha: f64 = rng.random_range(0.1..5.0);
        let raw: Vec<f64> = (k..=n).map(|_| rng.random_range(0.0..1.0f64)).collect();
        // scale so the tightest suffix constraint binds exactly
        let mut scale = f64::INFINITY;
        for i in k..=n {
            let suffix: f64 = raw[(i - k)..].iter().sum();
            if suffix > 0.0 {
                scale = scale.min(alpha * (n + 1 - i) as f64 / suffix);
            }
        }
        let p: Vec<f64> = raw.iter().map(|v| v * scale).collect();
        let lhs: f64 = p
            .iter()
            .enumerate()
            .map(|(idx, v)| v / (n + 1 - (k + idx)) as f64)
            .sum();
        let rhs: f64 = alpha * (k..=n).map(|j| 1.0 / (n + 1 - j) as f64).sum::<f64>();
        rows.push(EstimateRow {
            proposition: "weighted-partial-sum".into(),
            params: format!("inst={inst};n={n};k={k};alpha={alpha:.3}"),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs + 1e-12,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_all_pass() {
        let rows = validate_estimates(&ValidationGrid::default());
        let failures: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
        assert!(
            failures.is_empty(),
            "{} failures, first: {:?}",
            failures.len(),
            failures.first()
        );
    }

    #[test]
    fn tail_lipschitz_example_point() {
        // n=101, eps=0, k=0 vs k'=3
        let lhs = (ber_tail(101, BiasEps::ZERO, 0) - ber_tail(101, BiasEps::ZERO, 3)).abs();
        assert!(lhs <= 3.0 / (101f64).sqrt());
    }

    #[test]
    fn hoeffding_example_point() {
        // n=50, eps=0, t=20: Pr[|x| >= 20] <= 2 e^{-4}
        let e = BiasEps::ZERO;
        let lhs = ber_tail(50, e, 20) + (1.0 - ber_tail(50, e, -19));
        assert!(lhs <= 2.0 * (-4.0f64).exp());
    }
}
