//! Gaussian quantiles and exact binomial confidence bounds.

use statrs::function::beta::beta_reg;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Probabilities are kept this far from 0 and 1 before taking quantiles.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

pub fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, accurate to ~1e-15 absolute over
/// `[1e-300, 1 - 1e-16]`.
pub fn phi_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!(
            "quantile probability {p} outside (0,1)"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        // exact for p >= 0.5
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

// p in (0, 0.5)
fn lower_quantile(p: f64) -> f64 {
    let mut x = acklam(p);
    // Halley refinement against the erfc-based CDF
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

// Acklam's rational approximation (relative error ~1.15e-9).
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

fn check_binomial(k: u64, n: u64, alpha: f64) -> Result<()> {
    if n == 0 || k > n {
        return Err(Error::param(format!(
            "need 0 <= k <= n, n >= 1 (k={k}, n={n})"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!(
            "confidence level alpha={alpha} outside (0,1)"
        )));
    }
    Ok(())
}

/// One-sided Clopper–Pearson lower bound: the `p` at which
/// `P[Bin(n, p) >= k] = alpha`, i.e. the `alpha` quantile of
/// `Beta(k, n - k + 1)`. Found by bisection on the regularized incomplete
/// beta function.
pub fn clopper_pearson_lower(k: u64, n: u64, alpha: f64) -> Result<f64> {
    check_binomial(k, n, alpha)?;
    if k == 0 {
        return Ok(0.0);
    }
    let (a, b) = (k as f64, (n - k + 1) as f64);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // I_p(a, b) increases in p
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-sided Clopper–Pearson upper bound.
pub fn clopper_pearson_upper(k: u64, n: u64, alpha: f64) -> Result<f64> {
    check_binomial(k, n, alpha)?;
    Ok(1.0 - clopper_pearson_lower(n - k, n, alpha)?)
}

/// `ln P[Bin(m, 1/2) >= k]` by log-space summation.
pub fn ln_binomial_half_upper_tail(k: u64, m: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > m {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> = (k..=m).map(|j| ln_binomial(m, j)).collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln() - m as f64 * std::f64::consts::LN_2
}

/// Exact two-sided binomial test of `k` successes in `m` trials against
/// `p = 1/2`.
pub fn binomial_test_half(k: u64, m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let hi = k.max(m - k);
    if 2 * hi == m {
        return 1.0;
    }
    (2.0 * ln_binomial_half_upper_tail(hi, m).exp()).min(1.0)
}
