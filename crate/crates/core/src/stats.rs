//! Chi-square tail probabilities.

use libm::{exp, fabs, log};

/// Natural log of the gamma function (Lanczos, g = 7, n = 9), `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return log(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * log(2.0 * core::f64::consts::PI) + (x + 0.5) * log(t) - t + log(acc)
}

const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

/// Regularized lower incomplete gamma by its power series; use for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut ap = a;
    for _ in 0..1_000_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if fabs(term) < fabs(sum) * EPS {
            break;
        }
    }
    sum * exp(-x + a * log(x) - ln_gamma(a))
}

/// Regularized upper incomplete gamma by Lentz's continued fraction; use for
/// `x >= a + 1`.
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1_000_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if fabs(delta - 1.0) < EPS {
            break;
        }
    }
    exp(-x + a * log(x) - ln_gamma(a)) * h
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

/// Survival function of the chi-square distribution: `P[X >= statistic]`.
pub fn chi2_sf(statistic: f64, dof: f64) -> f64 {
    gamma_q(dof / 2.0, statistic / 2.0).clamp(0.0, 1.0)
}

/// Pearson statistic of `counts` against a uniform expectation.
pub fn chi2_uniform_statistic(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 || counts.is_empty() {
        return 0.0;
    }
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum()
}
