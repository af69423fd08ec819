//! Quantiles of Student's t and the standard normal distribution.
//!
//! The t quantile inverts the CDF written through the regularized
//! incomplete beta function, `P(T > t) = ½·I_x(ν/2, ½)` with
//! `x = ν/(ν+t²)`, using safeguarded Newton steps. Both `x` and `1 − x` are
//! carried explicitly so neither tail loses precision to cancellation.

use libm::{erfc, exp, fabs, lgamma, log, sqrt};

use crate::error::{Error, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const PI: f64 = core::f64::consts::PI;

/// `p`-quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile(p: f64, dof: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if dof == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let tail = if p > 0.5 { 1.0 - p } else { p };
    let t = upper_t(tail, dof as f64);
    Ok(if p > 0.5 { t } else { -t })
}

/// `p`-quantile of the standard normal distribution.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(normal_quantile_unchecked(p))
}

/// Upper-tail probability `P(T > t)` for `t ≥ 0`.
fn t_upper_tail(t: f64, dof: f64) -> f64 {
    let t2 = t * t;
    let x = dof / (dof + t2);
    let y = t2 / (dof + t2);
    0.5 * inc_beta(0.5 * dof, 0.5, x, y)
}

fn t_density(t: f64, dof: f64) -> f64 {
    let ln_norm = lgamma(0.5 * (dof + 1.0)) - lgamma(0.5 * dof) - 0.5 * log(dof * PI);
    exp(ln_norm - 0.5 * (dof + 1.0) * log(1.0 + t * t / dof))
}

/// Solves `P(T > t) = tail` for `t > 0`, `0 < tail < ½`.
fn upper_t(tail: f64, dof: f64) -> f64 {
    // Bracket the root; the tail is strictly decreasing in t.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_upper_tail(hi, dof) > tail {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let guess = -normal_quantile_unchecked(tail);
    let mut t = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..200 {
        let f = t_upper_tail(t, dof) - tail;
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let step = f / t_density(t, dof);
        let mut next = t + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if fabs(next - t) <= 1e-15 * next.max(1.0) || hi - lo <= 1e-15 * hi {
            return next;
        }
        t = next;
    }
    t
}

/// Regularized incomplete beta `I_x(a, b)`; `y` must equal `1 − x` and is
/// passed separately to keep precision near either end.
fn inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(y);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, y) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Acklam's rational approximation followed by one Halley refinement
/// against `erfc`.
fn normal_quantile_unchecked(p: f64) -> f64 {
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

    let x = if p < P_LOW {
        let q = sqrt(-2.0 * log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = sqrt(-2.0 * log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = 0.5 * erfc(-x / SQRT_2) - p;
    let u = e * sqrt(2.0 * PI) * exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}
