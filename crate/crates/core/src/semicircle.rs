//! The standard semicircle law on `[-2, 2]`, density `√(4-x²) / 2π`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::spectral::Esd;

pub fn pdf(x: f64) -> f64 {
    if x.abs() <= 2.0 {
        (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// `1/2 + x√(4-x²)/(4π) + arcsin(x/2)/π` on `[-2, 2]`.
pub fn cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        let v = 0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (0.5 * x).asin() / PI;
        v.clamp(0.0, 1.0)
    }
}

/// Inverse of [`cdf`] by bisection, to within a few ulps of the root.
pub fn quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return -2.0;
    }
    if u >= 1.0 {
        return 2.0;
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Catalan number `C_t = binom(2t, t) / (t + 1)`, exact.
pub fn catalan(t: u32) -> BigUint {
    let mut c = BigUint::one();
    for s in 0..t {
        // C_{s+1} = C_s · 2(2s+1) / (s+2), always exact
        c = c * BigUint::from(2 * (2 * s + 1)) / BigUint::from(s + 2);
    }
    c
}

/// `∫ x^k f(x) dx`: zero for odd `k`, `C_{k/2}` for even `k`.
pub fn moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        catalan(k / 2).to_f64().unwrap_or(f64::INFINITY)
    }
}

/// `sup_x |F_e(x) - F(x)|`, evaluated at both one-sided limits of every jump.
pub fn ks_distance(e: &Esd) -> f64 {
    let pts = e.points();
    let total = pts.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < pts.len() {
        let x = pts[i];
        let mut j = i;
        while j < pts.len() && pts[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((i as f64 / total - f).abs()).max((j as f64 / total - f).abs());
        i = j;
    }
    d
}

/// `(1/N) Σ x_i^k` over the ESD's points.
pub fn empirical_moment(e: &Esd, k: u32) -> f64 {
    let pts = e.points();
    pts.iter().map(|x| x.powi(k as i32)).sum::<f64>() / pts.len() as f64
}
