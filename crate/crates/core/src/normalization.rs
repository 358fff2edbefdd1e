//! The centring shift `c = p(1-2q)` and the scale `r(p, q)`.
//!
//! The Hermitian matrix `X_n = -i(S_n + c Y_n) / r` is never formed. Callers
//! build the real skew-symmetric `M = S_n + c Y_n` with
//! [`shifted_skew_matrix`] and divide the `-i`-spectrum of `M` by `r`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SkewMatrix;
use crate::spectral::RealSkewMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub r: f64,
}

impl NormalizationContext {
    /// `r²` computed from the expanded form `p - c²(2 - p)`.
    pub fn r_squared_expanded(&self) -> f64 {
        self.p - self.c * self.c * (2.0 - self.p)
    }

    /// Probabilities of `s = +1, -1, 0`.
    pub fn state_probabilities(&self) -> [f64; 3] {
        [self.p * self.q, self.p * (1.0 - self.q), 1.0 - self.p]
    }
}

pub fn compute_context(p: f64, q: f64) -> Result<NormalizationContext> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParams(format!("(p, q) = ({p}, {q}) outside [0, 1]²")));
    }
    let c = p * (1.0 - 2.0 * q);
    let r2 = (1.0 + c).powi(2) * p * q + (1.0 - c).powi(2) * p * (1.0 - q);
    if r2 <= 0.0 {
        return Err(Error::DegenerateNormalization { p, q });
    }
    let ctx = NormalizationContext { p, q, c, r: r2.sqrt() };
    debug_assert!(r2 < 1e-6 || (ctx.r_squared_expanded() - r2).abs() <= 1e-12 * r2);
    Ok(ctx)
}

/// `Y_n` kept implicit: `+1` above the diagonal, `-1` below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftMatrix {
    pub n: usize,
}

impl ShiftMatrix {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => -1.0,
        }
    }

    pub fn materialize(&self) -> RealSkewMatrix {
        RealSkewMatrix::from_fn(self.n, |i, j| self.entry(i, j))
    }
}

/// `M = S + c·Y`. Each upper entry is formed once and mirrored with a sign
/// flip, so the result is exactly skew-symmetric.
pub fn shifted_skew_matrix(s: &SkewMatrix, ctx: &NormalizationContext) -> RealSkewMatrix {
    let c = ctx.c;
    RealSkewMatrix::from_upper_fn(s.n(), |i, j| f64::from(s.get(i, j)) + c)
}

/// The three-point law of an off-diagonal entry `x_12 = -i(s + c) / r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryDistribution {
    /// Values taken for `s = +1, -1, 0`.
    pub support: [Complex64; 3],
    pub probabilities: [f64; 3],
}

impl EntryDistribution {
    pub fn mean(&self) -> Complex64 {
        self.support.iter().zip(&self.probabilities).map(|(x, w)| x * w).sum()
    }

    /// `E|x|²`, equal to `1 + c²(1-p)/r²`.
    pub fn second_absolute_moment(&self) -> f64 {
        self.support.iter().zip(&self.probabilities).map(|(x, w)| x.norm_sqr() * w).sum()
    }
}

pub fn entry_distribution(ctx: &NormalizationContext) -> EntryDistribution {
    let minus_i = Complex64::new(0.0, -1.0);
    let support = [1.0, -1.0, 0.0].map(|s: f64| minus_i * ((s + ctx.c) / ctx.r));
    EntryDistribution { support, probabilities: ctx.state_probabilities() }
}
