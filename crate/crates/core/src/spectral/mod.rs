//! Spectra of real skew-symmetric matrices.
//!
//! A real skew-symmetric `M` has eigenvalues `iλ`; [`eig_skew`] returns the
//! real `λ`, which are the eigenvalues of the Hermitian `-iM`.

mod tridiag;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalization::NormalizationContext;

pub use tridiag::{bisection_eigenvalues, sturm_count, symmetric_tridiagonal_eigenvalues, Reflectors, SkewTridiagonal};

/// Entrywise tolerance of the skew-symmetry precondition.
pub const SKEW_TOLERANCE: f64 = 1e-12;

/// Dense real matrix, row-major, intended to hold skew-symmetric data.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSkewMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealSkewMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Fills the strict upper triangle from `f` and mirrors it with a sign
    /// flip; the diagonal is zero.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = f(i, j);
                data[i * n + j] = x;
                data[j * n + i] = -x;
            }
        }
        Self { n, data }
    }

    /// Row-major data; not checked for skew-symmetry until [`eig_skew`].
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParams(format!("expected {} entries, got {}", n * n, data.len())));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_exactly_skew(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| self.data[i * n + j] == -self.data[j * n + i]))
    }

    /// First entry (row-major scan of the upper triangle and diagonal) whose
    /// skew defect exceeds `tol`.
    pub fn check_skew(&self, tol: f64) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                let defect = (self.data[i * n + j] + self.data[j * n + i]).abs();
                if defect > tol || defect.is_nan() {
                    return Err(Error::NotSkewSymmetric { row: i, col: j, defect });
                }
            }
        }
        Ok(())
    }

    /// `Σ_{i<j} 2 m_ij²`, which equals `-Trace(M²)` for skew `M`.
    pub fn skew_frobenius_sq(&self) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * self.data[i * n + j] * self.data[i * n + j];
            }
        }
        s
    }

    fn lower_column_major(&self) -> Vec<f64> {
        let n = self.n;
        let mut work = vec![0.0; n * n];
        for j in 0..n {
            for i in j + 1..n {
                // m[i][j] = -m[j][i]; the row j slice is contiguous
                work[j * n + i] = -self.data[j * n + i];
            }
        }
        work
    }
}

/// Real eigenvalues `λ_i` (eigenvalues of `M` are `iλ_i`), ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    lambdas: Vec<f64>,
}

impl Spectrum {
    pub fn from_unsorted(mut lambdas: Vec<f64>) -> Self {
        lambdas.sort_by(f64::total_cmp);
        Self { lambdas }
    }

    pub fn ascending(&self) -> &[f64] {
        &self.lambdas
    }

    /// `μ̂_1 ≥ μ̂_2 ≥ … ≥ μ̂_n`.
    pub fn descending(&self) -> Vec<f64> {
        self.lambdas.iter().rev().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Every value divided by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { lambdas: self.lambdas.iter().map(|x| x / factor).collect() }
    }

    /// Default symmetry tolerance `1e-8 · n`.
    pub fn default_symmetry_tolerance(&self) -> f64 {
        1e-8 * self.lambdas.len() as f64
    }

    /// `max_i |λ_i + λ_{n-1-i}| / max(1, max|λ|)`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.lambdas.len();
        let scale = spectral_radius(self).max(1.0);
        (0..n).map(|i| (self.lambdas[i] + self.lambdas[n - 1 - i]).abs()).fold(0.0, f64::max) / scale
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.lambdas.len();
        let middle_ok = n.is_multiple_of(2) || self.lambdas[n / 2].abs() <= tol;
        middle_ok && self.symmetry_defect() <= tol
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.lambdas.iter().map(|x| x * x).sum()
    }

    /// CSV with header `index,lambda`, 1-based, ascending.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lambda\n");
        for (i, x) in self.lambdas.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, crate::fmt_f64(*x));
        }
        out
    }
}

pub fn reduce_to_tridiagonal(m: &RealSkewMatrix) -> Result<SkewTridiagonal> {
    m.check_skew(SKEW_TOLERANCE)?;
    let mut work = m.lower_column_major();
    Ok(tridiag::reduce_lower(&mut work, m.n, false).0)
}

/// The reduction together with its reflectors.
pub fn reduce_with_reflectors(m: &RealSkewMatrix) -> Result<(SkewTridiagonal, Reflectors)> {
    m.check_skew(SKEW_TOLERANCE)?;
    let mut work = m.lower_column_major();
    let (t, r) = tridiag::reduce_lower(&mut work, m.n, true);
    Ok((t, r.expect("reflectors requested")))
}

pub fn tridiagonal_spectrum(t: &SkewTridiagonal) -> Spectrum {
    let n = t.n();
    Spectrum::from_unsorted(symmetric_tridiagonal_eigenvalues(&vec![0.0; n], &t.symmetric_offdiag()))
}

pub fn eig_skew(m: &RealSkewMatrix) -> Result<Spectrum> {
    if m.n == 0 {
        return Ok(Spectrum { lambdas: Vec::new() });
    }
    Ok(tridiagonal_spectrum(&reduce_to_tridiagonal(m)?))
}

/// `{cot(π(2i-1)/(2n)) : i = 1..n}`, the `-i`-spectrum of `Y_n`.
pub fn y_spectrum_closed_form(n: usize) -> Spectrum {
    Spectrum::from_unsorted((1..=n).map(|i| y_eigenvalue(n, i)).collect())
}

/// `cot(π(2i-1)/(2n))`, i.e. `μ̂_i(-iY_n)` for `i = 1..n`.
pub fn y_eigenvalue(n: usize, i: usize) -> f64 {
    let theta = PI * (2 * i - 1) as f64 / (2 * n) as f64;
    theta.cos() / theta.sin()
}

pub fn spectral_radius(spec: &Spectrum) -> f64 {
    spec.lambdas.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Empirical spectral distribution as a right-continuous step CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct Esd {
    points: Vec<f64>,
}

impl Esd {
    pub fn from_points(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points `≤ x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.points.partition_point(|p| *p <= x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.points.len() as f64
    }
}

/// ESD of `{λ_i / scale}`.
pub fn esd(spec: &Spectrum, scale: f64) -> Result<Esd> {
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::InvalidParams(format!("ESD scale must be positive, got {scale}")));
    }
    Ok(Esd { points: spec.lambdas.iter().map(|x| x / scale).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylIndex {
    /// 1-based index into the descending order.
    pub index: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub epsilon: f64,
    pub indices: Vec<WeylIndex>,
    pub violations: usize,
}

impl WeylReport {
    pub fn all_pass(&self) -> bool {
        self.violations == 0
    }

    pub fn first_violation(&self) -> Option<&WeylIndex> {
        self.indices.iter().find(|w| !w.pass)
    }
}

/// Checks the Weyl sandwich for the descending spectrum `μ̂_i` of `-iS_n`:
///
/// `r√n(-2 - ε) + p(2q-1)·cot θ_i ≤ μ̂_i ≤ r√n(2 + ε) + p(2q-1)·cot θ_i`
///
/// with `θ_i = π(2i-1)/(2n)` for `q ≥ 1/2` and `θ_i = π(2n-2i+1)/(2n)` for
/// `q < 1/2`. The shift term is `μ̂_i` of `p(2q-1)(-iY_n)`, which is not
/// multiplied by `r√n`.
pub fn weyl_bounds(spec_of_minus_is: &Spectrum, ctx: &NormalizationContext, epsilon: f64) -> WeylReport {
    let n = spec_of_minus_is.len();
    let scale = ctx.r * (n as f64).sqrt();
    let slope = ctx.p * (2.0 * ctx.q - 1.0);
    let indices: Vec<WeylIndex> = spec_of_minus_is
        .lambdas
        .iter()
        .rev()
        .enumerate()
        .map(|(k, &value)| {
            let i = k + 1;
            let cot = if ctx.q >= 0.5 { y_eigenvalue(n, i) } else { y_eigenvalue(n, n - i + 1) };
            let shift = slope * cot;
            let lower = scale * (-2.0 - epsilon) + shift;
            let upper = scale * (2.0 + epsilon) + shift;
            WeylIndex { index: i, value, lower, upper, pass: lower <= value && value <= upper }
        })
        .collect();
    let violations = indices.iter().filter(|w| !w.pass).count();
    WeylReport { epsilon, indices, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SkewMatrix;
    use crate::normalization::{compute_context, shifted_skew_matrix};

    fn y(n: usize) -> RealSkewMatrix {
        RealSkewMatrix::from_upper_fn(n, |_, _| 1.0)
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn rotation_generator() {
        let m = RealSkewMatrix::from_row_major(2, vec![0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_close(eig_skew(&m).unwrap().ascending(), &[-1.0, 1.0], 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let m = RealSkewMatrix::from_upper_fn(3, |_, _| 0.0);
        assert_eq!(eig_skew(&m).unwrap().ascending(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn y4_spectrum() {
        let s2 = 2f64.sqrt();
        let expect = [-(1.0 + s2), -(s2 - 1.0), s2 - 1.0, 1.0 + s2];
        assert_close(eig_skew(&y(4)).unwrap().ascending(), &expect, 1e-12);
        assert_close(y_spectrum_closed_form(4).ascending(), &expect, 1e-12);
        assert_close(
            y_spectrum_closed_form(4).ascending(),
            &[-2.414_213_562_373_095, -0.414_213_562_373_095_1, 0.414_213_562_373_095_1, 2.414_213_562_373_095],
            1e-14,
        );
    }

    #[test]
    fn closed_form_small_cases() {
        assert_close(y_spectrum_closed_form(1).ascending(), &[0.0], 1e-16);
        assert_close(y_spectrum_closed_form(2).ascending(), &[-1.0, 1.0], 1e-15);
        for n in 1..=64 {
            let rho = spectral_radius(&y_spectrum_closed_form(n));
            let top = 1.0 / (PI / (2 * n) as f64).tan();
            assert!((rho - top).abs() <= 1e-12 * top.max(1.0));
        }
    }

    #[test]
    fn rejects_non_skew_input() {
        let m = RealSkewMatrix::from_row_major(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(eig_skew(&m), Err(Error::NotSkewSymmetric { row: 0, col: 1, .. })));
        let m = RealSkewMatrix::from_row_major(2, vec![1e-9, 1.0, -1.0, 0.0]).unwrap();
        assert!(matches!(eig_skew(&m), Err(Error::NotSkewSymmetric { row: 0, col: 0, .. })));
        let m = RealSkewMatrix::from_row_major(2, vec![0.0, 1.0, -1.0 - 5e-13, 0.0]).unwrap();
        assert!(eig_skew(&m).is_ok());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(spectral_radius(&Spectrum::from_unsorted(vec![-1.0, 0.5])), 1.0);
        assert_eq!(spectral_radius(&Spectrum::from_unsorted(vec![0.0; 4])), 0.0);
    }

    #[test]
    fn esd_examples() {
        let e = esd(&Spectrum::from_unsorted(vec![-1.0, 1.0]), 1.0).unwrap();
        assert_eq!([e.cdf(-2.0), e.cdf(-1.0), e.cdf(0.0), e.cdf(1.0)], [0.0, 0.5, 0.5, 1.0]);
        let e = esd(&Spectrum::from_unsorted(vec![0.0; 3]), 5.0).unwrap();
        assert_eq!([e.cdf(-1e-300), e.cdf(0.0), e.cdf(7.0)], [0.0, 1.0, 1.0]);
        let a = esd(&Spectrum::from_unsorted(vec![-2.0, 2.0]), 2.0).unwrap();
        let b = esd(&Spectrum::from_unsorted(vec![-1.0, 1.0]), 1.0).unwrap();
        for x in [-3.0, -1.0, -0.5, 0.0, 1.0, 4.0] {
            assert_eq!(a.cdf(x), b.cdf(x));
        }
        assert!(esd(&Spectrum::from_unsorted(vec![1.0]), 0.0).is_err());
        assert!(esd(&Spectrum::from_unsorted(vec![1.0]), f64::NAN).is_err());
    }

    #[test]
    fn weyl_threshold_arithmetic() {
        let ctx = compute_context(0.1, 0.5).unwrap();
        let n = 4;
        let unit = ctx.r * (n as f64).sqrt();
        let spec = Spectrum::from_unsorted(vec![-2.1 * unit, -0.3 * unit, 0.3 * unit, 2.1 * unit]);
        let loose = weyl_bounds(&spec, &ctx, 0.2);
        assert!(loose.all_pass());
        for w in &loose.indices {
            assert!((w.upper - 2.2 * unit).abs() < 1e-12 && (w.lower + 2.2 * unit).abs() < 1e-12);
        }
        let tight = weyl_bounds(&spec, &ctx, 0.05);
        assert_eq!(tight.first_violation().unwrap().index, 1);
        assert_eq!(tight.violations, 2);
    }

    #[test]
    fn weyl_uses_reflected_cotangent_below_half() {
        // deterministic Y_n: S = Y_n is what q = 1 produces, S = -Y_n for q = 0
        let n = 6;
        let ctx_hi = compute_context(0.9, 1.0).unwrap();
        let spec_y = eig_skew(&y(n)).unwrap();
        let rep = weyl_bounds(&spec_y, &ctx_hi, 0.0);
        let slope = 0.9;
        for w in &rep.indices {
            let centre = 0.5 * (w.lower + w.upper);
            assert!((centre - slope * y_eigenvalue(n, w.index)).abs() < 1e-12);
        }
        let ctx_lo = compute_context(0.9, 0.0).unwrap();
        let rep = weyl_bounds(&spec_y.scaled(-1.0), &ctx_lo, 0.0);
        for w in &rep.indices {
            let centre = 0.5 * (w.lower + w.upper);
            assert!((centre + slope * y_eigenvalue(n, n - w.index + 1)).abs() < 1e-12);
        }
        // centres are descending in both variants
        assert!(rep.indices.windows(2).all(|p| p[0].lower >= p[1].lower));
    }

    #[test]
    fn weyl_holds_for_deterministic_tournament() {
        // S = Y_n exactly: -iS = r X + p(2q-1)(-iY) with X = (1-p)(-iY)/r.
        let n = 50;
        let ctx = compute_context(0.9, 1.0).unwrap();
        let spec =
            eig_skew(&shifted_skew_matrix(&SkewMatrix::upper_ones(n), &compute_context(0.5, 0.5).unwrap())).unwrap();
        let rho_x = (1.0 - 0.9) * spectral_radius(&spec) / (ctx.r * (n as f64).sqrt());
        let rep = weyl_bounds(&spec, &ctx, (rho_x - 2.0).max(0.0) + 1e-9);
        assert!(rep.all_pass(), "{:?}", rep.first_violation());
    }

    #[test]
    fn csv_format() {
        let csv = Spectrum::from_unsorted(vec![1.0, -0.5]).to_csv();
        assert_eq!(csv, "index,lambda\n1,-5.0000000000000000e-1\n2,1.0000000000000000e0\n");
    }
}
