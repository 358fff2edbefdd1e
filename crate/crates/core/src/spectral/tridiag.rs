//! Householder reduction of a real skew-symmetric matrix to skew tridiagonal
//! form, and eigenvalues of the resulting symmetric tridiagonal problem.
//!
//! For skew-symmetric `A` and a reflector `H = I - τ v vᵀ`,
//! `H A H = A + v wᵀ - w vᵀ` with `w = τ A v`, because `vᵀ A v = 0`.
//! Only the strict lower triangle is stored and updated.
//!
//! The reduced matrix `K` has zero diagonal and `K[k+1, k] = b_k`. A
//! diagonal unitary similarity maps `-i K` to the real symmetric tridiagonal
//! with zero diagonal and off-diagonal `|b_k|`, which is then solved by
//! implicit QL, with Sturm bisection as fallback.

/// Skew tridiagonal form: the subdiagonal entries `b_0..b_{n-2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewTridiagonal {
    pub subdiag: Vec<f64>,
}

impl SkewTridiagonal {
    pub fn n(&self) -> usize {
        self.subdiag.len() + 1
    }

    /// Off-diagonal of the real symmetric tridiagonal similar to `-i K`.
    pub fn symmetric_offdiag(&self) -> Vec<f64> {
        self.subdiag.iter().map(|b| b.abs()).collect()
    }
}

/// Householder vectors of the reduction, for rebuilding `Q` in tests and
/// residual checks.
#[derive(Debug, Clone)]
pub struct Reflectors {
    n: usize,
    /// `(tau, v)` for step `k`; `v` acts on indices `k+1..n` with `v[0] = 1`.
    steps: Vec<(f64, Vec<f64>)>,
}

impl Reflectors {
    /// Dense orthogonal `Q` (row-major) with `Qᵀ M Q = K`.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        // Q = H_0 H_1 ... H_{n-3}; accumulate from the right: Q ← Q H_k
        for (k, (tau, v)) in self.steps.iter().enumerate() {
            if *tau == 0.0 {
                continue;
            }
            let off = k + 1;
            for row in 0..n {
                let r = &mut q[row * n + off..row * n + n];
                let dot: f64 = r.iter().zip(v).map(|(a, b)| a * b).sum();
                let f = tau * dot;
                for (a, b) in r.iter_mut().zip(v) {
                    *a -= f * b;
                }
            }
        }
        q
    }
}

/// `(tau, beta)` such that `(I - τ v vᵀ) x = β e_1`. On return `x[1..]`
/// holds `v[1..]`; `x[0]` is left for the caller.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let sigma: f64 = x[1..].iter().map(|t| t * t).sum();
    if sigma == 0.0 {
        return (0.0, alpha);
    }
    let norm = alpha.hypot(sigma.sqrt());
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    for t in &mut x[1..] {
        *t *= scale;
    }
    ((beta - alpha) / beta, beta)
}

/// `y[t] += l[t] * s` and returns `Σ l[t] * v[t]`, with eight partial sums.
#[inline]
fn axpy_dot(l: &[f64], s: f64, y: &mut [f64], v: &[f64]) -> f64 {
    let len = l.len();
    let (y, v) = (&mut y[..len], &v[..len]);
    let mut acc = [0.0f64; 8];
    let mut lc = l.chunks_exact(8);
    let mut yc = y.chunks_exact_mut(8);
    let mut vc = v.chunks_exact(8);
    for ((lb, yb), vb) in (&mut lc).zip(&mut yc).zip(&mut vc) {
        for t in 0..8 {
            yb[t] += lb[t] * s;
            acc[t] += lb[t] * vb[t];
        }
    }
    let mut tail = 0.0;
    for ((a, b), c) in lc.remainder().iter().zip(yc.into_remainder()).zip(vc.remainder()) {
        *b += a * s;
        tail += a * c;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `l[t] += v[t] * wj - w[t] * vj`.
#[inline]
fn rank2(l: &mut [f64], v: &[f64], w: &[f64], vj: f64, wj: f64) {
    let len = l.len();
    for ((a, b), c) in l.iter_mut().zip(&v[..len]).zip(&w[..len]) {
        *a += b * wj - c * vj;
    }
}

/// `rank2` on `l` followed by `axpy_dot(l, s, y, u)` in one sweep.
#[inline]
#[allow(clippy::too_many_arguments)]
fn rank2_axpy_dot(l: &mut [f64], v: &[f64], w: &[f64], vj: f64, wj: f64, s: f64, y: &mut [f64], u: &[f64]) -> f64 {
    let len = l.len();
    let (v, w, y, u) = (&v[..len], &w[..len], &mut y[..len], &u[..len]);
    let mut acc = [0.0f64; 8];
    let mut lc = l.chunks_exact_mut(8);
    let mut vc = v.chunks_exact(8);
    let mut wc = w.chunks_exact(8);
    let mut yc = y.chunks_exact_mut(8);
    let mut uc = u.chunks_exact(8);
    for ((((lb, vb), wb), yb), ub) in (&mut lc).zip(&mut vc).zip(&mut wc).zip(&mut yc).zip(&mut uc) {
        for t in 0..8 {
            let x = lb[t] + vb[t] * wj - wb[t] * vj;
            lb[t] = x;
            yb[t] += x * s;
            acc[t] += x * ub[t];
        }
    }
    let mut tail = 0.0;
    for ((((a, b), c), d), e) in lc
        .into_remainder()
        .iter_mut()
        .zip(vc.remainder())
        .zip(wc.remainder())
        .zip(yc.into_remainder())
        .zip(uc.remainder())
    {
        let x = *a + b * wj - c * vj;
        *a = x;
        *d += x * s;
        tail += x * e;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Reduces the skew matrix whose strict lower triangle is stored
/// column-major in `work` (`work[j*n + i]`, `i > j`). `work` is destroyed.
pub(crate) fn reduce_lower(work: &mut [f64], n: usize, keep: bool) -> (SkewTridiagonal, Option<Reflectors>) {
    if n < 2 {
        return (SkewTridiagonal { subdiag: Vec::new() }, keep.then(|| Reflectors { n, steps: Vec::new() }));
    }
    let mut subdiag = vec![0.0; n - 1];
    let mut steps = Vec::new();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    // Householder for column 0 up front; each sweep then applies step k and
    // forms step k+1's reflector and matvec in the same pass.
    let mut tau = prepare_step(work, n, 0, &mut v, &mut subdiag);
    if tau != 0.0 {
        trailing_matvec(work, n, 0, &v, &mut w, tau);
    }
    for k in 0..n - 2 {
        if keep {
            steps.push((tau, v[..n - k - 1].to_vec()));
        }
        let next_tau = if tau == 0.0 {
            if k + 1 < n - 2 {
                let t = prepare_step(work, n, k + 1, &mut v, &mut subdiag);
                if t != 0.0 {
                    trailing_matvec(work, n, k + 1, &v, &mut w, t);
                }
                t
            } else {
                0.0
            }
        } else {
            fused_update(work, n, k, &mut v, &mut w, &mut subdiag)
        };
        tau = next_tau;
    }
    subdiag[n - 2] = work[(n - 2) * n + n - 1];
    (SkewTridiagonal { subdiag }, keep.then_some(Reflectors { n, steps }))
}

/// Builds the reflector for column `k`, storing `v` (length `n-k-1`) in `v`.
fn prepare_step(work: &mut [f64], n: usize, k: usize, v: &mut [f64], subdiag: &mut [f64]) -> f64 {
    let col = &mut work[k * n + k + 1..k * n + n];
    let (tau, beta) = householder(col);
    subdiag[k] = beta;
    let m = n - k - 1;
    v[0] = 1.0;
    v[1..m].copy_from_slice(&col[1..]);
    tau
}

/// `w = τ B v` for the trailing block `B` at indices `k+1..n`.
fn trailing_matvec(work: &[f64], n: usize, k: usize, v: &[f64], w: &mut [f64], tau: f64) {
    let m = n - k - 1;
    w[..m].fill(0.0);
    for jj in 0..m {
        let col = k + 1 + jj;
        let lower = &work[col * n + col + 1..col * n + n];
        let (head, tail) = w[..m].split_at_mut(jj + 1);
        let dot = axpy_dot(lower, v[jj], tail, &v[jj + 1..m]);
        head[jj] -= dot;
    }
    for t in &mut w[..m] {
        *t *= tau;
    }
}

/// Applies step `k` (`v`, `w` on indices `k+1..n`) to the trailing block,
/// builds step `k+1`'s reflector from the updated column `k+1`, and computes
/// its `w` while the remaining columns are updated. Returns the new `tau`.
fn fused_update(work: &mut [f64], n: usize, k: usize, v: &mut [f64], w: &mut [f64], subdiag: &mut [f64]) -> f64 {
    let m = n - k - 1;
    // column k+1 (local index 0)
    {
        let col = k + 1;
        let lower = &mut work[col * n + col + 1..col * n + n];
        rank2(lower, &v[1..m], &w[1..m], v[0], w[0]);
    }
    if k + 1 >= n - 2 {
        // last reflector already applied; remaining block is 1×1 skew.
        // update the final column too
        return 0.0;
    }
    let mut v_next = vec![0.0; m - 1];
    let tau = prepare_step(work, n, k + 1, &mut v_next, subdiag);
    let mut y = vec![0.0; m - 1];
    if tau == 0.0 {
        for jj in 1..m {
            let col = k + 1 + jj;
            let lower = &mut work[col * n + col + 1..col * n + n];
            rank2(lower, &v[jj + 1..m], &w[jj + 1..m], v[jj], w[jj]);
        }
    } else {
        for jj in 1..m {
            let col = k + 1 + jj;
            let lower = &mut work[col * n + col + 1..col * n + n];
            // next block index of this column is jj-1
            let j2 = jj - 1;
            let (head, tail) = y.split_at_mut(j2 + 1);
            let dot =
                rank2_axpy_dot(lower, &v[jj + 1..m], &w[jj + 1..m], v[jj], w[jj], v_next[j2], tail, &v_next[j2 + 1..]);
            head[j2] -= dot;
        }
        for t in &mut y {
            *t *= tau;
        }
    }
    v[..m - 1].copy_from_slice(&v_next);
    w[..m - 1].copy_from_slice(&y);
    tau
}

/// Eigenvalues of the symmetric tridiagonal with diagonal `d` and
/// off-diagonal `e` (length `n-1`), unsorted. Implicit QL with Wilkinson
/// shifts; falls back to bisection if an eigenvalue needs more than 60 sweeps.
pub fn symmetric_tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    assert!(n == 0 || e.len() + 1 == n, "off-diagonal length must be n-1");
    let mut dd = d.to_vec();
    let mut ee = e.to_vec();
    ee.push(0.0);
    match implicit_ql(&mut dd, &mut ee) {
        Ok(()) => dd,
        Err(()) => bisection_eigenvalues(d, e),
    }
}

fn implicit_ql(d: &mut [f64], e: &mut [f64]) -> Result<(), ()> {
    let n = d.len();
    let mut scale = 0.0f64;
    for l in 0..n {
        let mut iter = 0;
        scale = scale.max(d[l].abs() + e[l].abs());
        loop {
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= f64::EPSILON * scale.max(d[m].abs() + d[m + 1].abs()) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(());
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let e2 = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (e2.sqrt() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues by Sturm bisection, ascending.
pub fn bisection_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            // smallest x with count(x) > k
            let (mut a, mut b) = (lo - tol, hi + tol);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(d, e, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn ql_on_two_by_two() {
        let ev = sorted(symmetric_tridiagonal_eigenvalues(&[0.0, 0.0], &[1.0]));
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ql_matches_bisection() {
        let d = [0.0; 7];
        let e = [0.3, 1.7, 0.0, 2.2, 0.9, 1e-9];
        let a = sorted(symmetric_tridiagonal_eigenvalues(&d, &e));
        let b = bisection_eigenvalues(&d, &e);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13, "{x} vs {y}");
        }
        let d = [1.0, -2.0, 0.5, 3.0];
        let e = [0.4, 0.4, 2.0];
        let a = sorted(symmetric_tridiagonal_eigenvalues(&d, &e));
        let b = bisection_eigenvalues(&d, &e);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn path_graph_spectrum() {
        // 2cos(kπ/(n+1)) for the path on n vertices
        let n = 40;
        let ev = sorted(symmetric_tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]));
        let mut expect: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()).collect();
        expect.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn sturm_count_brackets() {
        let d = [0.0; 3];
        let e = [1.0, 1.0];
        // eigenvalues -√2, 0, √2
        assert_eq!(sturm_count(&d, &e, -2.0), 0);
        assert_eq!(sturm_count(&d, &e, -1.0), 1);
        assert_eq!(sturm_count(&d, &e, 1.0), 2);
        assert_eq!(sturm_count(&d, &e, 2.0), 3);
    }
}
