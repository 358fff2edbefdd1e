//! Exact closed-walk oracles for the moment expansion
//! `(1/n^{1+k/2}) E Trace(X^k) = (1/n^{1+k/2}) Σ E(x_{i1 i2} ⋯ x_{ik i1})`.
//!
//! Entries satisfy `x_ji = -x_ij`, and entries on distinct unordered pairs
//! are independent, so a walk's expectation factors over the pairs it
//! visits.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::replica_spectrum;
use crate::error::{Error, Result};
use crate::graph::{GraphParams, PairState, SeedSpec};
use crate::normalization::{compute_context, NormalizationContext};
use crate::semicircle::catalan;

/// Largest `t` accepted by [`count_tree_walks`] (t = 5 takes a few seconds).
pub const MAX_TREE_WALK_T: u32 = 5;
/// Largest `n` accepted by the exhaustive trace oracles.
pub const MAX_EXACT_N: usize = 4;
/// Largest `k` accepted by the exhaustive trace oracles.
pub const MAX_EXACT_K: u32 = 8;

/// A closed walk `i_1 → i_2 → … → i_k → i_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    vertices: Vec<usize>,
}

impl Walk {
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        let k = vertices.len();
        if k == 0 {
            return Err(Error::InvalidParams("a walk needs at least one vertex".into()));
        }
        for step in 0..k {
            let (a, b) = (vertices[step], vertices[(step + 1) % k]);
            if a == b {
                return Err(Error::MalformedWalk { vertex: a, step: step + 1 });
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Steps `(from, to)` including the closing one.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.vertices.len();
        (0..k).map(move |s| (self.vertices[s], self.vertices[(s + 1) % k]))
    }

    /// Per unordered pair `(a, b)`, `a < b`: traversals `a → b` and `b → a`.
    pub fn pair_traversals(&self) -> BTreeMap<(usize, usize), (u32, u32)> {
        let mut map = BTreeMap::new();
        for (a, b) in self.steps() {
            let entry = map.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
        map
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WalkCase {
    /// Odd length, some odd-multiplicity edge traversed once.
    A1,
    /// Odd length, every odd-multiplicity edge traversed at least three times.
    A2,
    /// Even length with an odd-multiplicity edge.
    B1,
    /// Even length, all multiplicities even, at most `k/2` vertices.
    B2,
    /// Even length, all multiplicities even, `k/2 + 1` vertices.
    B3,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkClassification {
    pub k: usize,
    /// Distinct vertices.
    pub m: usize,
    pub edge_multiplicities: BTreeMap<(usize, usize), u32>,
    /// Edges with odd multiplicity.
    pub omega: BTreeSet<(usize, usize)>,
    pub case: WalkCase,
    /// Each arc and its reverse traversed exactly once, and the edges form a
    /// tree on the visited vertices.
    pub tree_traversal: bool,
}

pub fn classify_walk(w: &Walk) -> WalkClassification {
    let k = w.len();
    let traversals = w.pair_traversals();
    let edge_multiplicities: BTreeMap<_, _> = traversals.iter().map(|(&e, &(f, b))| (e, f + b)).collect();
    let omega: BTreeSet<_> = edge_multiplicities.iter().filter(|(_, &c)| c % 2 == 1).map(|(&e, _)| e).collect();
    let vertex_set: BTreeSet<usize> = w.vertices().iter().copied().collect();
    let m = vertex_set.len();

    let once_each_way = traversals.values().all(|&(f, b)| f == 1 && b == 1);
    let tree_traversal = once_each_way && edges_form_tree(&vertex_set, edge_multiplicities.keys().copied());

    let case = if k % 2 == 1 {
        if omega.iter().any(|e| edge_multiplicities[e] == 1) {
            WalkCase::A1
        } else {
            WalkCase::A2
        }
    } else if !omega.is_empty() {
        WalkCase::B1
    } else if m <= k / 2 {
        WalkCase::B2
    } else {
        // every edge is used at least twice, so m ≤ k/2 + 1
        debug_assert_eq!(m, k / 2 + 1);
        WalkCase::B3
    };
    debug_assert!(case != WalkCase::B3 || tree_traversal);

    WalkClassification { k, m, edge_multiplicities, omega, case, tree_traversal }
}

/// Union-find acyclicity plus `|E| = |V| - 1`.
fn edges_form_tree(vertices: &BTreeSet<usize>, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut count = 0;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
        count += 1;
    }
    count + 1 == vertices.len()
}

/// Visits every closed walk of length `k` on `0..n` with no consecutive
/// repeats (the closing step included).
pub fn for_each_closed_walk(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k < 2 || n < 2 {
        return;
    }
    let mut seq = vec![0usize; k];
    fn rec(seq: &mut [usize], pos: usize, n: usize, visit: &mut dyn FnMut(&[usize])) {
        let k = seq.len();
        if pos == k {
            if seq[k - 1] != seq[0] {
                visit(seq);
            }
            return;
        }
        for v in 0..n {
            if pos > 0 && seq[pos - 1] == v {
                continue;
            }
            seq[pos] = v;
            rec(seq, pos + 1, n, visit);
        }
    }
    rec(&mut seq, 0, n, &mut visit);
}

/// `Catalan(t) · (t+1)!`.
pub fn tree_walk_formula(t: u32) -> BigUint {
    let factorial: BigUint = (1..=t + 1).map(BigUint::from).product();
    catalan(t) * factorial
}

/// Counts closed walks of length `2t` on vertices `{1, …, t+1}` that visit
/// every vertex, traverse each arc and its reverse exactly once, and whose
/// edges form a tree.
pub fn count_tree_walks(t: u32) -> Result<u64> {
    if t == 0 {
        return Err(Error::InvalidParams("t must be positive".into()));
    }
    if t > MAX_TREE_WALK_T {
        return Err(Error::EnumerationBoundExceeded(format!("t = {t} > {MAX_TREE_WALK_T}")));
    }
    let n = t as usize + 1;
    let k = 2 * t as usize;
    // first vertex fixes the branch; branches are summed as integers
    let counts: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|start| {
            let mut arc_used = vec![false; n * n];
            let mut seq = vec![start; k];
            let mut count = 0u64;
            tree_walk_dfs(&mut seq, 1, n, &mut arc_used, &mut count);
            count
        })
        .collect();
    Ok(counts.iter().sum())
}

fn tree_walk_dfs(seq: &mut [usize], pos: usize, n: usize, arc_used: &mut [bool], count: &mut u64) {
    let k = seq.len();
    let prev = seq[pos - 1];
    if pos == k {
        let close = prev * n + seq[0];
        if prev != seq[0] && !arc_used[close] {
            arc_used[close] = true;
            let walk = Walk { vertices: seq.to_vec() };
            let c = classify_walk(&walk);
            if c.m == n && c.tree_traversal {
                *count += 1;
            }
            arc_used[close] = false;
        }
        return;
    }
    for v in 0..n {
        let arc = prev * n + v;
        if v == prev || arc_used[arc] {
            continue;
        }
        arc_used[arc] = true;
        seq[pos] = v;
        tree_walk_dfs(seq, pos + 1, n, arc_used, count);
        arc_used[arc] = false;
    }
}

fn r_squared(ctx: &NormalizationContext) -> f64 {
    let (p, q, c) = (ctx.p, ctx.q, ctx.c);
    (1.0 + c).powi(2) * p * q + (1.0 - c).powi(2) * p * (1.0 - q)
}

/// `(-i)^k`.
fn minus_i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `E(x_12^k)` for `x_12 = -i(s + c)/r` over the three-point law of `s`.
/// The first moment is exactly zero.
pub fn exact_entry_moment(ctx: &NormalizationContext, k: u32) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if k == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let w = ctx.state_probabilities();
    let raw = w[0] * (1.0 + ctx.c).powi(k as i32) + w[1] * (-1.0 + ctx.c).powi(k as i32) + w[2] * ctx.c.powi(k as i32);
    let r2 = r_squared(ctx);
    let rk = r2.powi((k / 2) as i32) * if k % 2 == 1 { ctx.r } else { 1.0 };
    minus_i_pow(k) * (raw / rk)
}

/// `E(x_{i1 i2} ⋯ x_{ik i1})` factored over the unordered pairs of `w`.
pub fn walk_expectation(ctx: &NormalizationContext, w: &Walk) -> Complex64 {
    w.pair_traversals()
        .values()
        .map(|&(forward, backward)| {
            let sign = if backward % 2 == 1 { -1.0 } else { 1.0 };
            exact_entry_moment(ctx, forward + backward) * sign
        })
        .product()
}

/// Neumaier-compensated sum of complex terms.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl CompensatedSum {
    fn add(&mut self, z: Complex64) {
        fn step(acc: &mut (f64, f64), x: f64) {
            let t = acc.0 + x;
            if acc.0.abs() >= x.abs() {
                acc.1 += (acc.0 - t) + x;
            } else {
                acc.1 += (x - t) + acc.0;
            }
            acc.0 = t;
        }
        step(&mut self.re, z.re);
        step(&mut self.im, z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

fn check_exact_bounds(params: &GraphParams, k: u32) -> Result<NormalizationContext> {
    if params.n() > MAX_EXACT_N || k > MAX_EXACT_K {
        return Err(Error::EnumerationBoundExceeded(format!(
            "exact trace moments need n ≤ {MAX_EXACT_N} and k ≤ {MAX_EXACT_K}, got n = {}, k = {k}",
            params.n()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    compute_context(params.p(), params.q())
}

fn normalizer(n: usize, k: u32) -> f64 {
    (n as f64).powf(1.0 + f64::from(k) / 2.0)
}

/// Upper-triangle pair list in lexicographic order.
fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `(1/n^{1+k/2}) E Trace(X^k)` by enumerating all `3^{n(n-1)/2}` edge-state
/// configurations, as a complex number.
pub fn exhaustive_trace_moment(params: &GraphParams, k: u32) -> Result<Complex64> {
    let ctx = check_exact_bounds(params, k)?;
    let n = params.n();
    let pairs = upper_pairs(n);
    let states = [PairState::Forward, PairState::Backward, PairState::Absent];
    let probs = ctx.state_probabilities();
    let configs = 3usize.pow(pairs.len() as u32);
    let mut sum = CompensatedSum::default();
    let zero = Complex64::new(0.0, 0.0);
    for code in 0..configs {
        let mut weight = 1.0;
        let mut x = vec![zero; n * n];
        let mut rest = code;
        for &(i, j) in &pairs {
            let digit = rest % 3;
            rest /= 3;
            weight *= probs[digit];
            let s = f64::from(states[digit].entry());
            let entry = Complex64::new(0.0, -(s + ctx.c) / ctx.r);
            x[i * n + j] = entry;
            x[j * n + i] = -entry;
        }
        if weight == 0.0 {
            continue;
        }
        sum.add(trace_of_power(&x, n, k) * weight);
    }
    Ok(sum.value() / normalizer(n, k))
}

fn trace_of_power(x: &[Complex64], n: usize, k: u32) -> Complex64 {
    let mut acc = x.to_vec();
    for _ in 1..k {
        let mut next = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = acc[i * n + l];
                for j in 0..n {
                    next[i * n + j] += a * x[l * n + j];
                }
            }
        }
        acc = next;
    }
    (0..n).map(|i| acc[i * n + i]).sum()
}

/// The same quantity as a sum over closed walks with factored expectations.
pub fn walk_sum_trace_moment(params: &GraphParams, k: u32) -> Result<Complex64> {
    let ctx = check_exact_bounds(params, k)?;
    let n = params.n();
    let mut sum = CompensatedSum::default();
    for_each_closed_walk(n, k as usize, |seq| {
        sum.add(walk_expectation(&ctx, &Walk { vertices: seq.to_vec() }));
    });
    Ok(sum.value() / normalizer(n, k))
}

/// Real value of [`exhaustive_trace_moment`]; the imaginary part is at
/// most `1e-12`.
pub fn trace_moment_exact_tiny(params: &GraphParams, k: u32) -> Result<f64> {
    let z = exhaustive_trace_moment(params, k)?;
    assert!(z.im.abs() <= 1e-12, "imaginary part {} of a Hermitian trace moment", z.im);
    Ok(z.re)
}

/// Rational-arithmetic version of [`trace_moment_exact_tiny`] for rational
/// `p, q`. Odd `k` gives zero: `M^k` is skew for odd `k`. For even `k` the
/// value is `(-1)^{k/2} E Trace(M^k) / (r²)^{k/2} / n^{1+k/2}`, all rational.
pub fn trace_moment_exact_rational(n: usize, p: &BigRational, q: &BigRational, k: u32) -> Result<BigRational> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if *p < zero || *p > one || *q < zero || *q > one {
        return Err(Error::InvalidParams("p and q must lie in [0, 1]".into()));
    }
    if n == 0 || n > MAX_EXACT_N || k == 0 || k > MAX_EXACT_K {
        return Err(Error::EnumerationBoundExceeded(format!("n = {n}, k = {k}")));
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let c = p * (&one - &two * q);
    let r2 = (&one + &c) * (&one + &c) * p * q + (&one - &c) * (&one - &c) * p * (&one - q);
    if r2.is_zero() {
        return Err(Error::DegenerateNormalization { p: 0.0, q: 0.0 });
    }
    if k % 2 == 1 {
        return Ok(zero);
    }
    let pairs = upper_pairs(n);
    let probs = [p * q, p * (&one - q), &one - p];
    let vals = [&one + &c, -&one + &c, c.clone()];
    let mut total = BigRational::zero();
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut weight = one.clone();
        let mut m = vec![zero.clone(); n * n];
        let mut rest = code;
        for &(i, j) in &pairs {
            let d = rest % 3;
            rest /= 3;
            weight *= &probs[d];
            m[i * n + j] = vals[d].clone();
            m[j * n + i] = -vals[d].clone();
        }
        if weight.is_zero() {
            continue;
        }
        let mut acc = m.clone();
        for _ in 1..k {
            let mut next = vec![zero.clone(); n * n];
            for i in 0..n {
                for l in 0..n {
                    if acc[i * n + l].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        next[i * n + j] += &acc[i * n + l] * &m[l * n + j];
                    }
                }
            }
            acc = next;
        }
        let trace: BigRational = (0..n).map(|i| acc[i * n + i].clone()).sum();
        total += weight * trace;
    }
    let half = k / 2;
    let sign = if half % 2 == 1 { -one.clone() } else { one.clone() };
    let r_pow = num_traits::pow(r2, half as usize);
    let n_pow = BigRational::from_integer(BigInt::from(n).pow(1 + half));
    Ok(sign * total / r_pow / n_pow)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
}

/// Monte Carlo mean and standard error of `(1/n) Σ λ_i^k` for the spectrum
/// of `n^{-1/2} X_n`, one sample per replica of `seed`.
pub fn trace_moment_mc(params: &GraphParams, k: u32, replicas: usize, master_seed: u64) -> Result<McEstimate> {
    if replicas < 2 {
        return Err(Error::InvalidParams("at least two replicas are needed for a standard error".into()));
    }
    compute_context(params.p(), params.q())?;
    let samples: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let spec = replica_spectrum(params, SeedSpec::new(master_seed, r)).expect("context checked above");
            let xs = spec.ascending();
            xs.iter().map(|x| x.powi(k as i32)).sum::<f64>() / xs.len() as f64
        })
        .collect();
    Ok(mean_and_std_error(&samples))
}

pub(crate) fn mean_and_std_error(samples: &[f64]) -> McEstimate {
    let count = samples.len();
    let mean = samples.iter().sum::<f64>() / count as f64;
    let var =
        if count > 1 { samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64 } else { 0.0 };
    McEstimate { mean, std_error: (var / count as f64).sqrt(), replicas: count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn walk(v: &[usize]) -> Walk {
        Walk::new(v.to_vec()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = classify_walk(&walk(&[1, 2]));
        assert_eq!((c.m, c.case), (2, WalkCase::B3));
        assert_eq!(c.edge_multiplicities[&(1, 2)], 2);
        assert!(c.omega.is_empty() && c.tree_traversal);

        let c = classify_walk(&walk(&[1, 2, 3]));
        assert_eq!(c.case, WalkCase::A1);
        assert_eq!(c.omega.len(), 3);
        assert!(c.edge_multiplicities.values().all(|&m| m == 1));

        let c = classify_walk(&walk(&[1, 2, 1, 2]));
        assert_eq!((c.m, c.case), (2, WalkCase::B2));
        assert_eq!(c.edge_multiplicities[&(1, 2)], 4);
        assert!(!c.tree_traversal);
    }

    #[test]
    fn a2_and_b1_cases() {
        // triangle traversed three times: every edge has multiplicity 3
        let c = classify_walk(&walk(&[1, 2, 3, 1, 2, 3, 1, 2, 3]));
        assert_eq!(c.case, WalkCase::A2);
        let c = classify_walk(&walk(&[1, 2, 3, 4]));
        assert_eq!(c.case, WalkCase::B1);
    }

    #[test]
    fn malformed_walks() {
        assert_eq!(Walk::new(vec![1, 1, 2]), Err(Error::MalformedWalk { vertex: 1, step: 1 }));
        assert_eq!(Walk::new(vec![1, 2, 1]), Err(Error::MalformedWalk { vertex: 1, step: 3 }));
        assert!(matches!(Walk::new(vec![3]), Err(Error::MalformedWalk { .. })));
        assert!(Walk::new(vec![]).is_err());
    }

    #[test]
    fn labels_partition_small_walks() {
        let ctx = compute_context(0.3, 0.2).unwrap();
        for k in 2..=6usize {
            for_each_closed_walk(4, k, |seq| {
                let w = Walk::new(seq.to_vec()).unwrap();
                let c = classify_walk(&w);
                let total: u32 = c.edge_multiplicities.values().sum();
                assert_eq!(total as usize, k);
                let odd = k % 2 == 1;
                let labels = [
                    odd && c.omega.iter().any(|e| c.edge_multiplicities[e] == 1),
                    odd && !c.omega.is_empty() && c.omega.iter().all(|e| c.edge_multiplicities[e] >= 3),
                    !odd && !c.omega.is_empty(),
                    !odd && c.omega.is_empty() && c.m <= k / 2,
                    !odd && c.omega.is_empty() && c.m == k / 2 + 1,
                ];
                assert_eq!(labels.iter().filter(|&&b| b).count(), 1, "{seq:?}");
                let idx = labels.iter().position(|&b| b).unwrap();
                assert_eq!(c.case, [WalkCase::A1, WalkCase::A2, WalkCase::B1, WalkCase::B2, WalkCase::B3][idx]);
                if matches!(c.case, WalkCase::A1 | WalkCase::B1) {
                    assert_eq!(walk_expectation(&ctx, &w), Complex64::new(0.0, 0.0), "{seq:?}");
                }
                if c.case == WalkCase::B3 {
                    assert!(c.tree_traversal);
                }
            });
        }
    }

    #[test]
    fn tree_walk_counts() {
        let expect = [2u64, 12, 120, 1680];
        for (t, &e) in (1..=4).zip(&expect) {
            assert_eq!(count_tree_walks(t).unwrap(), e);
            assert_eq!(tree_walk_formula(t).to_u64().unwrap(), e);
        }
        assert!(matches!(count_tree_walks(6), Err(Error::EnumerationBoundExceeded(_))));
        assert!(count_tree_walks(0).is_err());
    }

    #[test]
    fn b3_walk_expectation_is_one() {
        // E(x_12 x_21) = 1 only when c = 0
        let ctx = compute_context(0.4, 0.5).unwrap();
        let w = walk(&[0, 1, 2, 1]);
        assert_eq!(classify_walk(&w).case, WalkCase::B3);
        assert!((walk_expectation(&ctx, &w) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn entry_moment_pattern_at_half() {
        let ctx = compute_context(0.1, 0.5).unwrap();
        for (k, v) in [(2, -1.0), (4, 10.0), (6, -100.0)] {
            let z = exact_entry_moment(&ctx, k);
            assert!((z.re - v).abs() <= 1e-12 * v.abs() && z.im == 0.0, "k={k}: {z}");
        }
        for k in (1..=11).step_by(2) {
            assert_eq!(exact_entry_moment(&ctx, k), Complex64::new(0.0, 0.0));
        }
        for p in [0.05, 0.3, 0.9] {
            let ctx = compute_context(p, 0.5).unwrap();
            for k in (2..=10).step_by(2) {
                let z = exact_entry_moment(&ctx, k);
                let sign = if k % 4 == 0 { 1.0 } else { -1.0 };
                assert_eq!(z.re.signum(), sign);
                // Remark-1 magnitude 1/p^{k/2-1}
                assert!((z.norm() - p.powi(1 - (k / 2) as i32)).abs() <= 1e-12 * z.norm());
            }
        }
    }

    #[test]
    fn entry_moment_magnitude_bound() {
        for a in 1..=10 {
            for b in 0..=10 {
                let Ok(ctx) = compute_context(a as f64 / 10.0, b as f64 / 10.0) else { continue };
                let second = 1.0 + ctx.c * ctx.c * (1.0 - ctx.p) / (ctx.r * ctx.r);
                for k in 1..=10u32 {
                    let m = exact_entry_moment(&ctx, k).norm();
                    // |s + c| ≤ 1 + |c| on the support, so E|s+c|^k ≤ (1+|c|)^{k-2} E|s+c|²
                    let rigorous = (1.0 / ctx.r).powi(k as i32 - 2) * (1.0 + ctx.c.abs()).powi(k as i32 - 2) * second;
                    assert!(m <= rigorous * (1.0 + 1e-12), "p,q,k={a},{b},{k}");
                    // (1+|c|)^k headroom alone only covers moderate shifts
                    if ctx.c.abs() < 0.5 {
                        let headroom = (1.0 / ctx.r).powi(k as i32 - 2) * (1.0 + ctx.c.abs()).powi(k as i32);
                        assert!(m <= headroom * (1.0 + 1e-12), "p,q,k={a},{b},{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn second_entry_moment_matches_entry_law() {
        for (p, q) in [(0.5, 0.3), (0.2, 0.9), (0.7, 0.0)] {
            let ctx = compute_context(p, q).unwrap();
            let expected = -(1.0 + ctx.c * ctx.c * (1.0 - p) / (ctx.r * ctx.r));
            let z = exact_entry_moment(&ctx, 2);
            assert!((z.re - expected).abs() < 1e-13 && z.im == 0.0);
            let law = crate::normalization::entry_distribution(&ctx).second_absolute_moment();
            assert!((z.re + law).abs() < 1e-13);
        }
    }

    #[test]
    fn third_entry_moment_closed_form() {
        // i·c(3p - 1 - 2c²)/r³
        let ctx = compute_context(0.4, 0.2).unwrap();
        let c = ctx.c;
        let z = exact_entry_moment(&ctx, 3);
        let expected = c * (3.0 * 0.4 - 1.0 - 2.0 * c * c) / ctx.r.powi(3);
        assert!(z.re.abs() < 1e-15 && (z.im - expected).abs() < 1e-12);
    }

    #[test]
    fn tiny_trace_examples() {
        for p in [0.2, 0.3, 0.9] {
            let g2 = GraphParams::new(2, p, 0.5).unwrap();
            assert!((trace_moment_exact_tiny(&g2, 2).unwrap() - 0.5).abs() < 1e-12);
            assert!((walk_sum_trace_moment(&g2, 2).unwrap().re - 0.5).abs() < 1e-12);
            let g4 = GraphParams::new(4, p, 0.5).unwrap();
            assert!((trace_moment_exact_tiny(&g4, 2).unwrap() - 0.75).abs() < 1e-12);
            assert!((walk_sum_trace_moment(&g4, 2).unwrap().re - 0.75).abs() < 1e-12);
        }
        let g3 = GraphParams::new(3, 0.3, 0.2).unwrap();
        assert!(trace_moment_exact_tiny(&g3, 1).unwrap().abs() < 1e-15);
        assert_eq!(walk_sum_trace_moment(&g3, 1).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exact_bounds_enforced() {
        let g5 = GraphParams::new(5, 0.3, 0.5).unwrap();
        assert!(matches!(trace_moment_exact_tiny(&g5, 2), Err(Error::EnumerationBoundExceeded(_))));
        let g3 = GraphParams::new(3, 0.3, 0.5).unwrap();
        assert!(matches!(walk_sum_trace_moment(&g3, 9), Err(Error::EnumerationBoundExceeded(_))));
        let degenerate = GraphParams::new(3, 1.0, 1.0).unwrap();
        assert!(matches!(trace_moment_exact_tiny(&degenerate, 2), Err(Error::DegenerateNormalization { .. })));
    }

    #[test]
    fn rational_mode_agrees_with_float() {
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        for n in 2..=4 {
            for k in 1..=6u32 {
                for (pn, qn) in [(3, 2), (7, 5), (3, 8)] {
                    let exact = trace_moment_exact_rational(n, &r(pn, 10), &r(qn, 10), k).unwrap();
                    let params = GraphParams::new(n, pn as f64 / 10.0, qn as f64 / 10.0).unwrap();
                    let float = trace_moment_exact_tiny(&params, k).unwrap();
                    assert!((exact.to_f64().unwrap() - float).abs() < 1e-12, "n={n} k={k}");
                }
            }
        }
        assert_eq!(trace_moment_exact_rational(2, &r(1, 3), &r(1, 2), 2).unwrap(), r(1, 2));
        assert_eq!(trace_moment_exact_rational(4, &r(1, 3), &r(1, 2), 2).unwrap(), r(3, 4));
    }
}
