//! Randomly oriented Erdős–Rényi graphs and their skew-adjacency matrices.
//!
//! Every unordered pair `{i, j}` with `i < j` consumes exactly one uniform
//! draw, visited in lexicographic order. A draw `u` in `[0, pq)` orients the
//! edge low→high, `[pq, p)` high→low, and `[p, 1)` leaves the pair empty.
//!
//! Vertices are 0-based in memory; the text format written by
//! [`OrientedGraph::write_arcs`] is 1-based.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters `(n, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    n: usize,
    p: f64,
    q: f64,
}

impl GraphParams {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!("p = {p} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParams(format!("q = {q} is outside [0, 1]")));
        }
        Ok(Self { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Number of unordered vertex pairs, `n(n-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// Identifies one replica's random stream.
///
/// The stream is ChaCha8 keyed by `seed_from_u64(master_seed)` with the
/// ChaCha stream id set to `replica_index`. Pair number `k` (lexicographic
/// order) consumes the 64-bit word at position `k`, so the draw for a given
/// pair is fixed by `(master_seed, replica_index, k)` on every platform and
/// independently of thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replica_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        Self { master_seed, replica_index }
    }

    pub fn stream(&self) -> UniformStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replica_index);
        UniformStream { rng }
    }
}

/// Uniform `f64` draws in `[0, 1)` with 53 bits of resolution.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Jump to the draw consumed by the `index`-th call of [`next_f64`](Self::next_f64).
    pub fn seek(&mut self, index: u64) {
        // word position counts 32-bit words
        self.rng.set_word_pos(u128::from(index) * 2);
    }
}

/// Outcome of a single unordered pair `{i, j}`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairState {
    /// Arc `i → j`, `s_ij = +1`.
    Forward,
    /// Arc `j → i`, `s_ij = -1`.
    Backward,
    Absent,
}

impl PairState {
    pub fn from_draw(u: f64, p: f64, q: f64) -> Self {
        if u < p * q {
            PairState::Forward
        } else if u < p {
            PairState::Backward
        } else {
            PairState::Absent
        }
    }

    pub fn entry(self) -> i8 {
        match self {
            PairState::Forward => 1,
            PairState::Backward => -1,
            PairState::Absent => 0,
        }
    }
}

/// A sampled orientation: arcs `(tail, head)` with no loops and no 2-cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

impl OrientedGraph {
    /// Builds a graph from 0-based arcs, rejecting loops, out-of-range
    /// vertices, duplicates and opposite arcs on the same pair.
    pub fn from_arcs(n: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(arcs.len());
        for &(i, j) in &arcs {
            if i >= n || j >= n {
                return Err(Error::InvalidParams(format!("arc ({}, {}) out of range for n = {n}", i + 1, j + 1)));
            }
            if i == j {
                return Err(Error::InvalidParams(format!("self-loop at vertex {}", i + 1)));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidParams(format!("pair {{{}, {}}} carries more than one arc", i + 1, j + 1)));
            }
        }
        Ok(Self { n, arcs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Writes the tab-separated, 1-based arc list with its header line.
    pub fn write_arcs(&self) -> String {
        let mut out = format!("# skewspec arcs n={}\n", self.n);
        for &(i, j) in &self.arcs {
            let _ = writeln!(out, "{}\t{}", i + 1, j + 1);
        }
        out
    }

    pub fn read_arcs(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let n =
            header.trim().strip_prefix("# skewspec arcs n=").and_then(|s| s.trim().parse::<usize>().ok()).ok_or_else(
                || Error::Parse { line: 1, msg: format!("expected header \"# skewspec arcs n=<n>\", got {header:?}") },
            )?;
        let mut arcs = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace().map(str::parse::<usize>);
            let (Some(Ok(i)), Some(Ok(j)), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse { line: idx + 1, msg: format!("expected \"i<TAB>j\", got {line:?}") });
            };
            if i == 0 || j == 0 {
                return Err(Error::Parse { line: idx + 1, msg: "vertex indices are 1-based".into() });
            }
            arcs.push((i - 1, j - 1));
        }
        Self::from_arcs(n, arcs)
    }
}

/// Dense skew-adjacency matrix with entries in `{-1, 0, +1}`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0; n * n] }
    }

    /// `Y_n`: +1 above the diagonal, -1 below.
    pub fn upper_ones(n: usize) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                s.set_pair(i, j, 1);
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    /// Sets `s_ij = value` and `s_ji = -value`.
    fn set_pair(&mut self, i: usize, j: usize, value: i8) {
        self.entries[i * self.n + j] = value;
        self.entries[j * self.n + i] = -value;
    }

    pub fn is_skew_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == -self.get(j, i)))
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }
}

/// Samples `G_{n,p}^σ` from the replica stream named by `seed`.
pub fn sample_graph(params: &GraphParams, seed: SeedSpec) -> OrientedGraph {
    let (n, p, q) = (params.n, params.p, params.q);
    let mut stream = seed.stream();
    let mut arcs = Vec::with_capacity((params.pair_count() as f64 * p * 1.05) as usize + 8);
    for i in 0..n {
        for j in i + 1..n {
            match PairState::from_draw(stream.next_f64(), p, q) {
                PairState::Forward => arcs.push((i, j)),
                PairState::Backward => arcs.push((j, i)),
                PairState::Absent => {}
            }
        }
    }
    OrientedGraph { n, arcs }
}

pub fn skew_adjacency(g: &OrientedGraph) -> SkewMatrix {
    let mut s = SkewMatrix::zeros(g.n);
    for &(i, j) in &g.arcs {
        s.set_pair(i, j, 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, p: f64, q: f64) -> GraphParams {
        GraphParams::new(n, p, q).unwrap()
    }

    #[test]
    fn rejects_out_of_range_params() {
        assert!(GraphParams::new(0, 0.5, 0.5).is_err());
        assert!(GraphParams::new(3, -0.1, 0.5).is_err());
        assert!(GraphParams::new(3, 0.5, 1.5).is_err());
        assert!(GraphParams::new(3, f64::NAN, 0.5).is_err());
    }

    #[test]
    fn full_transitive_tournament() {
        for seed in 0..5 {
            let g = sample_graph(&params(3, 1.0, 1.0), SeedSpec::new(seed, 3));
            assert_eq!(g.arcs(), &[(0, 1), (0, 2), (1, 2)]);
            assert_eq!(skew_adjacency(&g), SkewMatrix::upper_ones(3));
        }
    }

    #[test]
    fn empty_when_p_zero() {
        let g = sample_graph(&params(5, 0.0, 0.5), SeedSpec::new(11, 0));
        assert_eq!(g.arc_count(), 0);
        assert_eq!(skew_adjacency(&g), SkewMatrix::zeros(5));
    }

    #[test]
    fn skew_adjacency_definition() {
        let g = OrientedGraph::from_arcs(3, vec![(0, 1), (2, 0)]).unwrap();
        let s = skew_adjacency(&g);
        assert_eq!(s.get(0, 1), 1);
        assert_eq!(s.get(1, 0), -1);
        assert_eq!(s.get(2, 0), 1);
        assert_eq!(s.get(0, 2), -1);
        assert_eq!(s.get(1, 2), 0);
        assert_eq!(s.get(2, 1), 0);
        assert!((0..3).all(|i| s.get(i, i) == 0));
    }

    #[test]
    fn from_arcs_rejects_bad_arcs() {
        assert!(OrientedGraph::from_arcs(3, vec![(0, 0)]).is_err());
        assert!(OrientedGraph::from_arcs(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(OrientedGraph::from_arcs(3, vec![(0, 3)]).is_err());
    }

    #[test]
    fn arc_list_round_trip() {
        let g = sample_graph(&params(40, 0.3, 0.4), SeedSpec::new(5, 1));
        let text = g.write_arcs();
        assert!(text.starts_with("# skewspec arcs n=40\n"));
        assert!(text.lines().nth(1).unwrap().contains('\t'));
        assert_eq!(OrientedGraph::read_arcs(&text).unwrap(), g);
    }

    #[test]
    fn read_arcs_errors() {
        assert!(OrientedGraph::read_arcs("").is_err());
        assert!(OrientedGraph::read_arcs("1\t2\n").is_err());
        assert!(OrientedGraph::read_arcs("# skewspec arcs n=3\n0\t1\n").is_err());
        assert!(OrientedGraph::read_arcs("# skewspec arcs n=3\n1\tx\n").is_err());
    }

    #[test]
    fn deterministic_and_replica_sensitive() {
        let p = params(30, 0.5, 0.5);
        let a = sample_graph(&p, SeedSpec::new(9, 0));
        assert_eq!(a, sample_graph(&p, SeedSpec::new(9, 0)));
        for r in 0..100 {
            let x = sample_graph(&p, SeedSpec::new(9, 2 * r));
            let y = sample_graph(&p, SeedSpec::new(9, 2 * r + 1));
            assert_ne!(x.arcs(), y.arcs());
        }
    }

    #[test]
    fn seek_matches_sequential_draws() {
        let seed = SeedSpec::new(77, 4);
        let mut seq = seed.stream();
        let draws: Vec<f64> = (0..50).map(|_| seq.next_f64()).collect();
        let mut jump = seed.stream();
        jump.seek(37);
        assert_eq!(jump.next_f64(), draws[37]);
        assert!(draws.iter().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn arc_count_mean_matches_binomial() {
        let p = params(1000, 0.1, 0.5);
        let trials = 100;
        let total: usize = (0..trials).map(|s| sample_graph(&p, SeedSpec::new(s, 0)).arc_count()).sum();
        let mean = total as f64 / trials as f64;
        let pairs = 499_500.0;
        let sd_of_mean = (pairs * 0.1 * 0.9f64).sqrt() / (trials as f64).sqrt();
        assert!((mean - 49_950.0).abs() <= 5.0 * sd_of_mean, "mean arc count {mean}");
    }

    #[test]
    fn orientation_ratio_tracks_q() {
        let g = sample_graph(&params(500, 0.2, 0.3), SeedSpec::new(2024, 0));
        let edges = g.arc_count() as f64;
        let forward = g.arcs().iter().filter(|(i, j)| i < j).count() as f64;
        let band = 4.0 * (0.3 * 0.7 / edges).sqrt();
        assert!((forward / edges - 0.3).abs() <= band);
    }
}
