//! Replica-parallel Monte Carlo over sampled orientations.
//!
//! Each replica `r` samples from `SeedSpec(master_seed, r)`, computes the
//! spectrum of `n^{-1/2} X_n` and its summaries. Replicas run on a rayon
//! pool; results are collected in replica order and merged sequentially,
//! so everything except the timings is independent of the worker count.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_graph, skew_adjacency, GraphParams, SeedSpec, SkewMatrix};
use crate::normalization::{compute_context, shifted_skew_matrix, NormalizationContext};
use crate::semicircle;
use crate::spectral::{eig_skew, spectral_radius, weyl_bounds, Esd, RealSkewMatrix, Spectrum};
use crate::walks::mean_and_std_error;

/// The JSON config file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_range")]
    pub range: [f64; 2],
    #[serde(default = "default_epsilon")]
    pub epsilon_weyl: f64,
    #[serde(default = "default_moments")]
    pub moments: Vec<u32>,
}

fn default_bins() -> usize {
    60
}
fn default_range() -> [f64; 2] {
    [-2.5, 2.5]
}
fn default_epsilon() -> f64 {
    0.3
}
fn default_moments() -> Vec<u32> {
    vec![1, 2, 3, 4, 6]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub params: GraphParams,
    pub replicas: usize,
    pub master_seed: u64,
    pub bins: usize,
    pub range: (f64, f64),
    pub epsilon_weyl: f64,
    pub moments_to_check: Vec<u32>,
}

impl EnsembleConfig {
    /// Config with the default histogram (60 bins on `[-2.5, 2.5]`), `ε = 0.3`
    /// and moments `{1, 2, 3, 4, 6}`.
    pub fn new(params: GraphParams, replicas: usize, master_seed: u64) -> Self {
        Self {
            params,
            replicas,
            master_seed,
            bins: default_bins(),
            range: (-2.5, 2.5),
            epsilon_weyl: default_epsilon(),
            moments_to_check: default_moments(),
        }
    }

    pub fn from_file(file: &ConfigFile) -> Result<Self> {
        let params = GraphParams::new(file.n, file.p, file.q).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let cfg = Self {
            params,
            replicas: file.replicas,
            master_seed: file.seed,
            bins: file.bins,
            range: (file.range[0], file.range[1]),
            epsilon_weyl: file.epsilon_weyl,
            moments_to_check: file.moments.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            n: self.params.n(),
            p: self.params.p(),
            q: self.params.q(),
            replicas: self.replicas,
            seed: self.master_seed,
            bins: self.bins,
            range: [self.range.0, self.range.1],
            epsilon_weyl: self.epsilon_weyl,
            moments: self.moments_to_check.clone(),
        }
    }

    pub fn validate(&self) -> Result<NormalizationContext> {
        if self.replicas == 0 {
            return Err(Error::InvalidConfig("replicas must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::InvalidConfig("bins must be at least 1".into()));
        }
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!("histogram range [{lo}, {hi}] must be finite with lo < hi")));
        }
        if self.epsilon_weyl.is_nan() || self.epsilon_weyl < 0.0 {
            return Err(Error::InvalidConfig(format!("epsilon_weyl = {} must be non-negative", self.epsilon_weyl)));
        }
        compute_context(self.params.p(), self.params.q())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub below: u64,
    pub above: u64,
    pub total: u64,
}

impl Histogram {
    fn empty(bins: usize, (lo, hi): (f64, f64)) -> Self {
        let edges = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        Self { edges, counts: vec![0; bins], density: vec![0.0; bins], below: 0, above: 0, total: 0 }
    }

    /// Bins are `[e_i, e_{i+1})`, the last one closed on the right.
    fn add(&mut self, x: f64) {
        self.total += 1;
        let bins = self.counts.len();
        let (lo, hi) = (self.edges[0], self.edges[bins]);
        if x < lo {
            self.below += 1;
        } else if x > hi {
            self.above += 1;
        } else {
            let mut b = (((x - lo) / (hi - lo)) * bins as f64) as usize;
            b = b.min(bins - 1);
            // guard against rounding at interior edges
            if x < self.edges[b] {
                b -= 1;
            } else if b + 1 < bins && x >= self.edges[b + 1] {
                b += 1;
            }
            self.counts[b] += 1;
        }
    }

    fn finish(&mut self) {
        let total = self.total.max(1) as f64;
        for (i, d) in self.density.iter_mut().enumerate() {
            *d = self.counts[i] as f64 / (total * (self.edges[i + 1] - self.edges[i]));
        }
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `max_i |density_i - (F(e_{i+1}) - F(e_i)) / width_i|` against the
    /// semicircle law's mass per unit length in each bin.
    pub fn max_density_deviation(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (a, b) = (self.edges[i], self.edges[i + 1]);
                (d - (semicircle::cdf(b) - semicircle::cdf(a)) / (b - a)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation from the density evaluated at bin centres.
    pub fn max_midpoint_deviation(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| (d - semicircle::pdf(0.5 * (self.edges[i] + self.edges[i + 1]))).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `bin_left,bin_right,count,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count,density\n");
        for i in 0..self.counts.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                crate::fmt_f64(self.edges[i]),
                crate::fmt_f64(self.edges[i + 1]),
                self.counts[i],
                crate::fmt_f64(self.density[i])
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary {
    pub k: u32,
    pub target: f64,
    pub pooled: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    pub pooled: f64,
    pub mean_per_replica: f64,
    pub per_replica: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylSummary {
    pub epsilon: f64,
    pub passes: usize,
    pub replicas: usize,
    pub pass_rate: f64,
    pub violations_per_replica: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub wall_clock_s: f64,
    pub replica_s: Vec<f64>,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub config: ConfigFile,
    pub normalization: NormalizationContext,
    pub histogram: Histogram,
    pub max_density_deviation: f64,
    pub ks: KsSummary,
    pub moments: Vec<MomentSummary>,
    pub spectral_radius_mean: f64,
    pub spectral_radius_per_replica: Vec<f64>,
    pub weyl: WeylSummary,
    #[serde(skip)]
    pub timings: Timings,
}

impl EnsembleReport {
    /// Report JSON without timings; byte-identical across worker counts.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }

    pub fn timings_json(&self) -> String {
        serde_json::to_string_pretty(&self.timings).expect("timings are serializable") + "\n"
    }
}

/// Spectrum of `n^{-1/2} X_n`: `eig_skew(S + cY) / (r√n)`.
pub fn replica_spectrum(params: &GraphParams, seed: SeedSpec) -> Result<Spectrum> {
    let ctx = compute_context(params.p(), params.q())?;
    Ok(raw_replica_spectrum(params, &ctx, seed).0.scaled(ctx.r * (params.n() as f64).sqrt()))
}

/// Unscaled spectra of `-iM` and `-iS` (the latter only when `c ≠ 0`).
fn raw_replica_spectrum(
    params: &GraphParams,
    ctx: &NormalizationContext,
    seed: SeedSpec,
) -> (Spectrum, Option<Spectrum>) {
    let s = skew_adjacency(&sample_graph(params, seed));
    let m = shifted_skew_matrix(&s, ctx);
    let spec_m = eig_skew(&m).expect("shifted matrix is skew by construction");
    let spec_s = (ctx.c != 0.0).then(|| eig_skew(&skew_as_real(&s)).expect("skew by construction"));
    (spec_m, spec_s)
}

fn skew_as_real(s: &SkewMatrix) -> RealSkewMatrix {
    RealSkewMatrix::from_upper_fn(s.n(), |i, j| f64::from(s.get(i, j)))
}

/// Spectrum of `-iS_n` (unnormalized), for bound checks.
pub fn skew_spectrum(params: &GraphParams, seed: SeedSpec) -> Spectrum {
    let s = skew_adjacency(&sample_graph(params, seed));
    eig_skew(&skew_as_real(&s)).expect("skew by construction")
}

struct ReplicaOutcome {
    points: Vec<f64>,
    ks: f64,
    moments: Vec<f64>,
    radius: f64,
    weyl_violations: usize,
    elapsed_s: f64,
}

fn run_replica(cfg: &EnsembleConfig, ctx: &NormalizationContext, index: u64) -> ReplicaOutcome {
    let start = Instant::now();
    let n = cfg.params.n();
    let (spec_m, spec_s) = raw_replica_spectrum(&cfg.params, ctx, SeedSpec::new(cfg.master_seed, index));
    let scale = ctx.r * (n as f64).sqrt();
    let scaled = spec_m.scaled(scale);
    let weyl = weyl_bounds(spec_s.as_ref().unwrap_or(&spec_m), ctx, cfg.epsilon_weyl);
    let esd = Esd::from_points(scaled.ascending().to_vec());
    let moments = cfg.moments_to_check.iter().map(|&k| semicircle::empirical_moment(&esd, k)).collect();
    ReplicaOutcome {
        ks: semicircle::ks_distance(&esd),
        radius: spectral_radius(&scaled),
        points: esd.points().to_vec(),
        moments,
        weyl_violations: weyl.violations,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}

/// Runs on the current rayon pool.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    let ctx = cfg.validate()?;
    let start = Instant::now();
    let outcomes: Vec<ReplicaOutcome> =
        (0..cfg.replicas as u64).into_par_iter().map(|i| run_replica(cfg, &ctx, i)).collect();
    Ok(merge(cfg, ctx, outcomes, start.elapsed().as_secs_f64(), rayon::current_num_threads()))
}

/// Runs on a dedicated pool with `workers` threads.
pub fn run_ensemble_with_workers(cfg: &EnsembleConfig, workers: usize) -> Result<EnsembleReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_ensemble(cfg))
}

fn merge(
    cfg: &EnsembleConfig,
    ctx: NormalizationContext,
    outcomes: Vec<ReplicaOutcome>,
    wall: f64,
    workers: usize,
) -> EnsembleReport {
    let replicas = outcomes.len();
    let mut histogram = Histogram::empty(cfg.bins, cfg.range);
    let mut pooled = Vec::with_capacity(replicas * cfg.params.n());
    for o in &outcomes {
        for &x in &o.points {
            histogram.add(x);
        }
        pooled.extend_from_slice(&o.points);
    }
    histogram.finish();
    let pooled_ks = semicircle::ks_distance(&Esd::from_points(pooled));

    let per_replica: Vec<f64> = outcomes.iter().map(|o| o.ks).collect();
    let moments = cfg
        .moments_to_check
        .iter()
        .enumerate()
        .map(|(slot, &k)| {
            let samples: Vec<f64> = outcomes.iter().map(|o| o.moments[slot]).collect();
            let est = mean_and_std_error(&samples);
            MomentSummary { k, target: semicircle::moment(k), pooled: est.mean, std_error: est.std_error }
        })
        .collect();
    let violations: Vec<usize> = outcomes.iter().map(|o| o.weyl_violations).collect();
    let passes = violations.iter().filter(|&&v| v == 0).count();
    let radii: Vec<f64> = outcomes.iter().map(|o| o.radius).collect();

    EnsembleReport {
        config: cfg.to_file(),
        normalization: ctx,
        max_density_deviation: histogram.max_density_deviation(),
        histogram,
        ks: KsSummary {
            pooled: pooled_ks,
            mean_per_replica: per_replica.iter().sum::<f64>() / replicas as f64,
            per_replica,
        },
        moments,
        spectral_radius_mean: radii.iter().sum::<f64>() / replicas as f64,
        spectral_radius_per_replica: radii,
        weyl: WeylSummary {
            epsilon: cfg.epsilon_weyl,
            passes,
            replicas,
            pass_rate: passes as f64 / replicas as f64,
            violations_per_replica: violations,
        },
        timings: Timings { wall_clock_s: wall, replica_s: outcomes.iter().map(|o| o.elapsed_s).collect(), workers },
    }
}

/// Worker count from `SKEWSPEC_THREADS`, if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var("SKEWSPEC_THREADS").ok()?.trim().parse().ok().filter(|&w| w > 0)
}
