//! `skewspec` command-line tool. Exit status: 0 success, 1 failed
//! verification or bound check, 2 usage or parameter errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};
use skewspec::ensemble::{run_ensemble, skew_spectrum, workers_from_env, EnsembleConfig};
use skewspec::walks::{
    count_tree_walks, exact_entry_moment, exhaustive_trace_moment, trace_moment_exact_rational, tree_walk_formula,
    walk_sum_trace_moment, MAX_TREE_WALK_T,
};
use skewspec::{
    compute_context, eig_skew, sample_graph, shifted_skew_matrix, skew_adjacency, weyl_bounds, GraphParams,
    OrientedGraph, SeedSpec,
};

#[derive(Parser)]
#[command(name = "skewspec", version, about = "Spectra of randomly oriented Erdős–Rényi graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Number of vertices
    #[arg(long)]
    n: usize,
    /// Edge probability
    #[arg(long)]
    p: f64,
    /// Probability that an edge points from the lower to the higher index
    #[arg(long)]
    q: f64,
    /// Master seed
    #[arg(long)]
    seed: u64,
    /// Replica index (selects an independent stream under the same seed)
    #[arg(long, default_value_t = 0)]
    replica: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an oriented graph and write its arc list (1-based, tab separated)
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum of -i(S + cY) as CSV "index,lambda", ascending
    Spectrum {
        /// Read the graph from an arc-list file instead of sampling
        #[arg(long = "in", value_name = "ARCFILE", conflicts_with_all = ["n", "seed", "replica"])]
        input: Option<PathBuf>,
        /// Number of vertices (sampling mode)
        #[arg(long, required_unless_present = "input")]
        n: Option<usize>,
        /// Edge probability; sets the shift c (optional with --in, then c = 0)
        #[arg(long, required_unless_present = "input", requires = "q")]
        p: Option<f64>,
        /// Orientation probability; sets the shift c
        #[arg(long, required_unless_present = "input", requires = "p")]
        q: Option<f64>,
        /// Master seed (sampling mode)
        #[arg(long, required_unless_present = "input")]
        seed: Option<u64>,
        /// Replica index (sampling mode)
        #[arg(long, default_value_t = 0)]
        replica: u64,
        /// Divide eigenvalues by r·√n (requires --p and --q)
        #[arg(long)]
        scaled: bool,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo ensemble; writes histogram.csv, report.json, timings.json
    Ensemble {
        /// JSON config: {"n","p","q","replicas","seed","bins","range","epsilon_weyl","moments"}
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing)
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run an exact oracle suite and print JSON check records
    Verify {
        /// Which suite to run
        #[arg(long, value_enum)]
        suite: Suite,
        /// Largest tree-walk half-length (walks suite)
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=i64::from(MAX_TREE_WALK_T)))]
        t_max: u32,
        /// Vertex count (trace suite, default 2)
        #[arg(long)]
        n: Option<usize>,
        /// Moment order (trace suite, default 2) or largest order (moments suite, default 6)
        #[arg(long)]
        k: Option<u32>,
        /// Edge probability (default 0.1 for moments, 0.5 for trace)
        #[arg(long)]
        p: Option<f64>,
        /// Orientation probability (default 0.5)
        #[arg(long)]
        q: Option<f64>,
    },
    /// Check the Weyl sandwich for every eigenvalue of -iS
    CheckBounds {
        #[command(flatten)]
        model: ModelArgs,
        /// Slack ε in the bounds
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    /// Entry-moment identities and magnitude bounds
    Moments,
    /// Tree-walk counts against Catalan(t)·(t+1)!
    Walks,
    /// Exact tiny-n trace moments: enumeration vs walk sum vs rational
    Trace,
}

#[derive(Serialize)]
struct Check {
    check: String,
    expected: Value,
    actual: Value,
    pass: bool,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn params(m: &ModelArgs) -> anyhow::Result<GraphParams> {
    Ok(GraphParams::new(m.n, m.p, m.q)?)
}

fn spectrum_cmd(
    input: Option<PathBuf>,
    model: (Option<usize>, Option<f64>, Option<f64>, Option<u64>, u64),
    scaled: bool,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let (n, p, q, seed, replica) = model;
    let ctx = match (p, q) {
        (Some(p), Some(q)) => Some(compute_context(p, q)?),
        _ => None,
    };
    if scaled && ctx.is_none() {
        bail!("--scaled needs --p and --q to determine r");
    }
    let graph = match input {
        Some(path) => {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            OrientedGraph::read_arcs(&text)?
        }
        None => {
            let params = GraphParams::new(n.expect("required by clap"), p.expect("required"), q.expect("required"))?;
            sample_graph(&params, SeedSpec::new(seed.expect("required by clap"), replica))
        }
    };
    let s = skew_adjacency(&graph);
    let m = match &ctx {
        Some(ctx) => shifted_skew_matrix(&s, ctx),
        None => skewspec::RealSkewMatrix::from_upper_fn(s.n(), |i, j| f64::from(s.get(i, j))),
    };
    let mut spec = eig_skew(&m)?;
    if scaled {
        let ctx = ctx.expect("checked above");
        spec = spec.scaled(ctx.r * (s.n() as f64).sqrt());
    }
    emit(out.as_deref(), &spec.to_csv())
}

fn ensemble_cmd(config: &Path, out_dir: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = EnsembleConfig::from_json(&text)?;
    let report = run_ensemble(&cfg)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    fs::write(out_dir.join("histogram.csv"), report.histogram.to_csv())?;
    fs::write(out_dir.join("report.json"), report.to_json())?;
    fs::write(out_dir.join("timings.json"), report.timings_json())?;
    let moments: Vec<String> = report.moments.iter().map(|m| format!("m{}={:.6}", m.k, m.pooled)).collect();
    println!(
        "replicas={} pooled_ks={:.6} max_density_deviation={:.6} {} weyl_pass_rate={:.3} wall_clock_s={:.2}",
        cfg.replicas,
        report.ks.pooled,
        report.max_density_deviation,
        moments.join(" "),
        report.weyl.pass_rate,
        report.timings.wall_clock_s
    );
    Ok(())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn verify_moments(p: f64, q: f64, k_max: u32) -> anyhow::Result<Vec<Check>> {
    let ctx = compute_context(p, q)?;
    let mut checks = Vec::new();
    let second = -(1.0 + ctx.c * ctx.c * (1.0 - p) / (ctx.r * ctx.r));
    let z2 = exact_entry_moment(&ctx, 2);
    checks.push(Check {
        check: "entry_moment_second".into(),
        expected: json!(second),
        actual: json!(z2.re),
        pass: close(z2.re, second, 1e-12) && z2.im.abs() <= 1e-12,
    });
    for k in 1..=k_max {
        let z = exact_entry_moment(&ctx, k);
        let bound = (1.0 / ctx.r).powi(k as i32 - 2) * (1.0 + ctx.c.abs()).powi(k as i32);
        checks.push(Check {
            check: format!("entry_moment_bound k={k}"),
            expected: json!(bound),
            actual: json!(z.norm()),
            pass: z.norm() <= bound * (1.0 + 1e-12),
        });
        if ctx.c == 0.0 {
            let expected = if k % 2 == 1 {
                0.0
            } else {
                let sign = if k % 4 == 0 { 1.0 } else { -1.0 };
                sign * p.powi(1 - (k / 2) as i32)
            };
            checks.push(Check {
                check: format!("entry_moment_pattern k={k}"),
                expected: json!(expected),
                actual: json!(z.re),
                pass: close(z.re, expected, 1e-12 * expected.abs().max(1.0)) && z.im.abs() <= 1e-12,
            });
        }
    }
    Ok(checks)
}

fn verify_walks(t_max: u32) -> anyhow::Result<Vec<Check>> {
    (1..=t_max)
        .map(|t| {
            let count = count_tree_walks(t)?;
            let formula = tree_walk_formula(t).to_u64().expect("fits in u64 within the enumeration bound");
            Ok(Check {
                check: format!("tree_walks t={t}"),
                expected: json!(formula),
                actual: json!(count),
                pass: count == formula,
            })
        })
        .collect()
}

fn verify_trace(n: usize, k: u32, p: f64, q: f64) -> anyhow::Result<Vec<Check>> {
    let params = GraphParams::new(n, p, q)?;
    compute_context(p, q)?;
    let exhaustive = exhaustive_trace_moment(&params, k)?;
    let walk_sum = walk_sum_trace_moment(&params, k)?;
    let exact = trace_moment_exact_rational(
        n,
        &BigRational::from_float(p).expect("finite"),
        &BigRational::from_float(q).expect("finite"),
        k,
    )?
    .to_f64()
    .expect("representable");
    Ok(vec![
        Check {
            check: format!("trace_walk_sum n={n} k={k}"),
            expected: json!(walk_sum.re),
            actual: json!(exhaustive.re),
            pass: (exhaustive - walk_sum).norm() <= 1e-12 && exhaustive.im.abs() <= 1e-12,
        },
        Check {
            check: format!("trace_rational n={n} k={k}"),
            expected: json!(exact),
            actual: json!(exhaustive.re),
            pass: close(exhaustive.re, exact, 1e-12 * exact.abs().max(1.0)),
        },
    ])
}

fn check_bounds_cmd(model: &ModelArgs, epsilon: f64) -> anyhow::Result<bool> {
    if epsilon.is_nan() || epsilon < 0.0 {
        bail!("--epsilon must be non-negative");
    }
    let params = params(model)?;
    let ctx = compute_context(model.p, model.q)?;
    let spec = skew_spectrum(&params, SeedSpec::new(model.seed, model.replica));
    let report = weyl_bounds(&spec, &ctx, epsilon);
    let first = report
        .first_violation()
        .map(|w| json!({"index": w.index, "value": w.value, "lower": w.lower, "upper": w.upper}));
    let out = json!({
        "n": model.n,
        "p": model.p,
        "q": model.q,
        "seed": model.seed,
        "replica": model.replica,
        "epsilon": epsilon,
        "indices_checked": report.indices.len(),
        "violations": report.violations,
        "pass": report.all_pass(),
        "first_violation": first,
    });
    emit(None, &(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(report.all_pass())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Sample { model, out } => {
            let g = sample_graph(&params(&model)?, SeedSpec::new(model.seed, model.replica));
            emit(out.as_deref(), &g.write_arcs())?;
            Ok(true)
        }
        Command::Spectrum { input, n, p, q, seed, replica, scaled, out } => {
            spectrum_cmd(input, (n, p, q, seed, replica), scaled, out)?;
            Ok(true)
        }
        Command::Ensemble { config, out_dir } => {
            ensemble_cmd(&config, &out_dir)?;
            Ok(true)
        }
        Command::Verify { suite, t_max, n, k, p, q } => {
            let checks = match suite {
                Suite::Moments => verify_moments(p.unwrap_or(0.1), q.unwrap_or(0.5), k.unwrap_or(6))?,
                Suite::Walks => verify_walks(t_max)?,
                Suite::Trace => verify_trace(n.unwrap_or(2), k.unwrap_or(2), p.unwrap_or(0.5), q.unwrap_or(0.5))?,
            };
            emit(None, &(serde_json::to_string_pretty(&checks)? + "\n"))?;
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::CheckBounds { model, epsilon } => check_bounds_cmd(&model, epsilon),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = workers_from_env() {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
