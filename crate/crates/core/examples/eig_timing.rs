//! Times one eigensolve per size: `cargo run --release --example eig_timing -- 500 1000 2000`
use std::time::Instant;

use skewspec::{compute_context, eig_skew, sample_graph, shifted_skew_matrix, skew_adjacency, GraphParams, SeedSpec};

fn main() {
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    for n in if sizes.is_empty() { vec![250, 500, 1000, 2000] } else { sizes } {
        let params = GraphParams::new(n, 0.1, 0.5).unwrap();
        let ctx = compute_context(0.1, 0.5).unwrap();
        let m = shifted_skew_matrix(&skew_adjacency(&sample_graph(&params, SeedSpec::new(1, 0))), &ctx);
        let start = Instant::now();
        let spec = eig_skew(&m).unwrap();
        println!(
            "n={n:5}  {:8.3} s  radius/(r√n)={:.4}",
            start.elapsed().as_secs_f64(),
            skewspec::spectral_radius(&spec) / (ctx.r * (n as f64).sqrt())
        );
    }
}
