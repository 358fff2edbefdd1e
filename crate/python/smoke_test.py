"""Smoke test for the skewspec Python extension.

Build and install first:  pip install maturin && maturin develop -m crates/py/Cargo.toml
(or `maturin build -m crates/py/Cargo.toml` and pip-install the wheel).
"""

import math

import skewspec


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    ctx = skewspec.NormalizationContext(0.1, 0.5)
    assert close(ctx.c, 0.0) and close(ctx.r, math.sqrt(0.1))
    support, probs = ctx.entry_distribution()
    assert close(sum(probs), 1.0) and all(isinstance(z, complex) for z in support)

    try:
        skewspec.NormalizationContext(1.0, 1.0)
    except ValueError as e:
        assert "degenerate" in str(e)
    else:
        raise AssertionError("r = 0 must be rejected")

    params = skewspec.GraphParams(10, 0.5, 0.5)
    assert (params.n, params.p, params.q) == (10, 0.5, 0.5)

    g = skewspec.sample_graph(40, 0.3, 0.6, seed=11)
    again = skewspec.OrientedGraph.read_arcs(g.write_arcs())
    assert again.arcs() == g.arcs() and len(g) == len(g.arcs())
    s = g.skew_adjacency()
    assert all(s[i][j] == -s[j][i] for i in range(40) for j in range(40))
    spec = g.spectrum()
    assert all(close(a, -b, 1e-9) for a, b in zip(spec, reversed(spec)))

    for n in (1, 2, 7, 32):
        y = [[1.0 if j > i else (-1.0 if j < i else 0.0) for j in range(n)] for i in range(n)]
        assert all(close(a, b, 1e-8) for a, b in zip(skewspec.eig_skew(y), skewspec.y_spectrum(n)))

    lam = skewspec.replica_spectrum(2, 1.0, 0.5, seed=3)
    assert close(lam[1], 1 / math.sqrt(2), 1e-15)

    assert [skewspec.count_tree_walks(t) for t in (1, 2, 3, 4)] == [2, 12, 120, 1680]
    assert skewspec.tree_walk_formula(4) == 1680
    assert [round(skewspec.exact_entry_moment(0.1, 0.5, k).real, 9) for k in (2, 4, 6)] == [-1.0, 10.0, -100.0]
    assert close(skewspec.trace_moment_exact_tiny(2, 0.3, 0.5, 2), 0.5)
    assert close(skewspec.semicircle_cdf(0.0), 0.5) and close(skewspec.semicircle_moment(4), 2.0)
    assert close(skewspec.semicircle_pdf(0.0), 1 / math.pi)

    bounds = skewspec.check_bounds(300, 0.1, 0.7, seed=3)
    assert bounds["pass"] and len(bounds["values"]) == 300

    rep = skewspec.run_ensemble(200, 0.1, 0.5, replicas=8, seed=5, moments=[2, 4], workers=2)
    assert sum(rep.counts) + sum(rep.out_of_range) == 8 * 200
    assert len(rep.bin_edges) == 61 and rep.pooled_ks < 0.1
    assert rep.histogram_csv().startswith("bin_left,bin_right,count,density\n")
    k2 = rep.moments[0]
    assert k2[0] == 2 and abs(k2[1] - 1.0) < 0.1
    rep1 = skewspec.run_ensemble(200, 0.1, 0.5, replicas=8, seed=5, moments=[2, 4], workers=1)
    assert rep1.to_json() == rep.to_json()

    print(f"skewspec smoke test passed (pooled KS {rep.pooled_ks:.4f}, m2 {k2[1]:.4f})")


if __name__ == "__main__":
    main()
