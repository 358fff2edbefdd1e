//! Python bindings. Heavy calls release the GIL; every error surfaces as
//! `ValueError` carrying the library message.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};
use skewspec::ensemble::{self, EnsembleConfig};
use skewspec::graph::{self, SeedSpec};
use skewspec::spectral::{self, RealSkewMatrix};
use skewspec::{normalization, semicircle, walks};

fn err(e: skewspec::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "GraphParams", frozen, module = "skewspec")]
struct PyGraphParams(graph::GraphParams);

#[pymethods]
impl PyGraphParams {
    #[new]
    fn new(n: usize, p: f64, q: f64) -> PyResult<Self> {
        graph::GraphParams::new(n, p, q).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q()
    }

    fn __repr__(&self) -> String {
        format!("GraphParams(n={}, p={}, q={})", self.0.n(), self.0.p(), self.0.q())
    }
}

#[pyclass(name = "NormalizationContext", frozen, module = "skewspec")]
struct PyNormalizationContext(normalization::NormalizationContext);

#[pymethods]
impl PyNormalizationContext {
    #[new]
    fn new(p: f64, q: f64) -> PyResult<Self> {
        normalization::compute_context(p, q).map(Self).map_err(err)
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q
    }

    /// Shift `p(1 - 2q)`.
    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    /// Entry scale `r > 0`.
    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }

    /// Support `x` values and probabilities of an off-diagonal entry of `X_n`.
    fn entry_distribution(&self) -> (Vec<Cplx>, [f64; 3]) {
        let d = normalization::entry_distribution(&self.0);
        (d.support.iter().copied().map(Cplx).collect(), d.probabilities)
    }

    fn __repr__(&self) -> String {
        format!("NormalizationContext(p={}, q={}, c={}, r={})", self.0.p, self.0.q, self.0.c, self.0.r)
    }
}

/// `Complex64` returned to Python as `complex`.
struct Cplx(Complex64);

impl<'py> IntoPyObject<'py> for Cplx {
    type Target = PyComplex;
    type Output = Bound<'py, PyComplex>;
    type Error = std::convert::Infallible;

    fn into_pyobject(self, py: Python<'py>) -> Result<Self::Output, Self::Error> {
        Ok(PyComplex::from_doubles(py, self.0.re, self.0.im))
    }
}

#[pyclass(name = "OrientedGraph", frozen, module = "skewspec")]
struct PyOrientedGraph(graph::OrientedGraph);

#[pymethods]
impl PyOrientedGraph {
    /// Build from 1-based arcs `(tail, head)`.
    #[new]
    fn new(n: usize, arcs: Vec<(usize, usize)>) -> PyResult<Self> {
        let zero_based = arcs.into_iter().map(|(i, j)| (i.wrapping_sub(1), j.wrapping_sub(1))).collect();
        graph::OrientedGraph::from_arcs(n, zero_based).map(Self).map_err(err)
    }

    /// Parse the arc-list text format.
    #[staticmethod]
    fn read_arcs(text: &str) -> PyResult<Self> {
        graph::OrientedGraph::read_arcs(text).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    /// Arcs as 1-based `(tail, head)` pairs.
    fn arcs(&self) -> Vec<(usize, usize)> {
        self.0.arcs().iter().map(|&(i, j)| (i + 1, j + 1)).collect()
    }

    fn write_arcs(&self) -> String {
        self.0.write_arcs()
    }

    /// Dense skew-adjacency matrix `S` as nested lists of ints.
    fn skew_adjacency(&self) -> Vec<Vec<i8>> {
        let s = graph::skew_adjacency(&self.0);
        s.entries().chunks(s.n().max(1)).take(s.n()).map(<[i8]>::to_vec).collect()
    }

    /// Ascending eigenvalues of `-iS`.
    fn spectrum(&self, py: Python<'_>) -> Vec<f64> {
        py.detach(|| {
            let s = graph::skew_adjacency(&self.0);
            let m = RealSkewMatrix::from_upper_fn(s.n(), |i, j| f64::from(s.get(i, j)));
            spectral::eig_skew(&m).expect("skew by construction").ascending().to_vec()
        })
    }

    fn __len__(&self) -> usize {
        self.0.arc_count()
    }
}

/// Sample an oriented graph on the stream `(seed, replica)`.
#[pyfunction]
#[pyo3(signature = (n, p, q, seed, replica = 0))]
fn sample_graph(n: usize, p: f64, q: f64, seed: u64, replica: u64) -> PyResult<PyOrientedGraph> {
    let params = graph::GraphParams::new(n, p, q).map_err(err)?;
    Ok(PyOrientedGraph(graph::sample_graph(&params, SeedSpec::new(seed, replica))))
}

/// Ascending eigenvalues of `-iM` for a real skew-symmetric matrix given as rows.
#[pyfunction]
fn eig_skew(py: Python<'_>, rows: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    py.detach(|| {
        let m = RealSkewMatrix::from_row_major(n, data)?;
        spectral::eig_skew(&m).map(|s| s.ascending().to_vec())
    })
    .map_err(err)
}

/// Spectrum of `n^{-1/2} X_n` for one replica, ascending.
#[pyfunction]
#[pyo3(signature = (n, p, q, seed, replica = 0))]
fn replica_spectrum(py: Python<'_>, n: usize, p: f64, q: f64, seed: u64, replica: u64) -> PyResult<Vec<f64>> {
    let params = graph::GraphParams::new(n, p, q).map_err(err)?;
    py.detach(|| ensemble::replica_spectrum(&params, SeedSpec::new(seed, replica)))
        .map(|s| s.ascending().to_vec())
        .map_err(err)
}

/// Closed-form spectrum `cot(π(2i-1)/2n)` of `-iY_n`, ascending.
#[pyfunction]
fn y_spectrum(n: usize) -> Vec<f64> {
    spectral::y_spectrum_closed_form(n).ascending().to_vec()
}

/// Weyl sandwich check for one sampled `-iS`; returns a dict summary.
#[pyfunction]
#[pyo3(signature = (n, p, q, seed, epsilon = 0.3, replica = 0))]
fn check_bounds<'py>(
    py: Python<'py>,
    n: usize,
    p: f64,
    q: f64,
    seed: u64,
    epsilon: f64,
    replica: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = graph::GraphParams::new(n, p, q).map_err(err)?;
    let ctx = normalization::compute_context(p, q).map_err(err)?;
    let spec = py.detach(|| ensemble::skew_spectrum(&params, SeedSpec::new(seed, replica)));
    let report = spectral::weyl_bounds(&spec, &ctx, epsilon);
    let d = PyDict::new(py);
    d.set_item("pass", report.all_pass())?;
    d.set_item("violations", report.violations)?;
    d.set_item("values", report.indices.iter().map(|w| w.value).collect::<Vec<_>>())?;
    d.set_item("lower", report.indices.iter().map(|w| w.lower).collect::<Vec<_>>())?;
    d.set_item("upper", report.indices.iter().map(|w| w.upper).collect::<Vec<_>>())?;
    Ok(d)
}

#[pyfunction]
fn semicircle_pdf(x: f64) -> f64 {
    semicircle::pdf(x)
}

#[pyfunction]
fn semicircle_cdf(x: f64) -> f64 {
    semicircle::cdf(x)
}

#[pyfunction]
fn semicircle_moment(k: u32) -> f64 {
    semicircle::moment(k)
}

/// Kolmogorov–Smirnov distance of the points' ESD from the semicircle.
#[pyfunction]
fn ks_distance(points: Vec<f64>) -> f64 {
    semicircle::ks_distance(&spectral::Esd::from_points(points))
}

/// Exhaustive count of closed walks of length 2t traversing a tree's arcs once.
#[pyfunction]
fn count_tree_walks(py: Python<'_>, t: u32) -> PyResult<u64> {
    py.detach(|| walks::count_tree_walks(t)).map_err(err)
}

/// `Catalan(t) · (t+1)!`.
#[pyfunction]
fn tree_walk_formula(t: u32) -> PyResult<u64> {
    walks::tree_walk_formula(t).to_u64().ok_or_else(|| PyValueError::new_err("overflow"))
}

/// `E x^k` for an off-diagonal entry of `X_n`, as a Python complex.
#[pyfunction]
fn exact_entry_moment(p: f64, q: f64, k: u32) -> PyResult<Cplx> {
    let ctx = normalization::compute_context(p, q).map_err(err)?;
    Ok(Cplx(walks::exact_entry_moment(&ctx, k)))
}

/// Exact `E (1/n) Tr (n^{-1/2} X_n)^k` for tiny `n` by enumeration.
#[pyfunction]
fn trace_moment_exact_tiny(n: usize, p: f64, q: f64, k: u32) -> PyResult<f64> {
    let params = graph::GraphParams::new(n, p, q).map_err(err)?;
    walks::trace_moment_exact_tiny(&params, k).map_err(err)
}

#[pyclass(name = "EnsembleReport", frozen, module = "skewspec")]
struct PyEnsembleReport(ensemble::EnsembleReport);

#[pymethods]
impl PyEnsembleReport {
    #[getter]
    fn pooled_ks(&self) -> f64 {
        self.0.ks.pooled
    }

    #[getter]
    fn per_replica_ks(&self) -> Vec<f64> {
        self.0.ks.per_replica.clone()
    }

    #[getter]
    fn max_density_deviation(&self) -> f64 {
        self.0.max_density_deviation
    }

    /// `(k, pooled, target, std_error)` per checked moment.
    #[getter]
    fn moments(&self) -> Vec<(u32, f64, f64, f64)> {
        self.0.moments.iter().map(|m| (m.k, m.pooled, m.target, m.std_error)).collect()
    }

    #[getter]
    fn spectral_radius_mean(&self) -> f64 {
        self.0.spectral_radius_mean
    }

    #[getter]
    fn weyl_pass_rate(&self) -> f64 {
        self.0.weyl.pass_rate
    }

    #[getter]
    fn bin_edges(&self) -> Vec<f64> {
        self.0.histogram.edges.clone()
    }

    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.0.histogram.counts.clone()
    }

    #[getter]
    fn density(&self) -> Vec<f64> {
        self.0.histogram.density.clone()
    }

    #[getter]
    fn out_of_range(&self) -> (u64, u64) {
        (self.0.histogram.below, self.0.histogram.above)
    }

    #[getter]
    fn wall_clock_s(&self) -> f64 {
        self.0.timings.wall_clock_s
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn histogram_csv(&self) -> String {
        self.0.histogram.to_csv()
    }
}

/// Run a Monte Carlo ensemble (same fields as the JSON config file).
#[pyfunction]
#[pyo3(signature = (n, p, q, replicas, seed, bins = 60, range = (-2.5, 2.5), epsilon_weyl = 0.3, moments = vec![1, 2, 3, 4, 6], workers = None))]
#[allow(clippy::too_many_arguments)]
fn run_ensemble(
    py: Python<'_>,
    n: usize,
    p: f64,
    q: f64,
    replicas: usize,
    seed: u64,
    bins: usize,
    range: (f64, f64),
    epsilon_weyl: f64,
    moments: Vec<u32>,
    workers: Option<usize>,
) -> PyResult<PyEnsembleReport> {
    let params = graph::GraphParams::new(n, p, q).map_err(err)?;
    let cfg =
        EnsembleConfig { params, replicas, master_seed: seed, bins, range, epsilon_weyl, moments_to_check: moments };
    let workers = workers.or_else(ensemble::workers_from_env);
    py.detach(|| match workers {
        Some(w) => ensemble::run_ensemble_with_workers(&cfg, w),
        None => ensemble::run_ensemble(&cfg),
    })
    .map(PyEnsembleReport)
    .map_err(err)
}

#[pymodule]
#[pyo3(name = "skewspec")]
fn skewspec_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraphParams>()?;
    m.add_class::<PyNormalizationContext>()?;
    m.add_class::<PyOrientedGraph>()?;
    m.add_class::<PyEnsembleReport>()?;
    m.add_function(wrap_pyfunction!(sample_graph, m)?)?;
    m.add_function(wrap_pyfunction!(eig_skew, m)?)?;
    m.add_function(wrap_pyfunction!(replica_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(y_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(check_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_moment, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance, m)?)?;
    m.add_function(wrap_pyfunction!(count_tree_walks, m)?)?;
    m.add_function(wrap_pyfunction!(tree_walk_formula, m)?)?;
    m.add_function(wrap_pyfunction!(exact_entry_moment, m)?)?;
    m.add_function(wrap_pyfunction!(trace_moment_exact_tiny, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    Ok(())
}
