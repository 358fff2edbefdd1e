//! Spectra of randomly oriented Erdős–Rényi graphs.
//!
//! The pipeline samples an orientation ([`graph`]), forms the shifted
//! skew-symmetric matrix `M = S + cY` ([`normalization`]), computes the real
//! spectrum of `-iM` ([`spectral`]) and compares the scaled spectrum against
//! the semicircle law ([`semicircle`]). [`walks`] holds the exact
//! closed-walk oracles and [`ensemble`] the parallel Monte Carlo driver.

pub mod ensemble;
pub mod error;
pub mod graph;
pub mod normalization;
pub mod semicircle;
pub mod spectral;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{sample_graph, skew_adjacency, GraphParams, OrientedGraph, SeedSpec, SkewMatrix};
pub use normalization::{compute_context, entry_distribution, shifted_skew_matrix, NormalizationContext};
pub use spectral::{
    eig_skew, esd, spectral_radius, weyl_bounds, y_spectrum_closed_form, Esd, RealSkewMatrix, Spectrum,
};

/// Locale-independent decimal with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
