//! Discrete Gaussian path integrals on oriented graphs.
//!
//! A graph with directed links and oriented plaquettes defines boundary
//! operators `d1` (links to vertices) and `d2` (plaquettes to links) with
//! `d1 * d2 = 0`. From these the crate builds the difference matrix
//! `K = beta * d1 * d1^T` and the divergence-free source `J = alpha * d1 * e`,
//! and evaluates the Euclidean partition function restricted to the row
//! space of `K`. The [`ladder`] module carries closed forms for the
//! two-rail ladder graph, and [`oracle`] holds independent numerical checks.

pub mod chain_complex;
pub mod document;
pub mod eigen;
pub mod error;
pub mod fixtures;
pub mod gaussian;
pub mod ladder;
pub mod oracle;
pub mod oscillator;
pub mod scc;

pub use chain_complex::{
    apply_d1, build_boundary_1, build_boundary_2, verify_boundary_of_boundary, BoundaryCheck,
    ChainComplex, IntMatrix, LinkValues, OrientedGraph,
};
pub use document::GraphDocument;
pub use error::{Error, ErrorKind, Result};
pub use gaussian::{
    full_space_log_z, mode_probability_density, most_probable_field, partition_function,
    spectral_decompose, AmplitudeResult, ModeProbability, SpectralData,
};
pub use ladder::{
    build_ladder, certify_ladder, closed_form_spectrum, ladder_source_vector, phi_mixed,
    phi_spatial, phi_temporal, CertificationReport, LadderSpec,
};
pub use oscillator::{
    build_oscillator_k, pattern_match_laplacian, OscillatorMatrix, OscillatorParams,
};
pub use scc::{
    action_exponent, build_j, build_k, gauge_null_space, link_values_from_vertices, verify_scc,
    DifferenceMatrix, SccConfig, SourceVector,
};
