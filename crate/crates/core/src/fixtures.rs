//! Pinned reference data for the six-vertex, seven-link, two-plaquette graph
//! in its original link numbering, plus the same graph in ladder numbering.

use crate::chain_complex::{IntMatrix, OrientedGraph};
use crate::document::GraphDocument;

pub const SIX_VERTEX_JSON: &str = include_str!("../fixtures/six_vertex.json");
pub const LADDER_SIX_JSON: &str = include_str!("../fixtures/ladder_six.json");

pub fn six_vertex_graph() -> OrientedGraph {
    GraphDocument::from_json(SIX_VERTEX_JSON)
        .and_then(|d| d.graph())
        .expect("fixture parses")
}

pub fn ladder_six_graph() -> OrientedGraph {
    GraphDocument::from_json(LADDER_SIX_JSON)
        .and_then(|d| d.graph())
        .expect("fixture parses")
}

#[rustfmt::skip]
pub fn six_vertex_d1() -> IntMatrix {
    IntMatrix::from_row_slice(6, 7, &[
        -1,  0,  0, -1,  0,  0,  0,
         1, -1, -1,  0,  0,  0,  0,
         0,  0,  1,  0,  0,  0, -1,
         0,  0,  0,  1, -1,  0,  0,
         0,  1,  0,  0,  1, -1,  0,
         0,  0,  0,  0,  0,  1,  1,
    ])
}

#[rustfmt::skip]
pub fn six_vertex_d2() -> IntMatrix {
    IntMatrix::from_row_slice(7, 2, &[
        -1,  0,
        -1,  1,
         0, -1,
         1,  0,
         1,  0,
         0,  1,
         0, -1,
    ])
}

/// `d1 * d1^T` for the six-vertex graph.
#[rustfmt::skip]
pub fn six_vertex_laplacian() -> IntMatrix {
    IntMatrix::from_row_slice(6, 6, &[
         2, -1,  0, -1,  0,  0,
        -1,  3, -1,  0, -1,  0,
         0, -1,  2,  0,  0, -1,
        -1,  0,  0,  2, -1,  0,
         0, -1,  0, -1,  3, -1,
         0,  0, -1,  0, -1,  2,
    ])
}
