//! Oriented graphs with plaquettes and the boundary operators of the
//! chain complex `C0 <- C1 <- C2`.
//!
//! Boundary matrices are kept as exact integer matrices. A link running from
//! `tail` to `head` has boundary `head - tail`; a plaquette's boundary is the
//! signed sum of its member links.

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer matrix used for boundary operators and their products.
pub type IntMatrix = DMatrix<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDecl {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedLinkDecl {
    pub id: String,
    pub sign: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaquetteDecl {
    pub id: String,
    pub links: Vec<SignedLinkDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedLink {
    pub link: usize,
    pub sign: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaquette {
    pub id: String,
    pub boundary: Vec<SignedLink>,
}

/// Vertices, directed links and oriented plaquettes. Declared orderings are
/// authoritative for matrix row and column indices.
///
/// Construction checks identifiers, references, self-loops and repeated
/// links inside a plaquette. Whether each plaquette actually closes is
/// checked by [`OrientedGraph::check_plaquettes`] and by
/// [`build_boundary_2`], so that an open cycle surfaces as a validation
/// failure rather than a malformed document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedGraph {
    vertices: Vec<String>,
    links: Vec<Link>,
    plaquettes: Vec<Plaquette>,
}

fn check_unique<'a>(level: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::MalformedGraph(format!(
                "duplicate {level} id `{id}`"
            )));
        }
    }
    Ok(())
}

impl OrientedGraph {
    pub fn new(
        vertices: Vec<String>,
        links: Vec<LinkDecl>,
        plaquettes: Vec<PlaquetteDecl>,
    ) -> Result<Self> {
        check_unique("vertex", vertices.iter().map(String::as_str))?;
        check_unique("link", links.iter().map(|l| l.id.as_str()))?;
        check_unique("plaquette", plaquettes.iter().map(|p| p.id.as_str()))?;

        let vertex_index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let lookup_vertex = |link: &str, v: &str| {
            vertex_index.get(v).copied().ok_or_else(|| {
                Error::MalformedGraph(format!("link `{link}` references unknown vertex `{v}`"))
            })
        };

        let mut resolved_links = Vec::with_capacity(links.len());
        for decl in &links {
            let tail = lookup_vertex(&decl.id, &decl.tail)?;
            let head = lookup_vertex(&decl.id, &decl.head)?;
            if tail == head {
                return Err(Error::MalformedGraph(format!(
                    "link `{}` is a self-loop on vertex `{}`",
                    decl.id, decl.tail
                )));
            }
            resolved_links.push(Link {
                id: decl.id.clone(),
                tail,
                head,
            });
        }

        let link_index: HashMap<&str, usize> = links
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.as_str(), i))
            .collect();
        let mut resolved_plaquettes = Vec::with_capacity(plaquettes.len());
        for decl in &plaquettes {
            if decl.links.is_empty() {
                return Err(Error::MalformedGraph(format!(
                    "plaquette `{}` has an empty boundary",
                    decl.id
                )));
            }
            let mut members = HashSet::new();
            let mut boundary = Vec::with_capacity(decl.links.len());
            for entry in &decl.links {
                let link = *link_index.get(entry.id.as_str()).ok_or_else(|| {
                    Error::MalformedGraph(format!(
                        "plaquette `{}` references unknown link `{}`",
                        decl.id, entry.id
                    ))
                })?;
                if entry.sign != 1 && entry.sign != -1 {
                    return Err(Error::MalformedGraph(format!(
                        "plaquette `{}` gives link `{}` sign {}; signs must be +1 or -1",
                        decl.id, entry.id, entry.sign
                    )));
                }
                if !members.insert(link) {
                    return Err(Error::MalformedGraph(format!(
                        "plaquette `{}` repeats link `{}`",
                        decl.id, entry.id
                    )));
                }
                boundary.push(SignedLink {
                    link,
                    sign: entry.sign,
                });
            }
            resolved_plaquettes.push(Plaquette {
                id: decl.id.clone(),
                boundary,
            });
        }

        Ok(Self {
            vertices,
            links: resolved_links,
            plaquettes: resolved_plaquettes,
        })
    }

    /// Builds a graph from index data, naming vertices `v1..`, links `e1..`
    /// and plaquettes `p1..` in declaration order.
    pub fn from_indices(
        vertex_count: usize,
        links: &[(usize, usize)],
        plaquettes: &[Vec<(usize, i64)>],
    ) -> Result<Self> {
        let vertices = (1..=vertex_count).map(|i| format!("v{i}")).collect();
        let vname = |i: usize| format!("v{}", i + 1);
        let links_decl = links
            .iter()
            .enumerate()
            .map(|(i, &(t, h))| LinkDecl {
                id: format!("e{}", i + 1),
                tail: vname(t),
                head: vname(h),
            })
            .collect();
        let plaquettes_decl = plaquettes
            .iter()
            .enumerate()
            .map(|(i, cycle)| PlaquetteDecl {
                id: format!("p{}", i + 1),
                links: cycle
                    .iter()
                    .map(|&(l, sign)| SignedLinkDecl {
                        id: format!("e{}", l + 1),
                        sign,
                    })
                    .collect(),
            })
            .collect();
        Self::new(vertices, links_decl, plaquettes_decl)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn plaquette_count(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn link_position(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    pub fn link_decls(&self) -> Vec<LinkDecl> {
        self.links
            .iter()
            .map(|l| LinkDecl {
                id: l.id.clone(),
                tail: self.vertices[l.tail].clone(),
                head: self.vertices[l.head].clone(),
            })
            .collect()
    }

    pub fn plaquette_decls(&self) -> Vec<PlaquetteDecl> {
        self.plaquettes
            .iter()
            .map(|p| PlaquetteDecl {
                id: p.id.clone(),
                links: p
                    .boundary
                    .iter()
                    .map(|s| SignedLinkDecl {
                        id: self.links[s.link].id.clone(),
                        sign: s.sign,
                    })
                    .collect(),
            })
            .collect()
    }

    /// Checks that every plaquette's signed boundary sums to zero on every
    /// vertex, naming the first plaquette that fails.
    pub fn check_plaquettes(&self) -> Result<()> {
        for p in &self.plaquettes {
            let mut net: HashMap<usize, i64> = HashMap::new();
            for s in &p.boundary {
                let link = &self.links[s.link];
                *net.entry(link.head).or_default() += s.sign;
                *net.entry(link.tail).or_default() -= s.sign;
            }
            let mut open: Vec<(usize, i64)> = net.into_iter().filter(|&(_, n)| n != 0).collect();
            open.sort_unstable();
            if let Some(&(vertex, net)) = open.first() {
                return Err(Error::OpenPlaquette {
                    id: p.id.clone(),
                    vertex: self.vertices[vertex].clone(),
                    net,
                });
            }
        }
        Ok(())
    }

    /// Number of connected components (isolated vertices count as components).
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.vertices.len();
        for l in &self.links {
            let (a, b) = (find(&mut parent, l.tail), find(&mut parent, l.head));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }
}

/// Real-valued data attached to links, in the graph's link ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkValues(DVector<f64>);

impl LinkValues {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("link values"));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    /// Checks the length against a graph.
    pub fn for_graph(graph: &OrientedGraph, values: DVector<f64>) -> Result<Self> {
        if values.len() != graph.link_count() {
            return Err(Error::dims("link values", graph.link_count(), values.len()));
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    /// 1-based access, matching the `e_i` link numbering.
    pub fn get1(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn is_integer_valued(&self) -> bool {
        self.0.iter().all(|v| v.fract() == 0.0)
    }
}

/// `d1` has shape |V| x |E| with -1 at the tail row and +1 at the head row
/// of every link column.
pub fn build_boundary_1(graph: &OrientedGraph) -> IntMatrix {
    let mut d1 = IntMatrix::zeros(graph.vertex_count(), graph.link_count());
    for (col, link) in graph.links().iter().enumerate() {
        d1[(link.tail, col)] = -1;
        d1[(link.head, col)] = 1;
    }
    d1
}

/// `d2` has shape |E| x |P|; column `p` carries the plaquette's sign on each
/// member link.
pub fn build_boundary_2(graph: &OrientedGraph) -> Result<IntMatrix> {
    graph.check_plaquettes()?;
    let mut d2 = IntMatrix::zeros(graph.link_count(), graph.plaquette_count());
    for (col, p) in graph.plaquettes().iter().enumerate() {
        for s in &p.boundary {
            d2[(s.link, col)] = s.sign;
        }
    }
    Ok(d2)
}

/// The pair of boundary operators `(d1, d2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    d1: IntMatrix,
    d2: IntMatrix,
}

impl ChainComplex {
    pub fn from_graph(graph: &OrientedGraph) -> Result<Self> {
        Ok(Self {
            d1: build_boundary_1(graph),
            d2: build_boundary_2(graph)?,
        })
    }

    /// Accepts raw matrices. `d1` must be a valid incidence matrix (one +1
    /// and one -1 per column) and `d2` must have one row per link; `d1 * d2`
    /// is not required to vanish, see [`verify_boundary_of_boundary`].
    pub fn from_matrices(d1: IntMatrix, d2: IntMatrix) -> Result<Self> {
        for (j, col) in d1.column_iter().enumerate() {
            let plus = col.iter().filter(|&&x| x == 1).count();
            let minus = col.iter().filter(|&&x| x == -1).count();
            let nonzero = col.iter().filter(|&&x| x != 0).count();
            if plus != 1 || minus != 1 || nonzero != 2 {
                return Err(Error::MalformedGraph(format!(
                    "d1 column {j} is not a link incidence column"
                )));
            }
        }
        if d2.nrows() != d1.ncols() {
            return Err(Error::dims(
                "d2 rows",
                d1.ncols(),
                format!("{}x{}", d2.nrows(), d2.ncols()),
            ));
        }
        Ok(Self { d1, d2 })
    }

    pub fn d1(&self) -> &IntMatrix {
        &self.d1
    }

    pub fn d2(&self) -> &IntMatrix {
        &self.d2
    }

    pub fn vertex_count(&self) -> usize {
        self.d1.nrows()
    }

    pub fn link_count(&self) -> usize {
        self.d1.ncols()
    }

    pub fn d1_real(&self) -> DMatrix<f64> {
        self.d1.map(|x| x as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCheck {
    pub holds: bool,
    pub residual: IntMatrix,
}

/// Exact integer check of `d1 * d2 = 0`.
pub fn verify_boundary_of_boundary(cc: &ChainComplex) -> Result<BoundaryCheck> {
    if cc.d1.ncols() != cc.d2.nrows() {
        return Err(Error::dims(
            "d1 * d2",
            format!("{} rows in d2", cc.d1.ncols()),
            cc.d2.nrows(),
        ));
    }
    let residual = &cc.d1 * &cc.d2;
    Ok(BoundaryCheck {
        holds: residual.iter().all(|&x| x == 0),
        residual,
    })
}

/// `d1 * e`, one entry per vertex.
pub fn apply_d1(cc: &ChainComplex, e: &LinkValues) -> Result<DVector<f64>> {
    if e.len() != cc.link_count() {
        return Err(Error::dims("link values", cc.link_count(), e.len()));
    }
    let mut out = DVector::zeros(cc.vertex_count());
    for (col, value) in cc.d1.column_iter().zip(e.as_vector().iter()) {
        for (row, &entry) in col.iter().enumerate() {
            if entry != 0 {
                out[row] += entry as f64 * value;
            }
        }
    }
    Ok(out)
}
