//! Difference matrix `K = beta * d1 * d1^T`, source vector `J = alpha * d1 * e`,
//! and the self-consistency identity `K * v = (beta / alpha) * J` that holds
//! whenever link values are vertex differences `e = d1^T * v`.

use nalgebra::{DMatrix, DVector};

use crate::chain_complex::{apply_d1, ChainComplex, IntMatrix, LinkValues, OrientedGraph};
use crate::eigen::{check_symmetric, jacobi_eigen};
use crate::error::{Error, Result};

/// Eigenvalues at or below this fraction of the largest one are zero modes.
pub const NULL_THRESHOLD: f64 = 1e-9;
pub const SCC_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SccConfig {
    alpha: f64,
    beta: f64,
}

impl SccConfig {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and nonzero, got {alpha}"
            )));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and positive, got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for SccConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// Symmetric positive semi-definite kinetic matrix. When built from a chain
/// complex the exact integer Laplacian `d1 * d1^T` is kept alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceMatrix {
    matrix: DMatrix<f64>,
    laplacian: Option<IntMatrix>,
    beta: f64,
}

impl DifferenceMatrix {
    /// Wraps an arbitrary symmetric matrix (scale 1).
    pub fn from_symmetric(matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix)?;
        Ok(Self {
            matrix,
            laplacian: None,
            beta: 1.0,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn laplacian(&self) -> Option<&IntMatrix> {
        self.laplacian.as_ref()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Same matrix with a different overall scale applied.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * factor,
            laplacian: self.laplacian.clone(),
            beta: self.beta * factor,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceVector {
    j: DVector<f64>,
    alpha: f64,
}

impl SourceVector {
    pub fn from_vector(j: DVector<f64>) -> Result<Self> {
        if j.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("source vector"));
        }
        Ok(Self { j, alpha: 1.0 })
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.j
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    /// `|sum J_i|`; zero for divergence-free sources.
    pub fn divergence(&self) -> f64 {
        self.j.sum().abs()
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence() <= 1e-12 * self.j.lp_norm(1).max(f64::MIN_POSITIVE)
    }
}

pub fn build_k(cc: &ChainComplex, config: &SccConfig) -> DifferenceMatrix {
    let laplacian = cc.d1() * cc.d1().transpose();
    DifferenceMatrix {
        matrix: laplacian.map(|x| config.beta * x as f64),
        laplacian: Some(laplacian),
        beta: config.beta,
    }
}

pub fn build_j(cc: &ChainComplex, e: &LinkValues, config: &SccConfig) -> Result<SourceVector> {
    let j = apply_d1(cc, e)? * config.alpha;
    Ok(SourceVector {
        j,
        alpha: config.alpha,
    })
}

/// `e = v[head] - v[tail]` for every link.
pub fn link_values_from_vertices(graph: &OrientedGraph, v: &DVector<f64>) -> Result<LinkValues> {
    if v.len() != graph.vertex_count() {
        return Err(Error::dims("vertex values", graph.vertex_count(), v.len()));
    }
    let e = graph.links().iter().map(|l| v[l.head] - v[l.tail]);
    LinkValues::new(DVector::from_iterator(graph.link_count(), e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SccCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Compares `K * v` with `(beta / alpha) * J(d1^T v)` in max norm.
pub fn verify_scc(cc: &ChainComplex, v: &DVector<f64>, config: &SccConfig) -> Result<SccCheck> {
    if v.len() != cc.vertex_count() {
        return Err(Error::dims("vertex values", cc.vertex_count(), v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("vertex values"));
    }
    let k = build_k(cc, config);
    let e = LinkValues::new(cc.d1_real().transpose() * v)?;
    let j = build_j(cc, &e, config)?;
    let lhs = k.matrix() * v;
    let rhs = j.as_vector() * (config.beta / config.alpha);
    let residual = (lhs - rhs).amax();
    let scale = 1.0 + v.amax();
    Ok(SccCheck {
        holds: residual <= SCC_TOLERANCE * scale,
        residual,
    })
}

/// Orthonormal basis of `ker K`, one column per zero mode.
#[derive(Clone, Debug)]
pub struct NullSpace {
    pub basis: DMatrix<f64>,
}

impl NullSpace {
    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }
}

pub(crate) fn zero_mode_cutoff(values: &DVector<f64>) -> f64 {
    NULL_THRESHOLD * values.amax()
}

pub fn gauge_null_space(k: &DifferenceMatrix) -> Result<NullSpace> {
    let eig = jacobi_eigen(k.matrix())?;
    let cutoff = zero_mode_cutoff(&eig.values);
    let cols: Vec<DVector<f64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &a)| a.abs() <= cutoff)
        .map(|(i, _)| {
            let mut c = eig.vectors.column(i).clone_owned();
            if c.sum() < 0.0 {
                c.neg_mut();
            }
            c
        })
        .collect();
    let basis = if cols.is_empty() {
        DMatrix::zeros(k.dim(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(NullSpace { basis })
}

/// Euclidean action exponent `-1/2 Q^T K Q + J . Q`.
pub fn action_exponent(k: &DifferenceMatrix, j: &SourceVector, q: &DVector<f64>) -> f64 {
    -0.5 * q.dot(&(k.matrix() * q)) + j.as_vector().dot(q)
}
