//! Gaussian integrals over a graph's `(K, J)` pair, restricted to the row
//! space of `K`.
//!
//! In the eigenbasis of `K` the integrand factorises into one Gaussian per
//! mode with nonzero eigenvalue `a_i`:
//!
//! ```text
//! log Z = 1/2 [ r ln(2 pi) - sum ln a_i ] + sum Jhat_i^2 / (2 a_i)
//! ```
//!
//! where `r` is the rank of `K` and `Jhat_i = <i|J>`. Zero modes (constant
//! shifts on each connected component) are never integrated over; a source
//! with a component along them is rejected instead.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::scc::{zero_mode_cutoff, DifferenceMatrix, SourceVector};

/// Largest allowed null-space component of `J`, relative to `|J|`.
pub const ROW_SPACE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectralData {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    null_count: usize,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn null_count(&self) -> usize {
        self.null_count
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn rank(&self) -> usize {
        self.dim() - self.null_count
    }

    /// Indices of modes with nonzero eigenvalue. Eigenvalues are sorted, so
    /// these follow the zero modes.
    pub fn row_space(&self) -> Range<usize> {
        self.null_count..self.dim()
    }

    pub fn is_null_mode(&self, k: usize) -> bool {
        k < self.null_count
    }

    /// Components of `v` along every eigenvector, in eigenvalue order.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        self.eigenvectors.transpose() * v
    }

    /// Groups eigenvalue indices into clusters whose neighbouring values
    /// differ by at most `tol * max(1, |a|)`.
    pub fn eigenspaces(&self, tol: f64) -> Vec<Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.dim() {
            let split = i == self.dim() || {
                let (a, b) = (self.eigenvalues[i - 1], self.eigenvalues[i]);
                (b - a).abs() > tol * b.abs().max(1.0)
            };
            if split {
                groups.push(start..i);
                start = i;
            }
        }
        groups
    }

    /// Orthogonal projector onto the span of the eigenvectors in `modes`.
    pub fn projector(&self, modes: Range<usize>) -> DMatrix<f64> {
        let block = self.eigenvectors.columns(modes.start, modes.len());
        block * block.transpose()
    }
}

pub fn spectral_decompose(k: &DifferenceMatrix) -> Result<SpectralData> {
    let eig = jacobi_eigen(k.matrix())?;
    let cutoff = zero_mode_cutoff(&eig.values);
    if let Some(neg) = eig.values.iter().find(|&&a| a < -cutoff) {
        return Err(Error::InvalidParameter(format!(
            "K is not positive semi-definite (eigenvalue {neg:e})"
        )));
    }
    let null_count = eig.values.iter().filter(|&&a| a.abs() <= cutoff).count();
    Ok(SpectralData {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        null_count,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeContribution {
    /// Position in the ascending spectrum.
    pub index: usize,
    pub a: f64,
    pub jhat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeResult {
    pub log_z: f64,
    pub modes: Vec<ModeContribution>,
    pub null_count: usize,
    /// `sum Jhat_i^2 / (2 a_i)` over the row space, natural units.
    pub exponent: f64,
    pub hbar_beta: f64,
}

impl AmplitudeResult {
    /// The reported amplitude exponent, `exponent / hbar_beta`.
    pub fn phi(&self) -> f64 {
        self.exponent / self.hbar_beta
    }

    pub fn projections(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.jhat).collect()
    }

    pub fn eigenvalues_used(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.a).collect()
    }
}

fn check_scale(hbar_beta: f64) -> Result<()> {
    if !hbar_beta.is_finite() || hbar_beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "hbar_beta must be finite and positive, got {hbar_beta}"
        )));
    }
    Ok(())
}

/// All mode projections of `J`, after checking that `J` has no component
/// along the null space.
pub fn row_space_projections(sd: &SpectralData, j: &SourceVector) -> Result<DVector<f64>> {
    if j.len() != sd.dim() {
        return Err(Error::dims("source vector", sd.dim(), j.len()));
    }
    let jhat = sd.project(j.as_vector());
    let null_component = jhat.rows(0, sd.null_count()).norm();
    let norm = j.as_vector().norm();
    if null_component > ROW_SPACE_TOLERANCE * norm {
        return Err(Error::NotInRowSpace {
            component: null_component,
            norm,
        });
    }
    Ok(jhat)
}

pub fn partition_function(
    k: &DifferenceMatrix,
    j: &SourceVector,
    hbar_beta: f64,
) -> Result<AmplitudeResult> {
    partition_function_from(&spectral_decompose(k)?, j, hbar_beta)
}

pub fn partition_function_from(
    sd: &SpectralData,
    j: &SourceVector,
    hbar_beta: f64,
) -> Result<AmplitudeResult> {
    check_scale(hbar_beta)?;
    let jhat = row_space_projections(sd, j)?;
    let modes: Vec<ModeContribution> = sd
        .row_space()
        .map(|i| ModeContribution {
            index: i,
            a: sd.eigenvalues[i],
            jhat: jhat[i],
        })
        .collect();
    let exponent: f64 = modes.iter().map(|m| m.jhat * m.jhat / (2.0 * m.a)).sum();
    let log_det: f64 = modes.iter().map(|m| m.a.ln()).sum();
    let log_z = 0.5 * (modes.len() as f64 * (2.0 * std::f64::consts::PI).ln() - log_det) + exponent;
    Ok(AmplitudeResult {
        log_z,
        modes,
        null_count: sd.null_count(),
        exponent,
        hbar_beta,
    })
}

/// Unrestricted Gaussian integral over all of `R^N`. Only defined when `K`
/// has no zero modes, which never happens for a graph Laplacian.
pub fn full_space_log_z(k: &DifferenceMatrix, j: &SourceVector) -> Result<f64> {
    let sd = spectral_decompose(k)?;
    if sd.null_count() > 0 {
        return Err(Error::Singular {
            null_count: sd.null_count(),
        });
    }
    let result = partition_function_from(&sd, j, 1.0)?;
    Ok(result.log_z)
}

/// Marginal density of the outcome along one row-space mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeProbability {
    pub mode: usize,
    pub a: f64,
    pub jhat: f64,
    pub hbar_beta: f64,
}

impl ModeProbability {
    pub fn new(sd: &SpectralData, j: &SourceVector, mode: usize, hbar_beta: f64) -> Result<Self> {
        check_scale(hbar_beta)?;
        if mode >= sd.dim() {
            return Err(Error::ModeOutOfRange {
                index: mode,
                len: sd.dim(),
            });
        }
        if sd.is_null_mode(mode) {
            return Err(Error::NullMode(mode));
        }
        let jhat = row_space_projections(sd, j)?;
        Ok(Self {
            mode,
            a: sd.eigenvalues[mode],
            jhat: jhat[mode],
            hbar_beta,
        })
    }

    pub fn density(&self, q0: f64) -> f64 {
        let (a, jh, h) = (self.a, self.jhat, self.hbar_beta);
        let exponent = (-0.5 * q0 * q0 * a + jh * q0 - jh * jh / (2.0 * a)) / h;
        (a / (2.0 * std::f64::consts::PI * h)).sqrt() * exponent.exp()
    }

    pub fn most_probable(&self) -> f64 {
        self.jhat / self.a
    }

    pub fn variance(&self) -> f64 {
        self.hbar_beta / self.a
    }
}

pub fn mode_probability_density(
    sd: &SpectralData,
    j: &SourceVector,
    mode: usize,
    q0: f64,
    hbar_beta: f64,
) -> Result<f64> {
    Ok(ModeProbability::new(sd, j, mode, hbar_beta)?.density(q0))
}

/// Minimum-norm solution of `K Q0 = J`, `Q0 = sum (Jhat_i / a_i) |i>`.
pub fn most_probable_field(k: &DifferenceMatrix, j: &SourceVector) -> Result<DVector<f64>> {
    most_probable_field_from(&spectral_decompose(k)?, j)
}

pub fn most_probable_field_from(sd: &SpectralData, j: &SourceVector) -> Result<DVector<f64>> {
    let jhat = row_space_projections(sd, j)?;
    let mut q0 = DVector::zeros(sd.dim());
    for i in sd.row_space() {
        q0 += sd.eigenvectors.column(i) * (jhat[i] / sd.eigenvalues[i]);
    }
    Ok(q0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::{ChainComplex, LinkValues, OrientedGraph};
    use crate::fixtures;
    use crate::scc::{build_j, build_k, SccConfig};
    use std::f64::consts::PI;

    fn two_vertex() -> ChainComplex {
        ChainComplex::from_graph(&OrientedGraph::from_indices(2, &[(0, 1)], &[]).unwrap()).unwrap()
    }

    fn square_ladder() -> ChainComplex {
        // ladder numbering for four vertices: e1 = v1->v2, e2 = v3->v4,
        // e3 = v1->v3, e4 = v2->v4
        ChainComplex::from_graph(
            &OrientedGraph::from_indices(4, &[(0, 1), (2, 3), (0, 2), (1, 3)], &[]).unwrap(),
        )
        .unwrap()
    }

    fn source(v: &[f64]) -> SourceVector {
        SourceVector::from_vector(DVector::from_column_slice(v)).unwrap()
    }

    #[test]
    fn six_vertex_spectrum() {
        let cc = ChainComplex::from_graph(&fixtures::six_vertex_graph()).unwrap();
        let sd = spectral_decompose(&build_k(&cc, &SccConfig::default())).unwrap();
        let expected = [0.0, 1.0, 2.0, 3.0, 3.0, 5.0];
        for (a, b) in sd.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(sd.null_count(), 1);
        assert_eq!(sd.eigenspaces(1e-9).len(), 5);
    }

    #[test]
    fn scaling_doubles_eigenvalues() {
        let cc = ChainComplex::from_graph(&fixtures::six_vertex_graph()).unwrap();
        let k = build_k(&cc, &SccConfig::default());
        let a = spectral_decompose(&k).unwrap();
        let b = spectral_decompose(&k.scaled(2.0)).unwrap();
        assert!((a.eigenvalues() * 2.0 - b.eigenvalues()).amax() < 1e-12);
        for range in a.eigenspaces(1e-9) {
            assert!((a.projector(range.clone()) - b.projector(range)).amax() < 1e-10);
        }
    }

    #[test]
    fn two_vertex_amplitude() {
        let cc = two_vertex();
        let k = build_k(&cc, &SccConfig::default());
        for s in [0.0, 1.0, -2.5] {
            let j = build_j(
                &cc,
                &LinkValues::from_slice(&[s]).unwrap(),
                &SccConfig::default(),
            )
            .unwrap();
            let r = partition_function(&k, &j, 1.0).unwrap();
            assert_eq!(r.modes.len(), 1);
            assert!((r.modes[0].a - 2.0).abs() < 1e-14);
            assert!((r.modes[0].jhat.abs() - 2f64.sqrt() * s.abs()).abs() < 1e-12);
            assert!((r.exponent - s * s / 2.0).abs() < 1e-12);
            assert!((r.log_z - (0.5 * PI.ln() + s * s / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sourceless_log_z() {
        let cc = ChainComplex::from_graph(&fixtures::six_vertex_graph()).unwrap();
        let k = build_k(&cc, &SccConfig::default());
        let r = partition_function(&k, &source(&[0.0; 6]), 1.0).unwrap();
        // nonzero eigenvalues 1, 2, 3, 3, 5
        let expected = 0.5 * (5.0 * (2.0 * PI).ln() - (2.0f64 * 3.0 * 3.0 * 5.0).ln());
        assert!((r.log_z - expected).abs() < 1e-12);
        assert_eq!(r.exponent, 0.0);
    }

    #[test]
    fn square_ladder_exponent() {
        let cc = square_ladder();
        let k = build_k(&cc, &SccConfig::default());
        let j = build_j(
            &cc,
            &LinkValues::from_slice(&[1.0; 4]).unwrap(),
            &SccConfig::default(),
        )
        .unwrap();
        assert_eq!(j.as_vector().as_slice(), &[-2.0, 0.0, 0.0, 2.0]);
        let r = partition_function(&k, &j, 1.0).unwrap();
        let sum: f64 = r.modes.iter().map(|m| m.jhat * m.jhat / m.a).sum();
        assert!((sum - 4.0).abs() < 1e-12);
        assert!((r.exponent - 2.0).abs() < 1e-12);
        assert!((r.phi() - 2.0).abs() < 1e-12);
        let r2 = partition_function(&k, &j, 4.0).unwrap();
        assert!((r2.phi() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_source_with_null_component() {
        let k = build_k(&two_vertex(), &SccConfig::default());
        let err = partition_function(&k, &source(&[1.0, 0.0]), 1.0).unwrap_err();
        assert!(matches!(err, Error::NotInRowSpace { .. }));
        assert!(most_probable_field(&k, &source(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn full_space_is_undefined_for_laplacians() {
        let k = build_k(&two_vertex(), &SccConfig::default());
        let err = full_space_log_z(&k, &source(&[-1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Singular { null_count: 1 }));

        let pd =
            DifferenceMatrix::from_symmetric(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 8.0]))
                .unwrap();
        let z = full_space_log_z(&pd, &source(&[0.0, 0.0])).unwrap();
        assert!((z - 0.5 * (2.0 * (2.0 * PI).ln() - 16f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let p = ModeProbability {
            mode: 1,
            a: 2.0,
            jhat: 0.0,
            hbar_beta: 1.0,
        };
        assert!((p.density(0.0) - 0.564190).abs() < 1e-6);
        assert!((p.density(0.0) - (1.0 / PI).sqrt()).abs() < 1e-15);

        let q = ModeProbability {
            mode: 1,
            a: 3.0,
            jhat: 1.7,
            hbar_beta: 1.0,
        };
        let peak = q.most_probable();
        assert!(q.density(peak) > q.density(peak + 1e-4));
        assert!(q.density(peak) > q.density(peak - 1e-4));
    }

    #[test]
    fn density_rejects_null_mode() {
        let k = build_k(&two_vertex(), &SccConfig::default());
        let sd = spectral_decompose(&k).unwrap();
        let j = source(&[-1.0, 1.0]);
        assert!(matches!(
            mode_probability_density(&sd, &j, 0, 0.0, 1.0),
            Err(Error::NullMode(0))
        ));
        assert!(mode_probability_density(&sd, &j, 5, 0.0, 1.0).is_err());
        assert!(mode_probability_density(&sd, &j, 1, 0.0, 1.0).is_ok());
    }

    #[test]
    fn most_probable_field_examples() {
        let k = build_k(&two_vertex(), &SccConfig::default());
        let q = most_probable_field(&k, &source(&[-1.0, 1.0])).unwrap();
        assert!((q[0] + 0.5).abs() < 1e-14 && (q[1] - 0.5).abs() < 1e-14);
        assert_eq!(
            most_probable_field(&k, &source(&[0.0, 0.0]))
                .unwrap()
                .amax(),
            0.0
        );

        let k4 = build_k(&square_ladder(), &SccConfig::default());
        let j = source(&[-2.0, 0.0, 0.0, 2.0]);
        let q = most_probable_field(&k4, &j).unwrap();
        let expected = DVector::from_vec(vec![-1.0, 0.0, 0.0, 1.0]);
        assert!((&q - expected).amax() < 1e-12);
        assert!((k4.matrix() * &q - j.as_vector()).amax() < 1e-12);
    }
}
