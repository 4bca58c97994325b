//! The (1+1)-dimensional ladder: two temporal rails of `N/2` vertices joined
//! by `N/2` spatial rungs, with closed forms for its spectrum, source vector
//! and two-source amplitude exponent.
//!
//! Link numbering (1-based): rail one `e_i = v_{i+1} - v_i` for
//! `i = 1..N/2-1`, rail two `e_{N/2+i-1} = v_{N/2+i+1} - v_{N/2+i}`, and rungs
//! `e_{N+i-2} = v_{N/2+i} - v_i` for `i = 1..N/2`.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use crate::chain_complex::{ChainComplex, LinkValues, OrientedGraph};
use crate::error::{Error, Result};
use crate::gaussian::{partition_function_from, spectral_decompose};
use crate::scc::{build_j, build_k, SccConfig, SourceVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderSpec {
    n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub hbar_beta: f64,
}

impl LadderSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "ladder size must be even and at least 2, got {n}"
            )));
        }
        Ok(Self {
            n,
            alpha: 1.0,
            beta: 1.0,
            hbar_beta: 1.0,
        })
    }

    pub fn with_scales(n: usize, alpha: f64, beta: f64, hbar_beta: f64) -> Result<Self> {
        SccConfig::new(alpha, beta)?;
        if !hbar_beta.is_finite() || hbar_beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hbar_beta must be finite and positive, got {hbar_beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            hbar_beta,
            ..Self::new(n)?
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn link_count(&self) -> usize {
        3 * self.n / 2 - 2
    }

    pub fn config(&self) -> SccConfig {
        SccConfig::new(self.alpha, self.beta).expect("validated in constructor")
    }

    fn check_links(&self, e: &LinkValues) -> Result<()> {
        if e.len() != self.link_count() {
            return Err(Error::dims(
                "ladder link values",
                self.link_count(),
                e.len(),
            ));
        }
        Ok(())
    }
}

/// Zero-based `(tail, head)` pairs in ladder link order.
pub fn ladder_links(n: usize) -> Vec<(usize, usize)> {
    let h = n / 2;
    let rail_one = (0..h.saturating_sub(1)).map(|i| (i, i + 1));
    let rail_two = (0..h.saturating_sub(1)).map(|i| (h + i, h + i + 1));
    let rungs = (0..h).map(|i| (i, h + i));
    rail_one.chain(rail_two).chain(rungs).collect()
}

pub fn build_ladder(spec: &LadderSpec) -> OrientedGraph {
    let (n, h) = (spec.n, spec.half());
    // square i: +near rung, +rail-two link, -far rung, -rail-one link
    let plaquettes: Vec<Vec<(usize, i64)>> = (1..h)
        .map(|i| vec![(n + i - 3, 1), (h + i - 2, 1), (n + i - 2, -1), (i - 1, -1)])
        .collect();
    OrientedGraph::from_indices(n, &ladder_links(n), &plaquettes)
        .expect("ladder construction is well-formed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `[x; x]`, eigenvalue `lambda_j - 1`.
    Symmetric,
    /// `[x; -x]`, eigenvalue `lambda_j + 1`.
    Antisymmetric,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Symmetric => "symmetric",
            Family::Antisymmetric => "antisymmetric",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormMode {
    pub j: usize,
    pub family: Family,
    pub eigenvalue: f64,
    pub vector: DVector<f64>,
}

/// Eigenpairs of `d1 * d1^T` (unit scale) for the ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormSpectrum {
    pub n: usize,
    pub modes: Vec<ClosedFormMode>,
}

impl ClosedFormSpectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v = self.eigenvalues();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `lambda_j = 3 - 2 cos(2 j pi / N)`.
pub fn lambda(n: usize, j: usize) -> f64 {
    3.0 - 2.0 * (2.0 * j as f64 * PI / n as f64).cos()
}

/// Rail profile `x_jk`, `k = 1..N/2`.
pub fn rail_profile(n: usize, j: usize) -> Vec<f64> {
    let h = n / 2;
    let nf = n as f64;
    (1..=h)
        .map(|k| {
            if j == 0 {
                1.0 / nf.sqrt()
            } else {
                (2.0 / nf).sqrt() * ((j * (2 * k - 1)) as f64 * PI / nf).cos()
            }
        })
        .collect()
}

pub fn closed_form_spectrum(spec: &LadderSpec) -> ClosedFormSpectrum {
    let n = spec.n;
    let mut modes = Vec::with_capacity(n);
    for j in 0..spec.half() {
        let x = rail_profile(n, j);
        let lam = lambda(n, j);
        let sym: Vec<f64> = x.iter().chain(x.iter()).copied().collect();
        let anti: Vec<f64> = x.iter().copied().chain(x.iter().map(|v| -v)).collect();
        modes.push(ClosedFormMode {
            j,
            family: Family::Symmetric,
            eigenvalue: lam - 1.0,
            vector: DVector::from_vec(sym),
        });
        modes.push(ClosedFormMode {
            j,
            family: Family::Antisymmetric,
            eigenvalue: lam + 1.0,
            vector: DVector::from_vec(anti),
        });
    }
    ClosedFormSpectrum { n, modes }
}

/// Source vector evaluated row by row from the piecewise ladder formula,
/// without going through `d1`.
pub fn ladder_source_vector(spec: &LadderSpec, e: &LinkValues) -> Result<SourceVector> {
    spec.check_links(e)?;
    let (n, h) = (spec.n, spec.half());
    let e = |i: usize| e.get1(i);
    let mut j = vec![0.0; n];
    if n == 2 {
        j[0] = -e(1);
        j[1] = e(1);
    } else {
        j[0] = -e(1) - e(n - 1);
        for i in 2..h {
            j[i - 1] = -e(i) + e(i - 1) - e(n + i - 2);
        }
        j[h - 1] = e(h - 1) - e(n + h - 2);
        j[h] = e(n - 1) - e(h);
        for i in 2..h {
            j[h + i - 1] = e(h + i - 2) + e(n + i - 2) - e(h + i - 1);
        }
        j[n - 1] = e(n + h - 2) + e(n - 2);
    }
    let j = DVector::from_vec(j) * spec.alpha;
    SourceVector::from_vector(j)
}

/// Contribution of the `[x; -x]` mode with eigenvalue 2; rungs only.
pub fn phi_spatial(spec: &LadderSpec, e: &LinkValues) -> Result<f64> {
    spec.check_links(e)?;
    let (n, h) = (spec.n, spec.half());
    let rung_sum: f64 = (1..=h).map(|k| e.get1(k + n - 2)).sum();
    Ok(2.0 * spec.alpha * spec.alpha / n as f64 * rung_sum * rung_sum)
}

/// Contribution of the `[x; x]` modes with nonzero eigenvalue; rails only.
pub fn phi_temporal(spec: &LadderSpec, e: &LinkValues) -> Result<f64> {
    spec.check_links(e)?;
    let (n, h) = (spec.n, spec.half());
    let nf = n as f64;
    let total: f64 = (1..h)
        .map(|j| {
            let inner: f64 = (1..h)
                .map(|k| (e.get1(k) + e.get1(k + h - 1)) * ((2 * j * k) as f64 * PI / nf).sin())
                .sum();
            inner * inner
        })
        .sum();
    Ok(2.0 * spec.alpha * spec.alpha / nf * total)
}

/// Contribution of the remaining `[x; -x]` modes; rails and rungs mixed.
pub fn phi_mixed(spec: &LadderSpec, e: &LinkValues) -> Result<f64> {
    spec.check_links(e)?;
    let (n, h) = (spec.n, spec.half());
    let nf = n as f64;
    let total: f64 = (1..h)
        .map(|j| {
            let s = (j as f64 * PI / nf).sin();
            let weight = 4.0 * spec.alpha * spec.alpha / (nf * (1.0 + 2.0 * s * s));
            let temporal: f64 = (1..h)
                .map(|k| (e.get1(k) - e.get1(k + h - 1)) * ((2 * j * k) as f64 * PI / nf).sin())
                .sum();
            let spatial: f64 = (1..=h)
                .map(|k| e.get1(k + n - 2) * (((2 * k - 1) * j) as f64 * PI / nf).cos())
                .sum();
            let bracket = s * temporal + spatial;
            weight * bracket * bracket
        })
        .sum();
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiDecomposition {
    pub spatial: f64,
    pub temporal: f64,
    pub mixed: f64,
    /// `(spatial + temporal + mixed) / (2 hbar_beta)`.
    pub total: f64,
}

pub fn phi_closed_form(spec: &LadderSpec, e: &LinkValues) -> Result<PhiDecomposition> {
    let spatial = phi_spatial(spec, e)?;
    let temporal = phi_temporal(spec, e)?;
    let mixed = phi_mixed(spec, e)?;
    Ok(PhiDecomposition {
        spatial,
        temporal,
        mixed,
        total: (spatial + temporal + mixed) / (2.0 * spec.hbar_beta),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Clause {
    /// Eigenvalue multiset.
    A,
    /// Eigenvector residuals.
    B,
    /// Eigenspace projectors.
    C,
    /// Exponent decomposition.
    D,
    /// Piecewise source vector.
    E,
}

impl Clause {
    pub const ALL: [Clause; 5] = [Clause::A, Clause::B, Clause::C, Clause::D, Clause::E];

    pub fn describe(&self) -> &'static str {
        match self {
            Clause::A => "closed-form eigenvalues match numeric spectrum",
            Clause::B => "closed-form eigenvectors are eigenvectors of K",
            Clause::C => "eigenspace projectors agree",
            Clause::D => "spatial + temporal + mixed equals direct eigen-sum",
            Clause::E => "piecewise source vector equals alpha * d1 * e",
        }
    }
}

pub const EIGENVALUE_TOLERANCE: f64 = 1e-9;
pub const EIGENVECTOR_TOLERANCE: f64 = 1e-9;
pub const PROJECTOR_TOLERANCE: f64 = 1e-8;
pub const PHI_TOLERANCE: f64 = 1e-9;
const CLUSTER_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClauseOutcome {
    pub clause: Clause,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationReport {
    pub n: usize,
    pub clauses: Vec<ClauseOutcome>,
    /// Numeric spectrum of `K`, ascending.
    pub numeric_spectrum: Vec<f64>,
    pub closed_form_sum: f64,
    pub direct_sum: f64,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, clause: Clause) -> &ClauseOutcome {
        self.clauses
            .iter()
            .find(|c| c.clause == clause)
            .expect("every clause is evaluated")
    }

    pub fn first_failure(&self) -> Option<&ClauseOutcome> {
        self.clauses.iter().find(|c| !c.passed)
    }

    pub fn failure_message(&self) -> Option<String> {
        self.first_failure().map(|c| {
            format!(
                "clause ({:?}) failed for N = {}: {} (residual {:e} > tolerance {:e})",
                c.clause,
                self.n,
                c.clause.describe(),
                c.residual,
                c.tolerance
            )
        })
    }
}

fn outcome(clause: Clause, residual: f64, tolerance: f64) -> ClauseOutcome {
    ClauseOutcome {
        clause,
        passed: residual <= tolerance,
        residual,
        tolerance,
    }
}

pub fn certify_ladder(spec: &LadderSpec, e: &LinkValues) -> Result<CertificationReport> {
    certify_ladder_with(spec, e, &closed_form_spectrum(spec))
}

/// Certifies a supplied closed-form spectrum against the generic pipeline.
/// Eigenvalue and eigenvector residuals are reported in units of `beta`.
pub fn certify_ladder_with(
    spec: &LadderSpec,
    e: &LinkValues,
    closed: &ClosedFormSpectrum,
) -> Result<CertificationReport> {
    spec.check_links(e)?;
    if closed.modes.len() != spec.n {
        return Err(Error::dims(
            "closed-form spectrum",
            spec.n,
            closed.modes.len(),
        ));
    }
    let config = spec.config();
    let beta = spec.beta;
    let graph = build_ladder(spec);
    let cc = ChainComplex::from_graph(&graph)?;
    let k = build_k(&cc, &config);
    let sd = spectral_decompose(&k)?;
    let numeric: Vec<f64> = sd.eigenvalues().iter().map(|a| a / beta).collect();

    let closed_sorted = closed.sorted_eigenvalues();
    let a_residual = closed_sorted
        .iter()
        .zip(&numeric)
        .map(|(c, d)| (c - d).abs())
        .fold(0.0, f64::max);

    let b_residual = closed
        .modes
        .iter()
        .map(|m| ((k.matrix() * &m.vector) / beta - &m.vector * m.eigenvalue).amax())
        .fold(0.0, f64::max);

    let mut c_residual = 0.0f64;
    for range in sd.eigenspaces(CLUSTER_TOLERANCE) {
        let lo = numeric[range.start] - CLUSTER_TOLERANCE;
        let hi = numeric[range.end - 1] + CLUSTER_TOLERANCE;
        let numeric_proj = sd.projector(range);
        let mut closed_proj = nalgebra::DMatrix::zeros(spec.n, spec.n);
        for m in closed
            .modes
            .iter()
            .filter(|m| m.eigenvalue >= lo && m.eigenvalue <= hi)
        {
            closed_proj += &m.vector * m.vector.transpose();
        }
        c_residual = c_residual.max((numeric_proj - closed_proj).amax());
    }

    let j = build_j(&cc, e, &config)?;
    let amplitude = partition_function_from(&sd, &j, spec.hbar_beta)?;
    let direct_sum: f64 = amplitude
        .modes
        .iter()
        .map(|m| m.jhat * m.jhat / (m.a / beta))
        .sum();
    let phi = phi_closed_form(spec, e)?;
    let closed_form_sum = phi.spatial + phi.temporal + phi.mixed;
    let scale = direct_sum
        .abs()
        .max(1e-12 * spec.alpha * spec.alpha * e.as_vector().norm_squared())
        .max(f64::MIN_POSITIVE);
    let d_residual = (closed_form_sum - direct_sum).abs() / scale;

    let piecewise = ladder_source_vector(spec, e)?;
    let e_residual = (piecewise.as_vector() - j.as_vector()).amax();
    let e_tolerance = if e.is_integer_valued() {
        0.0
    } else {
        4.0 * f64::EPSILON * spec.alpha.abs() * e.as_vector().lp_norm(1)
    };

    Ok(CertificationReport {
        n: spec.n,
        clauses: vec![
            outcome(Clause::A, a_residual, EIGENVALUE_TOLERANCE),
            outcome(Clause::B, b_residual, EIGENVECTOR_TOLERANCE),
            outcome(Clause::C, c_residual, PROJECTOR_TOLERANCE),
            outcome(Clause::D, d_residual, PHI_TOLERANCE),
            outcome(Clause::E, e_residual, e_tolerance),
        ],
        numeric_spectrum: numeric,
        closed_form_sum,
        direct_sum,
    })
}
