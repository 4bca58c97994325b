//! Brute-force checks that share no formula assembly with the closed forms
//! they validate.
//!
//! Eigendecompositions here use nalgebra's implicit-QR symmetric solver
//! rather than the crate's Jacobi routine, and the quadrature integrand is
//! the vertex-space action `-1/2 Q^T K Q + J . Q` evaluated directly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain_complex::{ChainComplex, IntMatrix, LinkValues, OrientedGraph};
use crate::error::{Error, Result};
use crate::gaussian::ROW_SPACE_TOLERANCE;
use crate::scc::{
    build_j, build_k, gauge_null_space, verify_scc, DifferenceMatrix, SccConfig, SourceVector,
    NULL_THRESHOLD,
};

/// Rank limit for the trapezoid rule.
pub const MAX_QUADRATURE_RANK: usize = 4;
/// Integrand evaluations allowed for any rule, `200^4`.
pub const EVALUATION_BUDGET: u64 = 1_600_000_000;
pub const MAX_SWEEP_VERTICES: usize = 8;
pub const MIN_SWEEP_GRAPHS: usize = 500;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum QuadratureRule {
    Trapezoid { points: usize },
    GaussHermite { order: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Half-width of each trapezoid axis in standard deviations.
    pub axis_bound: f64,
    pub rule: QuadratureRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            axis_bound: 12.0,
            rule: QuadratureRule::Trapezoid { points: 200 },
        }
    }
}

impl QuadratureSpec {
    pub fn trapezoid(points: usize) -> Self {
        Self {
            rule: QuadratureRule::Trapezoid { points },
            ..Self::default()
        }
    }

    pub fn gauss_hermite(order: usize) -> Self {
        Self {
            rule: QuadratureRule::GaussHermite { order },
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let resolution = match self.rule {
            QuadratureRule::Trapezoid { points } => points,
            QuadratureRule::GaussHermite { order } => order,
        };
        if resolution < 2 || self.axis_bound.is_nan() || self.axis_bound <= 0.0 {
            return Err(Error::InvalidParameter(
                "quadrature needs a positive axis bound and at least 2 points".into(),
            ));
        }
        Ok(())
    }

    /// Largest row-space rank this rule may integrate: 4 for the trapezoid
    /// rule, otherwise whatever keeps `order^rank` within
    /// [`EVALUATION_BUDGET`].
    pub fn max_rank(&self) -> usize {
        match self.rule {
            QuadratureRule::Trapezoid { .. } => MAX_QUADRATURE_RANK,
            QuadratureRule::GaussHermite { order } => {
                let mut rank = 0;
                while (order as u64)
                    .checked_pow(rank as u32 + 1)
                    .is_some_and(|e| e <= EVALUATION_BUDGET)
                {
                    rank += 1;
                }
                rank
            }
        }
    }

    fn coarser(&self) -> Self {
        let rule = match self.rule {
            QuadratureRule::Trapezoid { points } => QuadratureRule::Trapezoid {
                points: (points / 2).max(2),
            },
            QuadratureRule::GaussHermite { order } => QuadratureRule::GaussHermite {
                order: (order / 2).max(2),
            },
        };
        Self { rule, ..*self }
    }

    /// Standardised nodes `t` and log-weights such that
    /// `int f(t) dt ~ sum exp(logw_i) f(t_i)`, plus the axis scale in units
    /// of the mode's standard deviation.
    fn nodes(&self) -> (Vec<(f64, f64)>, f64) {
        match self.rule {
            QuadratureRule::Trapezoid { points } => {
                let b = self.axis_bound;
                let h = 2.0 * b / (points - 1) as f64;
                let nodes = (0..points)
                    .map(|i| {
                        let w = if i == 0 || i == points - 1 {
                            h / 2.0
                        } else {
                            h
                        };
                        (-b + i as f64 * h, w.ln())
                    })
                    .collect();
                (nodes, 1.0)
            }
            // q = centre + sqrt(2) sigma t puts each factor in exp(-t^2) form
            QuadratureRule::GaussHermite { order } => {
                let nodes = gauss_hermite_rule(order)
                    .into_iter()
                    .map(|(t, w)| (t, w.ln() + t * t))
                    .collect();
                (nodes, std::f64::consts::SQRT_2)
            }
        }
    }
}

/// Gauss-Hermite nodes and weights for `int exp(-t^2) f(t) dt` via the
/// Golub-Welsch eigenproblem.
pub fn gauss_hermite_rule(order: usize) -> Vec<(f64, f64)> {
    let mut jacobi = DMatrix::zeros(order, order);
    for i in 1..order {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i - 1, i)] = b;
        jacobi[(i, i - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

struct RowSpace {
    basis: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    projections: Vec<f64>,
}

fn row_space(k: &DifferenceMatrix, j: &SourceVector) -> Result<RowSpace> {
    if j.len() != k.dim() {
        return Err(Error::dims("source vector", k.dim(), j.len()));
    }
    let eig = SymmetricEigen::new(k.matrix().clone());
    let cutoff = NULL_THRESHOLD * eig.eigenvalues.amax();
    let mut null_sq = 0.0;
    let mut cols = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    for i in 0..eig.eigenvalues.len() {
        let col = eig.eigenvectors.column(i);
        let p = col.dot(j.as_vector());
        if eig.eigenvalues[i].abs() <= cutoff {
            null_sq += p * p;
        } else {
            cols.push(col.clone_owned());
            eigenvalues.push(eig.eigenvalues[i]);
            projections.push(p);
        }
    }
    let norm = j.as_vector().norm();
    if null_sq.sqrt() > ROW_SPACE_TOLERANCE * norm {
        return Err(Error::NotInRowSpace {
            component: null_sq.sqrt(),
            norm,
        });
    }
    let basis = if cols.is_empty() {
        DMatrix::zeros(k.dim(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(RowSpace {
        basis,
        eigenvalues,
        projections,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub log_z: f64,
    /// Difference from the same integral at half resolution.
    pub error_estimate: f64,
    pub rank: usize,
    pub evaluations: u64,
}

fn integrate(
    k: &DifferenceMatrix,
    j: &SourceVector,
    rs: &RowSpace,
    spec: &QuadratureSpec,
) -> (f64, u64) {
    let rank = rs.eigenvalues.len();
    if rank == 0 {
        return (0.0, 1);
    }
    let (nodes, stretch) = spec.nodes();
    let sigma: Vec<f64> = rs.eigenvalues.iter().map(|a| stretch / a.sqrt()).collect();
    let centre: DVector<f64> = (0..rank)
        .map(|i| rs.basis.column(i) * (rs.projections[i] / rs.eigenvalues[i]))
        .fold(DVector::zeros(k.dim()), |acc, c| acc + c);
    let action = |q: &DVector<f64>| -0.5 * q.dot(&(k.matrix() * q)) + j.as_vector().dot(q);
    let reference = action(&centre);
    let m = nodes.len();
    let scaled: Vec<DMatrix<f64>> = (0..rank)
        .map(|axis| {
            DMatrix::from_fn(k.dim(), m, |r, c| {
                rs.basis[(r, axis)] * sigma[axis] * nodes[c].0
            })
        })
        .collect();

    let partials: Vec<CompensatedSum> = (0..m)
        .into_par_iter()
        .map(|first| {
            let mut acc = CompensatedSum::default();
            let mut idx = vec![0usize; rank];
            idx[0] = first;
            loop {
                let mut q = centre.clone();
                let mut log_w = 0.0;
                for (axis, &i) in idx.iter().enumerate() {
                    q += scaled[axis].column(i);
                    log_w += nodes[i].1;
                }
                acc.add((log_w + action(&q) - reference).exp());
                // odometer over axes 1..rank
                let mut axis = 1;
                while axis < rank {
                    idx[axis] += 1;
                    if idx[axis] < m {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
                if axis == rank {
                    break;
                }
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in partials {
        total.merge(p);
    }
    let log_jacobian: f64 = sigma.iter().map(|s| s.ln()).sum();
    (
        reference + total.value().ln() + log_jacobian,
        (m as u64).pow(rank as u32),
    )
}

/// Tensor-product quadrature of the row-space Gaussian integral.
pub fn quadrature_z(
    k: &DifferenceMatrix,
    j: &SourceVector,
    spec: &QuadratureSpec,
) -> Result<QuadratureEstimate> {
    spec.validate()?;
    let rs = row_space(k, j)?;
    let rank = rs.eigenvalues.len();
    if rank > spec.max_rank() {
        return Err(Error::RankTooLarge {
            rank,
            max: spec.max_rank(),
        });
    }
    let (log_z, evaluations) = integrate(k, j, &rs, spec);
    let (coarse, coarse_evals) = integrate(k, j, &rs, &spec.coarser());
    Ok(QuadratureEstimate {
        log_z,
        error_estimate: (log_z - coarse).abs(),
        rank,
        evaluations: evaluations + coarse_evals,
    })
}

/// `sum Jhat_i^2 / (2 a_i hbar_beta)` by explicit eigendecomposition.
pub fn direct_phi(k: &DifferenceMatrix, j: &SourceVector, hbar_beta: f64) -> Result<f64> {
    let rs = row_space(k, j)?;
    let mut acc = CompensatedSum::default();
    for (p, a) in rs.projections.iter().zip(&rs.eigenvalues) {
        acc.add(p * p / (2.0 * a * hbar_beta));
    }
    Ok(acc.value())
}

/// Random connected graph on `n` vertices: a random spanning tree plus up to
/// `extra` additional distinct links, every link with a random orientation.
/// With `faces`, each non-tree link closes a fundamental cycle that is
/// declared as a plaquette.
pub fn random_connected_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    extra: usize,
    faces: bool,
) -> OrientedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut parent = vec![usize::MAX; n];
    let mut parent_link = vec![usize::MAX; n];
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut adjacent = std::collections::HashSet::new();
    let orient = |rng: &mut R, a: usize, b: usize| if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    for pos in 1..n {
        let child = order[pos];
        let par = order[rng.gen_range(0..pos)];
        parent[child] = par;
        parent_link[child] = links.len();
        links.push(orient(rng, par, child));
        adjacent.insert((par.min(child), par.max(child)));
    }
    let root = order.first().copied();
    let max_links = n * n.saturating_sub(1) / 2;
    let mut non_tree = Vec::new();
    let mut attempts = 0;
    while non_tree.len() < extra && adjacent.len() < max_links && attempts < 50 * (extra + 1) {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || !adjacent.insert((a.min(b), a.max(b))) {
            continue;
        }
        non_tree.push(links.len());
        links.push(orient(rng, a, b));
    }

    let mut plaquettes = Vec::new();
    if faces {
        let depth = |mut v: usize| {
            let mut d = 0;
            while Some(v) != root {
                v = parent[v];
                d += 1;
            }
            d
        };
        for &l in &non_tree {
            let (u, w) = links[l];
            // u -> w along the link, then back from w to u through the tree
            let mut cycle = vec![(l, 1)];
            let (mut a, mut b) = (w, u);
            let mut tail_half = Vec::new();
            let (mut da, mut db) = (depth(a), depth(b));
            while a != b {
                if da >= db {
                    let p = parent[a];
                    let link = parent_link[a];
                    cycle.push((link, if links[link] == (a, p) { 1 } else { -1 }));
                    a = p;
                    da -= 1;
                } else {
                    let p = parent[b];
                    let link = parent_link[b];
                    // traversed later as p -> b
                    tail_half.push((link, if links[link] == (p, b) { 1 } else { -1 }));
                    b = p;
                    db -= 1;
                }
            }
            cycle.extend(tail_half.into_iter().rev());
            plaquettes.push(cycle);
        }
    }
    OrientedGraph::from_indices(n, &links, &plaquettes).expect("generator produces valid graphs")
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SccSweepReport {
    pub graphs_checked: usize,
    pub connected_checked: usize,
    pub max_vertices: usize,
    pub seed: u64,
    pub worst_scc_residual: f64,
    pub worst_divergence: f64,
    pub worst_null_vector_error: f64,
    pub failures: Vec<String>,
}

impl SccSweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All connected simple graphs on up to four vertices (labelled, every edge
/// subset), then random connected graphs until at least
/// [`MIN_SWEEP_GRAPHS`] have been checked. Each graph gets random
/// orientations, vertex values, link values and scales.
pub fn exhaustive_scc_check(max_vertices: usize, seed: u64) -> Result<SccSweepReport> {
    if max_vertices > MAX_SWEEP_VERTICES {
        return Err(Error::InvalidParameter(format!(
            "sweep limited to {MAX_SWEEP_VERTICES} vertices, got {max_vertices}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs: Vec<OrientedGraph> = Vec::new();
    for n in 1..=max_vertices.min(4) {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .collect();
        for mask in 0u32..(1 << pairs.len()) {
            let links: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &(a, b))| if rng.gen_bool(0.5) { (a, b) } else { (b, a) })
                .collect();
            let g = OrientedGraph::from_indices(n, &links, &[])?;
            if g.is_connected() {
                graphs.push(g);
            }
        }
    }
    if max_vertices >= 1 {
        while graphs.len() < MIN_SWEEP_GRAPHS {
            let n = rng.gen_range(1..=max_vertices);
            let extra = rng.gen_range(0..=n);
            graphs.push(random_connected_graph(&mut rng, n, extra, true));
        }
    }

    let mut report = SccSweepReport {
        max_vertices,
        seed,
        ..Default::default()
    };
    for g in &graphs {
        check_graph(g, &mut rng, &mut report)?;
    }
    Ok(report)
}

fn check_graph<R: Rng>(g: &OrientedGraph, rng: &mut R, report: &mut SccSweepReport) -> Result<()> {
    let n = g.vertex_count();
    let cc = ChainComplex::from_graph(g)?;
    let alpha = rng.gen_range(0.1..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let config = SccConfig::new(alpha, rng.gen_range(0.1..3.0))?;
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-10.0..10.0));
    let e = LinkValues::new(DVector::from_fn(g.link_count(), |_, _| {
        rng.gen_range(-10.0..10.0)
    }))?;
    let label = format!("graph with {} vertices and {} links", n, g.link_count());

    report.graphs_checked += 1;
    let scc = verify_scc(&cc, &v, &config)?;
    report.worst_scc_residual = report
        .worst_scc_residual
        .max(scc.residual / (1.0 + v.amax()));
    if !scc.holds {
        report
            .failures
            .push(format!("{label}: SCC residual {:e}", scc.residual));
    }

    let j: SourceVector = build_j(&cc, &e, &config)?;
    let div = j.divergence() / j.as_vector().lp_norm(1).max(f64::MIN_POSITIVE);
    report.worst_divergence = report.worst_divergence.max(div);
    if !j.is_divergence_free() {
        report
            .failures
            .push(format!("{label}: divergence {:e}", j.divergence()));
    }

    let k = build_k(&cc, &config);
    let ones = IntMatrix::from_element(n, 1, 1);
    if k.laplacian()
        .is_none_or(|l| (l * ones).iter().any(|&x| x != 0))
    {
        report
            .failures
            .push(format!("{label}: K does not annihilate constants"));
    }

    if g.is_connected() {
        report.connected_checked += 1;
        let ns = gauge_null_space(&k)?;
        if ns.dimension() != 1 {
            report.failures.push(format!(
                "{label}: null space dimension {} (rank {})",
                ns.dimension(),
                n - ns.dimension()
            ));
        } else {
            let expected = 1.0 / (n as f64).sqrt();
            let err = ns
                .basis
                .iter()
                .map(|x| (x - expected).abs())
                .fold(0.0, f64::max);
            report.worst_null_vector_error = report.worst_null_vector_error.max(err);
            if err > 1e-9 {
                report
                    .failures
                    .push(format!("{label}: null vector off constant by {err:e}"));
            }
        }
    }
    Ok(())
}
