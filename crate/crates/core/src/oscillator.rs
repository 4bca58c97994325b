//! Discretised Euclidean action matrix for two coupled oscillators, and its
//! structural comparison with the ladder Laplacian.
//!
//! Slices `0..n_time` of oscillator one come first, then oscillator two.
//! Each slice has diagonal `(neighbours) * m/dt + k*dt`, neighbouring slices
//! are joined by `-m/dt`, and the two oscillators couple slice-by-slice
//! through `k12*dt`. Time boundaries are open.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scc::DifferenceMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillatorParams {
    pub m: f64,
    pub k: f64,
    pub k12: f64,
    pub dt: f64,
    pub n_time: usize,
}

impl OscillatorParams {
    /// Requires `m > 0`, `dt > 0`, `k >= 0`, `k12 <= 0` and `k + k12 >= 0`,
    /// i.e. `k = k1 + k3`, `k12 = -k3` with nonnegative springs.
    pub fn new(m: f64, k: f64, k12: f64, dt: f64, n_time: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if [m, k, k12, dt].iter().any(|x| !x.is_finite()) {
            return bad("oscillator parameters must be finite".into());
        }
        if m <= 0.0 {
            return bad(format!("mass must be positive, got {m}"));
        }
        if dt <= 0.0 {
            return bad(format!("time step must be positive, got {dt}"));
        }
        if k < 0.0 {
            return bad(format!("spring constant must be nonnegative, got {k}"));
        }
        if k12 > 0.0 {
            return bad(format!("coupling k12 must not be positive, got {k12}"));
        }
        if k + k12 < 0.0 {
            return bad(format!(
                "k + k12 = {} is negative; no nonnegative springs realise it",
                k + k12
            ));
        }
        if n_time == 0 {
            return bad("need at least one time slice".into());
        }
        Ok(Self {
            m,
            k,
            k12,
            dt,
            n_time,
        })
    }

    /// `m = k = dt = 1`, `k12 = -1`.
    pub fn unit(n_time: usize) -> Result<Self> {
        Self::new(1.0, 1.0, -1.0, 1.0, n_time)
    }

    /// Single-slice potential matrix `[[k, k12], [k12, k]]`.
    pub fn potential_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.k, self.k12, self.k12, self.k)
    }

    /// `1/2 k q1^2 + 1/2 k q2^2 + k12 q1 q2`.
    pub fn potential(&self, q1: f64, q2: f64) -> f64 {
        0.5 * self.k * q1 * q1 + 0.5 * self.k * q2 * q2 + self.k12 * q1 * q2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorMatrix {
    pub params: OscillatorParams,
    pub matrix: DMatrix<f64>,
}

impl OscillatorMatrix {
    pub fn as_difference_matrix(&self) -> DifferenceMatrix {
        DifferenceMatrix::from_symmetric(self.matrix.clone()).expect("built symmetric")
    }
}

pub fn build_oscillator_k(p: &OscillatorParams) -> OscillatorMatrix {
    let t = p.n_time;
    let kinetic = p.m / p.dt;
    let mut matrix = DMatrix::zeros(2 * t, 2 * t);
    for block in 0..2 {
        let base = block * t;
        for s in 0..t {
            let neighbours = usize::from(s > 0) + usize::from(s + 1 < t);
            matrix[(base + s, base + s)] = neighbours as f64 * kinetic + p.k * p.dt;
            if s + 1 < t {
                matrix[(base + s, base + s + 1)] = -kinetic;
                matrix[(base + s + 1, base + s)] = -kinetic;
            }
        }
    }
    for s in 0..t {
        matrix[(s, t + s)] = p.k12 * p.dt;
        matrix[(t + s, s)] = p.k12 * p.dt;
    }
    OscillatorMatrix { params: *p, matrix }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PatternReport {
    /// Same zero pattern, positive diagonals, and matching signs off the diagonal.
    pub pattern_match: bool,
    pub exact_equal: bool,
}

pub fn pattern_match_laplacian(
    osc: &OscillatorMatrix,
    k: &DifferenceMatrix,
) -> Result<PatternReport> {
    let (a, b) = (&osc.matrix, k.matrix());
    if a.shape() != b.shape() {
        return Err(Error::dims(
            "oscillator vs difference matrix",
            format!("{:?}", b.shape()),
            format!("{:?}", a.shape()),
        ));
    }
    let sign = |x: f64| {
        if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut pattern_match = true;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let (sa, sb) = (sign(a[(i, j)]), sign(b[(i, j)]));
            let ok = if i == j {
                sa == 1 && sb == 1
            } else {
                sa == sb && sa <= 0
            };
            pattern_match &= ok;
        }
    }
    Ok(PatternReport {
        pattern_match,
        exact_equal: a == b,
    })
}

/// Evaluates `1/2 q^T V q` for the single-slice potential block.
pub fn potential_quadratic_form(p: &OscillatorParams, q1: f64, q2: f64) -> f64 {
    let q = Vector2::new(q1, q2);
    0.5 * q.dot(&(p.potential_matrix() * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::ChainComplex;
    use crate::fixtures;
    use crate::scc::{build_k, SccConfig};

    fn six_vertex_k() -> DifferenceMatrix {
        build_k(
            &ChainComplex::from_graph(&fixtures::six_vertex_graph()).unwrap(),
            &SccConfig::default(),
        )
    }

    #[test]
    fn unit_parameters_reproduce_laplacian() {
        let osc = build_oscillator_k(&OscillatorParams::unit(3).unwrap());
        assert_eq!(
            osc.matrix,
            fixtures::six_vertex_laplacian().map(|x| x as f64)
        );
        let report = pattern_match_laplacian(&osc, &six_vertex_k()).unwrap();
        assert!(report.pattern_match && report.exact_equal);
    }

    #[test]
    fn free_particles_decouple() {
        let osc = build_oscillator_k(&OscillatorParams::new(1.0, 0.0, 0.0, 1.0, 2).unwrap());
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
             1.0, -1.0,  0.0,  0.0,
            -1.0,  1.0,  0.0,  0.0,
             0.0,  0.0,  1.0, -1.0,
             0.0,  0.0, -1.0,  1.0,
        ]);
        assert_eq!(osc.matrix, expected);
    }

    #[test]
    fn general_three_slice_entries() {
        let (m, k, k12, dt) = (2.0, 0.75, -0.5, 0.1);
        let osc = build_oscillator_k(&OscillatorParams::new(m, k, k12, dt, 3).unwrap());
        let end = m / dt + k * dt;
        let mid = 2.0 * m / dt + k * dt;
        let off = -m / dt;
        let c = k12 * dt;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(6, 6, &[
            end, off, 0.0, c,   0.0, 0.0,
            off, mid, off, 0.0, c,   0.0,
            0.0, off, end, 0.0, 0.0, c,
            c,   0.0, 0.0, end, off, 0.0,
            0.0, c,   0.0, off, mid, off,
            0.0, 0.0, c,   0.0, off, end,
        ]);
        assert_eq!(osc.matrix, expected);
        let report = pattern_match_laplacian(&osc, &six_vertex_k()).unwrap();
        assert!(report.pattern_match);
        assert!(!report.exact_equal);
    }

    #[test]
    fn rejects_positive_coupling_and_bad_params() {
        assert!(OscillatorParams::new(1.0, 1.0, 0.5, 1.0, 3).is_err());
        assert!(OscillatorParams::new(0.0, 1.0, -0.5, 1.0, 3).is_err());
        assert!(OscillatorParams::new(1.0, 1.0, -0.5, 0.0, 3).is_err());
        assert!(OscillatorParams::new(1.0, 0.4, -0.5, 1.0, 3).is_err());
        assert!(OscillatorParams::new(1.0, 1.0, -0.5, 1.0, 0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let osc = build_oscillator_k(&OscillatorParams::unit(2).unwrap());
        assert!(pattern_match_laplacian(&osc, &six_vertex_k()).is_err());
    }

    #[test]
    fn potential_block_matches_explicit_form() {
        let p = OscillatorParams::new(1.0, 2.5, -1.25, 0.5, 3).unwrap();
        for (q1, q2) in [(0.0, 0.0), (1.0, -2.0), (0.3, 0.7)] {
            let a = potential_quadratic_form(&p, q1, q2);
            let b = p.potential(q1, q2);
            assert!((a - b).abs() < 1e-14);
        }
    }
}
