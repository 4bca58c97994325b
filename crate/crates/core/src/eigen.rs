//! Cyclic Jacobi eigensolver for small dense symmetric matrices.
//!
//! Each rotation annihilates one off-diagonal pair; sweeps repeat until the
//! off-diagonal Frobenius norm falls below `1e-12 * ||A||_F`. The input is
//! copied, never modified.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Eigenvalues sorted ascending; column `i` of `vectors` pairs with `values[i]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a[(p, q)] * a[(p, q)];
        }
    }
    sum.sqrt()
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dims(
            "symmetric matrix",
            "square",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let asym = max_asymmetry(a);
    if asym > SYMMETRY_TOLERANCE * a.norm().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

pub fn jacobi_eigen(input: &DMatrix<f64>) -> Result<Eigen> {
    check_symmetric(input)?;
    let n = input.nrows();
    let mut a = (input + input.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = OFF_DIAGONAL_TOLERANCE * a.norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        // sign convention: first clearly nonzero component positive
        if let Some(lead) = col.iter().find(|x| x.abs() > 1e-12) {
            if *lead < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(dst, &col);
    }
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &DMatrix<f64>, e: &Eigen) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..a.nrows() {
            let col = e.vectors.column(i);
            let r = a * col - col * e.values[i];
            worst = worst.max(r.amax());
        }
        worst
    }

    #[test]
    fn two_by_two_laplacian() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let e = jacobi_eigen(&k).unwrap();
        assert!((e.values[0]).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        assert!((e.vectors[(0, 0)] - s).abs() < 1e-14);
        assert!((e.vectors[(1, 0)] - s).abs() < 1e-14);
        assert!((e.vectors[(0, 1)].abs() - s).abs() < 1e-14);
        assert!((e.vectors[(0, 1)] + e.vectors[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = jacobi_eigen(&a).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(jacobi_eigen(&a), Err(Error::NotSymmetric(_))));
        assert!(jacobi_eigen(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_symmetric_is_diagonalised() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [1, 3, 7, 15, 30] {
            let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let a = &b + b.transpose();
            let e = jacobi_eigen(&a).unwrap();
            assert!(residual(&a, &e) <= 1e-10 * a.norm().max(1.0));
            let gram = e.vectors.transpose() * &e.vectors;
            assert!((gram - DMatrix::identity(n, n)).amax() < 1e-12);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
