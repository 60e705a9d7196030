//! Dense complex linear algebra helpers: fast products, Kronecker products,
//! the matrix exponential and a few matrix norms.

use nalgebra::DMatrix;

use crate::{CMatrix, C64};

/// Below this size the plain complex product is already cheap.
const SPLIT_PRODUCT_MIN_DIM: usize = 24;

/// Complex matrix product.
///
/// Large products are split into four real products so they run through the
/// blocked real kernel instead of the generic complex loop.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    if a.nrows().max(a.ncols()).max(b.ncols()) < SPLIT_PRODUCT_MIN_DIM {
        return a * b;
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMatrix::from_fn(a.nrows(), b.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

fn split(m: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn exp_m1(z: C64) -> C64 {
    let half = (0.5 * z.im).sin();
    C64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest element modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The argument is scaled so its 1-norm is at most 1/2, the series is summed
/// until the next term is below machine precision relative to the partial
/// sum, and the result is squared back up.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm: matrix must be square");
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * C64::new(0.5f64.powi(squarings), 0.0);

    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=60 {
        term = matmul(&term, &scaled) / C64::new(k as f64, 0.0);
        sum += &term;
        if norm1(&term) <= f64::EPSILON * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// Eigenvalues of the Hermitian part `(m + m†)/2`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Trace distance: half the sum of singular values of `a - b`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    0.5 * d.singular_values().iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn split_product_matches_plain_product() {
        let a = CMatrix::from_fn(30, 30, |i, j| c((i as f64 * 0.3).sin(), (j as f64).cos()));
        let b = CMatrix::from_fn(30, 30, |i, j| c(((i + 2 * j) as f64).cos(), 0.1 * i as f64));
        assert!(max_abs(&(matmul(&a, &b) - &a * &b)) < 1e-12);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(5, 5);
        assert_eq!(expm(&z), CMatrix::identity(5, 5));
    }

    #[test]
    fn expm_of_diagonal_is_elementwise() {
        let d = [c(-3.0, 1.0), c(0.5, -7.0), c(2.0, 0.0)];
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&d));
        let e = expm(&m);
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-13 * z.exp().norm().max(1.0));
        }
    }

    #[test]
    fn expm_rotation_generator() {
        // exp([[0, -θ], [θ, 0]]) is a rotation by θ
        let th = 2.5;
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-th, 0.0), c(th, 0.0), c(0.0, 0.0)]);
        let e = expm(&m);
        assert!((e[(0, 0)] - c(th.cos(), 0.0)).norm() < 1e-14);
        assert!((e[(1, 0)] - c(th.sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_nilpotent_is_finite_series() {
        // strictly upper triangular 3x3: exp = I + N + N^2/2
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0, 0.0), c(2.0, 1.0), c(0.5, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            ],
        );
        let expected = CMatrix::identity(3, 3) + &m + (&m * &m) * c(0.5, 0.0);
        assert!(max_abs(&(expm(&m) - expected)) < 1e-13);
    }

    #[test]
    fn exp_m1_small_and_large() {
        let z = c(1e-12, -2e-12);
        assert!((exp_m1(z) - z).norm() < 1e-23);
        let w = c(0.7, -2.1);
        assert!((exp_m1(w) - (w.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = CMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 2.0)]);
        let b = CMatrix::from_row_slice(1, 2, &[c(3.0, 0.0), c(4.0, 0.0)]);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (2, 2));
        assert_eq!(k[(1, 1)], c(0.0, 8.0));
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors_is_one() {
        let mut p = CMatrix::zeros(3, 3);
        p[(0, 0)] = c(1.0, 0.0);
        let mut q = CMatrix::zeros(3, 3);
        q[(2, 2)] = c(1.0, 0.0);
        assert!((trace_distance(&p, &q) - 1.0).abs() < 1e-14);
    }
}
