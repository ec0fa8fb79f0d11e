//! Dense complex Hermitian eigensolver.
//!
//! Matrices in this crate are at most a few hundred rows (donor ⊗ small
//! cluster), so a cyclic Jacobi sweep is fast enough and gives eigenvalues with
//! small absolute error relative to the matrix norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Eigen-decomposition `H = V diag(values) V†` with ascending `values`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

const MAX_SWEEPS: usize = 64;

/// Diagonalise a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Only the Hermitian part of `h` is used. Eigenvalues are returned in
/// ascending order; columns of `vectors` are the matching eigenvectors.
pub fn eigh(h: &CMatrix) -> HermitianEigen {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "eigh needs a square matrix");
    let mut a = h.clone();
    // symmetrise so rounding in the caller cannot leak an anti-Hermitian part
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
    let mut v = CMatrix::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 1 && scale > 0.0 {
        let tol = 1e-30 * scale * scale;
        for _ in 0..MAX_SWEEPS {
            let off: f64 =
                (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if r < 1e-300 || r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    // phase that makes the pivot real, then a real Jacobi rotation
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] acting on columns p, q
    let ph_conj = phase.conj();
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ph_conj * s;
        a[(k, q)] = akp * s + akq * ph_conj * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for k in 0..v.nrows() {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ph_conj * s;
        v[(k, q)] = vkp * s + vkq * ph_conj * c;
    }
}

/// Largest entry modulus of `m`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn reconstructs_random_hermitian() {
        for (n, seed) in [(1, 0), (2, 1), (5, 2), (20, 3), (40, 4)] {
            let h = random_hermitian(n, seed);
            let e = eigh(&h);
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                e.values.iter().map(|&x| Complex64::new(x, 0.0)),
            ));
            let back = &e.vectors * d * e.vectors.adjoint();
            assert!(max_abs(&(back - &h)) < 1e-12, "n={n}");
            let unit = e.vectors.adjoint() * &e.vectors - CMatrix::identity(n, n);
            assert!(max_abs(&unit) < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut h = CMatrix::identity(6, 6) * Complex64::new(2.0, 0.0);
        h[(0, 1)] = Complex64::new(0.0, 1.0);
        h[(1, 0)] = Complex64::new(0.0, -1.0);
        let e = eigh(&h);
        let expect = [1.0, 2.0, 2.0, 2.0, 2.0, 3.0];
        for (a, b) in e.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = CMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0].map(|x| Complex64::new(x, 0.0)));
        let b = CMatrix::identity(3, 3);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k[(4, 1)], Complex64::new(3.0, 0.0));
        assert_eq!(k[(4, 2)], Complex64::new(0.0, 0.0));
    }
}
