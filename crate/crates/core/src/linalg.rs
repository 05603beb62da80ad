//! One-sided Jacobi SVD for small complex matrices.
//!
//! nalgebra 0.33's complex bidiagonal SVD returns factorizations with O(1)
//! reconstruction error on some rank-deficient inputs (rank-one 2x4 blocks
//! show up constantly in MPS updates), so the MPS engine uses this instead.
//! Hestenes' method is accurate to machine precision, small singular
//! values included, and the matrices involved are at most `2 chi` wide.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct Svd {
    /// m x k, orthonormal columns.
    pub u: DMatrix<C64>,
    /// Descending, length k = min(m, n).
    pub s: Vec<f64>,
    /// k x n, orthonormal rows.
    pub v_t: DMatrix<C64>,
}

pub fn svd(a: &DMatrix<C64>) -> Svd {
    if a.nrows() >= a.ncols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.adjoint());
        Svd {
            u: t.v_t.adjoint(),
            s: t.s,
            v_t: t.u.adjoint(),
        }
    }
}

fn svd_tall(a: &DMatrix<C64>) -> Svd {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = w
                    .column(p)
                    .iter()
                    .zip(w.column(q).iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g < 1e-300 {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, e.conj());
                rotate(&mut v, p, q, c, s, e.conj());
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            (
                w.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
                j,
            )
        })
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut u = DMatrix::<C64>::zeros(m, n);
    let mut v_sorted = DMatrix::<C64>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(sigma, j)) in order.iter().enumerate() {
        s.push(sigma);
        v_sorted.set_column(k, &v.column(j));
        if sigma > 0.0 {
            u.set_column(k, &(w.column(j) / C64::new(sigma, 0.0)));
        }
    }
    complete_basis(&mut u, &s);
    Svd {
        u,
        s,
        v_t: v_sorted.adjoint(),
    }
}

/// Columns `p`, `q` become `c p - s e q` and `s p + c e q`.
fn rotate(m: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: f64, e: C64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)] * e;
        m[(i, p)] = x * c - y * s;
        m[(i, q)] = x * s + y * c;
    }
}

/// Fills the columns of zero singular values with an orthonormal
/// complement so `u` stays an isometry.
fn complete_basis(u: &mut DMatrix<C64>, s: &[f64]) {
    let m = u.nrows();
    let mut candidate = 0;
    for k in 0..s.len() {
        if s[k] > 0.0 {
            continue;
        }
        loop {
            let mut col = DMatrix::<C64>::zeros(m, 1);
            col[(candidate % m, 0)] = C64::new(1.0, 0.0);
            candidate += 1;
            for j in 0..u.ncols() {
                if j == k || (s[j] == 0.0 && j > k) {
                    continue;
                }
                let proj: C64 = u
                    .column(j)
                    .iter()
                    .zip(col.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for i in 0..m {
                    col[(i, 0)] -= proj * u[(i, j)];
                }
            }
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                u.set_column(k, &(col.column(0) / C64::new(norm, 0.0)));
                break;
            }
            if candidate > 2 * m {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<C64> {
        DMatrix::from_fn(r, c, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn check(a: &DMatrix<C64>) {
        let f = svd(a);
        let k = f.s.len();
        let sigma = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                C64::new(f.s[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!((&f.u * sigma * &f.v_t - a).norm() < 1e-12 * (1.0 + a.norm()));
        assert!((f.u.adjoint() * &f.u - DMatrix::identity(k, k)).norm() < 1e-12);
        assert!((&f.v_t * f.v_t.adjoint() - DMatrix::identity(k, k)).norm() < 1e-12);
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn reconstructs_random_and_rank_deficient_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let (r, c) = [(2, 4), (4, 2), (4, 8), (3, 3), (8, 8), (1, 4)][rng.gen_range(0..6)];
            let full = random(&mut rng, r, c);
            let rank1 = random(&mut rng, r, 1) * random(&mut rng, 1, c);
            check(&full);
            check(&rank1);
        }
        check(&DMatrix::zeros(3, 2));
    }
}
