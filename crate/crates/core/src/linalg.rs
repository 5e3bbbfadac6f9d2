//! Small dense complex linear algebra: Hermitian eigenvalues by cyclic
//! Jacobi sweeps and SVD-based minimum-norm least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const JACOBI_MAX_SWEEPS: usize = 64;

/// `AᴴA`.
pub fn gram(a: &CMatrix) -> CMatrix {
    a.adjoint() * a
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the upper triangle is read. Cyclic Jacobi: each rotation first
/// removes the phase of the pivot with a diagonal unitary, then applies the
/// classical real rotation.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "Hermitian eigenvalues need a square matrix");
    if n == 0 {
        return Vec::new();
    }
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        a[i * n + i] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            a[i * n + j] = m[(i, j)];
            a[j * n + i] = m[(i, j)].conj();
        }
    }
    let idx = |i: usize, j: usize| i * n + j;

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[idx(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [-s, c]] on coordinates (p, q).
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;
                // A ← A U (columns p, q)
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = akp * upp + akq * uqp;
                    a[idx(k, q)] = akp * upq + akq * uqq;
                }
                // A ← Uᴴ A (rows p, q)
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[idx(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[idx(p, q)] = Complex64::new(0.0, 0.0);
                a[idx(q, p)] = Complex64::new(0.0, 0.0);
                a[idx(p, p)].im = 0.0;
                a[idx(q, q)].im = 0.0;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[idx(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(λ_min, λ_max)` of a Hermitian matrix.
pub fn eigen_extremes(m: &CMatrix) -> (f64, f64) {
    let ev = hermitian_eigenvalues(m);
    (ev[0], ev[ev.len() - 1])
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Minimum-norm least-squares solution of `A x ≈ y`.
#[derive(Debug, Clone)]
pub struct PointwiseSolution {
    pub solution: CVector,
    /// Number of singular values kept (≥ `tol · σ_max`).
    pub rank: usize,
    /// `σ_max / σ_min` over the kept singular values; infinite for a zero matrix.
    pub condition: f64,
}

/// Pseudoinverse solve via SVD, discarding singular values below
/// `tol · σ_max`. Never fails; rank deficiency is reported in the result.
pub fn least_squares(a: &CMatrix, y: &CVector, tol: f64) -> PointwiseSolution {
    let n = a.ncols();
    assert_eq!(a.nrows(), y.len(), "measurement length must match row count");
    if a.nrows() == 0 || n == 0 {
        return PointwiseSolution {
            solution: CVector::zeros(n),
            rank: 0,
            condition: f64::INFINITY,
        };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let cut = tol * smax;
    let mut x = CVector::zeros(n);
    let mut rank = 0;
    let mut smin = f64::INFINITY;
    for (i, &s) in sigma.iter().enumerate() {
        if s <= cut || s == 0.0 {
            continue;
        }
        rank += 1;
        smin = smin.min(s);
        let coef = u.column(i).dotc(y) / s;
        for r in 0..n {
            x[r] += v_t[(i, r)].conj() * coef;
        }
    }
    let condition = if rank == 0 { f64::INFINITY } else { smax / smin };
    PointwiseSolution {
        solution: x,
        rank,
        condition,
    }
}

/// [`least_squares`] that insists on full column rank.
pub fn solve_pointwise(a: &CMatrix, y: &CVector, tol: f64) -> Result<PointwiseSolution> {
    let sol = least_squares(a, y, tol);
    if sol.rank < a.ncols() {
        return Err(Error::RankDeficient { omegas: Vec::new() });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = dmatrix![c(2.0, 0.0), c(1.0, -1.0); c(1.0, 1.0), c(3.0, 0.0)];
        let ev = hermitian_eigenvalues(&m);
        // tr = 5, det = 6 - 2 = 4
        let disc = (25.0f64 - 16.0).sqrt();
        assert!((ev[0] - (5.0 - disc) / 2.0).abs() < 1e-14);
        assert!((ev[1] - (5.0 + disc) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn matches_nalgebra_hermitian_solver() {
        let n = 4;
        let a = CMatrix::from_fn(n, n, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0)
        });
        let h = &a + a.adjoint();
        let ours = hermitian_eigenvalues(&h);
        let mut theirs: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-12, "{ours:?} vs {theirs:?}");
        }
    }

    #[test]
    fn diagonal_and_zero_inputs() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0)]));
        assert_eq!(hermitian_eigenvalues(&d), vec![-1.0, 3.0]);
        assert_eq!(hermitian_eigenvalues(&CMatrix::zeros(3, 3)), vec![0.0; 3]);
    }

    #[test]
    fn identity_system_returns_rhs() {
        let a = CMatrix::identity(3, 3);
        let y = CVector::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0)]);
        let sol = solve_pointwise(&a, &y, 1e-10).unwrap();
        assert!((sol.solution - &y).norm() < 1e-15);
        assert_eq!(sol.rank, 3);
        assert!((sol.condition - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_system() {
        let a = dmatrix![c(2.0, 0.0)];
        let y = CVector::from_vec(vec![c(6.0, 0.0)]);
        let sol = solve_pointwise(&a, &y, 1e-10).unwrap();
        assert!((sol.solution[0] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tall_system_matches_normal_equations() {
        // Deterministic pseudo-random 5x3 system; oracle: (AᴴA)⁻¹Aᴴy via LU.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = CMatrix::from_fn(5, 3, |_, _| c(next(), next()));
        let y = CVector::from_fn(5, |_, _| c(next(), next()));
        let sol = solve_pointwise(&a, &y, 1e-10).unwrap();
        let normal = gram(&a).lu().solve(&(a.adjoint() * &y)).unwrap();
        assert!((sol.solution - normal).norm() < 1e-10);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = dmatrix![c(1.0, 0.0), c(2.0, 0.0); c(2.0, 0.0), c(4.0, 0.0)];
        let y = CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(
            solve_pointwise(&a, &y, 1e-10),
            Err(Error::RankDeficient { .. })
        ));
        let ls = least_squares(&a, &y, 1e-10);
        assert_eq!(ls.rank, 1);
        // minimum-norm solution lies in the row space (1, 2)/√5
        assert!((ls.solution[0] * 2.0 - ls.solution[1]).norm() < 1e-12);
    }

    #[test]
    fn singular_values_of_outer_product() {
        let u = CVector::from_vec(vec![c(1.0, 1.0), c(0.5, 0.0), c(0.0, -2.0)]);
        let v = CVector::from_vec(vec![c(0.3, 0.0), c(-1.0, 0.2)]);
        let m = &u * v.transpose();
        let s = singular_values(&m);
        assert!((s[0] - u.norm() * v.norm()).abs() < 1e-12);
        assert!(s[1] <= 1e-12 * s[0]);
    }
}
