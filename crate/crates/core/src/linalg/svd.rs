//! Smallest singular value of a banded complex matrix.
//!
//! Small matrices go through a dense SVD. Larger ones run Lanczos with
//! full reorthogonalization on `K = M⁻¹M⁻ᴴ`, whose largest eigenvalue is
//! `1/σ_min²`; every application of `K` is two banded triangular sweeps.
//! Hermitian matrices skip Lanczos: `σ_min = min |λᵢ|`, located by
//! inertia bisection, which is immune to clustered spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaMinOptions {
    /// Matrices up to this size use the dense SVD.
    pub dense_max: usize,
    /// Krylov subspace dimension before an explicit restart.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Ritz residual relative to the Ritz value.
    pub rel_tol: f64,
}

impl Default for SigmaMinOptions {
    fn default() -> Self {
        Self {
            dense_max: 256,
            krylov_dim: 24,
            max_restarts: 30,
            rel_tol: 1e-10,
        }
    }
}

pub fn dense_smallest_singular_value(m: &DMatrix<C>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn smallest_singular_value(m: &BandedMatrix) -> Result<f64> {
    smallest_singular_value_with(m, &SigmaMinOptions::default())
}

pub fn smallest_singular_value_with(m: &BandedMatrix, opts: &SigmaMinOptions) -> Result<f64> {
    if m.dim() <= opts.dense_max {
        return Ok(dense_smallest_singular_value(&m.to_dense()));
    }
    if m.is_hermitian() {
        return Ok(hermitian_min_abs_eigenvalue(m));
    }
    let lu = match m.lu() {
        Ok(lu) => lu,
        Err(Error::Singular) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let theta = lanczos_top_eigenvalue(&lu, m.dim(), opts)?;
    Ok(1.0 / theta.sqrt())
}

const STAGNATION: f64 = 1e-14;
const MAX_BASIS: usize = 96;
const MAX_BASIS_BYTES: usize = 1 << 28;

/// Number of eigenvalues in `[-t, t)`.
fn eigenvalues_within(m: &BandedMatrix, t: f64) -> usize {
    m.eigenvalues_below(t) - m.eigenvalues_below(-t)
}

fn hermitian_min_abs_eigenvalue(m: &BandedMatrix) -> f64 {
    let n = m.dim();
    let k = m.upper_bandwidth();
    // Gershgorin bound on the spectral radius
    let mut hi = (0..n)
        .map(|i| (i.saturating_sub(k)..(i + k + 1).min(n)).map(|j| m.get(i, j).norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * (1.0 + 1e-12);
    if hi == 0.0 {
        return 0.0;
    }
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return 0.0;
        }
        if eigenvalues_within(m, lo) == 0 {
            break;
        }
        hi = lo;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if eigenvalues_within(m, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn apply_k(lu: &BandedLu, v: &[C]) -> Vec<C> {
    let mut w = v.to_vec();
    lu.solve_adjoint(&mut w);
    lu.solve(&mut w);
    w
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn start_vector(n: usize) -> Vec<C> {
    // fixed linear congruential sequence so results are reproducible
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut next = move || {
        state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    let mut v: Vec<C> = (0..n).map(|_| C::new(next(), next())).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn lanczos_top_eigenvalue(lu: &BandedLu, n: usize, opts: &SigmaMinOptions) -> Result<f64> {
    // clustered spectra need a larger basis; grow it on each restart
    // within a fixed memory budget
    let cap = (MAX_BASIS_BYTES / (16 * n)).clamp(opts.krylov_dim, MAX_BASIS);
    let mut m = opts.krylov_dim.max(2).min(n);
    let mut v0 = start_vector(n);
    let mut iterations = 0;
    for restart in 0..=opts.max_restarts {
        if restart > 0 {
            m = (2 * m).min(cap).min(n);
        }
        let mut basis: Vec<Vec<C>> = Vec::with_capacity(m + 1);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(v0.clone());
        let mut best = (0.0, Vec::new());
        let mut previous = f64::NAN;
        for j in 0..m {
            iterations += 1;
            let mut w = apply_k(lu, &basis[j]);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            let (theta, s) = top_ritz_pair(&alpha, &beta);
            let residual = b * s[j].abs();
            best = (theta, s);
            if residual <= opts.rel_tol * theta || b <= f64::EPSILON * theta {
                return Ok(theta);
            }
            // A cluster at the top keeps the Ritz vector from converging
            // while the Ritz value already has.
            if (theta - previous).abs() <= STAGNATION * theta && residual <= opts.rel_tol.sqrt() * theta {
                return Ok(theta);
            }
            previous = theta;
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let (_, s) = best;
        let mut y = vec![C::new(0.0, 0.0); n];
        for (coef, q) in s.iter().zip(&basis) {
            y.iter_mut().zip(q).for_each(|(x, v)| *x += *coef * v);
        }
        let ny = norm(&y);
        y.iter_mut().for_each(|x| *x /= ny);
        v0 = y;
    }
    Err(Error::NoConvergence { iterations })
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`.
fn top_ritz_pair(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty tridiagonal");
    (theta, eig.eigenvectors.column(idx).iter().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_rank_deficient() {
        let m = DMatrix::from_row_slice(2, 2, &[C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]);
        assert_eq!(dense_smallest_singular_value(&m), 0.0);
    }

    #[test]
    fn hermitian_path_matches_dense() {
        let n = 300;
        let mut m = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            m.set(i, i, C::new((i as f64 * 0.37).sin() * 3.0, 0.0));
            for d in 1..=2 {
                if i + d < n {
                    let z = C::new(0.3 / d as f64, 0.2 * (i as f64).cos());
                    m.set(i, i + d, z);
                    m.set(i + d, i, z.conj());
                }
            }
        }
        assert!(m.is_hermitian());
        let dense = dense_smallest_singular_value(&m.to_dense());
        let s = hermitian_min_abs_eigenvalue(&m);
        assert!((s / dense - 1.0).abs() < 1e-10, "{s} vs {dense}");
    }

    #[test]
    fn diagonal_matrix() {
        let mut m = BandedMatrix::zeros(500, 1, 1);
        for i in 0..500 {
            m.set(i, i, C::new(0.0, 1.0 + i as f64));
        }
        let s = smallest_singular_value(&m).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn laplacian_matches_closed_form() {
        let n = 1000;
        let mut m = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, C::new(2.0, 0.0));
            if i + 1 < n {
                m.set(i, i + 1, C::new(-1.0, 0.0));
                m.set(i + 1, i, C::new(-1.0, 0.0));
            }
        }
        let s = smallest_singular_value(&m).unwrap();
        let exact = 4.0 * (std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin().powi(2);
        assert!((s / exact - 1.0).abs() < 1e-9, "{s} vs {exact}");
    }
}
