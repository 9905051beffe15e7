//! Complex banded matrices and their LU factorization with partial
//! pivoting. One factorization solves with both `M` and `M^H`.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, stored
/// by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<C>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![C::new(0.0, 0.0); n * (kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        if i >= self.n || j >= self.n || !self.in_band(i, j) {
            return C::new(0.0, 0.0);
        }
        self.data[i * (self.kl + self.ku + 1) + j + self.kl - i]
    }

    /// Sets an entry. Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: C) {
        assert!(i < self.n && j < self.n && self.in_band(i, j), "entry ({i}, {j}) outside band");
        let w = self.kl + self.ku + 1;
        self.data[i * w + j + self.kl - i] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        let mut y = vec![C::new(0.0, 0.0); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            for j in j0..=j1 {
                *yi += self.get(i, j) * x[j];
            }
        }
        y
    }

    /// Dense copy, mainly for small problems and tests.
    pub fn to_dense(&self) -> nalgebra::DMatrix<C> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn lu(&self) -> Result<BandedLu> {
        BandedLu::factor(self)
    }

    /// Exact Hermitian symmetry of the stored entries.
    pub fn is_hermitian(&self) -> bool {
        self.kl == self.ku
            && (0..self.n).all(|i| {
                self.get(i, i).im == 0.0 && (i + 1..(i + self.ku + 1).min(self.n)).all(|j| self.get(i, j) == self.get(j, i).conj())
            })
    }

    /// Number of eigenvalues below `shift` of a Hermitian matrix, by
    /// Sylvester's law of inertia applied to `LDLᴴ` of `M - shift·I`
    /// (no pivoting, so the band does not fill).
    pub fn eigenvalues_below(&self, shift: f64) -> usize {
        let k = self.ku;
        let w = 2 * k + 1;
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(shift.abs()).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        // row-major working band for the upper triangle: a[i][j - i], 0 ≤ j - i ≤ k
        let mut a: Vec<C> = (0..self.n)
            .flat_map(|i| (0..=k).map(move |d| (i, d)))
            .map(|(i, d)| self.data[i * w + d + k])
            .collect();
        let mut count = 0;
        for i in 0..self.n {
            let mut d = a[i * (k + 1)].re - shift;
            if d.abs() < tiny {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
            let last = (i + k).min(self.n - 1);
            for r in i + 1..=last {
                let l = a[i * (k + 1) + r - i].conj() / d;
                for c in r..=last {
                    let u = a[i * (k + 1) + c - i];
                    a[r * (k + 1) + c - r] -= l * u;
                }
            }
        }
        count
    }
}

/// LU factors of a banded matrix, LAPACK `gbtrf` style: `U` has
/// bandwidth `kl + ku`, multipliers of `L` stored below the diagonal.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    // row i holds columns i - kl ..= i + kl + ku
    data: Vec<C>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn factor(m: &BandedMatrix) -> Result<Self> {
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            width,
            data: vec![C::new(0.0, 0.0); n * width],
            pivots: vec![0; n],
        };
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + ku).min(n.saturating_sub(1));
            for j in j0..=j1 {
                let k = lu.idx(i, j);
                lu.data[k] = m.get(i, j);
            }
        }
        let reach = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = lu.data[lu.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.pivots[k] = p;
            if best == 0.0 {
                return Err(Error::Singular);
            }
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = lu.idx(k, j);
                    let b = lu.idx(p, j);
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l == C::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = lu.data[lu.idx(k, j)];
                    let ij = lu.idx(i, j);
                    lu.data[ij] -= l * kj;
                }
            }
        }
        Ok(lu)
    }

    /// Solves `M x = b` in place.
    pub fn solve(&self, b: &mut [C]) {
        let (n, kl) = (self.n, self.kl);
        let reach = self.width - 1 - kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
    }

    /// Solves `M^H x = b` in place.
    pub fn solve_adjoint(&self, b: &mut [C]) {
        let (n, kl) = (self.n, self.kl);
        let reach = self.width - 1 - kl;
        for k in 0..n {
            let mut s = b[k];
            for j in k.saturating_sub(reach)..k {
                s -= self.data[self.idx(j, k)].conj() * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)].conj();
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                s -= self.data[self.idx(i, k)].conj() * b[i];
            }
            b[k] = s;
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }
}
