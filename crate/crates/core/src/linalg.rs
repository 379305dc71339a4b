//! Symmetric banded matrices, LDL^T factorization, and dense fallbacks.
//!
//! The discretized pencils (K, M) produced by assembly share a fixed band
//! envelope, so a simple lower-band row storage covers every solver need in
//! this crate: matrix-vector products, shifted factorizations K - sigma*M,
//! and triangular solves. Dense paths (used as test oracles and for small
//! Rayleigh-Ritz blocks) go through nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Symmetric matrix stored by its lower band.
///
/// Row `i` holds entries `A[i][j]` for `j in i-bw..=i` at
/// `data[i*(bw+1) + (bw - i + j)]`; slots with `j < 0` stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col <= row && row - col <= self.bw);
        row * (self.bw + 1) + self.bw - row + col
    }

    /// Adds `v` at the symmetric position (i, j).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(row, col);
        self.data[s] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        if row - col > self.bw {
            return 0.0;
        }
        self.data[self.slot(row, col)]
    }

    /// y = A x, exploiting symmetry.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let base = i * w + self.bw - i;
            let mut diag_acc = 0.0;
            for j in lo..i {
                let a = self.data[base + j];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            diag_acc += self.data[base + i] * x[i];
            y[i] += diag_acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        dot(x, &y)
    }

    /// Returns self - shift * other (both must share n and bandwidth).
    pub fn shifted(&self, shift: f64, other: &SymBanded) -> SymBanded {
        assert_eq!(self.n, other.n);
        assert_eq!(self.bw, other.bw);
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, m)| a - shift * m)
            .collect();
        SymBanded {
            n: self.n,
            bw: self.bw,
            data,
        }
    }

    /// LDL^T factorization without pivoting.
    ///
    /// Fine for the SPD systems this crate produces; also tolerates the
    /// mildly indefinite K - lambda*M cases (one well-separated negative
    /// direction) that arise for energies just above the spectral bottom.
    pub fn ldlt(&self) -> Result<BandedLdl> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let scale: f64 = (0..n)
            .map(|i| self.data[i * w + bw].abs())
            .fold(0.0, f64::max)
            .max(1.0);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                let mut s = l[i * w + bw - i + j];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i * w + bw - i + k] * d[k] * l[j * w + bw - j + k];
                }
                l[i * w + bw - i + j] = s / d[j];
            }
            let mut s = l[i * w + bw];
            for k in lo..i {
                let lik = l[i * w + bw - i + k];
                s -= lik * lik * d[k];
            }
            if s.abs() < 1e-300 * scale {
                return Err(Error::SingularFactorization(i));
            }
            d[i] = s;
        }
        Ok(BandedLdl { n, bw, l, d })
    }

    /// Expands to a dense matrix (oracle/test path).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let v = self.data[self.slot(i, j)];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    /// Symmetric lower-triangle entries as (row, col, value) with value != 0.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let v = self.data[self.slot(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// LDL^T factors of a symmetric banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLdl {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandedLdl {
    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        // forward: L z = b
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for k in lo..i {
                s -= self.l[i * w + bw - i + k] * b[k];
            }
            b[i] = s;
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        // backward: L^T x = w
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = b[i];
            for k in i + 1..=hi {
                s -= self.l[k * w + bw - k + i] * b[k];
            }
            b[i] = s;
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// M-inner product <x, y>_M.
pub fn m_dot(m: &SymBanded, x: &[f64], y: &[f64]) -> f64 {
    let mut my = vec![0.0; y.len()];
    m.mul_vec(y, &mut my);
    dot(x, &my)
}

pub fn m_norm(m: &SymBanded, x: &[f64]) -> f64 {
    m_dot(m, x, x).max(0.0).sqrt()
}

/// Solves the dense symmetric generalized problem K v = lambda M v.
///
/// Reduction through the Cholesky factor of M; eigenvalues ascending,
/// eigenvectors M-orthonormal. This is the oracle path for small grids.
pub fn dense_generalized_eigs(k: &SymBanded, m: &SymBanded) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let kd = k.to_dense();
    let md = m.to_dense();
    let chol = md
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("mass matrix is not positive definite".into()))?;
    let lmat = chol.l();
    let linv = lmat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularFactorization(0))?;
    let c = &linv * kd * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let n = k.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Vec::with_capacity(n);
    let lt_inv = linv.transpose();
    for &idx in &order {
        vals.push(eig.eigenvalues[idx]);
        let y = eig.eigenvectors.column(idx).into_owned();
        let v = &lt_inv * y;
        vecs.push(v.iter().copied().collect::<Vec<f64>>());
    }
    Ok((vals, vecs))
}

/// Small dense symmetric eigenproblem (ascending), for Rayleigh-Ritz blocks.
pub fn dense_sym_eigs(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let q = a.nrows();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(q, q);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Outcome of a power iteration.
#[derive(Debug, Clone, Copy)]
pub struct PowerOutcome {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration for the generalized symmetric pencil (A, M), where the
/// caller provides x -> M^{-1} A x through `apply`. Converges to the largest
/// |eigenvalue|; the Rayleigh quotient <x, Ax> / <x, x>_M is returned.
///
/// Stagnation of the Rayleigh quotient over three consecutive iterations
/// counts as convergence (relative change below `tol`).
pub fn power_iteration<F>(
    mut apply: F,
    m: &SymBanded,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> PowerOutcome
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = start.len();
    let mut x = start.to_vec();
    let nrm = m_norm(m, &x);
    assert!(nrm > 0.0, "power iteration started from the zero vector");
    x.iter_mut().for_each(|v| *v /= nrm);
    let mut y = vec![0.0; n];
    let mut rho_prev = f64::NAN;
    let mut flat = 0usize;
    for it in 1..=max_iter {
        apply(&x, &mut y);
        // rho = <x, Ax> / <x,x>_M with Ax = M y
        let rho = m_dot(m, &x, &y);
        let ny = m_norm(m, &y);
        if ny == 0.0 {
            return PowerOutcome {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if rho_prev.is_finite() {
            let change = (rho - rho_prev).abs();
            if change <= tol * rho.abs().max(f64::MIN_POSITIVE) {
                flat += 1;
                if flat >= 3 {
                    return PowerOutcome {
                        value: rho,
                        iterations: it,
                        converged: true,
                    };
                }
            } else {
                flat = 0;
            }
        }
        rho_prev = rho;
    }
    PowerOutcome {
        value: rho_prev,
        iterations: max_iter,
        converged: false,
    }
}
