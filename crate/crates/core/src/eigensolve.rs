//! Lowest eigenpairs of the discrete pencil and resolvent machinery.
//!
//! The pencil never has spectrum below one, so a fixed shift of 0.9 keeps
//! K - sigma M positive definite for every admissible configuration and one
//! LDL^T factorization drives the whole subspace iteration. Resolvents at
//! energies separated from the computed Ritz values reuse the same banded
//! factorization path.

use crate::assembly::{DiscreteOperator, Grid};
use crate::error::{Error, Result};
use crate::linalg::{
    dense_generalized_eigs, dense_sym_eigs, dot, m_dot, m_norm, norm2, power_iteration,
    BandedLdl, PowerOutcome, SymBanded,
};
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::PI;

/// Eigenpairs of the discrete pencil, ascending, M-orthonormal.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub grid: Grid,
    pub iterations: usize,
}

impl SpectralResult {
    /// Distance from `lambda` to the computed Ritz values.
    pub fn gap_at(&self, lambda: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| (e - lambda).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

const SHIFT: f64 = 0.9;
const MAX_SUBSPACE_ITER: usize = 500;

fn start_block(op: &DiscreteOperator, q: usize) -> Vec<Vec<f64>> {
    let grid = &op.grid;
    let big_l = grid.length();
    let mut modes: Vec<(f64, usize, usize)> = Vec::new();
    for m in 1..=q + 2 {
        for n in 0..=q + 2 {
            let ev = (m * m) as f64 + (PI * n as f64 / big_l).powi(2);
            modes.push((ev, m, n));
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut block = Vec::with_capacity(q);
    for &(_, m, n) in modes.iter().take(q) {
        let mut v = vec![0.0; grid.ndof()];
        for i in 0..grid.n1() {
            let c = (PI * n as f64 * grid.xi1(i) / big_l).cos();
            for j in 1..grid.n2() - 1 {
                v[grid.dof(i, j)] = c * (m as f64 * grid.xi2(j)).sin();
            }
        }
        block.push(v);
    }
    block
}

fn m_orthonormalize(m: &SymBanded, block: &mut [Vec<f64>]) -> Result<()> {
    let n = m.n();
    let mut mv = vec![0.0; n];
    for i in 0..block.len() {
        for _pass in 0..2 {
            for j in 0..i {
                m.mul_vec(&block[j], &mut mv);
                let c = dot(&block[i], &mv);
                let (head, tail) = block.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(head[j].iter()) {
                    *x -= c * y;
                }
            }
            let nrm = m_norm(m, &block[i]);
            if nrm < 1e-200 {
                return Err(Error::InvalidParameter(
                    "degenerate start block in subspace iteration".into(),
                ));
            }
            block[i].iter_mut().for_each(|x| *x /= nrm);
        }
    }
    Ok(())
}

/// Computes the `k` smallest eigenpairs of `K v = lambda M v` by
/// shift-invert subspace iteration with deterministic start vectors.
pub fn smallest_eigs(op: &DiscreteOperator, k: usize, tol: f64) -> Result<SpectralResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} must be > 0")));
    }
    let n = op.ndof();
    let q = (k + 4).min(n);
    if q < k {
        return Err(Error::InvalidParameter(format!(
            "requested {k} pairs from a {n}-dof operator"
        )));
    }
    let factor = op.k.shifted(SHIFT, &op.m).ldlt()?;
    let mut block = start_block(op, q);
    m_orthonormalize(&op.m, &mut block)?;

    let mut vals = vec![0.0; q];
    let mut worst = f64::INFINITY;
    let mut mv = vec![0.0; n];
    for iter in 1..=MAX_SUBSPACE_ITER {
        // Y = (K - sigma M)^{-1} M X
        for col in block.iter_mut() {
            op.m.mul_vec(col, &mut mv);
            factor.solve_in_place(&mut mv);
            col.copy_from_slice(&mv);
        }
        m_orthonormalize(&op.m, &mut block)?;
        // Rayleigh-Ritz in the subspace
        let mut h = DMatrix::zeros(q, q);
        let mut kcols: Vec<Vec<f64>> = Vec::with_capacity(q);
        for col in block.iter() {
            let mut kc = vec![0.0; n];
            op.k.mul_vec(col, &mut kc);
            kcols.push(kc);
        }
        for a in 0..q {
            for b in 0..=a {
                let v = dot(&block[a], &kcols[b]);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let (ritz, vmat) = dense_sym_eigs(&h);
        let mut rotated: Vec<Vec<f64>> = vec![vec![0.0; n]; q];
        for (c, target) in rotated.iter_mut().enumerate() {
            for r in 0..q {
                let w = vmat[(r, c)];
                if w != 0.0 {
                    for (t, s) in target.iter_mut().zip(block[r].iter()) {
                        *t += w * s;
                    }
                }
            }
        }
        block = rotated;
        vals.copy_from_slice(&ritz);

        // residuals of the k requested pairs
        worst = 0.0;
        for i in 0..k {
            let mut kv = vec![0.0; n];
            op.k.mul_vec(&block[i], &mut kv);
            op.m.mul_vec(&block[i], &mut mv);
            for (r, mi) in kv.iter_mut().zip(mv.iter()) {
                *r -= vals[i] * mi;
            }
            let res = norm2(&kv) / norm2(&mv);
            worst = worst.max(res);
        }
        if worst <= tol {
            let mut residuals = Vec::with_capacity(k);
            for i in 0..k {
                let mut kv = vec![0.0; n];
                op.k.mul_vec(&block[i], &mut kv);
                op.m.mul_vec(&block[i], &mut mv);
                for (r, mi) in kv.iter_mut().zip(mv.iter()) {
                    *r -= vals[i] * mi;
                }
                residuals.push(norm2(&kv) / norm2(&mv));
            }
            return Ok(SpectralResult {
                eigenvalues: vals[..k].to_vec(),
                eigenvectors: block.into_iter().take(k).collect(),
                residuals,
                grid: op.grid,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_SUBSPACE_ITER,
        residual: worst,
    })
}

/// O(h^2)-eliminated estimate from values on grids h and h/2.
pub fn richardson(lam_h: f64, lam_h2: f64) -> f64 {
    (4.0 * lam_h2 - lam_h) / 3.0
}

/// The straight-guide ground mode sqrt(2/(pi L)) sin(xi2) sampled on the grid.
pub fn reference_mode(grid: &Grid) -> Vec<f64> {
    let scale = (2.0 / (PI * grid.length())).sqrt();
    let mut v = vec![0.0; grid.ndof()];
    for i in 0..grid.n1() {
        for j in 1..grid.n2() - 1 {
            v[grid.dof(i, j)] = scale * grid.xi2(j).sin();
        }
    }
    v
}

/// Factorized resolvent (K - lambda M)^{-1} M at a fixed energy.
pub struct ResolventSolver<'a> {
    op: &'a DiscreteOperator,
    factor: BandedLdl,
    pub lambda: f64,
    pub gap: f64,
}

impl<'a> ResolventSolver<'a> {
    /// Requires `lambda` to keep at least `required_gap` distance from every
    /// computed Ritz value.
    pub fn new(
        op: &'a DiscreteOperator,
        spectrum: &SpectralResult,
        lambda: f64,
        required_gap: f64,
    ) -> Result<Self> {
        let gap = spectrum.gap_at(lambda);
        if gap <= required_gap {
            return Err(Error::LambdaInSpectrum {
                lambda,
                distance: gap,
                required: required_gap,
            });
        }
        let factor = op.k.shifted(lambda, &op.m).ldlt()?;
        Ok(Self {
            op,
            factor,
            lambda,
            gap,
        })
    }

    /// u = (K - lambda M)^{-1} M f.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; f.len()];
        self.op.m.mul_vec(f, &mut b);
        self.factor.solve_in_place(&mut b);
        b
    }
}

/// Solves (K - lambda M) u = M f with a spectral-distance guard.
pub fn solve_resolvent(
    op: &DiscreteOperator,
    spectrum: &SpectralResult,
    lambda: f64,
    f: &[f64],
    required_gap: f64,
) -> Result<Vec<f64>> {
    Ok(ResolventSolver::new(op, spectrum, lambda, required_gap)?.apply(f))
}

/// Estimate of a restricted resolvent norm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockNorm {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Measures | chi_A (H - lambda)^{-1} chi_B | in the M geometry by power
/// iteration on the composition restrict-to-B, resolve, restrict-to-A.
/// Start vector: the indicator of B, M-normalized.
pub fn block_resolvent_norm(
    op: &DiscreteOperator,
    spectrum: &SpectralResult,
    lambda: f64,
    mask_a: &[bool],
    mask_b: &[bool],
    tol: f64,
) -> Result<BlockNorm> {
    let n = op.ndof();
    if mask_a.len() != n || mask_b.len() != n {
        return Err(Error::InvalidParameter("mask length mismatch".into()));
    }
    if !mask_b.iter().any(|&b| b) || !mask_a.iter().any(|&a| a) {
        return Err(Error::InvalidParameter("empty strip mask".into()));
    }
    let rs = ResolventSolver::new(op, spectrum, lambda, 0.0)?;
    let mass = op.m.ldlt()?;
    let restrict = |mask: &[bool], v: &mut [f64]| {
        for (x, keep) in v.iter_mut().zip(mask) {
            if !keep {
                *x = 0.0;
            }
        }
    };
    let apply_c = |x: &[f64]| -> Vec<f64> {
        let mut z = x.to_vec();
        restrict(mask_b, &mut z);
        let mut u = rs.apply(&z);
        restrict(mask_a, &mut u);
        u
    };
    let apply_ct_m = |y: &[f64]| -> Vec<f64> {
        // C^T M y with C^T = chi_B M (K - lambda M)^{-1} chi_A
        let mut z = vec![0.0; n];
        op.m.mul_vec(y, &mut z);
        restrict(mask_a, &mut z);
        let mut u = rs.factor.solve(&z);
        let mut w = vec![0.0; n];
        op.m.mul_vec(&u, &mut w);
        restrict(mask_b, &mut w);
        u.copy_from_slice(&w);
        u
    };
    let start: Vec<f64> = mask_b.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let outcome: PowerOutcome = power_iteration(
        |x, out| {
            let cx = apply_c(x);
            let az = apply_ct_m(&cx);
            let sol = mass.solve(&az);
            out.copy_from_slice(&sol);
        },
        &op.m,
        &start,
        tol,
        500,
    );
    Ok(BlockNorm {
        value: outcome.value.max(0.0).sqrt(),
        iterations: outcome.iterations,
        converged: outcome.converged,
    })
}

/// Reduced resolvent of the straight-guide operator with the ground mode
/// projected out; bounded and self-adjoint on the ball |lambda - 1| <
/// pi^2 / (2 L^2).
pub struct ModifiedResolvent<'a> {
    op: &'a DiscreteOperator,
    ground: Vec<f64>,
    factor: BandedLdl,
    pub lambda: f64,
}

impl<'a> ModifiedResolvent<'a> {
    pub fn ball_radius(big_l: f64) -> f64 {
        PI * PI / (2.0 * big_l * big_l)
    }

    pub fn new(op: &'a DiscreteOperator, ground: &[f64], lambda: f64) -> Result<Self> {
        if op.epsilon() != 0.0 {
            return Err(Error::InvalidParameter(
                "modified resolvent requires the straight-guide operator".into(),
            ));
        }
        let radius = Self::ball_radius(op.grid.length());
        if !((lambda - 1.0).abs() < radius) {
            return Err(Error::OutsideBall { lambda, radius });
        }
        let mut g = ground.to_vec();
        let nrm = m_norm(&op.m, &g);
        if !(nrm > 0.0) {
            return Err(Error::InvalidParameter("zero ground vector".into()));
        }
        g.iter_mut().for_each(|x| *x /= nrm);
        let factor = op.k.shifted(lambda, &op.m).ldlt()?;
        Ok(Self {
            op,
            ground: g,
            factor,
            lambda,
        })
    }

    fn project_out_ground(&self, v: &mut [f64]) {
        let c = m_dot(&self.op.m, v, &self.ground);
        for (x, g) in v.iter_mut().zip(&self.ground) {
            *x -= c * g;
        }
    }

    /// R0(lambda) f: deflated solve on the orthogonal complement of the
    /// ground mode.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut fhat = f.to_vec();
        self.project_out_ground(&mut fhat);
        let mut b = vec![0.0; f.len()];
        self.op.m.mul_vec(&fhat, &mut b);
        self.factor.solve_in_place(&mut b);
        self.project_out_ground(&mut b);
        b
    }
}

/// One-shot R0(lambda) f given the solved ground mode.
pub fn modified_resolvent_apply(
    op0: &DiscreteOperator,
    ground: &SpectralResult,
    lambda: f64,
    f: &[f64],
) -> Result<Vec<f64>> {
    Ok(ModifiedResolvent::new(op0, &ground.eigenvectors[0], lambda)?.apply(f))
}

/// Nodal finite-difference operator with explicit transpose.
struct NodalOp {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl NodalOp {
    fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                cols[c].push((r, v));
            }
        }
        Self { rows, cols }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(c, v)| v * x[c]).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        for (yi, col) in y.iter_mut().zip(&self.cols) {
            *yi = col.iter().map(|&(r, v)| v * x[r]).sum();
        }
    }
}

/// i-offset with Neumann reflection at the vertical ends.
fn reflect(i: isize, n1: usize) -> usize {
    let last = (n1 - 1) as isize;
    let r = if i < 0 { -i } else if i > last { 2 * last - i } else { i };
    r as usize
}

fn build_d11(grid: &Grid) -> NodalOp {
    let n = grid.ndof();
    let h1 = grid.h1();
    let s = 1.0 / (h1 * h1);
    let mut rows = vec![Vec::new(); n];
    for d in 0..n {
        let (i, j) = grid.node_of(d);
        let im = reflect(i as isize - 1, grid.n1());
        let ip = reflect(i as isize + 1, grid.n1());
        let row = &mut rows[d];
        push_coeff(row, grid.dof(ip, j), s);
        push_coeff(row, grid.dof(i, j), -2.0 * s);
        push_coeff(row, grid.dof(im, j), s);
    }
    NodalOp::from_rows(n, rows)
}

fn build_d21(grid: &Grid) -> NodalOp {
    let n = grid.ndof();
    let s = 1.0 / (4.0 * grid.h1() * grid.h2());
    let mut rows = vec![Vec::new(); n];
    for d in 0..n {
        let (i, j) = grid.node_of(d);
        let im = reflect(i as isize - 1, grid.n1());
        let ip = reflect(i as isize + 1, grid.n1());
        let row = &mut rows[d];
        // values at j-1 / j+1 vanish on the Dirichlet rows
        if j + 2 < grid.n2() {
            push_coeff(row, grid.dof(ip, j + 1), s);
            push_coeff(row, grid.dof(im, j + 1), -s);
        }
        if j >= 2 {
            push_coeff(row, grid.dof(ip, j - 1), -s);
            push_coeff(row, grid.dof(im, j - 1), s);
        }
    }
    NodalOp::from_rows(n, rows)
}

fn build_d22(grid: &Grid) -> NodalOp {
    let n = grid.ndof();
    let h2 = grid.h2();
    let s = 1.0 / (h2 * h2);
    let mut rows = vec![Vec::new(); n];
    for d in 0..n {
        let (i, j) = grid.node_of(d);
        let row = &mut rows[d];
        push_coeff(row, grid.dof(i, j), -2.0 * s);
        if j + 2 < grid.n2() {
            push_coeff(row, grid.dof(i, j + 1), s);
        }
        if j >= 2 {
            push_coeff(row, grid.dof(i, j - 1), s);
        }
    }
    NodalOp::from_rows(n, rows)
}

fn push_coeff(row: &mut Vec<(usize, f64)>, col: usize, v: f64) {
    if let Some(slot) = row.iter_mut().find(|(c, _)| *c == col) {
        slot.1 += v;
    } else {
        row.push((col, v));
    }
}

/// Deterministic dense start vector with overlap on every symmetry sector.
/// An all-ones start would be orthogonal to the antisymmetric longitudinal
/// modes that dominate the reduced resolvent.
fn seeded_start(n: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
    (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
}

/// Discrete operator-norm estimates for the reduced resolvent.
#[derive(Debug, Clone, Serialize)]
pub struct NormCheckReport {
    pub lambda: f64,
    pub big_l: f64,
    /// |R0|, |grad R0|, |grad d1 R0|, |d2^2 R0| in the M geometry.
    pub estimates: [f64; 4],
    /// 2, 7, 25, 47 times L^2/pi^2.
    pub bounds: [f64; 4],
    pub within: [bool; 4],
    pub iterations: [usize; 4],
}

impl NormCheckReport {
    pub fn all_within(&self) -> bool {
        self.within.iter().all(|&b| b)
    }
}

/// Estimates four operator norms of the reduced resolvent by power
/// iteration and compares each against its closed-form bound. The gradient
/// norm uses the exact element stiffness; the second-derivative norms use
/// nodal difference stencils (Neumann reflection at the vertical ends).
pub fn lemma_norm_check(op0: &DiscreteOperator, lambda: f64, tol: f64) -> Result<NormCheckReport> {
    let ground = smallest_eigs(op0, 1, 1e-11)?;
    let r0 = ModifiedResolvent::new(op0, &ground.eigenvectors[0], lambda)?;
    let n = op0.ndof();
    let mass = op0.m.ldlt()?;
    let grid = &op0.grid;
    let big_l = grid.length();
    let start = seeded_start(n);
    let max_iter = 2000;

    // |R0|: R0 is M-self-adjoint and positive on the real ball below the
    // first excited level, so the Rayleigh quotient converges to the norm.
    let p0 = power_iteration(
        |x, out| out.copy_from_slice(&r0.apply(x)),
        &op0.m,
        &start,
        tol,
        max_iter,
    );

    // |grad R0|^2: pencil (R0^T K0 R0, M); K0 is the eps = 0 stiffness.
    let p1 = power_iteration(
        |x, out| {
            let y = r0.apply(x);
            let mut ky = vec![0.0; n];
            op0.k.mul_vec(&y, &mut ky);
            let z = mass.solve(&ky);
            out.copy_from_slice(&r0.apply(&z));
        },
        &op0.m,
        &start,
        tol,
        max_iter,
    );

    let d11 = build_d11(grid);
    let d21 = build_d21(grid);
    let d22 = build_d22(grid);
    let second_norm_sq = |ops: &[&NodalOp]| -> PowerOutcome {
        power_iteration(
            |x, out| {
                let y = r0.apply(x);
                let mut acc = vec![0.0; n];
                let mut dy = vec![0.0; n];
                let mut mdy = vec![0.0; n];
                let mut back = vec![0.0; n];
                for opd in ops {
                    opd.apply(&y, &mut dy);
                    op0.m.mul_vec(&dy, &mut mdy);
                    opd.apply_transpose(&mdy, &mut back);
                    for (a, b) in acc.iter_mut().zip(&back) {
                        *a += b;
                    }
                }
                let z = mass.solve(&acc);
                out.copy_from_slice(&r0.apply(&z));
            },
            &op0.m,
            &start,
            tol,
            max_iter,
        )
    };
    let p2 = second_norm_sq(&[&d11, &d21]);
    let p3 = second_norm_sq(&[&d22]);

    let scale = big_l * big_l / (PI * PI);
    let bounds = [2.0 * scale, 7.0 * scale, 25.0 * scale, 47.0 * scale];
    let estimates = [
        p0.value.abs(),
        p1.value.max(0.0).sqrt(),
        p2.value.max(0.0).sqrt(),
        p3.value.max(0.0).sqrt(),
    ];
    let within = [
        estimates[0] <= bounds[0],
        estimates[1] <= bounds[1],
        estimates[2] <= bounds[2],
        estimates[3] <= bounds[3],
    ];
    Ok(NormCheckReport {
        lambda,
        big_l,
        estimates,
        bounds,
        within,
        iterations: [p0.iterations, p1.iterations, p2.iterations, p3.iterations],
    })
}

/// Dense oracle path: full spectrum of the pencil for small grids.
pub fn dense_spectrum(op: &DiscreteOperator) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if op.ndof() > 4096 {
        return Err(Error::InvalidParameter(format!(
            "dense fallback limited to 4096 unknowns, got {}",
            op.ndof()
        )));
    }
    dense_generalized_eigs(&op.k, &op.m)
}
