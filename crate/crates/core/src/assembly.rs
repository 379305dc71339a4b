//! Finite element discretization on the straight reference rectangle.
//!
//! The shear `xi2 = x2 - kappa G(x1)` maps the wiggled segment onto the
//! rectangle `(0, L) x (0, pi)` and turns the Dirichlet form into
//!
//! ```text
//! a(u, u) = | d1 u - c(xi1) d2 u |^2 + | d2 u |^2,    c = kappa G'
//! ```
//!
//! with Dirichlet conditions on the horizontal boundary and natural
//! (Neumann) conditions at the vertical ends. Bilinear elements on a tensor
//! grid discretize this form directly, which keeps the pencil symmetric by
//! construction and preserves the lower bound: the discrete Rayleigh
//! quotient dominates `|d2 u|^2 / |u|^2 >= 1` exactly, quadrature included,
//! because the variable-coefficient square is a nonnegative sum.

use crate::error::{Error, Result};
use crate::geometry::WaveguideSpec;
use crate::linalg::SymBanded;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

/// Tensor-product node grid on `(0, L) x (0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    n1: usize,
    n2: usize,
    length: f64,
}

impl Grid {
    pub fn new(n1: usize, n2: usize, length: f64) -> Result<Self> {
        if n1 < 8 || n2 < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid {n1} x {n2} below the 8-node minimum"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("length {length} <= 0")));
        }
        Ok(Self { n1, n2, length })
    }

    /// Grid aligned to the cells of `spec` with `per_cell` elements per cell
    /// and close-to-square elements in the transverse direction.
    pub fn square_cells(spec: &WaveguideSpec, per_unit: usize) -> Result<Self> {
        let per_cell = ((spec.l() * per_unit as f64).ceil() as usize).max(7);
        let n1 = spec.n_cells() * per_cell + 1;
        let h1 = spec.l() / per_cell as f64;
        let n2 = ((PI / h1).round() as usize + 1).max(8);
        Grid::new(n1, n2, spec.length())
    }

    /// Uniform refinement (halves both mesh widths).
    pub fn refined(&self) -> Grid {
        Grid {
            n1: 2 * (self.n1 - 1) + 1,
            n2: 2 * (self.n2 - 1) + 1,
            length: self.length,
        }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h1(&self) -> f64 {
        self.length / (self.n1 - 1) as f64
    }

    pub fn h2(&self) -> f64 {
        PI / (self.n2 - 1) as f64
    }

    /// Number of unknowns (Dirichlet rows at xi2 in {0, pi} eliminated).
    pub fn ndof(&self) -> usize {
        self.n1 * (self.n2 - 2)
    }

    /// Nodes are numbered with the shorter grid direction contiguous, which
    /// minimizes the band profile of the assembled pencil.
    #[inline]
    fn x_fastest(&self) -> bool {
        self.n1 <= self.n2 - 2
    }

    /// Unknown index of interior node (i, j); requires 1 <= j <= n2 - 2.
    #[inline]
    pub fn dof(&self, i: usize, j: usize) -> usize {
        debug_assert!(j >= 1 && j + 1 < self.n2);
        if self.x_fastest() {
            (j - 1) * self.n1 + i
        } else {
            i * (self.n2 - 2) + (j - 1)
        }
    }

    /// Inverse of `dof`.
    pub fn node_of(&self, dof: usize) -> (usize, usize) {
        if self.x_fastest() {
            (dof % self.n1, dof / self.n1 + 1)
        } else {
            (dof / (self.n2 - 2), dof % (self.n2 - 2) + 1)
        }
    }

    pub fn bandwidth(&self) -> usize {
        if self.x_fastest() {
            self.n1 + 1
        } else {
            self.n2 - 1
        }
    }

    pub fn xi1(&self, i: usize) -> f64 {
        i as f64 * self.h1()
    }

    pub fn xi2(&self, j: usize) -> f64 {
        j as f64 * self.h2()
    }
}

/// Symmetric stiffness/mass pencil for one waveguide segment.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub k: SymBanded,
    pub m: SymBanded,
    pub grid: Grid,
    pub spec: WaveguideSpec,
}

impl DiscreteOperator {
    pub fn ndof(&self) -> usize {
        self.grid.ndof()
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon()
    }
}

const GAUSS2: [(f64, f64); 2] = [
    (0.21132486540518713, 0.5), // (1 - 1/sqrt(3)) / 2
    (0.7886751345948129, 0.5),
];

/// Assembles the stiffness/mass pencil of the transformed form.
///
/// The coefficient `kappa G'` is evaluated analytically at the 2x2 Gauss
/// points through the cell-local bump polynomial; mass and the constant
/// parts of the stiffness are integrated exactly by the same rule.
pub fn assemble(spec: &WaveguideSpec, grid: &Grid) -> Result<DiscreteOperator> {
    let n_cells = spec.n_cells();
    if (grid.n1() - 1) % n_cells != 0 {
        return Err(Error::GridAlignment(format!(
            "n1 - 1 = {} not divisible by N = {}",
            grid.n1() - 1,
            n_cells
        )));
    }
    let rel = (grid.length() - spec.length()).abs();
    if rel > 1e-12 * spec.length() {
        return Err(Error::GridAlignment(format!(
            "grid length {} does not match segment length {}",
            grid.length(),
            spec.length()
        )));
    }
    let per_cell = (grid.n1() - 1) / n_cells;
    let h1 = spec.l() / per_cell as f64;
    let h2 = grid.h2();
    let n1 = grid.n1();
    let n2 = grid.n2();
    let ndof = grid.ndof();
    let bw = grid.bandwidth();
    let mut k = SymBanded::zeros(ndof, bw);
    let mut m = SymBanded::zeros(ndof, bw);

    // reference shapes on the unit square, node order (0,0) (1,0) (0,1) (1,1)
    let shape = |a: usize, u: f64, v: f64| -> (f64, f64, f64) {
        match a {
            0 => ((1.0 - u) * (1.0 - v), -(1.0 - v), -(1.0 - u)),
            1 => (u * (1.0 - v), 1.0 - v, -u),
            2 => ((1.0 - u) * v, -v, 1.0 - u),
            _ => (u * v, v, u),
        }
    };

    let jac = h1 * h2;
    let mut ke = [[0.0f64; 4]; 4];
    let mut me = [[0.0f64; 4]; 4];
    for ie in 0..n1 - 1 {
        let cell = ie / per_cell;
        let iloc = ie % per_cell;
        for row in ke.iter_mut() {
            row.fill(0.0);
        }
        for row in me.iter_mut() {
            row.fill(0.0);
        }
        for (u, wu) in GAUSS2 {
            let t = (iloc as f64 + u) * h1;
            let c = spec.cell_profile(cell, t, 1);
            for (v, wv) in GAUSS2 {
                let w = wu * wv * jac;
                let mut vals = [(0.0, 0.0, 0.0); 4];
                for (a, slot) in vals.iter_mut().enumerate() {
                    let (phi, du, dv) = shape(a, u, v);
                    let d1 = du / h1;
                    let d2 = dv / h2;
                    *slot = (phi, d1 - c * d2, d2);
                }
                for a in 0..4 {
                    let (pa, ga, da) = vals[a];
                    for b in 0..=a {
                        let (pb, gb, db) = vals[b];
                        ke[a][b] += w * (ga * gb + da * db);
                        me[a][b] += w * (pa * pb);
                    }
                }
            }
        }
        // the element rows are identical for every je; only dof targets move
        for je in 0..n2 - 1 {
            let nodes = [
                (ie, je),
                (ie + 1, je),
                (ie, je + 1),
                (ie + 1, je + 1),
            ];
            for a in 0..4 {
                let (ia, ja) = nodes[a];
                if ja == 0 || ja == n2 - 1 {
                    continue;
                }
                let da = grid.dof(ia, ja);
                for b in 0..=a {
                    let (ib, jb) = nodes[b];
                    if jb == 0 || jb == n2 - 1 {
                        continue;
                    }
                    let db = grid.dof(ib, jb);
                    k.add(da, db, ke[a][b]);
                    m.add(da, db, me[a][b]);
                }
            }
        }
    }
    Ok(DiscreteOperator {
        k,
        m,
        grid: *grid,
        spec: spec.clone(),
    })
}

/// Assembles the Neumann sub-segment of `kcells` cells starting at cell `j0`.
///
/// The cuts introduce natural boundary conditions at the new vertical ends;
/// the coefficient is governed by the disorder entries of the selected cells
/// and is evaluated through the identical cell-local path as the full
/// segment, so a full-range segment reproduces `assemble` bit for bit.
pub fn assemble_segment(
    spec: &WaveguideSpec,
    grid: &Grid,
    j0: usize,
    kcells: usize,
) -> Result<DiscreteOperator> {
    let n_cells = spec.n_cells();
    if (grid.n1() - 1) % n_cells != 0 {
        return Err(Error::GridAlignment(format!(
            "n1 - 1 = {} not divisible by N = {}",
            grid.n1() - 1,
            n_cells
        )));
    }
    let sub = spec.segment(j0, kcells)?;
    let per_cell = (grid.n1() - 1) / n_cells;
    let sub_grid = Grid::new(per_cell * kcells + 1, grid.n2(), sub.length())?;
    assemble(&sub, &sub_grid)
}

/// Writes a symmetric banded matrix in MatrixMarket coordinate format
/// (lower triangle, 1-based indices).
pub fn write_matrix_market<W: Write>(mat: &SymBanded, out: &mut W) -> Result<()> {
    let trips = mat.lower_triplets();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", mat.n(), mat.n(), trips.len())?;
    for (i, j, v) in trips {
        writeln!(out, "{} {} {v:.17e}", i + 1, j + 1)?;
    }
    Ok(())
}
