//! Shared oracles for the integration tests. Everything here computes
//! expected values through routes independent of the production code paths
//! it checks: plain composite quadrature of the defining integrals and
//! dense matrix factorizations of small operators.

use nalgebra::DMatrix;
use wiggleguide_core::assembly::DiscreteOperator;
use wiggleguide_core::geometry::{BumpFamily, BumpFunction, Disorder, WaveguideSpec};

pub const GAUSS16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.027152459411754096),
    (-0.9445750230732326, 0.062253523938647894),
    (-0.8656312023878318, 0.09515851168249279),
    (-0.755404408355003, 0.12462897125553388),
    (-0.6178762444026438, 0.14959598881657674),
    (-0.45801677765722737, 0.16915651939500254),
    (-0.2816035507792589, 0.18260341504492358),
    (-0.09501250983763744, 0.1894506104550685),
    (0.09501250983763744, 0.1894506104550685),
    (0.2816035507792589, 0.18260341504492358),
    (0.45801677765722737, 0.16915651939500254),
    (0.6178762444026438, 0.14959598881657674),
    (0.755404408355003, 0.12462897125553388),
    (0.8656312023878318, 0.09515851168249279),
    (0.9445750230732326, 0.062253523938647894),
    (0.9894009349916499, 0.027152459411754096),
];

/// Composite 16-point Gauss-Legendre rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GAUSS16 {
            acc += w * 0.5 * h * f(mid + 0.5 * h * x);
        }
    }
    acc
}

pub fn poly_bump() -> BumpFunction {
    BumpFunction::make(BumpFamily::Polynomial, 1.0).unwrap()
}

pub fn spec_from(kappa: f64, omega: Vec<f64>) -> WaveguideSpec {
    WaveguideSpec::new(poly_bump(), kappa, Disorder::new(omega).unwrap()).unwrap()
}

/// Dense value of | chi_A (K - lambda M)^{-1} M chi_B | in the M geometry:
/// the largest singular value of R C R^{-1} with M = R^T R.
#[allow(dead_code)]
pub fn dense_block_norm(
    op: &DiscreteOperator,
    lambda: f64,
    mask_a: &[bool],
    mask_b: &[bool],
) -> f64 {
    let n = op.ndof();
    let kd = op.k.to_dense();
    let md = op.m.to_dense();
    let shifted = &kd - lambda * &md;
    let inv = shifted.try_inverse().expect("resolvent is singular");
    let mut c = &inv * &md;
    for col in 0..n {
        if !mask_b[col] {
            for row in 0..n {
                c[(row, col)] = 0.0;
            }
        }
    }
    for row in 0..n {
        if !mask_a[row] {
            for col in 0..n {
                c[(row, col)] = 0.0;
            }
        }
    }
    let chol = md.cholesky().expect("mass not SPD");
    let r = chol.l().transpose();
    let rinv = r.clone().try_inverse().expect("mass factor singular");
    let m_geo: DMatrix<f64> = &r * c * rinv;
    m_geo.svd(false, false).singular_values[0]
}

/// Independent 2-D quadrature of <Q psi0, psi0> from the definition of the
/// transformed perturbation: the integrand is assembled pointwise from the
/// unit-direction profile derivatives and the closed-form reference mode.
#[allow(dead_code)]
pub fn first_order_quadrature(spec: &WaveguideSpec) -> f64 {
    use std::f64::consts::PI;
    let big_l = spec.length();
    let eps = spec.epsilon();
    let scale = (2.0 / (PI * big_l)).sqrt();
    let bump = spec.bump();
    let l = spec.l();
    let mut acc = 0.0;
    for (cell, th) in spec.theta().iter().enumerate() {
        let x0 = cell as f64 * l;
        acc += integrate(
            |x1| {
                let t = x1 - x0;
                let gp = th * bump.deriv1(t);
                let gpp = th * bump.deriv2(t);
                integrate(
                    |xi2: f64| {
                        let psi = scale * xi2.sin();
                        let d2psi = scale * xi2.cos();
                        let d22psi = -scale * xi2.sin();
                        let d12psi = 0.0;
                        (-2.0 * gp * d12psi + eps * gp * gp * d22psi - gpp * d2psi) * psi
                    },
                    0.0,
                    PI,
                    24,
                )
            },
            x0,
            x0 + l,
            4,
        );
    }
    acc
}
