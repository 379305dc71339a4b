//! Bump profiles, disorder configurations, and waveguide specifications.
//!
//! A waveguide segment is described by a single-cell bump `g` on `[0, l]`
//! (twice differentiable, vanishing with two derivatives at both cell ends,
//! sup-normalized so that `max{|g|, |g'|, |g''|} = 1`), a coupling `kappa`,
//! and a disorder vector `omega` with entries in `[0, 1]`. The boundary
//! profile of the segment is `kappa * sum_k omega_k g(x1 - k l)`; the cell
//! supports are disjoint, so at most one summand is ever active.

use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Polynomial in the monomial basis; coefficient `k` multiplies `t^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub(crate) struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    /// Integral of self * other over [0, length].
    pub fn product_integral(&self, other: &Poly, length: f64) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                if *b == 0.0 {
                    continue;
                }
                let p = (i + j + 1) as f64;
                acc += a * b * length.powi((i + j + 1) as i32) / p;
            }
        }
        acc
    }

    /// Integral of self over [0, length].
    pub fn integral(&self, length: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| c * length.powi(k as i32 + 1) / (k as f64 + 1.0))
            .sum()
    }
}

/// Supremum of |f| over [a, b]: coarse scan plus ternary refinement around
/// every local maximum of the scan.
pub(crate) fn sup_abs<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, coarse: usize) -> f64 {
    let n = coarse.max(16);
    let h = (b - a) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * h).abs()).collect();
    let mut best = vals[0].max(vals[n]);
    for i in 1..n {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            // ternary search on the bracketing interval
            let mut lo = a + (i - 1) as f64 * h;
            let mut hi = a + (i + 1) as f64 * h;
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if f(m1).abs() < f(m2).abs() {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            best = best.max(f(0.5 * (lo + hi)).abs());
        }
    }
    best
}

/// Built-in analytic bump families on the cell `[0, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BumpFamily {
    /// `t^3 (l-t)^3` before normalization (default; mirror-symmetric).
    Polynomial,
    /// `t^4 (l-t)^4` before normalization (mirror-symmetric).
    Quartic,
    /// `t^3 (l-t)^4` before normalization (asymmetric).
    Skew,
}

impl BumpFamily {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "polynomial" => Ok(Self::Polynomial),
            "quartic" => Ok(Self::Quartic),
            "skew" => Ok(Self::Skew),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Polynomial => "polynomial",
            Self::Quartic => "quartic",
            Self::Skew => "skew",
        }
    }

    fn raw_poly(&self, l: f64) -> Poly {
        // (l - t)^p expanded via binomial coefficients, shifted by the t^q factor
        fn shifted(q: usize, p: usize, l: f64) -> Poly {
            let mut c = vec![0.0; q + p + 1];
            let mut binom = 1.0;
            for k in 0..=p {
                if k > 0 {
                    binom *= (p - k + 1) as f64 / k as f64;
                }
                c[q + k] = binom * (-1.0f64).powi(k as i32) * l.powi((p - k) as i32);
            }
            Poly(c)
        }
        match self {
            Self::Polynomial => shifted(3, 3, l),
            Self::Quartic => shifted(4, 4, l),
            Self::Skew => shifted(3, 4, l),
        }
    }
}

/// Evaluation path for the bump profile.
///
/// Family bumps evaluate through the factored form `amp t^q (l-t)^p`, which
/// vanishes (with two derivatives) exactly at both cell ends; custom
/// polynomials fall back to Horner evaluation of the monomial coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
enum BumpEval {
    Factored { amp: f64, q: i32, p: i32 },
    Monomial,
}

/// A normalized single-cell bump profile with closed-form derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct BumpFunction {
    family: BumpFamily,
    l: f64,
    norm_scale: f64,
    eval_path: BumpEval,
    poly: Poly,
    d1: Poly,
    d2: Poly,
    sups: [f64; 3],
}

impl BumpFunction {
    /// Builds a bump from one of the analytic families and normalizes it so
    /// the largest of the three sup norms equals one.
    pub fn make(family: BumpFamily, l: f64) -> Result<Self> {
        if !(l >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cell length l = {l} must be >= 1"
            )));
        }
        let (q, p) = match family {
            BumpFamily::Polynomial => (3, 3),
            BumpFamily::Quartic => (4, 4),
            BumpFamily::Skew => (3, 4),
        };
        let mut bump = Self::from_poly(family, family.raw_poly(l), l)?;
        bump.eval_path = BumpEval::Factored {
            amp: bump.norm_scale,
            q,
            p,
        };
        Ok(bump)
    }

    pub(crate) fn from_poly(family: BumpFamily, raw: Poly, l: f64) -> Result<Self> {
        let d1 = raw.derivative();
        let d2 = d1.derivative();
        let s0 = sup_abs(|t| raw.eval(t), 0.0, l, 10_000);
        let s1 = sup_abs(|t| d1.eval(t), 0.0, l, 10_000);
        let s2 = sup_abs(|t| d2.eval(t), 0.0, l, 10_000);
        let m = s0.max(s1).max(s2);
        if m <= 0.0 {
            return Err(Error::InvalidParameter("bump profile is identically zero".into()));
        }
        let norm_scale = 1.0 / m;
        let poly = raw.scale(norm_scale);
        let d1 = poly.derivative();
        let d2 = d1.derivative();
        Ok(Self {
            family,
            l,
            norm_scale,
            eval_path: BumpEval::Monomial,
            sups: [s0 * norm_scale, s1 * norm_scale, s2 * norm_scale],
            poly,
            d1,
            d2,
        })
    }

    pub fn family(&self) -> BumpFamily {
        self.family
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn norm_scale(&self) -> f64 {
        self.norm_scale
    }

    /// Post-normalization sup norms of (g, g', g''); their max is 1.
    pub fn sup_norms(&self) -> [f64; 3] {
        self.sups
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.eval_path {
            BumpEval::Factored { amp, q, p } => {
                amp * t.powi(q) * (self.l - t).powi(p)
            }
            BumpEval::Monomial => self.poly.eval(t),
        }
    }

    pub fn deriv1(&self, t: f64) -> f64 {
        match self.eval_path {
            BumpEval::Factored { amp, q, p } => {
                let s = self.l - t;
                amp * t.powi(q - 1) * s.powi(p - 1) * (q as f64 * s - p as f64 * t)
            }
            BumpEval::Monomial => self.d1.eval(t),
        }
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        match self.eval_path {
            BumpEval::Factored { amp, q, p } => {
                let s = self.l - t;
                let (qf, pf) = (q as f64, p as f64);
                let quad =
                    qf * (qf - 1.0) * s * s - 2.0 * qf * pf * t * s + pf * (pf - 1.0) * t * t;
                amp * t.powi(q - 2) * s.powi(p - 2) * quad
            }
            BumpEval::Monomial => self.d2.eval(t),
        }
    }

    /// Integral of g over the cell.
    pub fn integral(&self) -> f64 {
        self.poly.integral(self.l)
    }

    /// Squared L2 norm of g over the cell.
    pub fn l2_norm_sq(&self) -> f64 {
        self.poly.product_integral(&self.poly, self.l)
    }

    /// Squared L2 norm of g' over the cell.
    pub fn deriv_l2_norm_sq(&self) -> f64 {
        self.d1.product_integral(&self.d1, self.l)
    }

    /// Integral of `g(t) cos(a t + phase)` over the cell by composite Gauss
    /// quadrature with panels short enough to resolve the oscillation.
    pub fn cos_moment(&self, a: f64, phase: f64) -> f64 {
        let panels = (2.0 * (a * self.l).abs() / PI).ceil().max(2.0) as usize;
        let h = self.l / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in gauss8() {
                let t = mid + 0.5 * h * x;
                acc += w * 0.5 * h * self.poly.eval(t) * (a * t + phase).cos();
            }
        }
        acc
    }
}

/// 8-point Gauss-Legendre rule on [-1, 1].
fn gauss8() -> [(f64, f64); 8] {
    [
        (-0.9602898564975362, 0.10122853629037626),
        (-0.7966664774136267, 0.22238103445337448),
        (-0.5255324099163290, 0.31370664587788727),
        (-0.1834346424956498, 0.36268378337836200),
        (0.1834346424956498, 0.36268378337836200),
        (0.5255324099163290, 0.31370664587788727),
        (0.7966664774136267, 0.22238103445337448),
        (0.9602898564975362, 0.10122853629037626),
    ]
}

/// A finite disorder configuration with entries in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disorder {
    omega: Vec<f64>,
}

impl Disorder {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidParameter("disorder vector is empty".into()));
        }
        for (k, w) in omega.iter().enumerate() {
            if !(*w >= 0.0 && *w <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "omega[{k}] = {w} outside [0, 1]"
                )));
            }
        }
        Ok(Self { omega })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            omega: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// (l1, l2, l_inf) norms of the configuration.
    pub fn norms(&self) -> (f64, f64, f64) {
        let l1 = self.omega.iter().sum();
        let l2 = self.omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        let li = self.omega.iter().fold(0.0f64, |m, w| m.max(*w));
        (l1, l2, li)
    }
}

/// A finite waveguide segment: bump, coupling, disorder, and the derived
/// per-cell amplitudes rho_k = kappa * omega_k, the total strength
/// epsilon = kappa * |omega|_2, and the normalized direction theta.
#[derive(Debug, Clone, Serialize)]
pub struct WaveguideSpec {
    bump: BumpFunction,
    kappa: f64,
    disorder: Disorder,
    rho: Vec<f64>,
    epsilon: f64,
    theta: Vec<f64>,
}

impl WaveguideSpec {
    pub fn new(bump: BumpFunction, kappa: f64, disorder: Disorder) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa = {kappa} must be >= 0"
            )));
        }
        let rho: Vec<f64> = disorder.omega().iter().map(|w| kappa * w).collect();
        let (_, l2, _) = disorder.norms();
        let epsilon = kappa * l2;
        let theta = if epsilon > 0.0 {
            rho.iter().map(|r| r / epsilon).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            bump,
            kappa,
            disorder,
            rho,
            epsilon,
            theta,
        })
    }

    pub fn straight(bump: BumpFunction, n_cells: usize) -> Self {
        Self::new(bump, 0.0, Disorder::zeros(n_cells)).expect("straight spec is always valid")
    }

    pub fn bump(&self) -> &BumpFunction {
        &self.bump
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn disorder(&self) -> &Disorder {
        &self.disorder
    }

    pub fn n_cells(&self) -> usize {
        self.disorder.n()
    }

    pub fn l(&self) -> f64 {
        self.bump.l()
    }

    /// Segment length L = N l.
    pub fn length(&self) -> f64 {
        self.disorder.n() as f64 * self.bump.l()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Unit direction theta = rho / epsilon; empty when epsilon = 0.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Spec for the sub-segment of `kcells` cells starting at cell `j0`,
    /// carrying the corresponding slice of the disorder.
    pub fn segment(&self, j0: usize, kcells: usize) -> Result<WaveguideSpec> {
        if kcells == 0 || j0 + kcells > self.n_cells() {
            return Err(Error::InvalidParameter(format!(
                "segment [{j0}, {}) outside 0..{}",
                j0 + kcells,
                self.n_cells()
            )));
        }
        let omega = self.disorder.omega()[j0..j0 + kcells].to_vec();
        WaveguideSpec::new(self.bump.clone(), self.kappa, Disorder::new(omega)?)
    }

    #[inline]
    fn cell_of(&self, x1: f64) -> (usize, f64) {
        let l = self.bump.l();
        let mut k = (x1 / l).floor() as isize;
        if k < 0 {
            k = 0;
        }
        let kmax = self.n_cells() as isize - 1;
        if k > kmax {
            k = kmax;
        }
        (k as usize, x1 - k as f64 * l)
    }

    fn profile_checked(&self, x1: f64, deriv: usize) -> Result<f64> {
        if !(x1 >= 0.0 && x1 <= self.length()) {
            return Err(Error::InvalidParameter(format!(
                "x1 = {x1} outside [0, {}]",
                self.length()
            )));
        }
        let (k, t) = self.cell_of(x1);
        Ok(self.cell_profile(k, t, deriv))
    }

    /// Boundary profile kappa * G(x1, omega); only the owning cell's bump
    /// contributes because the supports are disjoint.
    pub fn profile_eval(&self, x1: f64) -> Result<f64> {
        self.profile_checked(x1, 0)
    }

    pub fn profile_deriv1(&self, x1: f64) -> Result<f64> {
        self.profile_checked(x1, 1)
    }

    pub fn profile_deriv2(&self, x1: f64) -> Result<f64> {
        self.profile_checked(x1, 2)
    }

    /// Profile (or derivative) at cell-local coordinate `t` inside cell `k`.
    /// This is the evaluation path shared by assembly and `profile_eval`,
    /// which keeps full-segment and sub-segment coefficients bit-identical.
    #[inline]
    pub fn cell_profile(&self, k: usize, t: f64, deriv: usize) -> f64 {
        let g = match deriv {
            0 => self.bump.eval(t),
            1 => self.bump.deriv1(t),
            2 => self.bump.deriv2(t),
            _ => panic!("derivative order {deriv} not available"),
        };
        self.rho[k] * g
    }
}

/// Scalar quantities derived from the bump profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Constants {
    /// |g'|^2 over the cell.
    pub gprime_sq: f64,
    /// |g - mean(g)|^2 over the cell.
    pub gtilde_sq: f64,
    /// (3/2) gtilde_sq / l^3.
    pub c2: f64,
    /// (3/5000) gtilde_sq / l^7.
    pub c3: f64,
}

impl Constants {
    pub fn for_bump(g: &BumpFunction) -> Self {
        let l = g.l();
        let gnorm_sq = g.l2_norm_sq();
        let mean_part = g.integral().powi(2) / l;
        let gtilde_sq = gnorm_sq - mean_part;
        Constants {
            gprime_sq: g.deriv_l2_norm_sq(),
            gtilde_sq,
            c2: 1.5 * gtilde_sq / l.powi(3),
            c3: (3.0 / 5000.0) * gtilde_sq / l.powi(7),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_bump() -> BumpFunction {
        BumpFunction::make(BumpFamily::Polynomial, 1.0).unwrap()
    }

    #[test]
    fn bump_vanishes_with_two_derivatives_at_cell_ends() {
        for fam in [BumpFamily::Polynomial, BumpFamily::Quartic, BumpFamily::Skew] {
            for l in [1.0, 1.5, 3.0] {
                let g = BumpFunction::make(fam, l).unwrap();
                for t in [0.0, l] {
                    assert_eq!(g.eval(t), 0.0);
                    assert_eq!(g.deriv1(t), 0.0);
                    assert_eq!(g.deriv2(t), 0.0);
                }
            }
        }
    }

    #[test]
    fn normalization_drives_max_sup_norm_to_one() {
        for fam in [BumpFamily::Polynomial, BumpFamily::Quartic, BumpFamily::Skew] {
            for l in [1.0, 2.0] {
                let g = BumpFunction::make(fam, l).unwrap();
                let m = g.sup_norms().iter().fold(0.0f64, |a, b| a.max(*b));
                assert!((m - 1.0).abs() < 1e-12, "{fam:?} l={l}: max sup {m}");
            }
        }
    }

    #[test]
    fn polynomial_bump_norm_scale_is_eight_thirds() {
        // raw t^3(1-t)^3 on [0,1]: the dominant sup norm is |g''|(1/2) = 3/8
        let g = poly_bump();
        assert!((g.norm_scale() - 8.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_integrals_match_rationals() {
        // normalized g = (8/3) t^3 (1-t)^3 on [0,1]:
        //   integral g        = 2/105
        //   |g|_{L2}^2        = 16/27027
        //   |g'|_{L2}^2       = 32/3465
        let g = poly_bump();
        assert!((g.integral() - 2.0 / 105.0).abs() < 1e-14);
        assert!((g.l2_norm_sq() - 16.0 / 27027.0).abs() < 1e-14);
        assert!((g.deriv_l2_norm_sq() - 32.0 / 3465.0).abs() < 1e-13);
    }

    #[test]
    fn constants_ratio_is_fixed_by_the_two_definitions() {
        for l in [1.0f64, 2.0] {
            let g = BumpFunction::make(BumpFamily::Polynomial, l).unwrap();
            let c = Constants::for_bump(&g);
            let ratio = c.c3 / c.c2;
            assert!(
                (ratio - 1.0 / (2500.0 * l.powi(4))).abs() < 1e-18,
                "l={l}: ratio {ratio}"
            );
            assert!(c.c2 > 0.0 && c.c3 > 0.0);
        }
    }

    #[test]
    fn gtilde_bounded_by_l2_norm_and_cell_length() {
        for fam in [BumpFamily::Polynomial, BumpFamily::Quartic, BumpFamily::Skew] {
            let g = BumpFunction::make(fam, 1.0).unwrap();
            let c = Constants::for_bump(&g);
            assert!(c.gtilde_sq >= 0.0);
            assert!(c.gtilde_sq <= g.l2_norm_sq());
            assert!(g.l2_norm_sq() <= g.l());
        }
    }

    #[test]
    fn zero_mean_profile_keeps_full_l2_mass() {
        // t^3 (1-t)^3 (1-2t) integrates to zero by antisymmetry about 1/2
        let raw = Poly(vec![0.0, 0.0, 0.0, 1.0, -5.0, 9.0, -7.0, 2.0]);
        assert!(raw.integral(1.0).abs() < 1e-18);
        let g = BumpFunction::from_poly(BumpFamily::Polynomial, raw, 1.0).unwrap();
        let c = Constants::for_bump(&g);
        assert!((c.gtilde_sq - g.l2_norm_sq()).abs() < 1e-18);
    }

    #[test]
    fn unknown_family_and_short_cell_are_rejected() {
        assert!(matches!(
            BumpFamily::parse("gaussian"),
            Err(Error::UnknownFamily(_))
        ));
        assert!(BumpFunction::make(BumpFamily::Polynomial, 0.5).is_err());
    }

    #[test]
    fn disorder_norms_on_reference_vectors() {
        let z = Disorder::zeros(5);
        assert_eq!(z.norms(), (0.0, 0.0, 0.0));
        let ones = Disorder::new(vec![1.0; 4]).unwrap();
        let (l1, l2, li) = ones.norms();
        assert_eq!(l1, 4.0);
        assert_eq!(l2, 2.0);
        assert_eq!(li, 1.0);
        assert!(Disorder::new(vec![0.2, 1.4]).is_err());
        assert!(Disorder::new(vec![-0.1]).is_err());
    }

    #[test]
    fn l1_bounded_by_sqrt_n_times_l2_on_random_configurations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..40);
            let omega: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let d = Disorder::new(omega).unwrap();
            let (l1, l2, _) = d.norms();
            assert!(l1 <= (n as f64).sqrt() * l2 + 1e-12);
        }
    }

    #[test]
    fn profile_of_straight_guide_vanishes() {
        let spec = WaveguideSpec::straight(poly_bump(), 3);
        for i in 0..=30 {
            let x = 3.0 * i as f64 / 30.0;
            assert_eq!(spec.profile_eval(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_cell_profile_is_one_term() {
        let g = poly_bump();
        let spec = WaveguideSpec::new(
            g.clone(),
            0.7,
            Disorder::new(vec![0.4]).unwrap(),
        )
        .unwrap();
        let x = 0.3;
        assert_eq!(spec.profile_eval(x).unwrap(), 0.7 * 0.4 * g.eval(x));
        assert!(spec.profile_eval(1.2).is_err());
        assert!(spec.profile_eval(-0.1).is_err());
    }

    #[test]
    fn scaling_identity_is_bitwise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let g = poly_bump();
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let omega: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let kappa: f64 = rng.gen::<f64>() * 0.9;
            let a = WaveguideSpec::new(g.clone(), kappa, Disorder::new(omega.clone()).unwrap())
                .unwrap();
            let scaled: Vec<f64> = omega.iter().map(|w| kappa * w).collect();
            let b =
                WaveguideSpec::new(g.clone(), 1.0, Disorder::new(scaled).unwrap()).unwrap();
            for i in 0..=64 {
                let x = a.length() * i as f64 / 64.0;
                assert_eq!(
                    a.profile_eval(x).unwrap().to_bits(),
                    b.profile_eval(x).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn support_disjointness_against_full_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let g = poly_bump();
        let omega: Vec<f64> = (0..5).map(|_| rng.gen::<f64>()).collect();
        let spec = WaveguideSpec::new(g.clone(), 0.3, Disorder::new(omega).unwrap()).unwrap();
        for i in 0..=500 {
            let x = 5.0 * i as f64 / 500.0;
            let full: f64 = (0..5)
                .map(|k| {
                    let t = x - k as f64;
                    if (0.0..=1.0).contains(&t) {
                        spec.rho()[k] * g.eval(t)
                    } else {
                        0.0
                    }
                })
                .sum();
            let one = spec.profile_eval(x).unwrap();
            assert!((full - one).abs() <= 1e-15 * full.abs().max(1.0));
        }
    }

    #[test]
    fn theta_normalization_is_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(19);
        let g = poly_bump();
        for _ in 0..100 {
            let n = rng.gen_range(1..8);
            let omega: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let kappa = 0.01 + rng.gen::<f64>();
            let spec =
                WaveguideSpec::new(g.clone(), kappa, Disorder::new(omega).unwrap()).unwrap();
            if spec.epsilon() == 0.0 {
                continue;
            }
            let sum_sq: f64 = spec.theta().iter().map(|t| t * t).sum();
            assert!((sum_sq - 1.0).abs() < 1e-12);
            // rebuild from theta as disorder with kappa = epsilon
            let again = WaveguideSpec::new(
                g.clone(),
                spec.epsilon(),
                Disorder::new(spec.theta().to_vec()).unwrap(),
            )
            .unwrap();
            for (a, b) in spec.theta().iter().zip(again.theta()) {
                assert!((a - b).abs() < 1e-14);
            }
            assert!((again.epsilon() - spec.epsilon()).abs() < 1e-14 * spec.epsilon());
        }
    }

    #[test]
    fn cos_moment_matches_plain_quadrature() {
        let g = poly_bump();
        for (a, phase) in [(0.5, 0.0), (3.0, 1.0), (40.0, 0.3), (200.0, 2.0)] {
            let fine: f64 = {
                let n = 200_000;
                let h = 1.0 / n as f64;
                (0..n)
                    .map(|i| {
                        let t = (i as f64 + 0.5) * h;
                        h * g.eval(t) * (a * t + phase).cos()
                    })
                    .sum()
            };
            let got = g.cos_moment(a, phase);
            assert!(
                (got - fine).abs() < 1e-9,
                "a={a} phase={phase}: {got} vs {fine}"
            );
        }
    }
}
