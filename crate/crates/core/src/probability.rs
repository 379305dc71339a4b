//! Disorder sampling, exact tail bounds, and Monte Carlo estimates.
//!
//! Sampling is counter-based: every trial draws from a ChaCha stream keyed
//! by (seed, trial index), so serial and parallel runs agree bit for bit at
//! any worker count. Tail probabilities of the sample mean are available
//! both as the Hoeffding exponential bound (rate mean^2 / 2 for variables
//! in [0, 1] and the half-mean event) and as the exactly summed binomial
//! distribution function, which serves as its oracle.

use crate::assembly::{assemble, assemble_segment, Grid};
use crate::eigensolve::smallest_eigs;
use crate::error::{Error, Result};
use crate::geometry::{BumpFunction, Constants, Disorder, WaveguideSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

/// Single-site disorder distribution with support inside [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DistributionSpec {
    /// Mass `p` at `scale`, rest at zero.
    Bernoulli { p: f64, scale: f64 },
    /// Uniform on the unit interval.
    Uniform,
    /// Mass `p` at `a`, mass `1 - p` at `b`.
    TwoPoint { a: f64, b: f64, p: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = match self {
            Self::Bernoulli { p, scale } => in_unit(*p) && in_unit(*scale),
            Self::Uniform => true,
            Self::TwoPoint { a, b, p } => in_unit(*a) && in_unit(*b) && in_unit(*p),
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "distribution parameters outside [0, 1]: {self:?}"
            )));
        }
        if self.mean() <= 0.0 {
            return Err(Error::InvalidParameter(
                "distribution is a point mass at zero".into(),
            ));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Bernoulli { p, scale } => p * scale,
            Self::Uniform => 0.5,
            Self::TwoPoint { a, b, p } => p * a + (1.0 - p) * b,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::Bernoulli { p, scale } => {
                if rng.gen::<f64>() < *p {
                    *scale
                } else {
                    0.0
                }
            }
            Self::Uniform => rng.gen::<f64>(),
            Self::TwoPoint { a, b, p } => {
                if rng.gen::<f64>() < *p {
                    *a
                } else {
                    *b
                }
            }
        }
    }
}

/// Draws one disorder configuration from the (seed, stream) counter pair.
/// Identical arguments reproduce the identical vector on any run.
pub fn sample_config(
    mu: &DistributionSpec,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Disorder> {
    mu.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Disorder::new((0..n).map(|_| mu.draw(&mut rng)).collect())
}

/// Hoeffding rate for the event {sample mean <= mean / 2} of [0, 1]-valued
/// variables: c4 = mean^2 / 2.
pub fn hoeffding_c4(mu: &DistributionSpec) -> Result<f64> {
    mu.validate()?;
    let m = mu.mean();
    Ok(0.5 * m * m)
}

/// Natural log of P(S_n / n <= p/2) for S_n ~ Binomial(n, p), summed
/// stably in log space. Returns -inf for an empty event.
pub fn ldp_exact_tail_ln(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let k_max = (n as f64 * p / 2.0).floor() as i64;
    if p == 1.0 {
        // all mass at S_n = n > n/2
        return Ok(f64::NEG_INFINITY);
    }
    let q = 1.0 - p;
    let ratio = (p / q).ln();
    let mut ln_term = n as f64 * q.ln();
    // online log-sum-exp
    let mut m = ln_term;
    let mut acc = 1.0f64;
    for k in 0..k_max {
        let kf = k as f64;
        ln_term += ((n as f64 - kf) / (kf + 1.0)).ln() + ratio;
        if ln_term > m {
            acc = acc * (m - ln_term).exp() + 1.0;
            m = ln_term;
        } else {
            acc += (ln_term - m).exp();
        }
    }
    Ok((m + acc.ln()).min(0.0))
}

/// P(S_n / n <= p/2) as a plain probability (may underflow for large n;
/// use the log form for comparisons at scale).
pub fn ldp_exact_tail(p: f64, n: usize) -> Result<f64> {
    Ok(ldp_exact_tail_ln(p, n)?.exp())
}

/// Exact two-sided Clopper-Pearson interval at the given confidence.
pub fn clopper_pearson(successes: usize, trials: usize, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidParameter(format!(
            "invalid counts {successes}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let alpha = 1.0 - confidence;
    let (s, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(s, n - s + 1.0)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(s + 1.0, n - s)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((lo, hi))
}

/// Weak-disorder coupling window and initial scale for one segment length.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremParams {
    pub gamma: f64,
    pub n: f64,
    /// Lower endpoint 2 N^{1/gamma - 1/4} / (E sqrt(c2)).
    pub lower: f64,
    /// Upper endpoint c3 N^{-15/(2 gamma)}.
    pub upper: f64,
    pub non_empty: bool,
    /// Initial scale: smallest N making the window non-empty,
    /// N1 = (E c3 sqrt(c2) / 2)^{-4 gamma / (gamma - 34)}.
    pub n1: f64,
    pub n1_log10: f64,
    /// Hoeffding rate of the disorder distribution.
    pub c4: f64,
    /// The gamma = 35 style choice c3 N^{-1/4}; always below the upper
    /// endpoint for N >= 1.
    pub remark_kappa: f64,
    pub remark_below_upper: bool,
}

/// Evaluates the coupling window endpoints, the initial scale, and the
/// large-deviations rate. Requires gamma > 34.
pub fn theorem_interval(
    gamma: f64,
    n: f64,
    mu: &DistributionSpec,
    consts: &Constants,
) -> Result<TheoremParams> {
    if !(gamma > 34.0) {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} must exceed 34"
        )));
    }
    if !(n >= 1.0) {
        return Err(Error::InvalidParameter(format!("N = {n} must be >= 1")));
    }
    mu.validate()?;
    let mean = mu.mean();
    let lower = 2.0 * n.powf(1.0 / gamma - 0.25) / (mean * consts.c2.sqrt());
    let upper = consts.c3 * n.powf(-15.0 / (2.0 * gamma));
    // lower <= upper reduces to N^{(gamma - 34)/(4 gamma)} >= 1/R with
    // R = E c3 sqrt(c2) / 2
    let r = mean * consts.c3 * consts.c2.sqrt() / 2.0;
    let n1_log10 = if r >= 1.0 {
        0.0
    } else {
        -(4.0 * gamma / (gamma - 34.0)) * r.log10()
    };
    let remark_kappa = consts.c3 * n.powf(-0.25);
    Ok(TheoremParams {
        gamma,
        n,
        lower,
        upper,
        non_empty: lower <= upper,
        n1: 10f64.powf(n1_log10),
        n1_log10,
        c4: 0.5 * mean * mean,
        remark_kappa,
        remark_below_upper: remark_kappa <= upper,
    })
}

/// Outcome of a Monte Carlo estimate of P(lambda_1 - 1 <= t).
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityEstimate {
    pub event: String,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// lambda_1 - 1 per trial, in trial order.
    pub shifts: Vec<f64>,
}

/// Inputs of one Monte Carlo run.
#[derive(Debug, Clone)]
pub struct McConfig<'a> {
    pub bump: &'a BumpFunction,
    pub kappa: f64,
    pub n_cells: usize,
    pub mu: &'a DistributionSpec,
    /// Event threshold t for lambda_1 - 1 <= t.
    pub threshold: f64,
    pub trials: usize,
    pub seed: u64,
    pub grid: &'a Grid,
    pub workers: usize,
    pub solver_tol: f64,
}

fn mc_trial(cfg: &McConfig, trial: usize) -> Result<f64> {
    let omega = sample_config(cfg.mu, cfg.n_cells, cfg.seed, trial as u64)?;
    let spec = WaveguideSpec::new(cfg.bump.clone(), cfg.kappa, omega)?;
    let op = assemble(&spec, cfg.grid)?;
    let res = smallest_eigs(&op, 1, cfg.solver_tol)?;
    Ok(res.eigenvalues[0] - 1.0)
}

/// Estimates P(lambda_1 - 1 <= t) over independent disorder draws with an
/// exact 95% Clopper-Pearson interval. The chunked workers produce the
/// identical estimate at any worker count because each trial's stream
/// depends only on (seed, trial).
pub fn mc_low_eig_probability(cfg: &McConfig) -> Result<ProbabilityEstimate> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let workers = cfg.workers.max(1).min(cfg.trials);
    let mut shifts: Vec<f64> = vec![0.0; cfg.trials];
    if workers == 1 {
        for (trial, slot) in shifts.iter_mut().enumerate() {
            *slot = mc_trial(cfg, trial).map_err(|e| Error::McTrial {
                trial,
                source: Box::new(e),
            })?;
        }
    } else {
        let chunk = cfg.trials.div_ceil(workers);
        let results: Vec<Result<Vec<(usize, f64)>>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(cfg.trials);
                let cfg_ref = &*cfg;
                handles.push(scope.spawn(move || {
                    let mut out = Vec::with_capacity(hi.saturating_sub(lo));
                    for trial in lo..hi {
                        let v = mc_trial(cfg_ref, trial).map_err(|e| Error::McTrial {
                            trial,
                            source: Box::new(e),
                        })?;
                        out.push((trial, v));
                    }
                    Ok(out)
                }));
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for chunked in results {
            for (trial, v) in chunked? {
                shifts[trial] = v;
            }
        }
    }
    let successes = shifts.iter().filter(|&&s| s <= cfg.threshold).count();
    let (ci_low, ci_high) = clopper_pearson(successes, cfg.trials, 0.95)?;
    Ok(ProbabilityEstimate {
        event: format!("lambda1 - 1 <= {}", cfg.threshold),
        trials: cfg.trials,
        successes,
        p_hat: successes as f64 / cfg.trials as f64,
        ci_low,
        ci_high,
        seed: cfg.seed,
        shifts,
    })
}

/// Ground eigenvalues of the full segment against its Neumann pieces.
#[derive(Debug, Clone, Serialize)]
pub struct BracketingReport {
    pub lambda_full: f64,
    pub segment_lambdas: Vec<f64>,
    pub min_segment: f64,
    /// lambda_full - min_segment; the splitting only lowers the ground
    /// eigenvalue, so this is nonnegative up to solver tolerance.
    pub slack: f64,
    pub holds: bool,
}

/// Splits the segment into N / kcells pieces with Neumann cuts and checks
/// lambda(N) >= min_j lambda(kcells, j) - check_tol.
pub fn bracketing_check(
    spec: &WaveguideSpec,
    kcells: usize,
    grid: &Grid,
    solver_tol: f64,
    check_tol: f64,
) -> Result<BracketingReport> {
    let n = spec.n_cells();
    if kcells == 0 || n % kcells != 0 {
        return Err(Error::Precondition(format!(
            "kcells = {kcells} does not divide N = {n}"
        )));
    }
    let full = smallest_eigs(&assemble(spec, grid)?, 1, solver_tol)?;
    let lambda_full = full.eigenvalues[0];
    let mut segment_lambdas = Vec::new();
    for j in (0..n).step_by(kcells) {
        let op = assemble_segment(spec, grid, j, kcells)?;
        segment_lambdas.push(smallest_eigs(&op, 1, solver_tol)?.eigenvalues[0]);
    }
    let min_segment = segment_lambdas
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let slack = lambda_full - min_segment;
    Ok(BracketingReport {
        lambda_full,
        segment_lambdas,
        min_segment,
        slack,
        holds: slack >= -check_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BumpFamily;

    fn bump() -> BumpFunction {
        BumpFunction::make(BumpFamily::Polynomial, 1.0).unwrap()
    }

    #[test]
    fn point_mass_at_one_gives_all_ones() {
        let mu = DistributionSpec::TwoPoint {
            a: 1.0,
            b: 1.0,
            p: 0.5,
        };
        let d = sample_config(&mu, 6, 1, 0).unwrap();
        assert!(d.omega().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn sampling_is_deterministic_per_seed_and_stream() {
        let mu = DistributionSpec::Uniform;
        let a = sample_config(&mu, 16, 42, 3).unwrap();
        let b = sample_config(&mu, 16, 42, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_config(&mu, 16, 42, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_sample_mean_passes_clt_sanity() {
        let mu = DistributionSpec::Uniform;
        let n = 100_000;
        let d = sample_config(&mu, n, 7, 0).unwrap();
        let mean: f64 = d.omega().iter().sum::<f64>() / n as f64;
        let three_sigma = 3.0 / (12.0 * n as f64).sqrt();
        assert!((mean - 0.5).abs() < three_sigma, "mean {mean}");
    }

    #[test]
    fn hoeffding_rates() {
        let bern = DistributionSpec::Bernoulli { p: 0.5, scale: 1.0 };
        assert!((hoeffding_c4(&bern).unwrap() - 0.125).abs() < 1e-15);
        let ones = DistributionSpec::TwoPoint {
            a: 1.0,
            b: 1.0,
            p: 0.3,
        };
        assert!((hoeffding_c4(&ones).unwrap() - 0.5).abs() < 1e-15);
        let trivial = DistributionSpec::Bernoulli { p: 0.0, scale: 1.0 };
        assert!(hoeffding_c4(&trivial).is_err());
    }

    #[test]
    fn exact_tail_small_cases() {
        assert!((ldp_exact_tail(0.5, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((ldp_exact_tail(0.5, 2).unwrap() - 0.25).abs() < 1e-15);
        // n = 3, p = 0.5: P(S <= 0.75) = P(S = 0) = 1/8
        assert!((ldp_exact_tail(0.5, 3).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(ldp_exact_tail(1.0, 5).unwrap(), 0.0);
    }

    #[test]
    fn exact_tail_matches_big_integer_oracle() {
        use num_bigint::BigUint;
        use num_traits::cast::ToPrimitive;
        // p = 1/2, n = 100: sum_{k<=25} C(100,k) / 2^100
        let n = 100u32;
        let mut binom = BigUint::from(1u32);
        let mut acc = BigUint::from(0u32);
        for k in 0..=25u32 {
            if k > 0 {
                binom = binom * BigUint::from(n - k + 1) / BigUint::from(k);
            }
            acc += binom.clone();
        }
        let denom = BigUint::from(2u32).pow(100);
        let oracle = acc.to_f64().unwrap() / denom.to_f64().unwrap();
        let ours = ldp_exact_tail(0.5, 100).unwrap();
        assert!((ours - oracle).abs() <= 1e-12 * oracle, "{ours} vs {oracle}");

        // p = 1/5, n = 100: sum_{k<=10} C(100,k) 4^{100-k} / 5^100
        let mut binom = BigUint::from(1u32);
        let mut acc = BigUint::from(0u32);
        for k in 0..=10u32 {
            if k > 0 {
                binom = binom * BigUint::from(n - k + 1) / BigUint::from(k);
            }
            acc += binom.clone() * BigUint::from(4u32).pow(100 - k);
        }
        let denom = BigUint::from(5u32).pow(100);
        let oracle = acc.to_f64().unwrap() / denom.to_f64().unwrap();
        let ours = ldp_exact_tail(0.2, 100).unwrap();
        assert!((ours - oracle).abs() <= 1e-12 * oracle, "{ours} vs {oracle}");
    }

    #[test]
    fn exact_tail_dominated_by_hoeffding() {
        for p in [0.2, 0.5, 0.8] {
            let c4 = 0.5 * p * p;
            for n in 1..=500usize {
                let ln_tail = ldp_exact_tail_ln(p, n).unwrap();
                assert!(
                    ln_tail <= -c4 * n as f64 + 1e-9,
                    "p = {p}, n = {n}: ln tail {ln_tail}"
                );
            }
        }
    }

    #[test]
    fn clopper_pearson_contains_point_estimate() {
        for (s, n) in [(0usize, 20usize), (20, 20), (3, 20), (17, 20)] {
            let (lo, hi) = clopper_pearson(s, n, 0.95).unwrap();
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi, "({s},{n}): [{lo},{hi}] vs {p}");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
        // against the textbook 95% interval for 3/20 = 0.15
        let (lo, hi) = clopper_pearson(3, 20, 0.95).unwrap();
        assert!((lo - 0.0321).abs() < 5e-4, "lo {lo}");
        assert!((hi - 0.3789).abs() < 5e-4, "hi {hi}");
    }

    #[test]
    fn interval_rejects_gamma_at_the_boundary() {
        let consts = Constants::for_bump(&bump());
        let mu = DistributionSpec::Uniform;
        assert!(matches!(
            theorem_interval(34.0, 100.0, &mu, &consts),
            Err(Error::Precondition(_))
        ));
        assert!(theorem_interval(35.0, 100.0, &mu, &consts).is_ok());
    }

    #[test]
    fn remark_choice_stays_below_the_upper_endpoint() {
        let consts = Constants::for_bump(&bump());
        let mu = DistributionSpec::Uniform;
        for n in [1.0, 10.0, 1e4, 1e8] {
            let p = theorem_interval(35.0, n, &mu, &consts).unwrap();
            assert!(p.remark_below_upper, "N = {n}");
            assert!(p.remark_kappa <= p.upper);
        }
    }

    #[test]
    fn initial_scale_is_astronomical_for_realistic_constants() {
        let consts = Constants::for_bump(&bump());
        let mu = DistributionSpec::Uniform;
        let p = theorem_interval(35.0, 100.0, &mu, &consts).unwrap();
        assert!(!p.non_empty);
        assert!(p.n1_log10 > 100.0, "log10 N1 = {}", p.n1_log10);
        assert!(p.n1.is_infinite() || p.n1 > 1e100);
    }

    #[test]
    fn window_opens_exactly_at_the_initial_scale() {
        // synthetic constants bring N1 into reach of direct evaluation
        let consts = Constants {
            gprime_sq: 1.0,
            gtilde_sq: 1.0,
            c2: 4.0,
            c3: 0.4,
        };
        let mu = DistributionSpec::TwoPoint {
            a: 1.0,
            b: 1.0,
            p: 0.5,
        };
        let gamma = 40.0;
        let probe = theorem_interval(gamma, 2.0, &mu, &consts).unwrap();
        let n1 = probe.n1;
        assert!(n1.is_finite() && n1 > 1.0, "n1 = {n1}");
        let below = theorem_interval(gamma, n1 * 0.9, &mu, &consts).unwrap();
        let above = theorem_interval(gamma, n1 * 1.1, &mu, &consts).unwrap();
        assert!(!below.non_empty);
        assert!(above.non_empty);
        let at = theorem_interval(gamma, n1, &mu, &consts).unwrap();
        assert!(at.lower <= at.upper * (1.0 + 1e-9));
    }

    fn tiny_grid(spec: &WaveguideSpec) -> Grid {
        Grid::square_cells(spec, 8).unwrap()
    }

    #[test]
    fn mc_trivial_thresholds() {
        let b = bump();
        let mu = DistributionSpec::Uniform;
        let spec = WaveguideSpec::straight(b.clone(), 2);
        let grid = tiny_grid(&spec);
        let base = McConfig {
            bump: &b,
            kappa: 0.3,
            n_cells: 2,
            mu: &mu,
            threshold: -1.0,
            trials: 12,
            seed: 5,
            grid: &grid,
            workers: 1,
            solver_tol: 1e-9,
        };
        let zero = mc_low_eig_probability(&base).unwrap();
        assert_eq!(zero.successes, 0);
        assert_eq!(zero.p_hat, 0.0);
        let mut all = base.clone();
        all.threshold = 10.0;
        let one = mc_low_eig_probability(&all).unwrap();
        assert_eq!(one.successes, one.trials);
        assert_eq!(one.p_hat, 1.0);
    }

    #[test]
    fn mc_monotone_in_threshold_on_shared_samples() {
        let b = bump();
        let mu = DistributionSpec::Uniform;
        let spec = WaveguideSpec::straight(b.clone(), 2);
        let grid = tiny_grid(&spec);
        let mut counts = Vec::new();
        for t in [1e-4, 5e-4, 2e-3, 1e-2] {
            let cfg = McConfig {
                bump: &b,
                kappa: 0.3,
                n_cells: 2,
                mu: &mu,
                threshold: t,
                trials: 24,
                seed: 77,
                grid: &grid,
                workers: 1,
                solver_tol: 1e-9,
            };
            counts.push(mc_low_eig_probability(&cfg).unwrap().successes);
        }
        for w in counts.windows(2) {
            assert!(w[0] <= w[1], "counts {counts:?}");
        }
    }

    #[test]
    fn mc_worker_count_does_not_change_the_estimate() {
        let b = bump();
        let mu = DistributionSpec::Uniform;
        let spec = WaveguideSpec::straight(b.clone(), 2);
        let grid = tiny_grid(&spec);
        let run = |workers: usize| {
            let cfg = McConfig {
                bump: &b,
                kappa: 0.25,
                n_cells: 2,
                mu: &mu,
                threshold: 2e-3,
                trials: 17,
                seed: 99,
                grid: &grid,
                workers,
                solver_tol: 1e-9,
            };
            mc_low_eig_probability(&cfg).unwrap()
        };
        let serial = run(1);
        for workers in [2, 5, 8] {
            let par = run(workers);
            assert_eq!(serial.successes, par.successes);
            assert_eq!(serial.shifts, par.shifts);
        }
    }

    #[test]
    fn bracketing_trivial_cases() {
        let spec = WaveguideSpec::straight(bump(), 4);
        let grid = tiny_grid(&spec);
        let rep = bracketing_check(&spec, 2, &grid, 1e-10, 1e-8).unwrap();
        assert!(rep.holds);
        // straight guide: segment and full ground values coincide at the
        // shared transverse discretization
        assert!((rep.lambda_full - rep.min_segment).abs() < 1e-9);
        let full = bracketing_check(&spec, 4, &grid, 1e-10, 1e-8).unwrap();
        assert!((full.lambda_full - full.min_segment).abs() < 1e-12);
        assert!(bracketing_check(&spec, 3, &grid, 1e-10, 1e-8).is_err());
    }
}
