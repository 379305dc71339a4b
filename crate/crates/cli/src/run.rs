//! Subcommand execution and artifact emission.
//!
//! Every run writes a JSON detail file named by the config hash and, for
//! the tabular subcommands, appends one row per result to a CSV ledger in
//! the output directory. Artifacts carry no timestamps, so identical
//! configs reproduce identical bytes.

use crate::config::{CtParams, EigParams, LoadedConfig};
use crate::svg;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use wiggleguide_core::assembly::{assemble, write_matrix_market};
use wiggleguide_core::eigensolve::{richardson, smallest_eigs};
use wiggleguide_core::geometry::Constants;
use wiggleguide_core::greens::ct_measure;
use wiggleguide_core::perturbation::{
    deterministic_bound, fourier_coefficients, first_order_term, predicted_shift,
    second_order_coefficient,
};
use wiggleguide_core::probability::{
    bracketing_check, mc_low_eig_probability, theorem_interval, McConfig,
};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(wiggleguide_core::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<wiggleguide_core::Error> for CliError {
    fn from(e: wiggleguide_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 1: invalid config or inputs; 2: solver failure; 3: precondition.
    pub fn exit_code(&self) -> i32 {
        fn core_code(e: &wiggleguide_core::Error) -> i32 {
            use wiggleguide_core::Error as E;
            match e {
                E::NonConvergence { .. } | E::SingularFactorization(_) => 2,
                E::Precondition(_) | E::OutsideBall { .. } | E::LambdaInSpectrum { .. } => 3,
                E::McTrial { source, .. } => core_code(source),
                _ => 1,
            }
        }
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) => core_code(e),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => {
                use wiggleguide_core::Error as E;
                match e {
                    E::NonConvergence { .. } => "non_convergence",
                    E::SingularFactorization(_) => "singular_factorization",
                    E::Precondition(_) => "precondition",
                    E::OutsideBall { .. } => "outside_ball",
                    E::LambdaInSpectrum { .. } => "lambda_in_spectrum",
                    E::McTrial { .. } => "mc_trial",
                    _ => "invalid_input",
                }
            }
        }
    }
}

pub struct RunContext {
    pub loaded: LoadedConfig,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub workers_override: Option<usize>,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    std::fs::write(&path, body + "\n")
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn append_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
    let path = dir.join(name);
    let fresh = !path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    if fresh {
        writeln!(file, "{header}").map_err(|e| CliError::Config(e.to_string()))?;
    }
    for row in rows {
        writeln!(file, "{row}").map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn write_svg(dir: &Path, name: &str, body: String) -> Result<(), CliError> {
    std::fs::write(dir.join(name), body)
        .map_err(|e| CliError::Config(format!("cannot write svg: {e}")))
}

pub fn run_eig(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let params = cfg.eig.clone().unwrap_or(EigParams {
        k: 2,
        richardson: true,
        mm_dump: false,
    });
    let spec = cfg.build_spec()?;
    let grid = cfg.build_grid(&spec)?;
    let op = assemble(&spec, &grid)?;
    let res = smallest_eigs(&op, params.k, cfg.solver_tol)?;
    let mut extrapolated = Vec::new();
    let mut refined_vals = Vec::new();
    if params.richardson {
        let fine = cfg.build_grid(&spec)?.refined();
        let res2 = smallest_eigs(&assemble(&spec, &fine)?, params.k, cfg.solver_tol)?;
        for i in 0..params.k {
            extrapolated.push(richardson(res.eigenvalues[i], res2.eigenvalues[i]));
        }
        refined_vals = res2.eigenvalues.clone();
    }
    if params.mm_dump {
        let mut fk = std::fs::File::create(ctx.out_dir.join(format!("k_{hash}.mtx")))
            .map_err(wiggleguide_core::Error::from)?;
        write_matrix_market(&op.k, &mut fk)?;
        let mut fm = std::fs::File::create(ctx.out_dir.join(format!("m_{hash}.mtx")))
            .map_err(wiggleguide_core::Error::from)?;
        write_matrix_market(&op.m, &mut fm)?;
    }
    let worst_residual = res.residuals.iter().cloned().fold(0.0f64, f64::max);
    let detail = json!({
        "config_hash": hash,
        "seed": cfg.seed,
        "n_cells": spec.n_cells(),
        "kappa": spec.kappa(),
        "epsilon": spec.epsilon(),
        "grid": { "n1": grid.n1(), "n2": grid.n2(), "length": grid.length() },
        "eigenvalues": res.eigenvalues,
        "residuals": res.residuals,
        "iterations": res.iterations,
        "refined_eigenvalues": refined_vals,
        "extrapolated": extrapolated,
    });
    write_json(&ctx.out_dir, &format!("eig_{hash}.json"), &detail)?;
    let lambda2 = if params.k >= 2 {
        format!("{}", res.eigenvalues[1])
    } else {
        String::new()
    };
    append_csv(
        &ctx.out_dir,
        "eig.csv",
        "config_hash,n_cells,kappa,seed,grid,lambda1,lambda2,residual",
        &[format!(
            "{hash},{},{},{},{}x{},{},{lambda2},{}",
            spec.n_cells(),
            spec.kappa(),
            cfg.seed,
            grid.n1(),
            grid.n2(),
            res.eigenvalues[0],
            worst_residual
        )],
    )?;
    if ctx.svg {
        let pts: Vec<(f64, f64)> = res
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, v)| (i as f64 + 1.0, *v))
            .collect();
        write_svg(
            &ctx.out_dir,
            &format!("eig_{hash}.svg"),
            svg::line_plot("lowest eigenvalues", "index", "lambda", &[("lambda_i", pts)]),
        )?;
    }
    println!(
        "eig[{hash}]: lambda1 = {:.12}, residual = {:.2e}",
        res.eigenvalues[0], worst_residual
    );
    Ok(())
}

pub fn run_series(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let spec = cfg.build_spec()?;
    let p = cfg.series.clone().unwrap_or(crate::config::SeriesParams {
        n_max: None,
        m_max: None,
    });
    let n_max = p.n_max.unwrap_or(512 * spec.n_cells());
    let m_max = p.m_max.unwrap_or(256);
    let series = fourier_coefficients(&spec, n_max)?;
    let coeff = second_order_coefficient(&series, spec.length(), m_max)?;
    let shift = predicted_shift(&spec, n_max, m_max)?;
    let head: Vec<f64> = series.gn.iter().take(16).cloned().collect();
    let detail = json!({
        "config_hash": hash,
        "seed": cfg.seed,
        "epsilon": spec.epsilon(),
        "n_max": n_max,
        "m_max": m_max,
        "g0": series.g0,
        "gn_head": head,
        "parseval_sum": series.parseval_sum(),
        "offset_norm_sq": series.offset_norm_sq,
        "parseval_tail_bound": series.tail_bound,
        "s": coeff.s,
        "m_tail": coeff.m_tail,
        "n_tail": coeff.n_tail,
        "reduced_precision": coeff.reduced_precision,
        "first_order_term": first_order_term(&spec),
        "predicted_shift": shift.value,
    });
    write_json(&ctx.out_dir, &format!("series_{hash}.json"), &detail)?;
    println!(
        "series[{hash}]: S = {:.12e} (tail {:.2e}), predicted shift = {:.6e}",
        coeff.s, coeff.tail, shift.value
    );
    Ok(())
}

pub fn run_bound(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let spec = cfg.build_spec()?;
    let p = cfg.series.clone().unwrap_or(crate::config::SeriesParams {
        n_max: None,
        m_max: None,
    });
    let n_max = p.n_max.unwrap_or(512 * spec.n_cells());
    let m_max = p.m_max.unwrap_or(256);
    let mut report = deterministic_bound(&spec, n_max, m_max)?;
    if cfg.eig.is_some() {
        let grid = cfg.build_grid(&spec)?;
        let res = smallest_eigs(&assemble(&spec, &grid)?, 1, cfg.solver_tol)?;
        report.numeric_lambda = Some(res.eigenvalues[0]);
    }
    let detail = json!({
        "config_hash": hash,
        "seed": cfg.seed,
        "report": report,
    });
    write_json(&ctx.out_dir, &format!("bound_{hash}.json"), &detail)?;
    println!(
        "bound[{hash}]: premise_ok = {}, lower = {:.6e}, shift = {:.6e}",
        report.premise_ok, report.lower_bound, report.predicted_shift
    );
    Ok(())
}

pub fn run_mc(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let params = cfg
        .mc
        .as_ref()
        .ok_or_else(|| CliError::Config("mc section missing".into()))?;
    let bump = cfg.bump()?;
    let kappa = cfg.resolve_kappa(&bump)?;
    let mu = cfg.mu();
    let spec_for_grid =
        wiggleguide_core::geometry::WaveguideSpec::straight(bump.clone(), cfg.n_cells);
    let grid = cfg.build_grid(&spec_for_grid)?;
    let workers = ctx.workers_override.unwrap_or(cfg.workers);
    let mc_cfg = McConfig {
        bump: &bump,
        kappa,
        n_cells: cfg.n_cells,
        mu: &mu,
        threshold: params.t,
        trials: params.trials,
        seed: cfg.seed,
        grid: &grid,
        workers,
        solver_tol: cfg.solver_tol,
    };
    let est = mc_low_eig_probability(&mc_cfg)?;
    let detail = json!({
        "config_hash": hash,
        "workers": workers,
        "kappa": kappa,
        "grid": { "n1": grid.n1(), "n2": grid.n2() },
        "estimate": est,
    });
    write_json(&ctx.out_dir, &format!("mc_{hash}.json"), &detail)?;
    append_csv(
        &ctx.out_dir,
        "mc.csv",
        "config_hash,t,trials,successes,p_hat,ci_lo,ci_hi",
        &[format!(
            "{hash},{},{},{},{},{},{}",
            params.t, est.trials, est.successes, est.p_hat, est.ci_low, est.ci_high
        )],
    )?;
    if ctx.svg {
        let mut sorted = est.shifts.clone();
        sorted.sort_by(f64::total_cmp);
        let pts: Vec<(f64, f64)> = sorted
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, (i + 1) as f64 / sorted.len() as f64))
            .collect();
        write_svg(
            &ctx.out_dir,
            &format!("mc_{hash}.svg"),
            svg::line_plot(
                "empirical distribution of lambda1 - 1",
                "shift",
                "F(shift)",
                &[("empirical cdf", pts)],
            ),
        )?;
    }
    println!(
        "mc[{hash}]: {}/{} successes, p_hat = {}, ci = [{}, {}]",
        est.successes, est.trials, est.p_hat, est.ci_low, est.ci_high
    );
    Ok(())
}

pub fn run_brackets(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let params = cfg
        .brackets
        .as_ref()
        .ok_or_else(|| CliError::Config("brackets section missing".into()))?;
    let spec = cfg.build_spec()?;
    let grid = cfg.build_grid(&spec)?;
    let report = bracketing_check(&spec, params.kcells, &grid, cfg.solver_tol, 1e-8)?;
    let detail = json!({
        "config_hash": hash,
        "seed": cfg.seed,
        "kcells": params.kcells,
        "report": report,
    });
    write_json(&ctx.out_dir, &format!("brackets_{hash}.json"), &detail)?;
    println!(
        "brackets[{hash}]: lambda(N) = {:.12}, min segment = {:.12}, holds = {}",
        report.lambda_full, report.min_segment, report.holds
    );
    Ok(())
}

pub fn run_ct(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let params = cfg.ct.clone().unwrap_or(CtParams {
        gap: 0.5,
        alphas: None,
        beta: 2.0,
    });
    let spec = cfg.build_spec()?;
    let grid = cfg.build_grid(&spec)?;
    let ground = smallest_eigs(&assemble(&spec, &grid)?, 1, cfg.solver_tol)?;
    let lambda = ground.eigenvalues[0] - params.gap;
    let alphas = params.resolve_alphas(spec.length());
    if alphas.is_empty() {
        return Err(CliError::Config(
            "no admissible strip widths: need alpha + beta <= L with alpha >= 2".into(),
        ));
    }
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &alpha in &alphas {
        let r = ct_measure(&spec, &grid, lambda, alpha, params.beta, cfg.solver_tol)?;
        rows.push(format!(
            "{hash},{},{},{},{},{},{},{}",
            r.alpha, r.beta, r.dist, r.delta, r.measured, r.proof_bound, r.final_bound
        ));
        reports.push(r);
    }
    let detail = json!({
        "config_hash": hash,
        "seed": cfg.seed,
        "lambda": lambda,
        "reports": reports,
    });
    write_json(&ctx.out_dir, &format!("ct_{hash}.json"), &detail)?;
    append_csv(
        &ctx.out_dir,
        "ct.csv",
        "config_hash,alpha,beta,dist,delta,measured,proof_bound,final_bound",
        &rows,
    )?;
    if ctx.svg {
        let measured: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| (r.dist, r.measured.max(1e-300).log10()))
            .collect();
        let bound: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| (r.dist, r.proof_bound.log10()))
            .collect();
        write_svg(
            &ctx.out_dir,
            &format!("ct_{hash}.svg"),
            svg::line_plot(
                "block resolvent decay",
                "dist(A, B)",
                "log10 norm",
                &[("measured", measured), ("proof bound", bound)],
            ),
        )?;
    }
    println!(
        "ct[{hash}]: {} strip pairs at lambda = {:.6}, all within bound: {}",
        reports.len(),
        lambda,
        reports
            .iter()
            .all(|r| r.measured <= r.proof_bound * (1.0 + 1e-6))
    );
    Ok(())
}

pub fn run_interval(ctx: &RunContext) -> Result<(), CliError> {
    ensure_dir(&ctx.out_dir)?;
    let cfg = &ctx.loaded.config;
    let hash = &ctx.loaded.hash;
    let gamma = cfg
        .gamma
        .ok_or_else(|| CliError::Config("interval requires a top-level gamma".into()))?;
    let n = cfg
        .interval
        .clone()
        .and_then(|p| p.n)
        .unwrap_or(cfg.n_cells as f64);
    let bump = cfg.bump()?;
    let consts = Constants::for_bump(&bump);
    let params = theorem_interval(gamma, n, &cfg.mu(), &consts)?;
    let detail = json!({
        "config_hash": hash,
        "constants": consts,
        "params": params,
        "desk_scale_note": "The initial scale N1 is astronomically large for realistic bump constants, so the probabilistic theorem is verified through its ingredients (series margin, exact tails, Neumann bracketing) rather than by sampling at N >= N1.",
    });
    write_json(&ctx.out_dir, &format!("interval_{hash}.json"), &detail)?;
    println!(
        "interval[{hash}]: I_N = [{:.6e}, {:.6e}], non_empty = {}, log10 N1 = {:.2}",
        params.lower, params.upper, params.non_empty, params.n1_log10
    );
    Ok(())
}
