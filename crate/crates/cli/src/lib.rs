//! Experiment runner behind the `bardina` binary.

pub mod config;
pub mod output;

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bardina::attractor::{
    dimension_bound, eta, lyapunov_along, random_frame, steady_convergence, trajectory_gap,
    zero_force_decay, EtaRegime,
};
use bardina::checkpoint::STEADY_TIME;
use bardina::dynamics::{
    absorbing_ball_entry, decay_envelope_check, energy_budget_residual, evolve, steps_for,
    SimState, Stepper,
};
use bardina::spectral::norms;
use bardina::stationary::{solve_stationary, stationary_residual_pde};
use bardina::{generate, Error as CoreError, VectorField64};
use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{ConfigError, DecayMode, RunConfig};
use output::{Artifacts, Metadata, Report};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "BARDINA_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Simulate,
    Stationary,
    Bound,
    Lyapunov,
    Gap,
    Decay,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Stationary => "stationary",
            Self::Bound => "bound",
            Self::Lyapunov => "lyapunov",
            Self::Gap => "gap",
            Self::Decay => "decay",
        }
    }

    fn steps_in_time(self) -> bool {
        !matches!(self, Self::Stationary | Self::Bound)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] CoreError),
    #[error("report failure: {}", .0.join(", "))]
    ReportFailed(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(e) => match e {
                CoreError::BlowUp { .. } | CoreError::CflViolation { .. } => 3,
                CoreError::NonConvergence { .. } => 4,
                CoreError::InvalidGrid(_)
                | CoreError::InvalidParams(_)
                | CoreError::InvalidRecipe(_) => 2,
                _ => 1,
            },
            Self::ReportFailed(_) => 5,
            Self::Io(_) => 1,
        }
    }
}

/// Worker count: `BARDINA_THREADS` when set to a positive integer, else the
/// available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

#[derive(Debug)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub failures: Vec<String>,
}

/// Runs one subcommand, writing artifacts and `metadata.json` into `out`.
pub fn execute(cmd: Subcommand, cfg: &RunConfig, out: &Path, threads: usize) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    if cmd.steps_in_time() {
        cfg.check_cfl()?;
    }
    let mut art = Artifacts::create(out)?;
    art.text("config.toml", &cfg.to_toml())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(std::io::Error::other)?;
    let result = pool.install(|| dispatch(cmd, cfg, &mut art));
    if let Err(CliError::Numerical(e @ (CoreError::BlowUp { .. } | CoreError::CflViolation { .. }))) = &result {
        art.json("blowup.json", &json!({ "error": e.to_string() }))?;
    }
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cmd.name(),
        config_sha256: config_hash(cfg),
        threads: pool.current_num_threads(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        outputs: art.files().to_vec(),
    };
    art.json("metadata.json", &meta)?;
    let failures = result?;
    if failures.is_empty() {
        Ok(RunSummary {
            outputs: art.files().to_vec(),
            failures,
        })
    } else {
        Err(CliError::ReportFailed(failures))
    }
}

type Failures = Vec<String>;

fn dispatch(cmd: Subcommand, cfg: &RunConfig, art: &mut Artifacts) -> Result<Failures, CliError> {
    let mut reports = Vec::new();
    match cmd {
        Subcommand::Simulate => simulate(cfg, art, &mut reports)?,
        Subcommand::Stationary => stationary(cfg, art, &mut reports)?,
        Subcommand::Bound => bound(cfg, art)?,
        Subcommand::Lyapunov => lyapunov(cfg, art, &mut reports)?,
        Subcommand::Gap => gap(cfg, art, &mut reports)?,
        Subcommand::Decay => decay(cfg, art, &mut reports)?,
    }
    let mut failures = Vec::new();
    for r in &reports {
        art.json(&format!("{}.json", r.check_name), r)?;
        if !r.pass {
            failures.push(r.check_name.clone());
        }
    }
    Ok(failures)
}

fn fields(cfg: &RunConfig) -> Result<(VectorField64, VectorField64), CliError> {
    let a = cfg.params.alpha;
    Ok((generate(&cfg.initial, cfg.grid, a)?, generate(&cfg.force, cfg.grid, a)?))
}

fn report(cfg: &RunConfig, name: &str, pass: bool, slack: f64, series: Option<&str>, details: serde_json::Value) -> Report {
    Report {
        check_name: name.to_string(),
        params: cfg.params,
        pass,
        max_slack: slack,
        series_file: series.map(str::to_string),
        details,
    }
}

fn simulate(cfg: &RunConfig, art: &mut Artifacts, reports: &mut Vec<Report>) -> Result<(), CliError> {
    let (u0, f) = fields(cfg)?;
    let f2 = norms(&f, cfg.params.alpha).h1alpha_sq;
    let state = SimState::new(u0, f, cfg.params)?;
    let (end, traj) = evolve(state, cfg.run.dt, cfg.run.t_end, cfg.run.sample_every)?;
    let resid = energy_budget_residual(&traj);
    art.csv(
        "trajectory.csv",
        &[
            "t",
            "l2_sq",
            "h1dot_sq",
            "h2dot_sq",
            "h1alpha_sq",
            "dissipation",
            "damping",
            "force_pairing",
            "energy_residual",
        ],
        traj.samples.iter().zip(&resid).map(|(s, &r)| {
            vec![
                s.t,
                s.norms.l2_sq,
                s.norms.h1dot_sq,
                s.norms.h2dot_sq,
                s.norms.h1alpha_sq,
                s.dissipation,
                s.damping,
                s.force_pairing,
                r,
            ]
        }),
    )?;
    art.checkpoint("final.chk", &end.u, &cfg.params, end.t)?;

    let worst = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let slack = cfg.run.energy_tol - worst;
    reports.push(report(
        cfg,
        "energy_equality",
        slack >= 0.0,
        slack,
        Some("trajectory.csv"),
        json!({ "max_abs_residual": worst, "tolerance": cfg.run.energy_tol }),
    ));

    let env = decay_envelope_check(&traj, f2, &cfg.params);
    reports.push(report(
        cfg,
        "decay_envelopes",
        env.pass,
        env.pointwise_min_slack.min(env.window_min_slack),
        Some("trajectory.csv"),
        serde_json::to_value(env).map_err(std::io::Error::other)?,
    ));

    let entry = absorbing_ball_entry(&traj, f2, cfg.params.beta);
    art.json("absorbing_ball.json", &entry)?;
    Ok(())
}

fn stationary(cfg: &RunConfig, art: &mut Artifacts, reports: &mut Vec<Report>) -> Result<(), CliError> {
    let f = generate(&cfg.force, cfg.grid, cfg.params.alpha)?;
    let f2 = norms(&f, cfg.params.alpha).h1alpha_sq;
    let res = match solve_stationary(&f, &cfg.params, &cfg.stationary.into()) {
        Ok(r) => r,
        Err(e @ CoreError::NonConvergence { .. }) => {
            if let CoreError::NonConvergence { residual_history, .. } = &e {
                art.csv(
                    "residual_history.csv",
                    &["iteration", "residual"],
                    residual_history.iter().enumerate().map(|(i, &r)| vec![i as f64, r]),
                )?;
            }
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    art.csv(
        "residual_history.csv",
        &["iteration", "residual"],
        res.residual_history.iter().enumerate().map(|(i, &r)| vec![i as f64, r]),
    )?;
    art.checkpoint("stationary.chk", &res.u, &cfg.params, STEADY_TIME)?;
    let pde = stationary_residual_pde(&res.u, &f, &cfg.params)?;
    let tol = 1e-10 * f2;
    reports.push(report(
        cfg,
        "stationary_energy",
        res.residual <= cfg.stationary.tol && res.energy_slack >= -tol,
        res.energy_slack,
        Some("residual_history.csv"),
        json!({
            "iterations": res.iterations,
            "residual": res.residual,
            "pde_residual": pde,
            "final_relaxation": res.final_relaxation,
        }),
    ));
    Ok(())
}

fn force_norm(cfg: &RunConfig) -> Result<f64, CliError> {
    let f = generate(&cfg.force, cfg.grid, cfg.params.alpha)?;
    Ok(norms(&f, cfg.params.alpha).h1alpha_sq.sqrt())
}

fn bound(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), CliError> {
    let f_norm = match cfg.bound.f_norm {
        Some(v) => v,
        None => force_norm(cfg)?,
    };
    let e = eta(&cfg.params, f_norm)?;
    let d = dimension_bound(&cfg.params, f_norm)?;
    art.json(
        "bound.json",
        &json!({
            "f_norm": f_norm,
            "eta_c": cfg.params.eta_c,
            "eta": e,
            "dimension": d,
        }),
    )?;
    Ok(())
}

fn lyapunov(cfg: &RunConfig, art: &mut Artifacts, reports: &mut Vec<Report>) -> Result<(), CliError> {
    let (u0, f) = fields(cfg)?;
    let p = cfg.params;
    let state = SimState::new(u0, f, p)?;
    let stepper = Stepper::new(cfg.grid, p, cfg.run.dt)?;
    let frame = random_frame(cfg.grid, cfg.lyapunov.m, cfg.lyapunov.frame_seed, p.alpha)?;
    let n = steps_for(cfg.run.t_end, cfg.run.dt)?;
    let samples = lyapunov_along(state, frame, &stepper, n, cfg.run.sample_every)?;
    art.csv(
        "lyapunov.csv",
        &["t", "sum", "bound", "slack"],
        samples.iter().map(|s| vec![s.t, s.sum, s.bound, s.slack]),
    )?;
    let worst = samples.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * p.beta * cfg.lyapunov.m as f64;
    reports.push(report(
        cfg,
        "lyapunov_sum",
        worst >= -tol,
        worst,
        Some("lyapunov.csv"),
        json!({ "m": cfg.lyapunov.m, "frame_seed": cfg.lyapunov.frame_seed }),
    ));
    Ok(())
}

fn gap(cfg: &RunConfig, art: &mut Artifacts, reports: &mut Vec<Report>) -> Result<(), CliError> {
    let a = cfg.params.alpha;
    let (ua, fa) = fields(cfg)?;
    let ub = generate(&cfg.gap.initial_b, cfg.grid, a)?;
    let fb = match &cfg.gap.force_b {
        Some(r) => generate(r, cfg.grid, a)?,
        None => fa.clone(),
    };
    let series = trajectory_gap(&ua, &ub, &fa, &fb, &cfg.params, cfg.run.dt, cfg.run.t_end, cfg.run.sample_every)?;
    art.csv(
        "gap.csv",
        &["t", "gap_sq"],
        series.t.iter().zip(&series.g).map(|(&t, &g)| vec![t, g]),
    )?;
    let e = eta(&cfg.params, norms(&fa, a).h1alpha_sq.sqrt())?;
    let same_force = cfg.gap.force_b.is_none() || cfg.gap.force_b == Some(cfg.force);
    let asserted = same_force && e.regime != EtaRegime::Positive;
    let growth = series.max_growth();
    let rate = series.log_rate(0.0, 1e-300);
    let slack = 1e-10 - growth;
    let mut pass = !asserted || slack >= 0.0;
    if asserted && e.regime == EtaRegime::Negative {
        pass &= rate.is_some_and(|r| r < 0.0) || series.g[0] == 0.0;
    }
    reports.push(report(
        cfg,
        "trajectory_gap",
        pass,
        slack,
        Some("gap.csv"),
        json!({
            "eta": e,
            "asserted": asserted,
            "max_relative_growth": growth,
            "log_rate": rate,
        }),
    ));
    Ok(())
}

fn decay(cfg: &RunConfig, art: &mut Artifacts, reports: &mut Vec<Report>) -> Result<(), CliError> {
    let (u0, f) = fields(cfg)?;
    let p = cfg.params;
    match cfg.decay.mode {
        DecayMode::ZeroForce => {
            let r = zero_force_decay(&u0, &p, cfg.run.dt, cfg.run.t_end, cfg.run.sample_every, &cfg.decay.p_list)?;
            let names: Vec<String> = std::iter::once("t".to_string())
                .chain(r.envelopes.iter().map(|e| format!("lp_{}", e.p)))
                .collect();
            let header: Vec<&str> = names.iter().map(String::as_str).collect();
            art.csv(
                "decay.csv",
                &header,
                (0..r.t.len()).map(|i| {
                    std::iter::once(r.t[i])
                        .chain(r.envelopes.iter().map(|e| e.series[i]))
                        .collect()
                }),
            )?;
            let worst = r
                .envelopes
                .iter()
                .filter_map(|e| e.min_slack)
                .fold(f64::INFINITY, f64::min);
            let details: Vec<_> = r
                .envelopes
                .iter()
                .map(|e| json!({ "p": e.p, "c_p": e.c_p, "min_slack": e.min_slack, "fitted_rate": e.fitted_rate, "pass": e.pass }))
                .collect();
            reports.push(report(cfg, "zero_force_decay", r.pass, worst, Some("decay.csv"), json!(details)));
        }
        DecayMode::Steady => {
            let steady = solve_stationary(&f, &p, &cfg.stationary.into())?;
            let e = eta(&p, norms(&f, p.alpha).h1alpha_sq.sqrt())?;
            let r = steady_convergence(&u0, &f, &p, &steady.u, cfg.run.dt, cfg.run.t_end, cfg.run.sample_every)?;
            art.csv(
                "steady.csv",
                &["t", "r_h1alpha", "r_inf"],
                (0..r.t.len()).map(|i| vec![r.t[i], r.r[i], r.r_inf[i]]),
            )?;
            reports.push(report(
                cfg,
                "steady_convergence",
                r.pass,
                r.envelope_min_slack.unwrap_or(0.0),
                Some("steady.csv"),
                json!({
                    "eta": e,
                    "monotone": r.monotone,
                    "ball_entry": r.ball_entry,
                    "envelope_c": r.envelope_c,
                }),
            ));
        }
    }
    Ok(())
}
