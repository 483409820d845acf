//! Experiment execution: single runs, flow comparisons, the
//! double-bracket scaling check, and the counterexample verifications.

use std::path::{Path, PathBuf};
use std::time::Instant;

use isoflow_core::flows::{
    circulant_kernel_witness, equilibrium_residual, shader_counterexample, zero_flow_field,
    FlowKind, FlowProblem, ZeroFlow,
};
use isoflow_core::integrate::{rk45_integrate, IntegratorConfig, Monitors, TrajectoryLog};
use isoflow_core::symspace::{double_bracket_operator, SparsityPattern};
use isoflow_core::{Error as CoreError, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CliError, Result};
use crate::fixtures::Fixture;
use crate::output;

pub fn flow_label(kind: FlowKind) -> &'static str {
    match kind {
        FlowKind::Zero => "zero",
        FlowKind::DoubleBracket => "db",
        FlowKind::Toda => "toda",
    }
}

/// Target `D = diag(1, 2, …, n)` used by every experiment entry point.
pub fn default_target(n: usize) -> SymMatrix {
    SymMatrix::from_diag(&(1..=n).map(|v| v as f64).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub flow: FlowKind,
    pub t_final: f64,
    pub abstol: f64,
    pub reltol: f64,
}

impl RunOptions {
    pub fn new(flow: FlowKind, t_final: f64) -> Self {
        RunOptions {
            flow,
            t_final,
            abstol: 1e-13,
            reltol: 1e-13,
        }
    }
}

/// Summary of one integration, echoing the configuration and the headline
/// monitor values.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub fixture: String,
    pub flow: &'static str,
    pub t_final: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub max_d_ev: f64,
    pub final_d_off: f64,
    pub final_f: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub singular_flags: u64,
    pub truncated: bool,
    pub wall_seconds: f64,
    pub output_paths: Vec<PathBuf>,
}

impl RunSummary {
    pub fn print(&self) {
        println!(
            "run {fixture} [{flow}] t_final={t} abstol={a:e} reltol={r:e}",
            fixture = self.fixture,
            flow = self.flow,
            t = self.t_final,
            a = self.abstol,
            r = self.reltol
        );
        println!(
            "  max d_ev = {:.3e}   final d_off = {:.3e}   final f = {:.6e}",
            self.max_d_ev, self.final_d_off, self.final_f
        );
        println!(
            "  steps: {} accepted, {} rejected; singular evaluations: {}{}",
            self.accepted_steps,
            self.rejected_steps,
            self.singular_flags,
            if self.truncated {
                "; TRUNCATED at max_steps"
            } else {
                ""
            }
        );
        println!("  wall time: {:.2}s", self.wall_seconds);
        for p in &self.output_paths {
            println!("  wrote {}", p.display());
        }
    }
}

fn map_core(e: CoreError) -> CliError {
    match e {
        CoreError::StepUnderflow { .. } | CoreError::EigenNoConvergence => CliError::Integrator(e),
        CoreError::InvalidParameter(_)
        | CoreError::DimensionMismatch { .. }
        | CoreError::ZeroDenominator(_) => CliError::BadInput(e.to_string()),
        other => CliError::Integrator(other),
    }
}

/// Integrates one fixture under one flow; no files are written.
pub fn integrate_fixture(fixture: &Fixture, opts: &RunOptions) -> Result<TrajectoryLog> {
    let n = fixture.x0.order();
    let d = default_target(n);
    let problem =
        FlowProblem::new(opts.flow, fixture.x0.clone(), d.clone(), None).map_err(map_core)?;
    let evaluator = problem.evaluator().map_err(map_core)?;
    let monitors = Monitors::new(&fixture.x0, &d).map_err(map_core)?;
    let cfg = IntegratorConfig::new(opts.t_final).tolerances(opts.abstol, opts.reltol);
    rk45_integrate(
        |x: &SymMatrix| evaluator.eval(x),
        &fixture.x0,
        &cfg,
        Some(&monitors),
    )
    .map_err(map_core)
}

fn summarize(
    fixture: &Fixture,
    opts: &RunOptions,
    log: &TrajectoryLog,
    wall_seconds: f64,
    output_paths: Vec<PathBuf>,
) -> RunSummary {
    RunSummary {
        fixture: fixture.name.clone(),
        flow: flow_label(opts.flow),
        t_final: opts.t_final,
        abstol: opts.abstol,
        reltol: opts.reltol,
        max_d_ev: log.max_d_ev(),
        final_d_off: log.final_d_off().unwrap_or(f64::NAN),
        final_f: log.f.last().copied().unwrap_or(f64::NAN),
        accepted_steps: log.accepted_steps,
        rejected_steps: log.rejected_steps,
        singular_flags: log.singular_flag_count,
        truncated: log.truncated,
        wall_seconds,
        output_paths,
    }
}

/// Runs one flow and writes `run.csv`, `final.mat`, and `plot.py` into
/// `out_dir`.
pub fn execute_run(fixture: &Fixture, opts: &RunOptions, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let log = integrate_fixture(fixture, opts)?;
    let wall = start.elapsed().as_secs_f64();

    let csv = out_dir.join("run.csv");
    output::write_csv(&csv, &log)?;
    let final_mat = out_dir.join("final.mat");
    crate::matfile::save_matrix(&final_mat, &log.final_state)?;
    let plot = out_dir.join("plot.py");
    output::write_plot_script(
        &plot,
        &format!("{} [{}]", fixture.name, flow_label(opts.flow)),
        &[(flow_label(opts.flow), "run.csv")],
    )?;
    Ok(summarize(
        fixture,
        opts,
        &log,
        wall,
        vec![csv, final_mat, plot],
    ))
}

/// Runs the zero flow and the double-bracket flow side by side with an
/// identical configuration; the two integrations run concurrently.
pub fn execute_compare(
    fixture: &Fixture,
    t_final: f64,
    abstol: f64,
    reltol: f64,
    out_dir: &Path,
) -> Result<(RunSummary, RunSummary)> {
    std::fs::create_dir_all(out_dir)?;
    let zero_opts = RunOptions {
        flow: FlowKind::Zero,
        t_final,
        abstol,
        reltol,
    };
    let db_opts = RunOptions {
        flow: FlowKind::DoubleBracket,
        ..zero_opts
    };
    let start = Instant::now();
    let (zero_log, db_log) = std::thread::scope(|scope| {
        let zero = scope.spawn(|| integrate_fixture(fixture, &zero_opts));
        let db = scope.spawn(|| integrate_fixture(fixture, &db_opts));
        (zero.join().expect("thread"), db.join().expect("thread"))
    });
    let (zero_log, db_log) = (zero_log?, db_log?);
    let wall = start.elapsed().as_secs_f64();

    let zero_csv = out_dir.join("zero.csv");
    output::write_csv(&zero_csv, &zero_log)?;
    let db_csv = out_dir.join("db.csv");
    output::write_csv(&db_csv, &db_log)?;
    let merged = out_dir.join("compare.csv");
    output::write_compare_csv(&merged, &[("zero", &zero_log), ("db", &db_log)])?;
    let zero_final = out_dir.join("zero_final.mat");
    crate::matfile::save_matrix(&zero_final, &zero_log.final_state)?;
    let db_final = out_dir.join("db_final.mat");
    crate::matfile::save_matrix(&db_final, &db_log.final_state)?;
    let plot = out_dir.join("plot.py");
    output::write_plot_script(
        &plot,
        &format!("{}: zero vs db", fixture.name),
        &[("zero", "zero.csv"), ("db", "db.csv")],
    )?;

    let zero_summary = summarize(
        fixture,
        &zero_opts,
        &zero_log,
        wall,
        vec![zero_csv, merged.clone(), zero_final, plot.clone()],
    );
    let db_summary = summarize(fixture, &db_opts, &db_log, wall, vec![db_csv, merged, db_final, plot]);
    Ok((zero_summary, db_summary))
}

/// States of one flow at the given times, obtained by integrating each
/// interval `[t_k, t_{k+1}]` in turn so every grid point is hit exactly
/// (the fields are autonomous, so restarting loses nothing).
pub fn states_at_times(
    fixture_x0: &SymMatrix,
    flow: FlowKind,
    times: &[f64],
    abstol: f64,
    reltol: f64,
) -> Result<Vec<SymMatrix>> {
    let d = default_target(fixture_x0.order());
    let problem =
        FlowProblem::new(flow, fixture_x0.clone(), d, None).map_err(map_core)?;
    let evaluator = problem.evaluator().map_err(map_core)?;
    let mut states = Vec::with_capacity(times.len());
    let mut current = fixture_x0.clone();
    let mut t_prev = 0.0;
    for &t in times {
        if t < t_prev {
            return Err(CliError::BadInput("sample times must increase".into()));
        }
        if t > t_prev {
            let cfg = IntegratorConfig::new(t - t_prev)
                .tolerances(abstol, reltol)
                .sample_interval(t - t_prev);
            let log = rk45_integrate(
                |x: &SymMatrix| evaluator.eval(x),
                &current,
                &cfg,
                None,
            )
            .map_err(map_core)?;
            current = log.final_state;
            t_prev = t;
        }
        states.push(current.clone());
    }
    Ok(states)
}

/// Result of the double-bracket scaling identity check.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub c: f64,
    pub t_final: f64,
    pub samples: usize,
    pub max_mismatch: f64,
    pub tolerance: f64,
}

impl ScalingReport {
    pub fn passed(&self) -> bool {
        self.max_mismatch <= self.tolerance
    }
}

/// Verifies that `c·X(ct)` solves the double-bracket flow started from
/// `c·X₀`: integrates both trajectories and compares them on a shared
/// grid of `samples` points up to `t_final`.
pub fn scaling_check(
    fixture: &Fixture,
    c: f64,
    t_final: f64,
    samples: usize,
    abstol: f64,
    reltol: f64,
) -> Result<ScalingReport> {
    if c <= 0.0 {
        return Err(CliError::BadInput("scaling factor c must be positive".into()));
    }
    let times: Vec<f64> = (1..=samples)
        .map(|k| t_final * k as f64 / samples as f64)
        .collect();
    let stretched: Vec<f64> = times.iter().map(|t| c * t).collect();

    let base = states_at_times(
        &fixture.x0,
        FlowKind::DoubleBracket,
        &stretched,
        abstol,
        reltol,
    )?;
    let scaled_x0 = fixture.x0.scaled(c);
    let scaled = states_at_times(&scaled_x0, FlowKind::DoubleBracket, &times, abstol, reltol)?;

    let mut max_mismatch = 0.0_f64;
    for (xs, ys) in base.iter().zip(&scaled) {
        max_mismatch = max_mismatch.max((&xs.scaled(c) - ys).frob_norm());
    }
    Ok(ScalingReport {
        c,
        t_final,
        samples,
        max_mismatch,
        tolerance: 1e-7 * c * fixture.x0.frob_norm(),
    })
}

/// Outcome of the counterexample verifications.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    /// Equilibrium residual of the non-diagonal equilibrium.
    pub shader_residual: f64,
    /// Norm of the zero-flow field at that equilibrium.
    pub shader_field_norm: f64,
    /// First time the perturbed trajectory leaves the `10δ` ball, if it
    /// does before `t = 50`.
    pub shader_escape_time: Option<f64>,
    /// `‖(A.X+m)Y‖` for the circulant kernel witness.
    pub circulant_kernel_residual: f64,
    /// `‖m·Y‖` (must be exactly zero).
    pub circulant_mask_residual: f64,
    /// Smallest eigenvalue of `A.X + m` at the circulant state.
    pub circulant_min_eigenvalue: f64,
}

/// Perturbation size of the instability probe.
pub const PROBE_DELTA: f64 = 1e-3;
/// Escape threshold, as a multiple of the perturbation size.
pub const PROBE_ESCAPE_FACTOR: f64 = 10.0;
/// Time horizon of the probe.
pub const PROBE_HORIZON: f64 = 50.0;

/// Checks the two constructions that separate this flow family from the
/// naive expectations: the non-diagonal equilibrium (with an empirical
/// instability probe) and the circulant state where `A.X + m` is
/// singular.
pub fn counterexamples() -> Result<CounterexampleReport> {
    let (e, d, _) = shader_counterexample(1.0, 2.0, 2.0).map_err(map_core)?;
    let pattern = SparsityPattern::from_matrix(&e);
    let report = equilibrium_residual(&e, &d, &pattern).map_err(map_core)?;
    let field = zero_flow_field(&e, &d, &pattern, None).map_err(map_core)?;

    // probe: nudge the equilibrium inside Sym(Δ) and watch the distance
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let raw = SymMatrix::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
    let r = pattern.project(&raw).map_err(map_core)?;
    let r = r.scaled(1.0 / r.frob_norm());
    let x0 = &e + &r.scaled(PROBE_DELTA);

    let zf = ZeroFlow::new(&d, &pattern, None).map_err(map_core)?;
    let mut escape = None;
    let mut current = x0;
    let segment = 0.5_f64;
    let mut t = 0.0;
    while t < PROBE_HORIZON {
        let cfg = IntegratorConfig::new(segment).sample_interval(segment);
        let log = rk45_integrate(|x: &SymMatrix| zf.eval(x), &current, &cfg, None)
            .map_err(map_core)?;
        current = log.final_state;
        t += segment;
        if (&current - &e).frob_norm() > PROBE_ESCAPE_FACTOR * PROBE_DELTA {
            escape = Some(t);
            break;
        }
    }

    let (x, y) = circulant_kernel_witness();
    let cpattern = SparsityPattern::from_matrix(&x);
    let op = double_bracket_operator(&x).add(&cpattern.operator());
    let kernel_residual = op.apply(&y).frob_norm();
    let mask_residual = cpattern.project(&y).map_err(map_core)?.frob_norm();
    let min_eig = op.eigen().map_err(map_core)?.min_value();

    Ok(CounterexampleReport {
        shader_residual: report.residual,
        shader_field_norm: field.derivative.frob_norm(),
        shader_escape_time: escape,
        circulant_kernel_residual: kernel_residual,
        circulant_mask_residual: mask_residual,
        circulant_min_eigenvalue: min_eig,
    })
}

impl CounterexampleReport {
    /// The spec-level assertions; returns the first violated one.
    pub fn verify(&self) -> std::result::Result<(), String> {
        if self.shader_residual > 1e-9 {
            return Err(format!(
                "equilibrium residual {:e} exceeds 1e-9",
                self.shader_residual
            ));
        }
        if self.shader_field_norm > 1e-10 {
            return Err(format!(
                "field norm at equilibrium {:e} exceeds 1e-10",
                self.shader_field_norm
            ));
        }
        if self.shader_escape_time.is_none() {
            return Err("perturbed trajectory stayed in the 10δ ball".into());
        }
        if self.circulant_kernel_residual > 1e-12 {
            return Err(format!(
                "kernel witness residual {:e} exceeds 1e-12",
                self.circulant_kernel_residual
            ));
        }
        if self.circulant_mask_residual != 0.0 {
            return Err("witness is not exactly outside the pattern".into());
        }
        if self.circulant_min_eigenvalue > 1e-12 {
            return Err(format!(
                "operator min eigenvalue {:e} exceeds 1e-12",
                self.circulant_min_eigenvalue
            ));
        }
        Ok(())
    }
}
