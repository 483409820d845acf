use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isoflow::error::CliError;
use isoflow::{fixtures, runner, selftest};
use isoflow_core::flows::FlowKind;

/// Iso-spectral matrix flows that preserve sparsity patterns.
#[derive(Parser)]
#[command(name = "isoflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowArg {
    /// Sparsity-preserving quasi-projected gradient flow.
    Zero,
    /// Double-bracket flow X' = [[D,X],X].
    Db,
    /// Toda flow X' = [X, X_l - X_l^T].
    Toda,
}

impl From<FlowArg> for FlowKind {
    fn from(f: FlowArg) -> FlowKind {
        match f {
            FlowArg::Zero => FlowKind::Zero,
            FlowArg::Db => FlowKind::DoubleBracket,
            FlowArg::Toda => FlowKind::Toda,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one fixture under one flow and write CSV/plot output.
    Run {
        /// Built-in fixture name or file:<path>.
        #[arg(long)]
        fixture: String,
        #[arg(long, value_enum)]
        flow: FlowArg,
        #[arg(long, default_value_t = 60.0)]
        tfinal: f64,
        #[arg(long, default_value_t = 1e-13)]
        abstol: f64,
        #[arg(long, default_value_t = 1e-13)]
        reltol: f64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the zero flow and the double-bracket flow side by side.
    Compare {
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value_t = 60.0)]
        tfinal: f64,
        #[arg(long, default_value_t = 1e-13)]
        abstol: f64,
        #[arg(long, default_value_t = 1e-13)]
        reltol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the double-bracket scaling identity c·X(ct) = Y(t).
    Scaling {
        /// Scale factor applied to the initial value.
        #[arg(long)]
        c: f64,
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value_t = 2.0)]
        tfinal: f64,
        /// Number of shared sample times.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 1e-13)]
        abstol: f64,
        #[arg(long, default_value_t = 1e-13)]
        reltol: f64,
    },
    /// Verify the non-diagonal equilibrium and the singular circulant
    /// state, including the instability probe.
    Counterexamples,
    /// Run the seeded property suites.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            fixture,
            flow,
            tfinal,
            abstol,
            reltol,
            out,
        } => {
            let fx = fixtures::fixture(&fixture)?;
            let opts = runner::RunOptions {
                flow: flow.into(),
                t_final: tfinal,
                abstol,
                reltol,
            };
            let summary = runner::execute_run(&fx, &opts, &out)?;
            summary.print();
            Ok(())
        }
        Command::Compare {
            fixture,
            tfinal,
            abstol,
            reltol,
            out,
        } => {
            let fx = fixtures::fixture(&fixture)?;
            let (zero, db) = runner::execute_compare(&fx, tfinal, abstol, reltol, &out)?;
            zero.print();
            db.print();
            Ok(())
        }
        Command::Scaling {
            c,
            fixture,
            tfinal,
            samples,
            abstol,
            reltol,
        } => {
            let fx = fixtures::fixture(&fixture)?;
            let report = runner::scaling_check(&fx, c, tfinal, samples, abstol, reltol)?;
            println!(
                "scaling check (c = {}, fixture {}, t_final {}, {} samples):",
                report.c, fx.name, report.t_final, report.samples
            );
            println!(
                "  max ||c·X(ct) − Y(t)|| = {:.3e} (tolerance {:.3e})",
                report.max_mismatch, report.tolerance
            );
            if report.passed() {
                println!("  PASS");
                Ok(())
            } else {
                Err(CliError::Assertion(format!(
                    "scaling mismatch {:e} exceeds {:e}",
                    report.max_mismatch, report.tolerance
                )))
            }
        }
        Command::Counterexamples => {
            let report = runner::counterexamples()?;
            println!("non-diagonal equilibrium (a=1, b=2, z=2):");
            println!("  equilibrium residual = {:.3e}", report.shader_residual);
            println!("  zero-flow field norm = {:.3e}", report.shader_field_norm);
            match report.shader_escape_time {
                Some(t) => println!(
                    "  instability probe: left the {}δ ball at t ≈ {t}",
                    runner::PROBE_ESCAPE_FACTOR
                ),
                None => println!("  instability probe: stayed within the ball until t = 50"),
            }
            println!("circulant kernel witness:");
            println!(
                "  ||(A.X+m)Y|| = {:.3e},  ||m·Y|| = {:.1},  min eig = {:.3e}",
                report.circulant_kernel_residual,
                report.circulant_mask_residual,
                report.circulant_min_eigenvalue
            );
            report.verify().map_err(CliError::Assertion)?;
            println!("counterexamples: PASS");
            Ok(())
        }
        Command::Selftest => {
            let reports = selftest::run_all();
            for r in &reports {
                r.print();
            }
            if reports.iter().all(|r| r.passed()) {
                println!("selftest: PASS");
                Ok(())
            } else {
                Err(CliError::Assertion("self-test suites failed".into()))
            }
        }
    }
}
