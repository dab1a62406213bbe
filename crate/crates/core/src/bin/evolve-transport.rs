use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evolve_transport::domain::validate_scene;
use evolve_transport::lab::config::{Config, OutputFormat, CONFIG_ENV};
use evolve_transport::lab::report;
use evolve_transport::lab::suite::{self, SuiteOptions};
use evolve_transport::lab::sweep::{self, SweepBase, SweepParam};
use evolve_transport::lab::{self, verify, Scenario};
use evolve_transport::quadrature::QuadratureRule;
use evolve_transport::TransportError;

#[derive(Parser)]
#[command(version, about = "Check the transport theorem on evolving domains numerically")]
struct Cli {
    /// TOML config file; keys mirror the flags below.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Write a machine-readable report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format for --out.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List scenarios and their fields.
    List,
    /// Evaluate both sides of the transport identity.
    Run {
        scenario: String,
        /// Field name; all fields of the scenario when omitted.
        #[arg(long)]
        field: Option<String>,
        /// Evaluation time; five interior times of the window when omitted.
        #[arg(long = "t", allow_negative_numbers = true)]
        t: Option<f64>,
        /// Finite-difference step (default 1e-4 × window length).
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
        /// Residual tolerance overriding the scenario default.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Convergence sweep over the step, the Gauss order or the sample count.
    Sweep {
        scenario: String,
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Vec<f64>,
        #[arg(long, default_value = "one")]
        field: String,
        #[arg(long = "t", allow_negative_numbers = true)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Sampled checks of the scene's geometric contracts.
    Validate {
        scenario: String,
        #[arg(long = "t", allow_negative_numbers = true)]
        t: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// The full verification suite.
    All {
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Skip the Monte Carlo convergence sweep.
        #[arg(long)]
        no_monte_carlo: bool,
    },
}

/// Exit codes: 0 every check passes, 1 some check fails, 2 bad input.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(name: &str, config: &Config) -> Result<Scenario, TransportError> {
    let mut s = lab::scenario(name)?;
    config.apply_tolerance(&mut s);
    Ok(s)
}

fn write_out(path: &Path, body: &str) -> Result<(), TransportError> {
    std::fs::write(path, body)
        .map_err(|e| TransportError::Config(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<Outcome, TransportError> {
    let mut config = Config::discover(cli.config.as_deref())?;
    let out = cli.out.clone().or(config.out.clone());
    let format = cli.format.or(config.format).unwrap_or_default();
    let seed = cli.seed.or(config.seed).unwrap_or(0);

    match cli.command {
        Command::List => {
            for s in lab::registry() {
                println!(
                    "{:<20} window [{}, {}]  fields: {}",
                    s.name,
                    s.time_window.0,
                    s.time_window.1,
                    s.field_names().join(", ")
                );
                println!("{:<20} {}", "", s.description);
            }
            Ok(Outcome::Pass)
        }
        Command::Run {
            scenario,
            field,
            t,
            h,
            order,
            tol,
        } => {
            if tol.is_some() {
                config.tol = tol;
                config.tolerances.remove(&scenario);
            }
            let s = load_scenario(&scenario, &config)?;
            let h = h.or(config.h).unwrap_or_else(|| s.default_h());
            let rule = QuadratureRule::gauss(order.or(config.order).unwrap_or(16));
            let times = t.map(|t| vec![t]).unwrap_or_else(|| s.interior_times(5));
            let reports = match field {
                Some(f) => times
                    .iter()
                    .map(|&t| verify::verify_transport(&s, &f, t, h, &rule))
                    .collect::<Result<Vec<_>, _>>()?,
                None => verify::verify_all_fields(&s, &times, h, &rule)?,
            };
            print!("{}", report::transport_table(&reports));
            if let Some(path) = out {
                let body = match format {
                    OutputFormat::Json => report::to_json(&reports)?,
                    OutputFormat::Csv => report::transport_csv(&reports)?,
                };
                write_out(&path, &body)?;
            }
            Ok(if reports.iter().all(|r| r.passed) { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Sweep {
            scenario,
            param,
            grid,
            field,
            t,
            h,
            order,
        } => {
            let s = load_scenario(&scenario, &config)?;
            let t = t.unwrap_or_else(|| s.interior_times(1)[0]);
            let base = SweepBase {
                h: h.or(config.h).unwrap_or_else(|| s.default_h()),
                order: order.or(config.order).unwrap_or(16),
                seed,
                ..SweepBase::default()
            };
            let result = sweep::run_sweep(&s, &field, t, param, &grid, &base)?;
            print!("{}", report::sweep_table(&result));
            if let Some(path) = out {
                let body = match format {
                    OutputFormat::Json => report::to_json(&result)?,
                    OutputFormat::Csv => report::sweep_csv(&result)?,
                };
                write_out(&path, &body)?;
            }
            Ok(Outcome::Pass)
        }
        Command::Validate { scenario, t, samples } => {
            let s = load_scenario(&scenario, &config)?;
            let samples = samples.or(config.samples).unwrap_or(500);
            let times = match t {
                Some(t) if s.contains_time(t) => vec![t],
                Some(t) => {
                    return Err(TransportError::WindowExceeded {
                        lo: t,
                        hi: t,
                        window_min: s.time_window.0,
                        window_max: s.time_window.1,
                    })
                }
                None => s.uniform_times(5),
            };
            let mut reports = Vec::new();
            for t in times {
                let r = validate_scene(&s.domain, t, samples, seed)?;
                println!("{} at t = {}", s.name, t);
                for c in &r.checks {
                    println!(
                        "  {:<32} {:>10.3e} (tol {:.0e}, {} samples, {} skipped) {}{}",
                        c.name,
                        c.max_violation,
                        c.tolerance,
                        c.samples,
                        c.skipped,
                        if c.passed { "pass" } else { "FAIL" },
                        if c.diagnostic { " [diagnostic]" } else { "" }
                    );
                }
                reports.push(r);
            }
            if let Some(path) = out {
                write_out(&path, &report::to_json(&reports)?)?;
            }
            Ok(if reports.iter().all(|r| r.passed()) { Outcome::Pass } else { Outcome::Fail })
        }
        Command::All {
            order,
            h,
            samples,
            no_monte_carlo,
        } => {
            let mut opts = SuiteOptions::from_config(config);
            opts.order = order.unwrap_or(opts.order);
            opts.h = h.unwrap_or(opts.h);
            opts.samples = samples.unwrap_or(opts.samples);
            if let Some(seed) = cli.seed {
                opts.seed = seed;
            }
            opts.monte_carlo = !no_monte_carlo;
            let result = suite::run_suite(&opts)?;
            for c in &result.criteria {
                println!(
                    "{} [{:>2}] {:<48} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.detail
                );
            }
            if let Some(path) = out {
                let body = match format {
                    OutputFormat::Json => report::to_json(&result)?,
                    OutputFormat::Csv => report::transport_csv(&result.transport)?,
                };
                write_out(&path, &body)?;
            }
            Ok(if result.passed { Outcome::Pass } else { Outcome::Fail })
        }
    }
}
