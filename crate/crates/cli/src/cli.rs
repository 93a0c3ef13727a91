//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::commands::{self, Context};
use crate::config::{self, Config};
use crate::error::{CliError, CliResult, Kind};
use crate::plot::PlotKind;
use crate::synth::SynthTarget;

#[derive(Debug, Parser)]
#[command(
    name = "evmix",
    version,
    about = "Extreme value fits, goodness-of-fit tests and two-component GEV mixtures for annual maxima"
)]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic draws; recorded in every report.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Directory receiving reports, traces and plot files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// KS significance level (must appear in gof.ks_table).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Replace the live objective by recorded p-value tables.
    #[arg(long, global = true, hide = true)]
    table_stub: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Descriptive statistics of the series.
    Summary { input: PathBuf },
    /// Fit the requested families and compare them.
    Fit {
        input: PathBuf,
        /// Comma-separated families (gev, gumbel, weibull, frechet).
        #[arg(long)]
        families: Option<String>,
    },
    /// Fits plus the merged chi-square class tables.
    Gof {
        input: PathBuf,
        #[arg(long)]
        families: Option<String>,
    },
    /// Base GEV fit followed by the mixture search; writes trace.csv.
    Optimize { input: Option<PathBuf> },
    /// Plot coordinates for a fitted family.
    Plot {
        input: PathBuf,
        /// qq, pp, density, timeseries or all.
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, default_value = "gev")]
        family: String,
        /// Also write SVG files.
        #[arg(long)]
        svg: bool,
    },
    /// Summary, fits, tests, mixture search and plots in one run.
    Report { input: PathBuf },
    /// Write a synthetic series in the input format.
    Synth {
        #[arg(long, default_value = "synthetic.csv")]
        output: PathBuf,
        #[arg(long, default_value_t = 51)]
        n: usize,
        #[arg(long, default_value_t = 1948)]
        first_year: i32,
    },
}

/// Outcome of one invocation: exit code plus what goes to stdout / stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn families_arg(arg: &Option<String>, cfg: &Config) -> CliResult<Vec<evmix::Family>> {
    match arg {
        Some(s) => config::parse_families(s),
        None => Ok(cfg.families.clone()),
    }
}

fn dispatch(cli: Cli) -> CliResult<String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(a) = cli.alpha {
        cfg.alpha = a;
        cfg.validate()?;
    }
    if !cfg
        .ks_table
        .iter()
        .any(|&(a, _)| (a - cfg.alpha).abs() < 1e-12)
    {
        return Err(CliError::validation(format!(
            "no KS coefficient for alpha = {}; add it to gof.ks_table",
            cfg.alpha
        )));
    }
    let ctx = Context {
        config: cfg,
        seed: cli.seed,
        out_dir: cli.out_dir,
    };
    let text = match &cli.command {
        Command::Summary { input } => commands::cmd_summary(&ctx, input)?.1,
        Command::Fit { input, families } => {
            commands::cmd_fit(&ctx, input, &families_arg(families, &ctx.config)?)?.1
        }
        Command::Gof { input, families } => {
            commands::cmd_gof(&ctx, input, &families_arg(families, &ctx.config)?)?.1
        }
        Command::Optimize { input } => {
            commands::cmd_optimize(&ctx, input.as_deref(), cli.table_stub)?.1
        }
        Command::Plot {
            input,
            kind,
            family,
            svg,
        } => {
            let kinds = if kind == "all" {
                PlotKind::ALL.to_vec()
            } else {
                vec![PlotKind::parse(kind)
                    .ok_or_else(|| CliError::usage(format!("unknown plot kind '{kind}'")))?]
            };
            let family = evmix::Family::parse(family)
                .ok_or_else(|| CliError::usage(format!("unknown family '{family}'")))?;
            commands::cmd_plot(&ctx, input, &kinds, family, *svg)?.1
        }
        Command::Report { input } => commands::cmd_report(&ctx, input, cli.table_stub)?.1,
        Command::Synth {
            output,
            n,
            first_year,
        } => {
            let target = SynthTarget {
                n: *n,
                first_year: *first_year,
                ..SynthTarget::default()
            };
            commands::cmd_synth(&ctx, output, &target)?
        }
    };
    Ok(text)
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = Cli::command().after_long_help(config::help_text());
    let parsed = cmd
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: e.render().to_string(),
                    stderr: String::new(),
                },
                _ => {
                    let rendered = e.render().to_string();
                    let first = rendered
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .unwrap_or("invalid arguments")
                        .trim_start_matches("error: ");
                    Outcome {
                        code: Kind::Usage.exit_code(),
                        stdout: String::new(),
                        stderr: format!("{}\n", CliError::usage(first).line()),
                    }
                }
            };
        }
    };
    match dispatch(cli) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.kind.exit_code(),
            stdout: String::new(),
            stderr: format!("{}\n", e.line()),
        },
    }
}
