//! `vdlab`: command-line front end.
//!
//! Exit codes: 0 verified / reverse confirmed / success, 1 usage error,
//! 2 inconclusive, 3 hypothesis failed, 4 investigate.

use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use vdlab::certificates::DistanceKind;
use vdlab::lab::{AuditMode, Theorem};
use vdlab::rng::default_seed;
use vdlab::runner::{self, Command, Format, FunctionalKind, RunConfig, SweepKind};

#[derive(Parser)]
#[command(name = "vdlab", version, about = "Numerical checks of volume-difference inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Budget {
    /// Initial number of candidate frames in extremum searches.
    #[arg(long, default_value_t = 4096)]
    frames: usize,
    /// Upper limit for the doubling of candidate frames (default 4 x frames).
    #[arg(long)]
    max_frames: Option<usize>,
    /// Monte Carlo samples per estimate.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Samples per candidate while screening.
    #[arg(long, default_value_t = 256)]
    screen_samples: usize,
    /// Directions used for hypothesis checks.
    #[arg(long, default_value_t = 10_000)]
    hypothesis_directions: usize,
    #[arg(long, env = "VDLAB_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    stream_id: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output format; `-` streams JSON to standard output.
    /// Defaults to csv for `constants`, json otherwise.
    #[arg(long, value_parser = ["json", "csv", "-"])]
    out: Option<String>,
    /// Report path (standard output when omitted).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify an inequality for a pair of bodies.
    Verify {
        #[arg(long)]
        theorem: Theorem,
        #[arg(long = "K")]
        k_body: String,
        #[arg(long = "L")]
        l_body: Option<String>,
        #[arg(long)]
        density: Option<String>,
        /// Ellipsoid certificate, as a body spec.
        #[arg(long = "D")]
        certificate: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Audit a reversed inequality for a pair of bodies.
    Audit {
        #[arg(long)]
        mode: AuditMode,
        #[arg(long = "K")]
        k_body: String,
        #[arg(long = "L")]
        l_body: String,
        /// Reference constant (mode default when omitted).
        #[arg(long)]
        c_ref: Option<f64>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Table of the constants c_{n,k}, p(n,n-k,1) and the asymptotic ratio.
    Constants {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[command(flatten)]
        budget: Budget,
    },
    /// Certified upper bound on a class distance.
    Distance {
        #[arg(long)]
        kind: DistanceKind,
        #[arg(long)]
        body: String,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Dimension sweeps of implied constants.
    Sweep {
        #[arg(long)]
        kind: SweepKind,
        /// Comma-separated dimensions (family default when omitted).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Evaluate a single functional of a body.
    Functional {
        #[arg(long)]
        name: FunctionalKind,
        #[arg(long)]
        body: String,
        /// Second body (mixed-v1).
        #[arg(long)]
        other: Option<String>,
        #[arg(long)]
        density: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<usize>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Re-run the config embedded in a JSON or CSV report.
    Rerun {
        report: String,
        #[arg(long)]
        workers: Option<usize>,
        /// Fail unless every field except the timestamp matches the original.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        output: Option<String>,
    },
}

fn config(command: Command, b: Budget) -> (RunConfig, Option<usize>) {
    let mut c = RunConfig::new(command);
    c.seed = b.seed.unwrap_or_else(default_seed);
    c.stream_id = b.stream_id;
    c.frames = b.frames;
    c.max_frames = b.max_frames.unwrap_or(4 * b.frames);
    c.samples = b.samples;
    c.screen_samples = b.screen_samples;
    c.hypothesis_directions = b.hypothesis_directions;
    c.format = if b.out.as_deref() == Some("csv") { Format::Csv } else { Format::Json };
    c.output = if b.out.as_deref() == Some("-") { Some("-".into()) } else { b.output };
    (c, b.workers)
}

fn without_timestamp(text: &str) -> anyhow::Result<serde_json::Value> {
    let mut v: serde_json::Value = serde_json::from_str(text)?;
    if let Some(o) = v.as_object_mut() {
        o.remove("generated_at");
    }
    Ok(v)
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    let (cfg, workers, original) = match cli.command {
        Cmd::Verify { theorem, k_body, l_body, density, certificate, k, budget } => {
            let (c, w) = config(Command::Verify { theorem, k_body, l_body, density, certificate, k }, budget);
            (c, w, None)
        }
        Cmd::Audit { mode, k_body, l_body, c_ref, budget } => {
            let (c, w) = config(Command::Audit { mode, k_body, l_body, c_ref }, budget);
            (c, w, None)
        }
        Cmd::Constants { n_min, n_max, mut budget } => {
            budget.out.get_or_insert_with(|| "csv".into());
            let (c, w) = config(Command::Constants { n_min, n_max }, budget);
            (c, w, None)
        }
        Cmd::Distance { kind, body, k, budget } => {
            let (c, w) = config(Command::Distance { kind, body, k }, budget);
            (c, w, None)
        }
        Cmd::Sweep { kind, dims, budget } => {
            let dims = if dims.is_empty() { kind.default_dims() } else { dims };
            let (c, w) = config(Command::Sweep { kind, dims }, budget);
            (c, w, None)
        }
        Cmd::Functional { name, body, other, density, k, p, q, budget } => {
            let (c, w) = config(Command::Functional { name, body, other, density, k, p, q }, budget);
            (c, w, None)
        }
        Cmd::Rerun { report, workers, check, output } => {
            let text = std::fs::read_to_string(&report).with_context(|| format!("cannot read {report}"))?;
            let mut c = runner::config_from_report(&text)?;
            let recorded = c.output.clone();
            if output.is_some() {
                c.output = output;
            }
            (c, workers, check.then_some((text, recorded)))
        }
    };
    let report = runner::run(&cfg, workers)?;
    if let Some((text, recorded)) = original {
        let mut as_recorded = report.clone();
        as_recorded.config.output = recorded;
        let fresh = runner::render(&as_recorded, cfg.format)?;
        let same = if cfg.format == Format::Json {
            without_timestamp(&text)? == without_timestamp(&fresh)?
        } else {
            text == fresh
        };
        if !same {
            bail!("rerun does not reproduce the original report");
        }
    }
    runner::write_report(&report)?;
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
