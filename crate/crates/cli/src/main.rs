//! `badic-qmc`: digital (T, s)-sequences driven by b-adic index sequences.

mod commands;
mod config;
mod plot;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use badic_qmc::selftest::{run_criterion, CriterionOutcome, CRITERIA};
use badic_qmc::ErrorClass;

use config::{Command, ConfigError, RunArgs, RunConfig};

const CONVENTIONS: &str = "\
Sequence specs (--seq), with rationals written u/v or u:
  natural                      s_n = n
  neg                          s_n = -n - 1
  alt                          s_n = 0, -1, 1, -2, 2, ...
  paper-ex2c                   s_n = (2n - 1)/4
  affine:a=<r>,c=<r>           s_n = a n + c            (c defaults to 0)
  rat:v=<int>,alpha=<r>        s_n = n/v + alpha        (alpha defaults to 0)
  quad:a=<r>,c=<r>,d=<r>       s_n = a n^2 + c n + d    (c, d default to 0)
  beatty:p=<int>,q=<int>,nmax=<int>   s_n = floor(p n / q), valid for n <= nmax
Denominators must be coprime to the base b = p^e.

Digit order: b-adic digits of s_n are least significant first (digit r is the
coefficient of b^r). Output digits of each coordinate are most significant first
(digit j is the coefficient of b^-j); exact CSV values are a/b^m.

Exit codes: 0 ok, 1 selftest failure, 2 configuration error, 3 mathematical
precondition violated, 4 size guard exceeded.";

#[derive(Parser)]
#[command(name = "badic-qmc", version, about = "Digital (T, s)-sequences driven by b-adic index sequences")]
#[command(after_help = CONVENTIONS)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate N points at precision m as CSV or JSON.
    #[command(after_help = CONVENTIONS)]
    Gen(RunArgs),
    /// T-profile of the matrices up to m, and net checks of blocks k with --k.
    #[command(after_help = CONVENTIONS)]
    Quality(RunArgs),
    /// Exact star discrepancy of the first N points (s <= 3).
    #[command(after_help = CONVENTIONS)]
    Disc(RunArgs),
    /// Composite bound on N D*_N for s_n = n + alpha; with --ns, a table against exact values.
    #[command(after_help = CONVENTIONS)]
    Bound(RunArgs),
    /// Scatter data for natural, alt and a rational sequence (--seq), plus an SVG.
    #[command(after_help = CONVENTIONS)]
    Plot(RunArgs),
    /// Run the acceptance criteria.
    #[command(after_help = CONVENTIONS)]
    Selftest(SelftestArgs),
}

#[derive(clap::Args)]
struct SelftestArgs {
    /// List the criteria and exit.
    #[arg(long)]
    list: bool,
    /// Comma-separated criterion ids (default: all).
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u32>>,
}

const PLOT_CRITERION: (u32, &str, u64) = (12, "plot output is byte-stable across thread counts", 60);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<badic_qmc::Error>() {
            return match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Math => 3,
                ErrorClass::Guard => 4,
            };
        }
        if cause.is::<ConfigError>() || cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    let (command, args) = match cmd {
        Cmd::Selftest(a) => return selftest(&a),
        Cmd::Gen(a) => (Command::Gen, a),
        Cmd::Quality(a) => (Command::Quality, a),
        Cmd::Disc(a) => (Command::Disc, a),
        Cmd::Bound(a) => (Command::Bound, a),
        Cmd::Plot(a) => (Command::Plot, a),
    };
    let config = RunConfig::resolve(command, &args)?;
    if args.print_config {
        let text = config.to_canonical();
        anyhow::ensure!(RunConfig::from_canonical(&text)? == config, "configuration does not round-trip");
        println!("{text}");
        return Ok(ExitCode::SUCCESS);
    }
    let setup = config.prepare()?;
    let pool = thread_pool(config.threads)?;
    pool.install(|| -> Result<()> {
        if command == Command::Plot {
            let dir = config.out.as_deref().unwrap_or("plot");
            std::fs::create_dir_all(dir).with_context(|| format!("creating {dir}"))?;
            for file in plot::artifacts(&config, &setup)? {
                let path = Path::new(dir).join(&file.name);
                std::fs::write(&path, &file.bytes).with_context(|| format!("writing {}", path.display()))?;
            }
            return Ok(());
        }
        let bytes = match command {
            Command::Gen => commands::gen(&config, &setup)?,
            Command::Quality => commands::quality(&config, &setup)?,
            Command::Disc => commands::disc(&config, &setup)?,
            Command::Bound => commands::bound(&config, &setup)?,
            Command::Plot => unreachable!(),
        };
        match &config.out {
            Some(path) => std::fs::write(path, &bytes).with_context(|| format!("writing {path}"))?,
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn selftest(args: &SelftestArgs) -> Result<ExitCode> {
    let all: Vec<(u32, &str, u64)> = CRITERIA.iter().copied().chain([PLOT_CRITERION]).collect();
    if args.list {
        for (id, title, limit) in &all {
            println!("{id:>2}. {title} (limit {limit} s)");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let ids: Vec<u32> = args.criteria.clone().unwrap_or_else(|| all.iter().map(|c| c.0).collect());
    if let Some(bad) = ids.iter().find(|id| !all.iter().any(|c| c.0 == **id)) {
        return Err(ConfigError(format!("no criterion {bad}")).into());
    }
    let mut failed = 0;
    for id in ids {
        let outcome = if id == PLOT_CRITERION.0 { plot_criterion() } else { run_criterion(id).expect("known id") };
        println!("{outcome}");
        failed += usize::from(!outcome.pass);
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Default plot rendered with 1 and 4 threads: same bytes, 3 x 500 points.
fn plot_criterion() -> CriterionOutcome {
    let (id, title, limit) = PLOT_CRITERION;
    let start = Instant::now();
    let check = || -> Result<(bool, String)> {
        let config = RunConfig::resolve(Command::Plot, &RunArgs::default())?;
        let setup = config.prepare()?;
        let one = thread_pool(Some(1))?.install(|| plot::artifacts(&config, &setup))?;
        let four = thread_pool(Some(4))?.install(|| plot::artifacts(&config, &setup))?;
        let same =
            one.len() == four.len() && one.iter().zip(&four).all(|(a, b)| a.name == b.name && a.bytes == b.bytes);
        let rows: usize = one
            .iter()
            .filter(|f| f.name.ends_with(".csv"))
            .map(|f| f.bytes.iter().filter(|&&c| c == b'\n').count() - 1)
            .sum();
        let circles = one
            .iter()
            .find(|f| f.name == "plot.svg")
            .map_or(0, |f| String::from_utf8_lossy(&f.bytes).matches("<circle").count());
        let pass = same && rows == 1500 && circles == 1500;
        Ok((pass, format!("{rows} CSV rows, {circles} SVG points, identical bytes across thread counts: {same}")))
    };
    let (mut pass, mut detail) = check().unwrap_or_else(|e| (false, format!("error: {e:#}")));
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit);
    if elapsed > limit {
        pass = false;
        detail.push_str("; time limit exceeded");
    }
    CriterionOutcome { id, title, pass, detail, elapsed, limit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&badic_qmc::Error::NotPrime(4).into()), 3);
        assert_eq!(exit_code(&badic_qmc::Error::SequenceSpec("x".into()).into()), 2);
        let guard = badic_qmc::Error::TooLarge { what: "x".into(), limit: "y".into() };
        assert_eq!(exit_code(&anyhow::Error::from(guard).context("while running")), 4);
        assert_eq!(exit_code(&ConfigError("x".into()).into()), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }

    #[test]
    fn plot_is_stable() {
        let outcome = plot_criterion();
        assert!(outcome.pass, "{outcome}");
    }
}
