//! Run configuration: command-line flags merged over an optional JSON file, then defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use badic_qmc::badic::BAdicStream;
use badic_qmc::engine::{BijectionFamily, ExportMode};
use badic_qmc::field::FieldSpec;
use badic_qmc::genmatrix::{builtin_set, load_matrix_set, MatrixSet};
use badic_qmc::inputseq::{parse_rational, parse_sequence_spec, IndexSequence};

/// A configuration problem detected before any computation.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Gen,
    Quality,
    Disc,
    Bound,
    Plot,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Quality => "quality",
            Command::Disc => "disc",
            Command::Bound => "bound",
            Command::Plot => "plot",
        }
    }

    /// Keys that may be set explicitly besides the ones every command accepts.
    fn extra_keys(self) -> &'static [&'static str] {
        match self {
            Command::Gen => &["seq", "N", "start", "format", "mode"],
            Command::Quality => &["seq", "k"],
            Command::Disc => &["seq", "N", "start", "ns", "format"],
            Command::Bound => &["alpha", "N", "ns", "format"],
            Command::Plot => &["seq", "N", "start", "mode"],
        }
    }
}

const COMMON_KEYS: [&str; 8] = ["p", "e", "matrix", "bijections", "s", "m", "out", "threads"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl From<Mode> for ExportMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => ExportMode::Exact,
            Mode::Float => ExportMode::Float,
        }
    }
}

/// Flags shared by the compute subcommands. Unset flags fall back to `--config`, then to
/// per-command defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// JSON file with any of the configuration keys (the format printed by --print-config).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as canonical JSON and exit.
    #[arg(long)]
    pub print_config: bool,
    /// Field order q = p^e, a prime power; the base is b = q.
    #[arg(long, value_name = "Q", value_parser = parse_field)]
    pub field: Option<[u32; 2]>,
    /// Generating matrices: identity | pairs | stirling, or a path to a matrix JSON file.
    #[arg(long)]
    pub matrix: Option<String>,
    /// JSON file with bijection tables {"q":..,"psi":[[..]],"lambda":[[[..]]]}.
    #[arg(long, value_name = "PATH")]
    pub bijections: Option<String>,
    /// Index sequence spec (grammar below).
    #[arg(long)]
    pub seq: Option<String>,
    /// Dimension.
    #[arg(long)]
    pub s: Option<usize>,
    /// Precision: output digits per coordinate (quality: largest m analysed).
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of points.
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// First index n.
    #[arg(long)]
    pub start: Option<u64>,
    /// Block indices to net-check, as `lo..hi` (inclusive) or a single `k`.
    #[arg(long, value_parser = parse_k_range)]
    pub k: Option<[u64; 2]>,
    /// Shift alpha for `bound` (rational `u/v`).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Comma-separated point counts for tables.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<u64>>,
    /// Output file (plot: output directory). Defaults to stdout.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// exact writes coordinates as a/b^m, float as the nearest double.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Worker threads (output does not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_field(text: &str) -> std::result::Result<[u32; 2], String> {
    let q: u64 = text.trim().parse().map_err(|_| format!("bad field order '{text}'"))?;
    match badic_qmc::arith::factorize(q).as_slice() {
        [(p, e)] => Ok([*p as u32, *e]),
        _ => Err(format!("{q} is not a prime power")),
    }
}

fn parse_k_range(text: &str) -> std::result::Result<[u64; 2], String> {
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad block index '{t}'"));
    match text.split_once("..") {
        Some((lo, hi)) => Ok([parse(lo)?, parse(hi)?]),
        None => {
            let k = parse(text)?;
            Ok([k, k])
        }
    }
}

/// The `--config` file: every key optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    command: Option<Command>,
    p: Option<u32>,
    e: Option<u32>,
    matrix: Option<String>,
    bijections: Option<String>,
    seq: Option<String>,
    s: Option<usize>,
    m: Option<usize>,
    #[serde(rename = "N")]
    n: Option<u64>,
    start: Option<u64>,
    k: Option<[u64; 2]>,
    alpha: Option<String>,
    ns: Option<Vec<u64>>,
    out: Option<String>,
    format: Option<Format>,
    mode: Option<Mode>,
    threads: Option<usize>,
}

/// A fully resolved run. Its compact JSON form is the canonical string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub p: u32,
    pub e: u32,
    pub matrix: String,
    pub bijections: Option<String>,
    pub seq: String,
    pub s: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub start: u64,
    pub k: Option<[u64; 2]>,
    pub alpha: String,
    pub ns: Option<Vec<u64>>,
    pub out: Option<String>,
    pub format: Format,
    pub mode: Mode,
    pub threads: Option<usize>,
}

impl RunConfig {
    fn defaults(command: Command) -> Self {
        let base = RunConfig {
            command,
            p: 2,
            e: 1,
            matrix: "identity".into(),
            bijections: None,
            seq: "natural".into(),
            s: 1,
            m: 16,
            n: 16,
            start: 0,
            k: None,
            alpha: "0".into(),
            ns: None,
            out: None,
            format: Format::Csv,
            mode: Mode::Exact,
            threads: None,
        };
        match command {
            Command::Gen | Command::Disc => base,
            Command::Quality => RunConfig { m: 8, format: Format::Json, ..base },
            Command::Bound => RunConfig { p: 3, n: 9, m: 40, format: Format::Json, ..base },
            Command::Plot => RunConfig {
                p: 5,
                matrix: "stirling".into(),
                seq: "paper-ex2c".into(),
                s: 2,
                n: 500,
                out: Some("plot".into()),
                ..base
            },
        }
    }

    /// Flags over the `--config` file over defaults; explicit keys must suit the command.
    pub fn resolve(command: Command, args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => load_config_file(path)?,
            None => ConfigFile::default(),
        };
        if let Some(c) = file.command {
            if c != command {
                return Err(config_error(format!("config file is for '{}', not '{}'", c.name(), command.name())));
            }
        }
        // a file key equal to the command default is not a choice (canonical files list all keys)
        let d = RunConfig::defaults(command);
        let differs = |v: Option<bool>| v.unwrap_or(false);
        let explicit = [
            ("p", args.field.is_some() || differs(file.p.map(|v| v != d.p))),
            ("e", args.field.is_some() || differs(file.e.map(|v| v != d.e))),
            ("matrix", args.matrix.is_some() || differs(file.matrix.as_ref().map(|v| *v != d.matrix))),
            ("bijections", args.bijections.is_some() || file.bijections.is_some()),
            ("seq", args.seq.is_some() || differs(file.seq.as_ref().map(|v| *v != d.seq))),
            ("s", args.s.is_some() || differs(file.s.map(|v| v != d.s))),
            ("m", args.m.is_some() || differs(file.m.map(|v| v != d.m))),
            ("N", args.n.is_some() || differs(file.n.map(|v| v != d.n))),
            ("start", args.start.is_some() || differs(file.start.map(|v| v != d.start))),
            ("k", args.k.is_some() || file.k.is_some()),
            ("alpha", args.alpha.is_some() || differs(file.alpha.as_ref().map(|v| *v != d.alpha))),
            ("ns", args.ns.is_some() || file.ns.is_some()),
            ("out", args.out.is_some() || file.out.is_some()),
            ("format", args.format.is_some() || differs(file.format.map(|v| v != d.format))),
            ("mode", args.mode.is_some() || differs(file.mode.map(|v| v != d.mode))),
            ("threads", args.threads.is_some() || file.threads.is_some()),
        ];
        for (key, set) in explicit {
            if set && !COMMON_KEYS.contains(&key) && !command.extra_keys().contains(&key) {
                return Err(config_error(format!("'{key}' does not apply to '{}'", command.name())));
            }
        }
        let config = RunConfig {
            command,
            p: args.field.map(|f| f[0]).or(file.p).unwrap_or(d.p),
            e: args.field.map(|f| f[1]).or(file.e).unwrap_or(d.e),
            matrix: args.matrix.clone().or(file.matrix).unwrap_or(d.matrix),
            bijections: args.bijections.clone().or(file.bijections),
            seq: args.seq.clone().or(file.seq).unwrap_or(d.seq),
            s: args.s.or(file.s).unwrap_or(d.s),
            m: args.m.or(file.m).unwrap_or(d.m),
            n: args.n.or(file.n).unwrap_or(d.n),
            start: args.start.or(file.start).unwrap_or(d.start),
            k: args.k.or(file.k),
            alpha: args.alpha.clone().or(file.alpha).unwrap_or(d.alpha),
            ns: args.ns.clone().or(file.ns),
            out: args.out.clone().or(file.out).or(d.out),
            format: args.format.or(file.format).unwrap_or(d.format),
            mode: args.mode.or(file.mode).unwrap_or(d.mode),
            threads: args.threads.or(file.threads),
        };
        config.check_ranges()?;
        Ok(config)
    }

    pub fn to_canonical(&self) -> String {
        serde_json::to_string(self).expect("configs always serialize")
    }

    pub fn from_canonical(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| config_error(format!("bad config: {e}")))?;
        config.check_ranges()?;
        Ok(config)
    }

    fn check_ranges(&self) -> Result<()> {
        if self.s == 0 || self.m == 0 || self.n == 0 {
            return Err(config_error("s, m and N must be at least 1"));
        }
        if let Some([lo, hi]) = self.k {
            if lo > hi {
                return Err(config_error(format!("empty block range {lo}..{hi}")));
            }
        }
        if self.ns.as_ref().is_some_and(|ns| ns.is_empty() || ns.contains(&0)) {
            return Err(config_error("ns must list positive point counts"));
        }
        if self.threads == Some(0) {
            return Err(config_error("threads must be at least 1"));
        }
        if self.command == Command::Plot && self.s != 2 {
            return Err(config_error("plot needs s = 2"));
        }
        if self.command == Command::Disc && self.s > 3 {
            return Err(badic_qmc::Error::TooLarge {
                what: format!("exact discrepancy in dimension {}", self.s),
                limit: "3".into(),
            }
            .into());
        }
        Ok(())
    }

    /// Largest point count the run touches.
    pub fn max_points(&self) -> u64 {
        self.ns.as_ref().and_then(|ns| ns.iter().copied().max()).unwrap_or(self.n)
    }

    /// Builds the field, matrices, bijections and sequence, rejecting inconsistent combinations.
    pub fn prepare(&self) -> Result<Setup> {
        let field = FieldSpec::new(self.p, self.e)?;
        let q = field.order();
        let depth = match self.command {
            Command::Bound => self.m.max(floor_log(self.max_points(), q) as usize + 1),
            _ => self.m,
        };
        let set = if Path::new(&self.matrix).extension().is_some_and(|x| x == "json") {
            let set = load_matrix_set(&self.matrix).with_context(|| format!("loading {}", self.matrix))?;
            if set.field() != &field {
                return Err(config_error(format!(
                    "matrix file is over GF({}^{}), run is over GF({}^{})",
                    set.field().p(),
                    set.field().e(),
                    self.p,
                    self.e
                )));
            }
            if set.s() != self.s {
                return Err(config_error(format!("matrix file has s = {}, pass --s {}", set.s(), set.s())));
            }
            set
        } else {
            builtin_set(&self.matrix, &field, self.s, depth)?
        };
        let bij = match &self.bijections {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
                BijectionFamily::from_json(&text)?
            }
            None => BijectionFamily::identity(q),
        };
        if bij.q != q {
            return Err(config_error(format!("bijections are for q = {}, run is over q = {q}", bij.q)));
        }
        let seq = parse_sequence_spec(&self.seq, q)?;
        let alpha = BAdicStream::from_ratio(&parse_rational(&self.alpha)?, q)?;
        Ok(Setup { set, bij, seq, alpha })
    }
}

fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

/// `floor(log_q n)` for `n >= 1`.
pub fn floor_log(n: u64, q: u32) -> u32 {
    let mut r = 0;
    let mut power = q as u128;
    while power <= n as u128 {
        power *= q as u128;
        r += 1;
    }
    r
}

/// Everything a command needs, built from a validated config.
pub struct Setup {
    pub set: MatrixSet,
    pub bij: BijectionFamily,
    pub seq: IndexSequence,
    pub alpha: BAdicStream,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> RunArgs {
        RunArgs::default()
    }

    #[test]
    fn defaults_round_trip() {
        for command in [Command::Gen, Command::Quality, Command::Disc, Command::Bound, Command::Plot] {
            let c = RunConfig::resolve(command, &args()).unwrap();
            let text = c.to_canonical();
            assert_eq!(RunConfig::from_canonical(&text).unwrap(), c);
            assert_eq!(RunConfig::from_canonical(&text).unwrap().to_canonical(), text);
        }
    }

    #[test]
    fn flags_override() {
        let a = RunArgs { field: Some([5, 1]), seq: Some("alt".into()), n: Some(500), s: Some(2), ..args() };
        let c = RunConfig::resolve(Command::Gen, &a).unwrap();
        assert_eq!((c.p, c.s, c.n, c.seq.as_str()), (5, 2, 500, "alt"));
        assert_eq!(c.m, 16);
    }

    #[test]
    fn invalid_combinations() {
        let a = RunArgs { alpha: Some("1/2".into()), ..args() };
        assert!(RunConfig::resolve(Command::Gen, &a).is_err());
        let a = RunArgs { s: Some(4), ..args() };
        let err = RunConfig::resolve(Command::Disc, &a).unwrap_err();
        assert!(err.downcast_ref::<badic_qmc::Error>().is_some());
        let a = RunArgs { s: Some(1), ..args() };
        assert!(RunConfig::resolve(Command::Plot, &a).is_err());
        let a = RunArgs { k: Some([3, 1]), ..args() };
        assert!(RunConfig::resolve(Command::Quality, &a).is_err());
        assert!(RunConfig::from_canonical(r#"{"command":"gen"}"#).is_err());
    }

    #[test]
    fn field_orders() {
        assert_eq!(parse_field("5"), Ok([5, 1]));
        assert_eq!(parse_field("4"), Ok([2, 2]));
        assert!(parse_field("6").is_err());
        assert!(parse_field("1").is_err());
    }

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("0..3"), Ok([0, 3]));
        assert_eq!(parse_k_range("2"), Ok([2, 2]));
        assert!(parse_k_range("a..b").is_err());
    }

    #[test]
    fn prepare_checks_consistency() {
        let c = RunConfig::resolve(Command::Plot, &args()).unwrap();
        let setup = c.prepare().unwrap();
        assert_eq!(setup.set.s(), 2);
        assert_eq!(setup.seq.spec(), "paper-ex2c");
        let a = RunArgs { matrix: Some("pairs".into()), field: Some([3, 1]), ..args() };
        assert!(RunConfig::resolve(Command::Gen, &a).unwrap().prepare().is_err());
        let a = RunArgs { seq: Some("rat:v=5".into()), field: Some([5, 1]), ..args() };
        assert!(RunConfig::resolve(Command::Gen, &a).unwrap().prepare().is_err());
    }

    #[test]
    fn logs() {
        assert_eq!(floor_log(1, 3), 0);
        assert_eq!(floor_log(8, 3), 1);
        assert_eq!(floor_log(9, 3), 2);
        assert_eq!(floor_log(729, 3), 6);
    }
}
