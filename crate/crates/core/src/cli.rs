//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::bounds::{generate, BoundError, Formulation};
use crate::eval::{evaluate_all, sample_distributions, Channel, EvalError, FactorizationSchema};
use crate::network::{MessageId, NetworkSpec, SpecError};
use crate::polytope::{default_directions, region_equal, slice_2d, slice_csv, PolytopeError, RegionEstimate};
use crate::presets;
use crate::vsi::{inner_region, lift, vsi_capacity, VsiError, VsiSettings, DEFAULT_K_MAX, VSI_TOL};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_CERTIFIED: u8 = 3;

/// Default tolerance when comparing two sampled unions.
pub const COMPARE_TOL: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "rateregion", version, about = "Rate-region bounds for cognitive multi-terminal networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the bounds of one formulation.
    Bounds(BoundsArgs),
    /// Compare the sampled Han and compact regions of a MAC.
    Compare(SampledArgs),
    /// Certify the very-strong-interference regime.
    Checkvsi(CheckVsiArgs),
    /// Write a 2-D slice of a sampled region as CSV.
    Slice(SliceArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct NetworkSource {
    /// Network description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Built-in network: p2p, classical-mac, sw-mac, ifc2cm.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
pub struct ChannelSource {
    /// Channel description file (JSON).
    #[arg(long, value_name = "PATH")]
    pub channel: Option<PathBuf>,
    /// Built-in channel; defaults to the network preset's pairing.
    #[arg(long, value_name = "NAME")]
    pub channel_preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub network: NetworkSource,
    #[arg(long, default_value = "inner")]
    pub formulation: Formulation,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampledArgs {
    #[command(flatten)]
    pub network: NetworkSource,
    #[command(flatten)]
    pub channel: ChannelSource,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, env = "RATEREGION_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckVsiArgs {
    #[command(flatten)]
    pub sampled: SampledArgs,
    /// Largest collection tried for condition iii.
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    /// Also write a slice of the certified region.
    #[arg(long, value_name = "Ra,Rb", requires = "slice_out")]
    pub axes: Option<String>,
    #[arg(long, value_name = "PATH", requires = "axes")]
    pub slice_out: Option<PathBuf>,
    #[arg(long, default_value_t = 91)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[command(flatten)]
    pub sampled: SampledArgs,
    #[arg(long, default_value = "inner")]
    pub formulation: Formulation,
    /// Two rates: 1-based positions or message ids such as `{1|1}`.
    #[arg(long, value_name = "Ra,Rb")]
    pub axes: String,
    #[arg(long, default_value_t = 91)]
    pub grid: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Vsi(#[from] VsiError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Text written to the output plus the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    n_tx: usize,
    n_rx: usize,
    messages: Vec<MessageId>,
}

pub fn parse_spec_json(text: &str) -> Result<NetworkSpec, String> {
    let file: SpecFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    NetworkSpec::new(file.n_tx, file.n_rx, file.messages).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_network(src: &NetworkSource) -> Result<NetworkSpec, CliError> {
    match (&src.spec, &src.preset) {
        (Some(path), _) => parse_spec_json(&read(path)?).map_err(|message| CliError::Parse {
            path: path.clone(),
            message,
        }),
        (None, Some(name)) => presets::network(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown preset '{name}' (known: {})",
                presets::NETWORK_PRESETS.join(", ")
            ))
        }),
        (None, None) => Err(CliError::Usage("one of --spec or --preset is required".into())),
    }
}

fn load_channel(net: &NetworkSource, src: &ChannelSource) -> Result<Channel, CliError> {
    let name = match (&src.channel, &src.channel_preset) {
        (Some(path), _) => {
            return Channel::parse_json(&read(path)?).map_err(|e| CliError::Parse {
                path: path.clone(),
                message: e.to_string(),
            })
        }
        (None, Some(name)) => name.as_str(),
        (None, None) => net
            .preset
            .as_deref()
            .and_then(presets::default_channel)
            .ok_or_else(|| CliError::Usage("a channel is required (--channel or --channel-preset)".into()))?,
    };
    presets::channel(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown channel preset '{name}' (known: {})",
            presets::CHANNEL_PRESETS.join(", ")
        ))
    })
}

fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("--tol must be a nonnegative number, got {tol}")))
    }
}

fn check_samples(n: usize) -> Result<usize, CliError> {
    if n == 0 {
        Err(CliError::Usage("--samples must be at least 1".into()))
    } else {
        Ok(n)
    }
}

/// Splits on commas outside braces.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '{' | '[' => depth += 1,
            '}' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_index_list(s: &str) -> Option<Vec<usize>> {
    let s = s.trim().trim_start_matches('{').trim_end_matches('}');
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

/// Accepts a 1-based position, `{1|1,2}`, `R[{1|1,2}]` or `R_{1->{1,2}}`.
pub fn parse_rate_axis(spec: &NetworkSpec, text: &str) -> Result<usize, CliError> {
    let bad = || CliError::Usage(format!("cannot interpret axis '{text}'"));
    let t = text.trim();
    if let Ok(k) = t.parse::<usize>() {
        return if (1..=spec.len()).contains(&k) {
            Ok(k - 1)
        } else {
            Err(CliError::Usage(format!("axis {k} out of range 1..={}", spec.len())))
        };
    }
    let t = t.strip_prefix('R').unwrap_or(t);
    let t = t.strip_prefix('_').unwrap_or(t);
    let t = t.strip_prefix('[').and_then(|v| v.strip_suffix(']')).unwrap_or(t);
    let (tx, rx) = if let Some((a, b)) = t.split_once("->") {
        let a = a.strip_prefix('{').unwrap_or(a);
        let b = b.strip_suffix('}').unwrap_or(b);
        (a, b)
    } else {
        let inner = t.strip_prefix('{').and_then(|v| v.strip_suffix('}')).ok_or_else(bad)?;
        inner.split_once('|').ok_or_else(bad)?
    };
    let id = MessageId::new(parse_index_list(tx).ok_or_else(bad)?, parse_index_list(rx).ok_or_else(bad)?);
    spec.position(&id)
        .ok_or_else(|| CliError::Usage(format!("no message {id} in the network")))
}

fn parse_axes(spec: &NetworkSpec, text: &str) -> Result<(usize, usize), CliError> {
    let parts = split_top_level(text);
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("--axes needs exactly two rates, got '{text}'")));
    }
    let a = parse_rate_axis(spec, parts[0])?;
    let b = parse_rate_axis(spec, parts[1])?;
    if a == b {
        return Err(CliError::Usage("--axes must name two different rates".into()));
    }
    Ok((a, b))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(","))
}

/// Sampled union of one formulation, in original rates.
pub fn sampled_region(
    spec: &NetworkSpec,
    channel: &Channel,
    formulation: Formulation,
    samples: usize,
    seed: u64,
) -> Result<RegionEstimate, CliError> {
    if formulation == Formulation::Inner {
        return Ok(inner_region(spec, channel, samples, seed)?);
    }
    let bounds = generate(spec, formulation)?;
    let schema = if formulation.uses_outer_auxiliaries() {
        FactorizationSchema::outer(spec, channel.input_alphabets())?
    } else {
        FactorizationSchema::inner(spec, channel.input_alphabets())?
    };
    let joints = sample_distributions(&schema, channel, samples, seed)?;
    let polys = match bounds.reduction() {
        Some(red) => evaluate_all(&bounds, &joints)?
            .iter()
            .map(|p| lift(red, p))
            .collect::<Result<_, _>>()?,
        None => evaluate_all(&bounds, &joints)?,
    };
    Ok(RegionEstimate::new(polys)?)
}

fn cmd_bounds(args: &BoundsArgs) -> Result<Outcome, CliError> {
    let spec = load_network(&args.network)?;
    let set = generate(&spec, args.formulation)?;
    let shown = set.re_expressed();
    let mut text = shown.to_string();
    if let Some(red) = set.reduction() {
        writeln!(text, "reduced={}", red.reduced().render_set(red.reduced().all())).expect("write to string");
    }
    writeln!(text, "formulation={} bounds={}", args.formulation, shown.len()).expect("write to string");
    Ok(Outcome { text, code: EXIT_OK })
}

fn cmd_compare(args: &SampledArgs) -> Result<Outcome, CliError> {
    let spec = load_network(&args.network)?;
    if !spec.is_mac() {
        return Err(BoundError::NotMac(spec.n_rx()).into());
    }
    let channel = load_channel(&args.network, &args.channel)?;
    let samples = check_samples(args.samples)?;
    let tol = check_tol(args.tol.unwrap_or(COMPARE_TOL))?;
    let han = sampled_region(&spec, &channel, Formulation::Han, samples, args.seed)?;
    let compact = sampled_region(&spec, &channel, Formulation::Compact, samples, args.seed)?;
    let dirs = default_directions(spec.len(), args.seed);
    let cmp = region_equal(&han, &compact, &dirs, tol)?;
    let text = format!(
        "seed={} samples={} tol={}\nformulations=han,compact directions={}\nmax_deviation={:.6} worst_direction={}\nverdict={}\n",
        args.seed,
        samples,
        tol,
        dirs.len(),
        cmp.max_deviation,
        fmt_vec(&cmp.worst_direction),
        if cmp.equal { "equal" } else { "different" }
    );
    Ok(Outcome { text, code: EXIT_OK })
}

fn cmd_checkvsi(args: &CheckVsiArgs) -> Result<Outcome, CliError> {
    let s = &args.sampled;
    let spec = load_network(&s.network)?;
    let channel = load_channel(&s.network, &s.channel)?;
    if args.k_max == 0 {
        return Err(CliError::Usage("--k-max must be at least 1".into()));
    }
    let axes = args.axes.as_deref().map(|a| parse_axes(&spec, a)).transpose()?;
    let settings = VsiSettings {
        samples: check_samples(s.samples)?,
        seed: s.seed,
        k_max: args.k_max,
        tol: check_tol(s.tol.unwrap_or(VSI_TOL))?,
    };
    let outcome = vsi_capacity(&spec, &channel, settings)?;
    if let (Some((a, b)), Some(path), Some(region)) = (axes, &args.slice_out, &outcome.region) {
        write_file(path, &slice_csv(&slice_2d(region, a, b, args.grid)?))?;
    }
    let code = if outcome.certificate.certified() {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFIED
    };
    Ok(Outcome {
        text: outcome.certificate.report(),
        code,
    })
}

fn cmd_slice(args: &SliceArgs) -> Result<Outcome, CliError> {
    let s = &args.sampled;
    let spec = load_network(&s.network)?;
    let channel = load_channel(&s.network, &s.channel)?;
    let (a, b) = parse_axes(&spec, &args.axes)?;
    if args.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let region = sampled_region(&spec, &channel, args.formulation, check_samples(s.samples)?, s.seed)?;
    Ok(Outcome {
        text: slice_csv(&slice_2d(&region, a, b, args.grid)?),
        code: EXIT_OK,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a parsed command and writes its output.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let (outcome, out) = match &cli.command {
        Command::Bounds(a) => (cmd_bounds(a)?, &a.out),
        Command::Compare(a) => (cmd_compare(a)?, &a.out),
        Command::Checkvsi(a) => (cmd_checkvsi(a)?, &a.sampled.out),
        Command::Slice(a) => (cmd_slice(a)?, &a.sampled.out),
    };
    match out {
        Some(path) => write_file(path, &outcome.text)?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome)
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match execute(&cli) {
        Ok(o) => ExitCode::from(o.code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
