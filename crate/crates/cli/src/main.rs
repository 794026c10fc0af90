mod inputs;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fsdim::analysis::{self, InequalityReport, Subject};
use fsdim::distributions::{kl_divergence, max_abs_diff, smooth, total_variation, JointDistribution};
use fsdim::entropy::{entropy_profile, KGrid};
use fsdim::gambler::{
    block_gambler_closed_form, copy_gambler, cover_gambler, from_distribution, stretch, uniform_gambler, GamblerSpec,
    DEFAULT_COVER_CAP,
};
use fsdim::stages::StageLog;
use fsdim::{io, Alphabet};

const DEFAULT_N: usize = 1 << 20;

#[derive(Parser)]
#[command(name = "fsdim", version, about = "Finite-state relative dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// Write a prefix of a generator to a sequence file (or stdout).
    Gen(GenArgs),
    /// Block-entropy profile of a sequence, optionally given an oracle.
    Entropy(EntropyArgs),
    /// Build or run finite-state relative gamblers.
    Gale {
        #[command(subcommand)]
        action: GaleCommand,
    },
    /// Stretch a gambler to a longer period.
    Stretch(StretchArgs),
    /// Smooth a probability vector or joint distribution away from zero.
    Smooth(SmoothArgs),
    /// Run an experiment and emit its report.
    Verify(VerifyArgs),
}

#[derive(Args, Serialize, Clone)]
struct AlphabetArgs {
    /// Digits 0..base as the alphabet.
    #[arg(long, default_value_t = 2)]
    base: usize,
    /// Explicit alphabet characters (overrides --base).
    #[arg(long)]
    alphabet: Option<String>,
}

impl AlphabetArgs {
    fn get(&self) -> Result<Alphabet> {
        inputs::alphabet(self.base, self.alphabet.as_deref())
    }
}

#[derive(Args, Serialize)]
struct GenArgs {
    /// champernowne, zeros, ones, constant, periodic, random, doubled,
    /// diluted0, diluted1, upper, lower, or a full descriptor.
    kind: String,
    /// Inner generator for doubled / diluted.
    #[arg(long)]
    of: Option<String>,
    #[arg(long)]
    symbol: Option<char>,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stage count for the oscillating constructions.
    #[arg(long)]
    stages: Option<usize>,
    #[arg(short = 'n')]
    n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Where to write the stage log of an oscillating construction.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
struct GridArgs {
    /// Fraction of the largest block count forming the tail window.
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    #[arg(long, default_value_t = 1.3)]
    ratio: f64,
    /// Use the stage boundaries of an oscillating construction as the grid.
    #[arg(long)]
    boundaries: bool,
}

impl GridArgs {
    fn grid(&self, log: Option<&StageLog>) -> Result<KGrid> {
        if self.boundaries {
            let log = log.context("--boundaries needs an upper:/lower: input")?;
            return Ok(KGrid::Prefixes {
                lengths: log.boundaries(),
            });
        }
        Ok(KGrid::Geometric {
            ratio: self.ratio,
            tail_fraction: self.tail_fraction,
        })
    }
}

#[derive(Args, Serialize)]
struct EntropyArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator descriptor instead of --input.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    oracle_gen: Option<String>,
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
enum GaleCommand {
    /// Run a gambler spec on an input and oracle.
    Run(GaleRunArgs),
    /// Emit a named gambler as a spec.
    Make(GaleMakeArgs),
}

#[derive(Args, Serialize)]
struct GaleRunArgs {
    #[arg(long)]
    gambler: PathBuf,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    oracle_gen: Option<String>,
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(long)]
    s: f64,
    /// Checkpoint spacing (default: about 1024 checkpoints).
    #[arg(long)]
    every: Option<usize>,
    /// Compare against the block-gambler closed form for this distribution.
    #[arg(long)]
    closed_form: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum GamblerKind {
    Copy,
    Uniform,
    Distribution,
    Empirical,
    Cover,
}

#[derive(Args, Serialize)]
struct GaleMakeArgs {
    #[arg(value_enum)]
    kind: GamblerKind,
    #[arg(long, default_value = "01")]
    sigma1: String,
    #[arg(long, default_value = "01")]
    sigma2: String,
    #[arg(long, default_value_t = 1)]
    window: usize,
    /// Joint distribution JSON (for `distribution`).
    #[arg(long)]
    dist: Option<PathBuf>,
    /// Input and oracle files whose block statistics define an `empirical` gambler.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_COVER_CAP)]
    cap: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct StretchArgs {
    #[arg(long)]
    gambler: PathBuf,
    #[arg(long)]
    len: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SmoothArgs {
    /// Joint distribution JSON.
    #[arg(long)]
    dist: Option<PathBuf>,
    /// Comma-separated probability vector.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    eps: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Experiment {
    ApLower,
    ApUpper,
    Wall,
    Vanlambalgen,
    Regular,
    Mutual,
    Chainrule,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    oracle_gen: Option<String>,
    /// First sequence (descriptor) for vanlambalgen / regular.
    #[arg(long)]
    a: Option<String>,
    /// Second sequence (descriptor) for vanlambalgen / regular.
    #[arg(long)]
    b: Option<String>,
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(short = 'd', default_value_t = 2)]
    d: usize,
    /// Residue order, e.g. "1,0" (default identity).
    #[arg(long)]
    sigma: Option<String>,
    /// Distinguished residue for ap-upper (default: minimise over all).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    #[arg(long, default_value_t = 0.1)]
    tol: f64,
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 1 << 14)]
    max_len: usize,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    alphabet: AlphabetArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    config: &'a Command,
    #[serde(flatten)]
    result: T,
}

fn emit<T: Serialize>(config: &Command, result: T, path: Option<&PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Output { config, result })?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FSDIM_THREADS") {
        let n: usize = v.parse().with_context(|| format!("FSDIM_THREADS={v} is not a number"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match configure_threads().and_then(|_| run(&cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: &Command) -> Result<u8> {
    match cmd {
        Command::Gen(a) => cmd_gen(cmd, a),
        Command::Entropy(a) => cmd_entropy(cmd, a),
        Command::Gale {
            action: GaleCommand::Run(a),
        } => cmd_gale_run(cmd, a),
        Command::Gale {
            action: GaleCommand::Make(a),
        } => cmd_gale_make(cmd, a),
        Command::Stretch(a) => cmd_stretch(cmd, a),
        Command::Smooth(a) => cmd_smooth(cmd, a),
        Command::Verify(a) => cmd_verify(cmd, a),
    }
}

fn gen_descriptor(a: &GenArgs) -> Result<String> {
    let need = |v: Option<String>, flag: &str| v.with_context(|| format!("{} needs --{flag}", a.kind));
    Ok(match a.kind.as_str() {
        "constant" => format!("constant:{}", need(a.symbol.map(String::from), "symbol")?),
        "periodic" => format!("periodic:{}", need(a.pattern.clone(), "pattern")?),
        "random" => format!("random:{}", need(a.seed.map(|s| s.to_string()), "seed")?),
        "doubled" | "diluted0" | "diluted1" => format!("{}:{}", a.kind, need(a.of.clone(), "of")?),
        "upper" | "lower" => format!("{}:{}", a.kind, need(a.stages.map(|s| s.to_string()), "stages")?),
        other => other.to_string(),
    })
}

fn cmd_gen(cmd: &Command, a: &GenArgs) -> Result<u8> {
    let alphabet = a.alphabet.get()?;
    let resolved = inputs::resolve(&gen_descriptor(a)?, &alphabet)?;
    let s = resolved.take(a.n)?;
    match &a.output {
        Some(p) => io::write_sequence(p, &s)?,
        None => println!("{}", s.to_text()?),
    }
    if let Some(p) = &a.log {
        let log = resolved.stage_log().context("--log needs an oscillating construction")?;
        emit(cmd, serde_json::json!({ "stage_log": log }), Some(p))?;
    }
    Ok(0)
}

fn cmd_entropy(cmd: &Command, a: &EntropyArgs) -> Result<u8> {
    let alphabet = a.alphabet.get()?;
    let explicit = a.alphabet.alphabet.is_some();
    let (x, log) = inputs::load(a.input.as_ref(), a.gen.as_deref(), &alphabet, explicit, a.n, None)?;
    let y = match (&a.oracle, &a.oracle_gen) {
        (None, None) => None,
        (p, d) => Some(inputs::load(p.as_ref(), d.as_deref(), &alphabet, explicit, Some(x.len()), None)?.0),
    };
    let grid = a.grid.grid(log.as_ref())?;
    let profile = entropy_profile(&x, y.as_ref(), a.lmax, &grid)?;
    emit(cmd, serde_json::json!({ "n": x.len(), "profile": profile }), a.output.as_ref())?;
    Ok(0)
}

fn read_gambler(path: &PathBuf) -> Result<fsdim::gambler::Fsrg> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: GamblerSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(spec.to_gambler()?)
}

fn read_distribution(path: &PathBuf) -> Result<JointDistribution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Serialize)]
struct GaleReport {
    steps: usize,
    s: f64,
    checkpoints: Vec<usize>,
    log2_capital: Vec<f64>,
    break_even_exponent: Option<f64>,
    live_accounts: usize,
    dead_at: Vec<Option<usize>>,
    closed_form: Option<ClosedForm>,
}

#[derive(Serialize)]
struct ClosedForm {
    blocks: usize,
    simulated: f64,
    closed_form: f64,
    relative_residual: f64,
    within_1e_6: bool,
}

fn cmd_gale_run(cmd: &Command, a: &GaleRunArgs) -> Result<u8> {
    let g = read_gambler(&a.gambler)?;
    let (x, _) = inputs::load(a.input.as_ref(), a.gen.as_deref(), g.sigma1(), true, a.n, None)?;
    let n = x.len();
    let need = n + g.window() - 1;
    let (y, _) = inputs::load(a.oracle.as_ref(), a.oracle_gen.as_deref(), g.sigma2(), true, None, Some(need))?;
    let every = a.every.unwrap_or((n / 1024).max(1));
    if every == 0 {
        bail!("--every must be >= 1");
    }
    let mut checkpoints: Vec<usize> = (0..=n).step_by(every).collect();
    if checkpoints.last() != Some(&n) {
        checkpoints.push(n);
    }
    let t = g.run_at(&x, &y, &checkpoints)?;
    let log2_capital = checkpoints
        .iter()
        .map(|&c| t.log2_capital(a.s, c))
        .collect::<fsdim::Result<Vec<_>>>()?;
    let break_even = if n == 0 { None } else { Some(t.break_even_exponent(n)?) };
    let closed_form = match &a.closed_form {
        None => None,
        Some(p) => {
            let dist = read_distribution(p)?;
            let k = n / dist.ell();
            let sim = t.log2_capital(a.s, k * dist.ell()).or_else(|_| {
                g.run_at(&x, &y, &[k * dist.ell()])?.log2_capital(a.s, k * dist.ell())
            })?;
            let cf = block_gambler_closed_form(&dist, &x, &y, k, a.s, g.capital()[0].log2())?;
            let rel = (sim - cf).abs() / cf.abs().max(1.0);
            Some(ClosedForm {
                blocks: k,
                simulated: sim,
                closed_form: cf,
                relative_residual: rel,
                within_1e_6: rel <= 1e-6,
            })
        }
    };
    let report = GaleReport {
        steps: n,
        s: a.s,
        checkpoints,
        log2_capital,
        break_even_exponent: break_even,
        live_accounts: t.live_accounts(n)?,
        dead_at: t.dead_at.clone(),
        closed_form,
    };
    emit(cmd, report, a.output.as_ref())?;
    Ok(0)
}

fn cmd_gale_make(cmd: &Command, a: &GaleMakeArgs) -> Result<u8> {
    let s1 = Alphabet::new(&a.sigma1)?;
    let s2 = Alphabet::new(&a.sigma2)?;
    let mut extra = serde_json::Map::new();
    let g = match a.kind {
        GamblerKind::Copy => {
            if s1 != s2 {
                bail!("the copy gambler needs sigma1 == sigma2");
            }
            copy_gambler(&s1)
        }
        GamblerKind::Uniform => uniform_gambler(&s1, &s2, a.window)?,
        GamblerKind::Distribution => {
            let mut dist = read_distribution(a.dist.as_ref().context("distribution needs --dist")?)?;
            if let Some(eps) = a.eps {
                dist = dist.smoothed(eps)?;
            }
            from_distribution(&dist)?
        }
        GamblerKind::Empirical => {
            let x = inputs::read(a.input.as_ref().context("empirical needs --input")?, Some(&s1))?;
            let y = inputs::read(a.oracle.as_ref().context("empirical needs --oracle")?, Some(&s2))?;
            let mut dist = fsdim::distributions::empirical_joint(&x, &y, a.window)?;
            dist = dist.smoothed(a.eps.unwrap_or(1e-3))?;
            extra.insert("distribution".into(), serde_json::to_value(&dist)?);
            from_distribution(&dist)?
        }
        GamblerKind::Cover => {
            let c = cover_gambler(a.window, &s1, &s2, a.eps.context("cover needs --eps")?, a.cap)?;
            extra.insert("representatives".into(), c.representatives.len().into());
            c.gambler
        }
    };
    let spec = GamblerSpec::from_gambler(&g)?;
    match &a.output {
        Some(p) => fs::write(p, serde_json::to_string_pretty(&spec)? + "\n")?,
        None => {
            extra.insert("gambler".into(), serde_json::to_value(&spec)?);
            emit(cmd, extra, None)?;
        }
    }
    Ok(0)
}

fn cmd_stretch(cmd: &Command, a: &StretchArgs) -> Result<u8> {
    let g = stretch(&read_gambler(&a.gambler)?, a.len)?;
    let spec = GamblerSpec::from_gambler(&g)?;
    match &a.output {
        Some(p) => fs::write(p, serde_json::to_string_pretty(&spec)? + "\n")?,
        None => emit(cmd, serde_json::json!({ "gambler": spec }), None)?,
    }
    Ok(0)
}

fn cmd_smooth(cmd: &Command, a: &SmoothArgs) -> Result<u8> {
    let p: Vec<f64> = match (&a.dist, &a.p) {
        (Some(d), None) => {
            let dist = read_distribution(d)?;
            let q = dist.smoothed(a.eps)?;
            let (pw, qw) = (dist.weights(), q.weights());
            emit(
                cmd,
                serde_json::json!({
                    "smoothed": q,
                    "max_abs_diff": max_abs_diff(pw, qw),
                    "total_variation": total_variation(pw, qw)?,
                    "kl_divergence": kl_divergence(pw, qw)?,
                }),
                a.output.as_ref(),
            )?;
            return Ok(0);
        }
        (None, Some(p)) => p
            .split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad probability '{t}'")))
            .collect::<Result<_>>()?,
        _ => bail!("give exactly one of --dist and --p"),
    };
    let q = smooth(&p, a.eps)?;
    emit(
        cmd,
        serde_json::json!({
            "q": q,
            "max_abs_diff": max_abs_diff(&p, &q),
            "total_variation": total_variation(&p, &q)?,
            "kl_divergence": kl_divergence(&p, &q)?,
        }),
        a.output.as_ref(),
    )?;
    Ok(0)
}

fn parse_sigma(s: Option<&str>, d: usize) -> Result<Vec<usize>> {
    match s {
        None => Ok((0..d).collect()),
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse().with_context(|| format!("bad residue '{t}'")))
            .collect(),
    }
}

fn cmd_verify(cmd: &Command, a: &VerifyArgs) -> Result<u8> {
    let alphabet = a.alphabet.get()?;
    let explicit = a.alphabet.alphabet.is_some();
    let load_x = || -> Result<(Subject, Option<StageLog>)> {
        let (x, log) = inputs::load(a.input.as_ref(), a.gen.as_deref(), &alphabet, explicit, a.n, Some(DEFAULT_N))?;
        Ok((Subject::new(label(a.input.as_ref(), a.gen.as_deref()), x), log))
    };
    let pair = || -> Result<(Subject, Subject, Option<StageLog>)> {
        let da = a.a.as_deref().context("--a is required")?;
        let db = a.b.as_deref().context("--b is required")?;
        let (x, log) = inputs::load(None, Some(da), &alphabet, explicit, a.n, Some(DEFAULT_N))?;
        let (y, _) = inputs::load(None, Some(db), &alphabet, explicit, Some(x.len()), None)?;
        Ok((Subject::new(da, x), Subject::new(db, y), log))
    };
    let report: InequalityReport = match a.experiment {
        Experiment::ApLower | Experiment::ApUpper => {
            let (x, log) = load_x()?;
            let sigma = parse_sigma(a.sigma.as_deref(), a.d)?;
            let grid = a.grid.grid(log.as_ref())?;
            if a.experiment == Experiment::ApLower {
                analysis::verify_ap_lower(&x, a.d, &sigma, a.lmax, &grid)?
            } else {
                analysis::verify_ap_upper(&x, a.d, &sigma, a.m, a.lmax, &grid)?
            }
        }
        Experiment::Wall => {
            let (x, log) = load_x()?;
            analysis::verify_wall_strength(&x, a.d, a.lmax, a.tol, &a.grid.grid(log.as_ref())?)?
        }
        Experiment::Vanlambalgen | Experiment::Regular => {
            let (x, y, log) = pair()?;
            let grid = a.grid.grid(log.as_ref())?;
            if a.experiment == Experiment::Vanlambalgen {
                analysis::verify_van_lambalgen(&x, &y, a.lmax, a.tol, &grid)?
            } else {
                analysis::verify_regular_equation(&x, &y, a.lmax, a.tol, &grid)?
            }
        }
        Experiment::Mutual => {
            let (x, log) = load_x()?;
            let (y, _) = inputs::load(
                a.oracle.as_ref(),
                a.oracle_gen.as_deref(),
                &alphabet,
                explicit,
                Some(x.data.len()),
                None,
            )?;
            let y = Subject::new(label(a.oracle.as_ref(), a.oracle_gen.as_deref()), y);
            analysis::verify_mutual_dim_sandwich(&x, &y, a.lmax, &a.grid.grid(log.as_ref())?, Some(a.tol))?
        }
        Experiment::Chainrule => analysis::verify_identities_random(a.seed, a.instances, a.max_len)?,
    };
    let code = report.status.exit_code() as u8;
    emit(cmd, serde_json::json!({ "report": report }), a.output.as_ref())?;
    Ok(code)
}

fn label(path: Option<&PathBuf>, desc: Option<&str>) -> String {
    match (path, desc) {
        (Some(p), _) => format!("file:{}", p.display()),
        (None, Some(d)) => d.to_string(),
        (None, None) => String::new(),
    }
}
