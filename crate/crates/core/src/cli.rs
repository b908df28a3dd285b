//! `lsgate` command line: evolve, ensemble, scan and check.
//!
//! Config keys can be overridden with dotted flags such as
//! `--drive.omega=1.5` or `--modes.0.nbar=2`. Curves and tables are written as
//! CSV; every run also writes `<out>.json` holding the run manifest.
//!
//! Exit codes: 0 success, 1 validation failure, 2 runtime failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector4;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analysis::{gate_time_scan, plus_plus_minus_minus, standard_observables, ScanRow};
use crate::dynamics::{ensemble_member, run_ensemble, uniform_grid, EnsembleOptions, JumpOperatorSet, TrajectoryOptions};
use crate::effective::build_effective;
use crate::error::{Error, Result};
use crate::hamiltonians::{build, HamiltonianKind};
use crate::hilbert::kets;
use crate::model::{detuning_margin, lamb_dicke_margin, recommended_truncation, ChainConfig, DEFAULT_DETUNING_FACTOR};

pub const THREADS_ENV: &str = "LSGATE_THREADS";

/// Time span of the default benchmark runs, used to size the default truncation.
pub const DEFAULT_HORIZON: f64 = 1100.0;

#[derive(Debug, Parser)]
#[command(name = "lsgate", version, about = "Light-shift gate simulations for two trapped ions")]
pub struct Cli {
    /// Worker threads (default: $LSGATE_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single trajectory (deterministic when heating is off).
    Evolve(EvolveArgs),
    /// Thermal Monte Carlo ensemble.
    Ensemble(EnsembleArgs),
    /// Gate time and detuning margin over an (Ω, η₁₁) grid.
    Scan(ScanArgs),
    /// Validity report for a configuration.
    Check(CheckArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// JSON config; the thermal benchmark (truncation sized for heating up to
    /// t = 1100) when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Internal input: plus-minus, pp-mm, ee, eg, ge, gg, bell-plus, bell-minus.
    #[arg(long, default_value = "plus-minus")]
    pub psi0: String,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub t_max: f64,
    /// Output sampling interval.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// ld1, full or dressed.
    #[arg(long, default_value = "ld1")]
    pub kind: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Zero all heating rates.
    #[arg(long)]
    pub no_heating: bool,
    /// Skip the Lamb-Dicke check.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Initial Fock numbers, e.g. 1,0; thermal sample from the seed otherwise.
    #[arg(long, value_delimiter = ',')]
    pub fock: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 25)]
    pub n_traj: usize,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Ω values: `start:stop:count` or a comma list.
    #[arg(long, default_value = "1.05:1.70:66")]
    pub omega: String,
    /// η₁₁ values: `start:stop:count` or a comma list.
    #[arg(long, default_value = "0.005:0.05:46")]
    pub eta: String,
    #[arg(long, default_value_t = DEFAULT_DETUNING_FACTOR)]
    pub factor: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DETUNING_FACTOR)]
    pub factor: f64,
    /// Horizon for the truncation recommendation.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: f64,
}

/// Failure classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn validation(e: Error) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: Error) -> CliError {
    match e {
        Error::InvalidConfig(_)
        | Error::LambDicke { .. }
        | Error::Resonance { .. }
        | Error::ZeroGateFrequency
        | Error::Json(_)
        | Error::DimensionMismatch { .. } => CliError::Validation(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Splits `--a.b=value` / `--a.b value` overrides from the clap arguments.
pub fn split_overrides(args: Vec<OsString>) -> std::result::Result<(Vec<OsString>, Vec<(String, String)>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        let Some(body) = s.strip_prefix("--") else {
            rest.push(a);
            continue;
        };
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !key.contains('.') {
            rest.push(a);
            continue;
        }
        let value = match value {
            Some(v) => v,
            None => it
                .next()
                .map(|v| v.to_string_lossy().into_owned())
                .ok_or_else(|| CliError::Validation(format!("override --{key} needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

/// Sets a dotted path inside a JSON config. Values are parsed as JSON, with a
/// bare string as fallback.
pub fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if !map.contains_key(*part) {
                    return Err(Error::InvalidConfig(format!("unknown config key `{key}`")));
                }
                map.get_mut(*part).unwrap()
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("`{part}` in `{key}` is not an index")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::InvalidConfig(format!("index {idx} out of range in `{key}`")))?
            }
            _ => return Err(Error::InvalidConfig(format!("`{key}` descends into a scalar"))),
        };
        if last {
            *node = value;
            return Ok(());
        }
    }
    Ok(())
}

pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<ChainConfig> {
    let base = match path {
        Some(p) => ChainConfig::load(p)?,
        None => ChainConfig::thermal_benchmark().with_recommended_truncation(DEFAULT_HORIZON, 1e-3),
    };
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut v = serde_json::to_value(&base)?;
    for (k, raw) in overrides {
        apply_override(&mut v, k, raw)?;
    }
    Ok(serde_json::from_value(v)?)
}

pub fn parse_internal(name: &str) -> Result<Vector4<C64>> {
    let (e, g) = (kets::e(), kets::g());
    Ok(match name {
        "plus-minus" => kets::pair(&kets::plus(), &kets::minus()),
        "pp-mm" => plus_plus_minus_minus(),
        "ee" => kets::pair(&e, &e),
        "eg" => kets::pair(&e, &g),
        "ge" => kets::pair(&g, &e),
        "gg" => kets::pair(&g, &g),
        "bell-plus" => kets::bell(1.0),
        "bell-minus" => kets::bell(-1.0),
        other => return Err(Error::InvalidConfig(format!("unknown internal state `{other}`"))),
    })
}

/// `start:stop:count` (inclusive) or `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("bad grid `{spec}`"));
    if let [a, b, n] = spec.split(':').collect::<Vec<_>>()[..] {
        let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        return match n {
            0 => Err(bad()),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
        };
    }
    spec.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect()
}

/// Plain decimal with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 30) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".into() } else { t.to_string() }
    } else {
        s
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    /// Hash of the inputs; repeated in the first line of every output file.
    pub run_hash: String,
    pub master_seed: Option<u64>,
    pub config: Option<ChainConfig>,
    pub parameters: Value,
    pub started_unix: f64,
    pub wall_seconds: f64,
    pub outputs: Vec<OutputFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<Value>,
}

fn sha_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn run_hash(command: &str, config: Option<&ChainConfig>, params: &Value) -> String {
    let body = serde_json::json!({ "command": command, "config": config, "parameters": params });
    sha_hex(body.to_string().as_bytes())
}

struct Run {
    command: &'static str,
    config: Option<ChainConfig>,
    params: Value,
    seed: Option<u64>,
    hash: String,
    started: f64,
    clock: Instant,
}

impl Run {
    fn new(command: &'static str, config: Option<ChainConfig>, params: Value, seed: Option<u64>) -> Self {
        let hash = run_hash(command, config.as_ref(), &params);
        let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Self { command, config, params, seed, hash, started, clock: Instant::now() }
    }

    fn write_csv(&self, path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<OutputFile> {
        let mut text = format!("# run {}\n{}\n", self.hash, header.join(","));
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, &text)?;
        Ok(OutputFile { path: path.display().to_string(), sha256: sha_hex(text.as_bytes()) })
    }

    fn finish(self, out: &Path, outputs: Vec<OutputFile>, extra: Option<Value>) -> Result<PathBuf> {
        let manifest = RunManifest {
            artifact: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            run_hash: self.hash,
            master_seed: self.seed,
            config: self.config,
            parameters: self.params,
            started_unix: self.started,
            wall_seconds: self.clock.elapsed().as_secs_f64(),
            outputs,
            extra,
        };
        let path = sidecar_path(out);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

/// `<out>.json` next to the CSV.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn prepare(run: &RunArgs, overrides: &[(String, String)]) -> std::result::Result<(ChainConfig, HamiltonianKind, Vector4<C64>), CliError> {
    let mut cfg = load_config(run.config.as_deref(), overrides).map_err(validation)?;
    if run.no_heating {
        cfg = cfg.without_heating();
    }
    if run.force { cfg.validate_structure() } else { cfg.validate() }.map_err(validation)?;
    if !(run.dt > 0.0) || !(run.t_max >= 0.0) {
        return Err(CliError::Validation("need dt > 0 and t_max >= 0".into()));
    }
    let kind: HamiltonianKind = run.kind.parse().map_err(validation)?;
    let phi = parse_internal(&run.psi0).map_err(validation)?;
    Ok((cfg, kind, phi))
}

fn run_params(run: &RunArgs) -> Value {
    serde_json::json!({
        "psi0": run.psi0, "t_max": run.t_max, "dt": run.dt, "kind": run.kind,
        "seed": run.seed, "no_heating": run.no_heating, "force": run.force,
    })
}

fn cmd_evolve(a: &EvolveArgs, overrides: &[(String, String)]) -> std::result::Result<PathBuf, CliError> {
    let (cfg, kind, phi) = prepare(&a.run, overrides)?;
    let grid = uniform_grid(a.run.t_max, a.run.dt);
    let obs = standard_observables(&cfg, &phi);
    let mut params = run_params(&a.run);
    params["fock"] = serde_json::json!(a.fock);
    let run = Run::new("evolve", Some(cfg.clone()), params, Some(a.run.seed));
    let opts = EnsembleOptions { kind, grid: grid.clone(), trajectory: TrajectoryOptions::default() };
    let ham = build(kind, &cfg).map_err(runtime)?;
    let jumps = JumpOperatorSet::from_config(&cfg, ham.layout()).map_err(runtime)?;
    let (fock, traj) = match &a.fock {
        Some(f) => {
            if f.len() != cfg.mode_count() || f.iter().zip(&cfg.modes).any(|(n, m)| *n > m.n_max) {
                return Err(CliError::Validation("--fock must give one in-range number per mode".into()));
            }
            let psi0 = crate::hilbert::StateVector::product(ham.layout(), &phi, f).map_err(runtime)?;
            let mut rng = crate::dynamics::trajectory_rng(a.run.seed, 0);
            let t = crate::dynamics::mcwf_trajectory_with(ham.as_ref(), &psi0, &jumps, &grid, &obs, &opts.trajectory, &mut rng)
                .map_err(runtime)?;
            (f.clone(), t)
        }
        None => ensemble_member(&cfg, ham.as_ref(), &jumps, &phi, &obs, &opts, a.run.seed, 0).map_err(runtime)?,
    };
    let mut header = vec!["t".to_string()];
    header.extend(obs.iter().map(|o| o.name.clone()));
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| std::iter::once(fmt_num(t)).chain(traj.samples.iter().map(|c| fmt_num(c[i]))).collect())
        .collect();
    let csv = run.write_csv(&a.run.out, &header, &rows).map_err(runtime)?;
    let extra = serde_json::json!({
        "initial_fock": fock, "jumps": traj.jumps, "leakage": traj.leakage, "flagged": traj.flagged,
    });
    run.finish(&a.run.out, vec![csv], Some(extra)).map_err(runtime)
}

fn cmd_ensemble(a: &EnsembleArgs, overrides: &[(String, String)]) -> std::result::Result<PathBuf, CliError> {
    if a.n_traj == 0 {
        return Err(CliError::Validation("n_traj must be at least 1".into()));
    }
    let (cfg, kind, phi) = prepare(&a.run, overrides)?;
    let grid = uniform_grid(a.run.t_max, a.run.dt);
    let obs = standard_observables(&cfg, &phi);
    let mut params = run_params(&a.run);
    params["n_traj"] = a.n_traj.into();
    let run = Run::new("ensemble", Some(cfg.clone()), params, Some(a.run.seed));
    let opts = EnsembleOptions { kind, grid: grid.clone(), trajectory: TrajectoryOptions::default() };
    let res = run_ensemble(&cfg, &phi, a.n_traj, a.run.seed, &obs, &opts).map_err(runtime)?;
    let mut header = vec!["t".to_string()];
    for n in &res.names {
        header.push(format!("{n}_mean"));
        header.push(format!("{n}_stderr"));
    }
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut r = vec![fmt_num(t)];
            for k in 0..res.names.len() {
                r.push(fmt_num(res.mean[k][i]));
                r.push(fmt_num(res.stderr[k][i]));
            }
            r
        })
        .collect();
    let csv = run.write_csv(&a.run.out, &header, &rows).map_err(runtime)?;
    let extra = serde_json::json!({
        "n_traj": res.n_traj,
        "jump_counts": res.jump_counts,
        "mean_jumps": res.mean_jumps(),
        "initial_fock": res.initial_fock,
        "leakage": res.leakage,
        "flagged": res.flagged,
        "flagged_fraction": res.flagged_fraction(),
    });
    run.finish(&a.run.out, vec![csv], Some(extra)).map_err(runtime)
}

fn scan_row(r: &ScanRow) -> Vec<String> {
    vec![
        fmt_num(r.omega),
        fmt_num(r.eta),
        r.tau1.map_or("nan".into(), fmt_num),
        r.margin.map_or("nan".into(), fmt_num),
        r.pass.to_string(),
        r.valid.to_string(),
    ]
}

fn cmd_scan(a: &ScanArgs) -> std::result::Result<PathBuf, CliError> {
    let omegas = parse_grid(&a.omega).map_err(validation)?;
    let etas = parse_grid(&a.eta).map_err(validation)?;
    let params = serde_json::json!({ "omega": a.omega, "eta": a.eta, "factor": a.factor });
    let run = Run::new("scan", None, params, None);
    let rows: Vec<Vec<String>> = gate_time_scan(&omegas, &etas, a.factor).iter().map(scan_row).collect();
    let header: Vec<String> = ["omega", "eta", "tau1", "margin", "pass", "valid"].map(String::from).to_vec();
    let csv = run.write_csv(&a.out, &header, &rows).map_err(runtime)?;
    run.finish(&a.out, vec![csv], None).map_err(runtime)
}

/// The `check` report text and whether every check passed.
pub fn check_report(cfg: &ChainConfig, factor: f64, horizon: f64) -> (String, bool) {
    let mut s = String::new();
    let mut ok = true;
    let _ = writeln!(s, "Omega = {}  F = {}", fmt_num(cfg.drive.omega), fmt_num(cfg.drive.echo_freq));
    if let Err(e) = cfg.validate_structure() {
        let _ = writeln!(s, "config: FAIL ({e})");
        return (s, false);
    }
    for (p, m) in lamb_dicke_margin(cfg).iter().enumerate() {
        let pass = *m < cfg.ld_threshold;
        ok &= pass;
        let _ = writeln!(
            s,
            "Lamb-Dicke mode {}: eta*sqrt(nbar+1) = {} (threshold {}) {}",
            p + 1,
            fmt_num(*m),
            fmt_num(cfg.ld_threshold),
            if pass { "ok" } else { "FAIL" }
        );
    }
    match detuning_margin(cfg, factor) {
        Ok(d) => {
            for (p, r) in d.ratios.iter().enumerate() {
                let _ = writeln!(s, "detuning mode {}: ratios {} {}", p + 1, fmt_num(r[0]), fmt_num(r[1]));
            }
            let _ = writeln!(
                s,
                "detuning margin: min ratio {} (mode {}, ion {}) vs factor {} {}",
                fmt_num(d.min_ratio),
                d.binding.0 + 1,
                d.binding.1 + 1,
                fmt_num(factor),
                if d.pass { "ok" } else { "MARGINAL" }
            );
            ok &= d.pass;
        }
        Err(e) => {
            let _ = writeln!(s, "detuning margin: FAIL ({e})");
            ok = false;
        }
    }
    match build_effective(cfg) {
        Ok(m) => {
            let _ = writeln!(s, "gate frequency omega = {}", fmt_num(m.omega_gate));
            match m.gate_time() {
                Ok(t) => {
                    let _ = writeln!(s, "gate time tau1 = {}", fmt_num(t));
                }
                Err(_) => {
                    let _ = writeln!(s, "gate time tau1: undefined (omega = 0)");
                    ok = false;
                }
            }
        }
        Err(e) => {
            let _ = writeln!(s, "effective model: FAIL ({e})");
            ok = false;
        }
    }
    for (p, m) in cfg.modes.iter().enumerate() {
        let _ = writeln!(
            s,
            "truncation mode {}: n_max = {}, recommended {} for horizon {}",
            p + 1,
            m.n_max,
            recommended_truncation(m, horizon, 1e-3),
            fmt_num(horizon)
        );
    }
    let _ = writeln!(s, "{}", if ok { "all checks passed" } else { "checks failed" });
    (s, ok)
}

fn cmd_check(a: &CheckArgs, overrides: &[(String, String)]) -> std::result::Result<bool, CliError> {
    let cfg = load_config(a.config.as_deref(), overrides).map_err(validation)?;
    let (text, ok) = check_report(&cfg, a.factor, a.horizon);
    print!("{text}");
    Ok(ok)
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())).filter(|n| *n > 0)
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let (args, overrides) = match split_overrides(args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("{e}");
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(n) = thread_count(cli.threads) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Evolve(a) => cmd_evolve(a, &overrides).map(Some),
        Command::Ensemble(a) => cmd_ensemble(a, &overrides).map(Some),
        Command::Scan(a) => {
            if !overrides.is_empty() {
                Err(CliError::Validation("scan takes no config overrides".into()))
            } else {
                cmd_scan(a).map(Some)
            }
        }
        Command::Check(a) => match cmd_check(a, &overrides) {
            Ok(true) => Ok(None),
            Ok(false) => return 1,
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(Some(manifest)) => {
            let _ = writeln!(std::io::stderr(), "wrote {}", manifest.display());
            0
        }
        Ok(None) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
