//! Command-line front end.
//!
//! Settings resolve as flags > config file (`--config`, flat `key=value`
//! lines, keys named like the long flags) > defaults. Exit codes: 0 success,
//! 1 usage or configuration error, 2 numerical failure, 3 failed verification.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{usage, Error, Result};
use crate::estimator::report;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::limit_theory::{j_lambda, j_lambda_limit, sigma_limit, variance_curve, verify_limits, LimitCheck};
use crate::montecarlo::{run_cauchy, run_consistency, MCConfig, MCRun};
use crate::ou_model::build_trajectory;
use crate::pathgen::{SamplePath, Sampler, SamplerChoice, TimeGrid};
use crate::stats::{ks_distance, Reference};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ouestim",
    version,
    about = "Drift estimation lab for the non-ergodic fractional OU process"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample driver paths and the OU solution; writes paths.csv
    Simulate(Common),
    /// Estimator report for one path (sampled, or read with --input); writes estimate.csv
    Estimate(Common),
    /// Consistency experiment; writes consistency.csv and consistency_summary.json
    McConsistency(Common),
    /// Cauchy-limit experiment at one horizon; writes cauchy.csv and cauchy_summary.json
    McCauchy(Common),
    /// Quadrature checks of the analytical limits; writes limits.csv
    VerifyLimits(Common),
    /// Deterministic oracle suite
    Selftest(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::McConsistency(_) => "mc-consistency",
            Command::McCauchy(_) => "mc-cauchy",
            Command::VerifyLimits(_) => "verify-limits",
            Command::Selftest(_) => "selftest",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate(c)
            | Command::Estimate(c)
            | Command::McConsistency(c)
            | Command::McCauchy(c)
            | Command::VerifyLimits(c)
            | Command::Selftest(c) => c,
        }
    }
}

#[derive(Debug, Args, Default)]
struct Common {
    /// Flat key=value file with defaults for any of the options below
    #[arg(long)]
    config: Option<PathBuf>,
    /// Driver family: fbm, sfbm, bifbm or bm
    #[arg(long)]
    kernel: Option<String>,
    /// Hurst parameter H
    #[arg(long)]
    hurst: Option<f64>,
    /// Bifractional parameter K
    #[arg(long = "k")]
    k: Option<f64>,
    /// Drift θ > 0
    #[arg(long)]
    theta: Option<f64>,
    /// Horizon(s), comma separated and increasing
    #[arg(long = "T", alias = "horizons", value_name = "T")]
    horizons: Option<String>,
    /// Grid steps per unit time
    #[arg(long = "n-per-unit")]
    n_per_unit: Option<f64>,
    /// Number of replicates (paths)
    #[arg(long)]
    replicates: Option<usize>,
    /// Random seed (required for sampling subcommands)
    #[arg(long)]
    seed: Option<u64>,
    /// auto, cholesky or circulant
    #[arg(long)]
    sampler: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature nodes per dimension
    #[arg(long = "n-quad")]
    n_quad: Option<usize>,
    /// Driver CSV for `estimate` (columns t and g; replicate optional)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Replicate to read from --input
    #[arg(long)]
    replicate: Option<u64>,
}

/// Fully resolved settings, echoed into every JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub kernel: KernelFamily,
    pub hurst: f64,
    pub k: f64,
    pub theta: f64,
    pub horizons: Vec<f64>,
    /// False when `horizons` is the built-in default.
    #[serde(skip)]
    pub horizons_given: bool,
    pub n_per_unit: f64,
    pub replicates: usize,
    pub seed: Option<u64>,
    pub sampler: SamplerChoice,
    pub out: PathBuf,
    pub n_quad: usize,
    pub input: Option<PathBuf>,
    pub replicate: u64,
    pub config_file: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 13] = [
    "kernel",
    "hurst",
    "k",
    "theta",
    "T",
    "n-per-unit",
    "replicates",
    "seed",
    "sampler",
    "out",
    "n-quad",
    "input",
    "replicate",
];

/// Parses a flat `key=value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = match key.trim() {
            "horizons" => "T",
            k => k,
        };
        if !CONFIG_KEYS.contains(&key) {
            return Err(usage(format!("config line {}: unknown key {key:?}", no + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<V: std::str::FromStr>(key: &str, raw: &str) -> Result<V> {
    raw.parse()
        .map_err(|_| usage(format!("invalid value {raw:?} for {key}")))
}

fn parse_horizons(raw: &str) -> Result<Vec<f64>> {
    raw.split(',').map(|s| parse_value("T", s.trim())).collect()
}

impl RunConfig {
    fn resolve(command: &Command) -> Result<Self> {
        let c = command.common();
        let file = match &c.config {
            Some(p) => parse_config_file(
                &fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?,
            )?,
            None => BTreeMap::new(),
        };
        let from_file = |key: &str| file.get(key).map(String::as_str);

        fn pick<V: std::str::FromStr>(flag: Option<V>, file: Option<&str>, key: &str, default: V) -> Result<V> {
            match (flag, file) {
                (Some(v), _) => Ok(v),
                (None, Some(raw)) => parse_value(key, raw),
                (None, None) => Ok(default),
            }
        }

        let kernel: KernelFamily = match (&c.kernel, from_file("kernel")) {
            (Some(s), _) => s.parse()?,
            (None, Some(s)) => s.parse()?,
            (None, None) => KernelFamily::Fbm,
        };
        let sampler: SamplerChoice = match (&c.sampler, from_file("sampler")) {
            (Some(s), _) => s.parse()?,
            (None, Some(s)) => s.parse()?,
            (None, None) => SamplerChoice::Auto,
        };
        let horizons = match (&c.horizons, from_file("T")) {
            (Some(s), _) => parse_horizons(s)?,
            (None, Some(s)) => parse_horizons(s)?,
            (None, None) => vec![10.0],
        };
        let default_replicates = match command {
            Command::Simulate(_) | Command::Estimate(_) => 1,
            _ => 200,
        };
        let seed = match (c.seed, from_file("seed")) {
            (Some(s), _) => Some(s),
            (None, Some(raw)) => Some(parse_value("seed", raw)?),
            (None, None) => None,
        };
        let input = c.input.clone().or_else(|| from_file("input").map(PathBuf::from));
        let cfg = RunConfig {
            subcommand: command.name().to_string(),
            kernel,
            hurst: pick(c.hurst, from_file("hurst"), "hurst", 0.7)?,
            k: pick(c.k, from_file("k"), "k", 1.0)?,
            theta: pick(c.theta, from_file("theta"), "theta", 1.0)?,
            horizons_given: c.horizons.is_some() || from_file("T").is_some(),
            horizons,
            n_per_unit: pick(c.n_per_unit, from_file("n-per-unit"), "n-per-unit", 100.0)?,
            replicates: pick(c.replicates, from_file("replicates"), "replicates", default_replicates)?,
            seed,
            sampler,
            out: pick(c.out.clone(), from_file("out"), "out", PathBuf::from("."))?,
            n_quad: pick(c.n_quad, from_file("n-quad"), "n-quad", 4096)?,
            input,
            replicate: pick(c.replicate, from_file("replicate"), "replicate", 0)?,
            config_file: c.config.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.kernel_spec()?;
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(usage(format!("--theta must be positive, got {}", self.theta)));
        }
        if self.horizons.is_empty()
            || self.horizons.iter().any(|&t| !(t > 0.0 && t.is_finite()))
            || self.horizons.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(usage(format!(
                "--T must list positive, strictly increasing horizons, got {:?}",
                self.horizons
            )));
        }
        if !(self.n_per_unit > 0.0 && self.n_per_unit.is_finite()) {
            return Err(usage(format!("--n-per-unit must be positive, got {}", self.n_per_unit)));
        }
        if self.replicates == 0 {
            return Err(usage("--replicates must be at least 1"));
        }
        let sampling = match self.subcommand.as_str() {
            "simulate" | "mc-consistency" | "mc-cauchy" => true,
            "estimate" => self.input.is_none(),
            _ => false,
        };
        if sampling && self.seed.is_none() {
            return Err(usage(format!("{} requires --seed", self.subcommand)));
        }
        if self.subcommand == "mc-cauchy" && self.horizons.len() != 1 {
            return Err(usage("mc-cauchy takes a single horizon --T"));
        }
        Ok(())
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec<f64>> {
        KernelSpec::new(self.kernel, self.hurst, self.k).map_err(|e| match e {
            Error::Domain(msg) => usage(msg),
            e => e,
        })
    }

    fn mc_config(&self) -> Result<MCConfig> {
        Ok(MCConfig {
            kernel: self.kernel_spec()?,
            theta: self.theta,
            horizons: self.horizons.clone(),
            points_per_unit: self.n_per_unit,
            replicates: self.replicates,
            seed: self.seed.expect("validated"),
            sampler: self.sampler,
        })
    }

    fn grid(&self) -> Result<TimeGrid<f64>> {
        let t = *self.horizons.last().expect("validated");
        TimeGrid::new(t, (t * self.n_per_unit).round() as usize)
    }
}

/// Round-trip formatting with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    usage(format!("cannot write {}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

fn prepare_out(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_error(&cfg.out, e))
}

#[derive(Serialize)]
struct Summary<'a, S: Serialize> {
    config: &'a RunConfig,
    #[serde(rename = "result")]
    body: S,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::resolve(&cli.command).and_then(|cfg| dispatch(&cli.command, &cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) | Error::Range(_) | Error::DegeneratePath { .. } => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<i32> {
    match command {
        Command::Simulate(_) => simulate(cfg),
        Command::Estimate(_) => estimate_cmd(cfg),
        Command::McConsistency(_) => mc_consistency(cfg),
        Command::McCauchy(_) => mc_cauchy(cfg),
        Command::VerifyLimits(_) => verify(cfg),
        Command::Selftest(_) => selftest(),
    }
}

fn simulate(cfg: &RunConfig) -> Result<i32> {
    prepare_out(cfg)?;
    let spec = cfg.kernel_spec()?;
    let grid = cfg.grid()?;
    let sampler = Sampler::new(&spec, &grid, cfg.sampler)?;
    let seed = cfg.seed.expect("validated");
    let scaled = cfg.theta * grid.horizon() > 700.0;
    let mut rows = Vec::with_capacity(cfg.replicates * (grid.steps() + 1));
    for rep in 0..cfg.replicates as u64 {
        let path = sampler.sample(seed, rep);
        let traj = build_trajectory(&path, cfg.theta)?;
        let second = if scaled {
            traj.xi().to_vec()
        } else {
            traj.materialize_x()?
        };
        for (k, (&g, &x)) in path.values().iter().zip(&second).enumerate() {
            rows.push(vec![rep.to_string(), fmt_num(grid.time(k)), fmt_num(g), fmt_num(x)]);
        }
    }
    write_csv(
        &cfg.out.join("paths.csv"),
        &["replicate", "t", "g", "x_or_xi_scaled"],
        rows,
    )?;
    #[derive(Serialize)]
    struct Body<'a> {
        x_or_xi_scaled: &'a str,
        sampler_used: String,
        grid_steps: usize,
    }
    let body = Body {
        x_or_xi_scaled: if scaled { "xi_scaled" } else { "x" },
        sampler_used: format!("{:?}", sampler.id()).to_lowercase(),
        grid_steps: grid.steps(),
    };
    write_json(&cfg.out.join("simulate_summary.json"), &Summary { config: cfg, body })?;
    Ok(EXIT_OK)
}

/// Reads a driver from a CSV with `t` and `g` columns on a uniform grid from 0.
pub fn read_driver_csv(path: &Path, replicate: u64) -> Result<SamplePath<f64>> {
    let bad = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (ti, gi) = match (col("t"), col("g")) {
        (Some(t), Some(g)) => (t, g),
        _ => return Err(bad("needs columns t and g".into())),
    };
    let ri = col("replicate");
    let mut ts = Vec::new();
    let mut gs = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if let Some(ri) = ri {
            let rep: u64 = rec[ri]
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad replicate {:?}", &rec[ri])))?;
            if rep != replicate {
                continue;
            }
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
        ts.push(parse(&rec[ti])?);
        gs.push(parse(&rec[gi])?);
    }
    if ts.len() < 3 {
        return Err(bad(format!("needs at least 3 points for replicate {replicate}")));
    }
    let n = ts.len() - 1;
    let grid = TimeGrid::new(ts[n], n).map_err(|e| bad(e.to_string()))?;
    if ts
        .iter()
        .enumerate()
        .any(|(k, &t)| (t - grid.time(k)).abs() > 1e-9 * grid.horizon())
    {
        return Err(bad("times must form a uniform grid starting at 0".into()));
    }
    SamplePath::from_values(grid, gs).map_err(|e| bad(e.to_string()))
}

fn estimate_cmd(cfg: &RunConfig) -> Result<i32> {
    prepare_out(cfg)?;
    let path = match &cfg.input {
        Some(p) => read_driver_csv(p, cfg.replicate)?,
        None => {
            let spec = cfg.kernel_spec()?;
            let grid = cfg.grid()?;
            Sampler::new(&spec, &grid, cfg.sampler)?.sample(cfg.seed.expect("validated"), cfg.replicate)
        }
    };
    let traj = build_trajectory(&path, cfg.theta)?;
    let grid = *path.grid();
    // an input file without explicit horizons is reported at its last time
    let horizons = if cfg.input.is_some() && !cfg.horizons_given {
        vec![grid.horizon()]
    } else {
        cfg.horizons.clone()
    };
    let mut rows = Vec::new();
    for &t in &horizons {
        let k = grid.index_of(t)?;
        let r = report(&traj, k)?;
        rows.push(vec![
            fmt_num(r.t),
            fmt_num(r.theta_hat),
            fmt_num(r.s_stable),
            fmt_opt(r.s_naive),
            fmt_num(r.d),
            fmt_num(r.z),
            fmt_num(r.psi),
            fmt_num(r.r_scaled),
        ]);
    }
    write_csv(
        &cfg.out.join("estimate.csv"),
        &[
            "t",
            "theta_hat",
            "s_stable",
            "s_naive_or_empty",
            "d",
            "z",
            "psi",
            "r_scaled",
        ],
        rows,
    )?;
    Ok(EXIT_OK)
}

fn print_mc(run: &MCRun) {
    for h in &run.summary.horizons {
        println!(
            "T={} valid={} degenerate={} median|err|={} ks_cauchy={} q25={} q75={}",
            h.t,
            h.valid,
            h.degenerate,
            fmt_opt(h.median_abs_error),
            fmt_opt(h.ks_cauchy),
            fmt_opt(h.q25),
            fmt_opt(h.q75)
        );
    }
}

fn mc_consistency(cfg: &RunConfig) -> Result<i32> {
    prepare_out(cfg)?;
    let run = run_consistency(&cfg.mc_config()?)?;
    let theta = cfg.theta;
    let mut rows = Vec::new();
    for rec in &run.records {
        for (&t, v) in cfg.horizons.iter().zip(&rec.values) {
            rows.push(match v {
                Some(v) => vec![
                    rec.replicate.to_string(),
                    fmt_num(t),
                    fmt_num(v.theta_hat),
                    fmt_num((v.theta_hat - theta).abs()),
                    "false".into(),
                ],
                None => vec![
                    rec.replicate.to_string(),
                    fmt_num(t),
                    String::new(),
                    String::new(),
                    "true".into(),
                ],
            });
        }
    }
    write_csv(
        &cfg.out.join("consistency.csv"),
        &["replicate", "t", "theta_hat", "abs_error", "degenerate"],
        rows,
    )?;
    write_json(
        &cfg.out.join("consistency_summary.json"),
        &Summary {
            config: cfg,
            body: &run.summary,
        },
    )?;
    print_mc(&run);
    Ok(EXIT_OK)
}

fn mc_cauchy(cfg: &RunConfig) -> Result<i32> {
    prepare_out(cfg)?;
    let run = run_cauchy(&cfg.mc_config()?)?;
    let two_theta = 2.0 * cfg.theta;
    let rows = run.records.iter().map(|rec| match rec.values[0] {
        Some(v) => vec![
            rec.replicate.to_string(),
            fmt_num(v.theta_hat),
            fmt_num(v.s_stable),
            fmt_opt(v.s_naive),
            fmt_num(v.s_stable / two_theta),
        ],
        None => vec![
            rec.replicate.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ],
    });
    write_csv(
        &cfg.out.join("cauchy.csv"),
        &["replicate", "theta_hat", "s_stable", "s_naive_or_empty", "normalized"],
        rows,
    )?;
    write_json(
        &cfg.out.join("cauchy_summary.json"),
        &Summary {
            config: cfg,
            body: &run.summary,
        },
    )?;
    print_mc(&run);
    Ok(EXIT_OK)
}

fn limit_rows(spec: &KernelSpec<f64>, checks: &[LimitCheck]) -> Vec<Vec<String>> {
    checks
        .iter()
        .map(|c| {
            vec![
                c.check_name.clone(),
                spec.family.to_string(),
                spec.params_label(),
                fmt_num(c.t),
                fmt_num(c.value),
                fmt_num(c.reference),
                fmt_num(c.gap),
                c.pass.to_string(),
            ]
        })
        .collect()
}

const LIMIT_HEADER: [&str; 8] = [
    "check_name",
    "kernel",
    "params",
    "t",
    "value",
    "reference",
    "gap",
    "pass",
];

fn verify(cfg: &RunConfig) -> Result<i32> {
    prepare_out(cfg)?;
    let spec = cfg.kernel_spec()?;
    let report = verify_limits(&spec, cfg.theta, cfg.n_quad)?;
    for c in &report.checks {
        println!(
            "{:<4} {:<32} t={:<5} value={:<24} reference={:<24} gap={:e}",
            if c.pass { "ok" } else { "FAIL" },
            c.check_name,
            c.t,
            fmt_num(c.value),
            fmt_num(c.reference),
            c.gap
        );
    }
    write_csv(
        &cfg.out.join("limits.csv"),
        &LIMIT_HEADER,
        limit_rows(&spec, &report.checks),
    )?;
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERIFICATION })
}

/// Deterministic oracle checks; returns `(name, pass, detail)` triples.
pub fn selftest_checks() -> Result<Vec<(String, bool, String)>> {
    let mut out = Vec::new();
    let mut check = |name: &str, pass: bool, detail: String| out.push((name.to_string(), pass, detail));
    let e = std::f64::consts::E;

    // linear driver G_s = s, θ = 1, T = 1
    let grid = TimeGrid::new(1.0, 4096)?;
    let traj = build_trajectory(&SamplePath::from_fn(grid, |t: f64| t), 1.0)?;
    let x1 = *traj.materialize_x()?.last().expect("non-empty");
    check("linear_driver_x", (x1 - (e - 1.0)).abs() < 1e-6, format!("X_1 = {x1}"));
    let z1 = traj.z()[4096];
    check(
        "linear_driver_z",
        (z1 - (1.0 - 2.0 / e)).abs() < 1e-6,
        format!("Z_1 = {z1}"),
    );
    let r = report(&traj, 4096)?;
    check(
        "linear_driver_theta_hat",
        (r.theta_hat - 1.947646).abs() < 1e-4,
        format!("θ̃ = {}", r.theta_hat),
    );
    let p = traj.point(4096);
    let lhs = 0.5 * p.xi * p.xi;
    let rhs = p.d + p.z * p.psi * traj.discount(4096) + traj.discount(4096) * p.r_scaled;
    check(
        "path_identity",
        (lhs - rhs).abs() <= 1e-4 * lhs,
        format!("½ξ² = {lhs}, reconstruction = {rhs}"),
    );
    let naive = r.s_naive.unwrap_or(f64::NAN);
    check(
        "stable_vs_naive",
        (naive - r.s_stable).abs() <= 1e-6 * (1.0 + r.s_stable.abs()),
        format!("S_naive = {naive}, S_stable = {}", r.s_stable),
    );

    for &(theta, lambda) in &[(1.0f64, 0.0f64), (1.0, 1.0), (1.0, 0.4), (2.0, 0.0)] {
        let j = j_lambda(theta, lambda, 30.0, 4096)?;
        let limit = j_lambda_limit(theta, lambda)?;
        check(
            &format!("J_{lambda}_theta_{theta}"),
            (j - limit).abs() <= 1e-5,
            format!("J = {j}, limit = {limit}"),
        );
    }

    let bm = KernelSpec::bm();
    let v = variance_curve(&bm, 1.0, 10.0, 1024)?;
    let exact = -(-20f64).exp_m1() / 2.0;
    check(
        "bm_variance_curve",
        (v.direct - exact).abs() < 1e-6 && (v.split - exact).abs() < 1e-6,
        format!("V(10) = {} / {}, exact {exact}", v.direct, v.split),
    );
    let s = sigma_limit(&KernelSpec::fbm(0.7f64)?, 1.0)?;
    check("sigma_limit_fbm", (s - 0.621085).abs() < 1e-6, format!("σ² = {s}"));
    let d = ks_distance(&[-1.0, 0.0, 1.0], Reference::StandardCauchy)?;
    check("ks_cauchy_quartiles", (d - 0.25).abs() < 1e-12, format!("D = {d}"));
    Ok(out)
}

fn selftest() -> Result<i32> {
    let checks = selftest_checks()?;
    for (name, pass, detail) in &checks {
        println!("{:<4} {name:<24} {detail}", if *pass { "ok" } else { "FAIL" });
    }
    Ok(if checks.iter().all(|c| c.1) {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}
