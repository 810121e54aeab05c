use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use permuton_lab::analysis::{parse_statistic, ExperimentConfig, ExperimentReport, Statistic, CHI_SQUARE_ALPHA};
use permuton_lab::limits::{
    c_rho_range, diagonal_integral, lambda_n_cycle, mu_rho_along, stein_tv_bound, Provenance, Regime,
};
use permuton_lab::samplers::{ExpFamilyChain, McmcConfig};
use permuton_lab::{Density, DensitySpec, Error, ModelSpec, Permutation, RandomStream, Sampler, DEFAULT_SEED};

const SEED_ENV: &str = "PERMUTON_LAB_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "permuton-lab",
    version,
    about = "Sample random permutation models and compare fixed-point and cycle statistics with their Poisson limits",
    after_help = "Exit codes: 0 success, 1 usage or input error, 2 an embedded assertion failed.\n\
                  The default seed is 20160512; the PERMUTON_LAB_SEED environment variable replaces it."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw permutations from a model, one per line
    Sample(SampleArgs),
    /// Print limiting Poisson parameters, finite-n parameters and Stein bounds for a density
    Limits(LimitsArgs),
    /// Run a Monte Carlo experiment and write report.json and pmf.csv
    Experiment(ExperimentArgs),
    /// Mallows n=100, q=exp(-20/n), 10^4 replicates, fixed points
    #[command(name = "reproduce-fig1")]
    ReproduceFig1(Fig1Args),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Random seed [default: $PERMUTON_LAB_SEED, else 20160512]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the replicate loop
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
}

#[derive(Args, Debug)]
struct ModelTweaks {
    /// MCMC burn-in swaps for exp_family models [default: n^2]
    #[arg(long)]
    burn_in: Option<u64>,
    /// MCMC swaps between recorded states for exp_family models [default: n]
    #[arg(long)]
    thin: Option<u64>,
    /// Sampling grid for mu_random models [default: 512]
    #[arg(long)]
    grid_k: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Model spec as inline JSON or a path to a JSON file
    #[arg(long)]
    model: String,
    /// Number of permutations to draw
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Line format: a JSON array or comma-separated values (1-based)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    tweaks: ModelTweaks,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    /// Density spec as inline JSON or a path, e.g. '{"kind":"frank","beta":20}'
    #[arg(long, default_value = r#"{"kind":"uniform"}"#)]
    density: String,
    /// Permutation size for the finite-n parameters and Stein bounds
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Permutation for the overlap parameter: identity, reversal or a JSON array (1-based)
    #[arg(long, default_value = "identity")]
    sigma: String,
    /// Largest cycle length l for c_rho(l) and lambda_n(l)
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    /// Kernel nodes for c_rho, rounded up to a multiple of 8 (grid densities use their own cells)
    #[arg(long, default_value_t = 512)]
    grid_k: usize,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// json: full document; csv: one row per statistic
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    /// Mallows n=100, q=exp(-20/n), 10^4 replicates, fixed points
    Fig1,
    /// Uniform n=1000, 10^5 replicates, fixed points
    Uniform,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment config as inline JSON or a path to a JSON file
    #[arg(long, conflicts_with = "preset")]
    config: Option<String>,
    /// Built-in configuration
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Model spec (inline JSON or path); replaces the config's model
    #[arg(long)]
    model: Option<String>,
    /// Statistic, e.g. fixed_points, overlap:reversal, cycle_counts:3, joint_cycle_moments:1,1
    #[arg(long)]
    statistic: Option<String>,
    /// Replicates; replaces the config's count
    #[arg(long)]
    count: Option<u64>,
    /// Highest raw moment compared against the reference
    #[arg(long)]
    max_moment: Option<u32>,
    /// Output directory for report.json and pmf.csv
    #[arg(long, default_value = "permuton-lab-out")]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    tweaks: ModelTweaks,
}

#[derive(Args, Debug)]
struct Fig1Args {
    /// Replicates
    #[arg(long, default_value_t = 10_000)]
    count: u64,
    /// Output directory for report.json and pmf.csv
    #[arg(long, default_value = "permuton-lab-out")]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

/// Errors that map to exit code 2.
#[derive(Debug)]
struct AssertionFailure(String);

impl std::fmt::Display for AssertionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AssertionFailure {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<AssertionFailure>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Limits(a) => cmd_limits(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::ReproduceFig1(a) => cmd_fig1(a),
    }
}

/// Inline JSON when the argument starts with `{` or `[`, a file path otherwise.
fn json_arg(text: &str) -> anyhow::Result<String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(text.to_owned())
    } else {
        fs::read_to_string(text).with_context(|| format!("reading {text}"))
    }
}

fn parse_model(text: &str) -> anyhow::Result<ModelSpec> {
    let body = json_arg(text)?;
    serde_json::from_str(&body).map_err(|e| anyhow!("invalid model spec: {e}"))
}

fn apply_tweaks(model: ModelSpec, t: &ModelTweaks) -> anyhow::Result<ModelSpec> {
    let model = match model {
        ModelSpec::ExpFamily { n, score, theta, mcmc } => ModelSpec::ExpFamily {
            n,
            score,
            theta,
            mcmc: McmcConfig {
                burn_in: t.burn_in.or(mcmc.burn_in),
                thin: t.thin.or(mcmc.thin),
            },
        },
        ModelSpec::MuRandom { n, density, grid_k } => ModelSpec::MuRandom {
            n,
            density,
            grid_k: t.grid_k.or(grid_k),
        },
        other => {
            if t.burn_in.is_some() || t.thin.is_some() {
                bail!("--burn-in/--thin apply only to exp_family models");
            }
            if t.grid_k.is_some() {
                bail!("--grid-k applies only to mu_random models");
            }
            other
        }
    };
    model.validate()?;
    Ok(model)
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("{SEED_ENV} must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

/// Flag, then config file, then environment, then the built-in default.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    Ok(env_seed()?.unwrap_or(DEFAULT_SEED))
}

fn set_threads(threads: Option<u32>) -> anyhow::Result<()> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_line(out: &mut dyn Write, map: &[u32], format: Format) -> io::Result<()> {
    let mut line = String::with_capacity(map.len() * 4 + 2);
    if matches!(format, Format::Json) {
        line.push('[');
    }
    for (i, v) in map.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&(v + 1).to_string());
    }
    if matches!(format, Format::Json) {
        line.push(']');
    }
    line.push('\n');
    out.write_all(line.as_bytes())
}

fn cmd_sample(a: SampleArgs) -> anyhow::Result<()> {
    let model = apply_tweaks(parse_model(&a.model)?, &a.tweaks)?;
    set_threads(a.run.threads)?;
    let mut stream = RandomStream::new(resolve_seed(a.run.seed, None)?);
    let sampler = model.prepare()?;
    let mut out = open_output(a.out.as_deref())?;
    if let Sampler::ExpFamily { n, score, theta, mcmc } = sampler {
        // one chain, thinned, rather than a fresh burn-in per line
        let mut chain = ExpFamilyChain::from_random_start(n, score, theta, &mut stream);
        chain.advance(mcmc.burn_in_for(n), &mut stream);
        let thin = mcmc.thin_for(n);
        for i in 0..a.count {
            if i > 0 {
                chain.advance(thin, &mut stream);
            }
            write_line(&mut out, chain.state_zero_based(), a.format)?;
        }
    } else {
        for _ in 0..a.count {
            write_line(&mut out, &sampler.draw_map(&mut stream), a.format)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_sigma(text: &str, n: usize) -> anyhow::Result<Permutation> {
    Ok(match text {
        "identity" => Permutation::identity(n),
        "reversal" => Permutation::reversal(n),
        other => {
            let targets: Vec<usize> =
                serde_json::from_str(&json_arg(other)?).map_err(|e| anyhow!("invalid --sigma: {e}"))?;
            let p = Permutation::from_one_based(&targets)?;
            if p.len() != n {
                bail!("--sigma has length {} but --n is {n}", p.len());
            }
            p
        }
    })
}

fn cmd_limits(a: LimitsArgs) -> anyhow::Result<()> {
    let spec: DensitySpec =
        serde_json::from_str(&json_arg(&a.density)?).map_err(|e| anyhow!("invalid density spec: {e}"))?;
    let density: Density<f64> = spec.build()?;
    if a.n == 0 {
        bail!("--n must be positive");
    }
    if a.lmax == 0 {
        bail!("--lmax must be positive");
    }
    let sigma = parse_sigma(&a.sigma, a.n)?;
    let (m, big_m) = density.bounds();
    let c = c_rho_range(&density, a.lmax, a.grid_k)?;
    let overlap = stein_tv_bound(&density, a.n, Regime::Overlap, Some(&sigma))?;
    let mut cycles = Vec::with_capacity(a.lmax);
    for (i, c_l) in c.iter().enumerate() {
        let l = i + 1;
        let tv_bound = (big_m / m).powi(2 * l as i32) / a.n as f64;
        let lambda_n = match lambda_n_cycle(&density, a.n, l) {
            Ok(v) => Some(v),
            Err(Error::TooLarge { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        cycles.push(json!({
            "l": l,
            "c_rho": c_l,
            "lambda_n": lambda_n,
            "stein": { "regime": { "cycle": l }, "lambda_n": lambda_n, "tv_bound": tv_bound },
        }));
    }
    let doc = json!({
        "density": density.spec(),
        "n": a.n,
        "sigma": a.sigma,
        "bounds": { "m": m, "M": big_m },
        "kernel_grid": a.grid_k,
        "overlap": {
            "mu_rho": mu_rho_along(&density, &sigma),
            "diagonal_integral": diagonal_integral(&density),
            "lambda_n": overlap.lambda_n,
            "stein": overlap,
        },
        "cycles": cycles,
    });
    let mut out = open_output(a.out.as_deref())?;
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?,
        Format::Csv => write_limits_csv(&mut out, &doc)?,
    }
    out.flush()?;
    Ok(())
}

fn write_limits_csv(out: &mut dyn Write, doc: &Value) -> io::Result<()> {
    let num = |v: &Value| v.as_f64().map(|x| x.to_string()).unwrap_or_default();
    writeln!(out, "statistic,limit,lambda_n,tv_bound")?;
    let o = &doc["overlap"];
    writeln!(
        out,
        "overlap,{},{},{}",
        num(&o["mu_rho"]),
        num(&o["lambda_n"]),
        num(&o["stein"]["tv_bound"])
    )?;
    for c in doc["cycles"].as_array().into_iter().flatten() {
        writeln!(
            out,
            "cycle({}),{},{},{}",
            c["l"],
            num(&c["c_rho"]),
            num(&c["lambda_n"]),
            num(&c["stein"]["tv_bound"])
        )?;
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = match (&a.config, a.preset) {
        (Some(text), _) => {
            let body = json_arg(text)?;
            ExperimentConfig::from_json(&body).map_err(|e| anyhow!("invalid experiment config: {e}"))?
        }
        (None, Some(Preset::Fig1)) => ExperimentConfig::mallows_fixed_point_preset(),
        (None, Some(Preset::Uniform)) => ExperimentConfig::uniform_preset(),
        (None, None) => {
            let model = a
                .model
                .as_deref()
                .ok_or_else(|| anyhow!("give --config, --preset or --model"))?;
            ExperimentConfig {
                model: parse_model(model)?,
                statistic: Statistic::FixedPoints,
                replicates: 10_000,
                seed: None,
                max_moment: None,
            }
        }
    };
    if a.config.is_some() || a.preset.is_some() {
        if let Some(m) = &a.model {
            cfg.model = parse_model(m)?;
        }
    }
    cfg.model = apply_tweaks(cfg.model, &a.tweaks)?;
    if let Some(s) = &a.statistic {
        cfg.statistic = parse_statistic(s, cfg.model.n())?;
    }
    if let Some(c) = a.count {
        cfg.replicates = c;
    }
    if a.max_moment.is_some() {
        cfg.max_moment = a.max_moment;
    }
    cfg.seed = Some(resolve_seed(a.run.seed, cfg.seed)?);
    set_threads(a.run.threads)?;
    execute(&cfg, &a.out)
}

fn cmd_fig1(a: Fig1Args) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::mallows_fixed_point_preset();
    cfg.replicates = a.count;
    cfg.seed = Some(resolve_seed(a.run.seed, None)?);
    set_threads(a.run.threads)?;
    execute(&cfg, &a.out)
}

fn execute(cfg: &ExperimentConfig, out_dir: &Path) -> anyhow::Result<()> {
    let report = cfg.run()?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let json_path = out_dir.join("report.json");
    let csv_path = out_dir.join("pmf.csv");
    fs::write(&json_path, report.to_json()? + "\n").with_context(|| format!("writing {}", json_path.display()))?;
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    report.write_pmf_csv(BufWriter::new(file))?;
    print_summary(&report, &json_path, &csv_path);
    let failed = report.failed();
    if let Some(first) = failed.first() {
        let names: Vec<&str> = failed.iter().map(|f| f.name.as_str()).collect();
        return Err(AssertionFailure(format!(
            "assertion failed: {} ({}); {} of {} assertions failed: {}",
            first.name,
            first.detail,
            failed.len(),
            report.assertions.len(),
            names.join("; ")
        ))
        .into());
    }
    Ok(())
}

fn print_summary(report: &ExperimentReport, json_path: &Path, csv_path: &Path) {
    println!(
        "model {} n={} statistic {} replicates {}",
        report.model.name(),
        report.model.n(),
        report.statistic,
        report.replicates
    );
    for c in &report.components {
        println!("{}: empirical mean {:.6} (se {:.6})", c.label, c.mean, c.standard_error);
        if let Some(r) = c.comparisons.iter().find(|r| r.finite_n) {
            println!(
                "  lambda_n = {:.6} [{}], gap {:.2} se",
                r.reference.lambda, r.reference.provenance, r.mean_gap_in_se
            );
        }
        let asymptotic = c
            .comparison(Provenance::DiagonalIntegral)
            .or_else(|| c.comparisons.iter().find(|r| !r.finite_n && r.reference.provenance != Provenance::EmpiricalMean));
        if let Some(r) = asymptotic {
            println!(
                "  asymptotic lambda = {:.6} [{}], |empirical - lambda| = {:.6}",
                r.reference.lambda,
                r.reference.provenance,
                (c.mean - r.reference.lambda).abs()
            );
        }
        let p = c.primary_comparison();
        println!(
            "  TV to Poi({:.6}) = {:.6}, chi-square p = {:.4} (dof {})",
            p.reference.lambda, p.tv_distance, p.chi_square.p_value, p.chi_square.dof
        );
        if let Some(f) = c.comparison(Provenance::EmpiricalMean) {
            println!(
                "  chi-square vs Poi(empirical mean) p = {:.4} (dof {}), {} at alpha {}",
                f.chi_square.p_value,
                f.chi_square.dof,
                if f.chi_square.passes(CHI_SQUARE_ALPHA) { "passes" } else { "fails" },
                CHI_SQUARE_ALPHA
            );
        }
    }
    for a in &report.assertions {
        println!("[{}] {}: {}", if a.passed { "pass" } else { "FAIL" }, a.name, a.detail);
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
}
