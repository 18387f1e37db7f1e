//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification found failing checks, 2 template
//! infeasible, 3 point dimension mismatch, 4 output write failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use startile::cache::CACHE_DIR_ENV;
use startile::verifier::{build_tiling_cached, compute_k_bound, run_suite_on, TilingConfig};
use startile::{Error, TemplateConstants, TemplateVariant, Tiling};

#[derive(Parser)]
#[command(
    name = "startile",
    about = "Starlike normal tilings of finite-dimensional normed spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive template constants and the normality bound for a variant.
    Constants {
        /// Template variant (A or B).
        #[arg(long)]
        variant: String,
        /// Horizontal offset of the side squares, in (1, 2).
        #[arg(long)]
        a: f64,
        /// Vertical offset of the side squares, in (0, 1).
        #[arg(long)]
        b: f64,
        /// Explicit square radius override.
        #[arg(long)]
        r: Option<f64>,
        /// Explicit pairing threshold override.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Locate a point in the tiling of a config.
    Locate {
        /// Path to the tiling config file.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated coordinates of the query point.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Run the certification suite and write the report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Override the sample count of the config.
        #[arg(long)]
        samples: Option<u64>,
        /// Override the sampling seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; the per-sample log lands next to it with a
        /// .samples.jsonl suffix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a colored 2-plane slice of the tiling as SVG.
    Render {
        #[arg(long)]
        config: PathBuf,
        /// Basis plane as i:j (1-based, distinct).
        #[arg(long)]
        plane: String,
        /// Axis range as lo:hi.
        #[arg(long, allow_hyphen_values = true)]
        bbox: String,
        /// Pixels per side.
        #[arg(long, default_value_t = 160)]
        pixels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build (or refresh) the system cache for a config and print a summary.
    Net {
        #[arg(long)]
        config: PathBuf,
        /// Rebuild even when every level is already cached.
        #[arg(long, default_value_t = false)]
        rebuild: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::HypothesisViolated(_)) | Some(Error::Infeasible(_)) => 2,
        Some(Error::DimensionMismatch { .. }) => 3,
        Some(Error::Io(_)) => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Constants { variant, a, b, r, delta } => cmd_constants(&variant, a, b, r, delta),
        Command::Locate { config, point } => cmd_locate(&config, &point),
        Command::Verify { config, samples, seed, out } => cmd_verify(&config, samples, seed, &out),
        Command::Render { config, plane, bbox, pixels, out } => {
            cmd_render(&config, &plane, &bbox, pixels, &out)
        }
        Command::Net { config, rebuild } => cmd_net(&config, rebuild),
    }
}

fn parse_variant(s: &str) -> anyhow::Result<TemplateVariant> {
    match s {
        "A" | "a" => Ok(TemplateVariant::A),
        "B" | "b" => Ok(TemplateVariant::B),
        other => anyhow::bail!(Error::Config(format!("unknown variant: {other}"))),
    }
}

fn cmd_constants(
    variant: &str,
    a: f64,
    b: f64,
    r: Option<f64>,
    delta: Option<f64>,
) -> anyhow::Result<ExitCode> {
    let variant = parse_variant(variant)?;
    let c = match (r, delta) {
        (Some(r), Some(delta)) => {
            let c = TemplateConstants::with_parts(variant, a, b, r, delta);
            c.validate()?;
            c
        }
        (r, delta) => {
            let derived = TemplateConstants::derive(variant, a, b)?;
            let c = TemplateConstants::with_parts(
                variant,
                a,
                b,
                r.unwrap_or(derived.r),
                delta.unwrap_or(derived.delta),
            );
            c.validate()?;
            c
        }
    };
    let d = compute_k_bound(&c, c.delta);
    println!("variant  {}", c.variant);
    println!("a        {}", fmt(c.a));
    println!("b        {}", fmt(c.b));
    println!("r        {}", fmt(c.r));
    println!("delta    {}", fmt(c.delta));
    println!("R        {}", fmt(d.tube_radius));
    println!("R'       {}", fmt(d.tile_radius));
    println!("K bound  {}", fmt(d.k_bound));
    Ok(ExitCode::SUCCESS)
}

/// Nine decimals, trailing zeros trimmed: enough to print the derived
/// constants cleanly without f64 noise.
fn fmt(v: f64) -> String {
    let s = format!("{v:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Cache file next to the config, or under the override directory.
fn cache_path_for(config: &Path) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("config");
    let file = format!("{stem}.syscache.json");
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(file),
        None => config.parent().unwrap_or(Path::new(".")).join(file),
    }
}

fn load_tiling(config_path: &Path) -> anyhow::Result<(TilingConfig, Tiling)> {
    let cfg = TilingConfig::from_path(config_path)?;
    let cache = cache_path_for(config_path);
    let tiling = build_tiling_cached(&cfg, Some(&cache))?;
    Ok((cfg, tiling))
}

fn cmd_locate(config: &Path, point: &str) -> anyhow::Result<ExitCode> {
    let (_, tiling) = load_tiling(config)?;
    let coords: Vec<f64> = point
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Config(format!("bad point: {e}")))?;
    if coords.len() != tiling.dim() {
        anyhow::bail!(Error::DimensionMismatch { expected: tiling.dim(), got: coords.len() });
    }
    let id = tiling.locate_full(&coords)?;
    let center = tiling.full_center(&id)?;
    let diff: Vec<f64> = coords.iter().zip(&center).map(|(a, b)| a - b).collect();
    let distance = tiling.space().norm(&diff);
    println!("tile      {}", serde_json::to_string(&id)?);
    println!("center    {}", serde_json::to_string(&center)?);
    println!("distance  {distance}");
    println!("ratio     {}", distance / tiling.template().r);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    config: &Path,
    samples: Option<u64>,
    seed: Option<u64>,
    out: &Path,
) -> anyhow::Result<ExitCode> {
    let mut cfg = TilingConfig::from_path(config)?;
    if let Some(samples) = samples {
        cfg.sampling.count = samples;
    }
    if let Some(seed) = seed {
        cfg.sampling.seed = seed;
    }
    let cache = cache_path_for(config);
    let tiling = build_tiling_cached(&cfg, Some(&cache))?;
    let output = run_suite_on(&tiling, &cfg)?;

    let report_json = output.report.to_json_pretty();
    write_out(out, report_json.as_bytes())?;
    let log_path = out.with_extension("samples.jsonl");
    let mut log = output.sample_log.join("\n");
    log.push('\n');
    write_out(&log_path, log.as_bytes())?;

    for check in &output.report.checks {
        println!(
            "{:24} samples {:>8} failures {:>4}",
            check.name, check.samples, check.failures
        );
    }
    println!(
        "max normality ratio {} (bound {})",
        output.report.max_normality_ratio, output.report.constants.k_bound_nominal
    );
    if output.report.passed {
        println!("PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL (report at {})", out.display());
        Ok(ExitCode::from(1))
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(Error::Io)?;
        }
    }
    std::fs::write(path, bytes).map_err(Error::Io)?;
    Ok(())
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<(T, T)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        anyhow::bail!(Error::Config(format!("{what} must be lo:hi, got {s}")));
    }
    let a = parts[0].parse::<T>().map_err(|_| Error::Config(format!("bad {what}: {s}")))?;
    let b = parts[1].parse::<T>().map_err(|_| Error::Config(format!("bad {what}: {s}")))?;
    Ok((a, b))
}

fn cmd_render(
    config: &Path,
    plane: &str,
    bbox: &str,
    pixels: usize,
    out: &Path,
) -> anyhow::Result<ExitCode> {
    let (_, tiling) = load_tiling(config)?;
    let plane = parse_pair::<usize>(plane, "plane")?;
    let bbox = parse_pair::<f64>(bbox, "bbox")?;
    let svg = startile::render::render_slice(&tiling, plane, bbox, pixels)?;
    write_out(out, svg.as_bytes())?;
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_net(config: &Path, rebuild: bool) -> anyhow::Result<ExitCode> {
    let cfg = TilingConfig::from_path(config)?;
    let cache = cache_path_for(config);
    if rebuild && cache.exists() {
        std::fs::remove_file(&cache).map_err(Error::Io)?;
    }
    let tiling = build_tiling_cached(&cfg, Some(&cache))?;
    println!("cache {}", cache.display());
    println!("space dim {} template {}", tiling.dim(), tiling.template().variant);
    for sys in tiling.systems() {
        println!(
            "level {:>2}  net {:>6}  pairs {:>5}  certified bound {:.6}",
            sys.level,
            sys.net_len,
            sys.pairs.len(),
            sys.certified_bound
        );
    }
    Ok(ExitCode::SUCCESS)
}
