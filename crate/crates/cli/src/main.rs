use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use torus_tomo::field::io::{load_field, load_sinogram, save_field, save_sinogram};
use torus_tomo::field::{complete_cover_height, to_samples, WeightRule};
use torus_tomo::inversion::ReconstructionReport;
use torus_tomo::lattice::direction_cover;
use torus_tomo::xray::forward_sinogram;
use torus_tomo::{SubspaceFamily, TorusField64, WeightKind};
use torus_tomo_cli::bridge::{bridge_ingest, EuclideanSinogram, CENTER};
use torus_tomo_cli::experiment::{reconstruct, run_experiment, run_sweep, ExperimentConfig, Method, RegConfig};
use torus_tomo_cli::phantom::PhantomSpec;
use torus_tomo_cli::pgm::{planar_image, write_pgm};
use torus_tomo_cli::selftest::{checks_csv, run_selftest};

#[derive(Parser)]
#[command(name = "tomo", version, about = "Tomography on flat tori")]
struct Cli {
    /// Output root; per-command defaults live below it.
    #[arg(long, env = "TORUS_TOMO_OUT", default_value = "tomo-out", global = true)]
    out_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Realize the phantom of a config as a field file and image.
    Phantom(ConfigArgs),
    /// Torus X-ray data of a field over a truncated Grassmannian.
    Forward(ForwardArgs),
    /// Run a config experiment, or invert a stored sinogram.
    Reconstruct(ReconstructArgs),
    /// Error against noise level for the regularization strategy.
    Sweep(ConfigArgs),
    /// Convert a Euclidean parallel-beam sinogram into torus data.
    Bridge(BridgeArgs),
    /// Fixed-seed invariant checks.
    Selftest {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    band: Option<i64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    height: Option<i64>,
    #[arg(long)]
    weight: Option<WeightKind>,
    #[arg(long)]
    method: Option<Method>,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ForwardArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    sub_dim: Option<usize>,
    #[arg(long)]
    height: Option<i64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Experiment config; the remaining flags override its keys.
    #[arg(long, conflicts_with = "sinogram")]
    config: Option<PathBuf>,
    /// Stored sinogram directory to invert instead.
    #[arg(long)]
    sinogram: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    band: Option<i64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    height: Option<i64>,
    #[arg(long)]
    weight: Option<WeightKind>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BridgeArgs {
    /// Euclidean sinogram CSV; without it an analytic disk sinogram is used.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Object support radius.
    #[arg(long, default_value_t = 0.2)]
    radius: f64,
    /// Offsets per angle for the analytic disk.
    #[arg(long, default_value_t = 256)]
    offsets: usize,
    #[arg(long, default_value_t = 32)]
    band: i64,
    /// Directions `|v|_∞ ≤ R`; defaults to the band.
    #[arg(long)]
    cover: Option<i64>,
    /// Also run filtered inversion and compare with the disk phantom.
    #[arg(long)]
    reconstruct: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn out_dir(explicit: Option<&PathBuf>, root: &Path, name: &str) -> PathBuf {
    explicit.cloned().unwrap_or_else(|| root.join(name))
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(v) = args.band {
        c.band = v;
    }
    if let Some(v) = args.grid {
        c.grid = Some(v);
    }
    if let Some(v) = args.height {
        c.height = Some(v);
    }
    if let Some(v) = args.weight {
        c.weight = v;
    }
    if let Some(v) = args.method {
        c.method = v;
    }
    if let Some(v) = &args.noise {
        c.noise = v.clone();
    }
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = &args.output {
        c.output = Some(v.clone());
    }
    Ok(c)
}

fn write_image(path: &Path, f: &TorusField64, grid: usize) -> Result<()> {
    let samples = to_samples(f, grid)?;
    write_pgm(fs::File::create(path)?, grid, grid, &planar_image(&samples, grid))?;
    Ok(())
}

fn cmd_phantom(args: &ConfigArgs, root: &Path) -> Result<bool> {
    let config = load_config(args)?.resolved()?;
    let dir = out_dir(config.output.as_ref(), root, "phantom");
    fs::create_dir_all(&dir)?;
    let p = config.realize_phantom()?;
    save_field(&p.field, &dir.join("phantom.field"))?;
    if config.dim == 2 {
        write_image(&dir.join("phantom.pgm"), &p.field, config.grid())?;
    }
    let summary = serde_json::json!({
        "band": config.band,
        "mean": p.field.mean().re,
        "analytic_mean": p.analytic_mean,
        "truncation_residual": p.truncation_residual,
    });
    fs::write(dir.join("phantom.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!("{summary}");
    Ok(true)
}

fn cmd_forward(args: &ForwardArgs, root: &Path) -> Result<bool> {
    let f: TorusField64 = load_field(&args.field)?;
    let d = args.sub_dim.unwrap_or(f.dim() - 1);
    let h = match args.height {
        Some(h) => h,
        None => complete_cover_height(d, f.dim(), f.band())?,
    };
    let family = SubspaceFamily::truncated(d, f.dim(), h)?;
    let g = forward_sinogram(&f, &family)?;
    let dir = out_dir(args.output.as_ref(), root, "sinogram");
    save_sinogram(&g, &dir)?;
    println!("{} slices over Gr({d},{}) with H = {h} written to {}", g.slice_count(), f.dim(), dir.display());
    Ok(true)
}

fn cmd_reconstruct(args: &ReconstructArgs, root: &Path) -> Result<bool> {
    if let Some(config) = &args.config {
        let c = load_config(&ConfigArgs {
            config: config.clone(),
            band: args.band,
            grid: args.grid,
            height: args.height,
            weight: args.weight,
            method: args.method,
            noise: args.noise.clone(),
            seed: args.seed,
            output: args.output.clone(),
        })?;
        let mut c = c;
        if let Some(a) = args.alpha {
            c.regularization.alpha = Some(a);
        }
        let run = run_experiment(&c)?;
        let dir = out_dir(run.config.output.as_ref(), root, "experiment");
        run.write_artifacts(&dir)?;
        print!("{}", run.errors_csv());
        return Ok(true);
    }
    let Some(sino_dir) = &args.sinogram else { bail!("reconstruct needs --config or --sinogram") };
    let g = load_sinogram(sino_dir)?;
    let h = match args.height {
        Some(h) => h,
        None => complete_cover_height(g.sub_dim(), g.dim(), g.band())?,
    };
    let family = Arc::new(SubspaceFamily::truncated(g.sub_dim(), g.dim(), h)?);
    let w = WeightRule::over_family(args.weight.unwrap_or(WeightKind::CanonicalSingleton), family, g.band())?;
    let method = args.method.unwrap_or(Method::Filtered);
    let reg = RegConfig { alpha: args.alpha, ..RegConfig::default() };
    let start = std::time::Instant::now();
    let (recon, _) = reconstruct(method, &g, &w, &reg, 0.0)?;
    let elapsed = start.elapsed();
    let dir = out_dir(args.output.as_ref(), root, "reconstruction");
    fs::create_dir_all(&dir)?;
    save_field(&recon, &dir.join("recon.field"))?;
    let grid = args.grid.unwrap_or((2 * g.band() as usize + 2).max(64));
    if g.dim() == 2 {
        write_image(&dir.join("recon.pgm"), &recon, grid)?;
    }
    if let Some(truth) = &args.truth {
        let truth: TorusField64 = load_field(truth)?;
        let report = ReconstructionReport::measure(method.name(), &truth, &recon, &[0.0], grid, elapsed)?;
        fs::write(dir.join("report.json"), report.to_json()? + "\n")?;
        print!("{}", report.to_csv());
    }
    Ok(true)
}

fn cmd_sweep(args: &ConfigArgs, root: &Path) -> Result<bool> {
    let config = load_config(args)?;
    let summary = run_sweep(&config)?;
    let dir = out_dir(config.output.as_ref(), root, "sweep");
    summary.write_artifacts(&dir)?;
    print!("{}", summary.to_csv());
    println!("slope {:.4} (predicted {:.4})", summary.slope, summary.predicted_rate);
    Ok(summary.rows.iter().all(|r| r.ratio <= 1.0))
}

fn cmd_bridge(args: &BridgeArgs, root: &Path) -> Result<bool> {
    let directions = direction_cover(args.cover.unwrap_or(args.band));
    let sino = match &args.csv {
        Some(path) => EuclideanSinogram::read_csv(fs::File::open(path)?, args.radius)?,
        None => EuclideanSinogram::disk(&directions, args.offsets, args.radius)?,
    };
    let g = bridge_ingest(&sino, &directions, args.band)?;
    let dir = out_dir(args.output.as_ref(), root, "bridge");
    save_sinogram(&g, &dir.join("sinogram"))?;
    if args.csv.is_none() {
        sino.write_csv(fs::File::create(dir.join("euclidean.csv"))?)?;
    }
    println!("{} torus slices written to {}", g.slice_count(), dir.join("sinogram").display());
    if !args.reconstruct {
        return Ok(true);
    }
    let family = Arc::new(SubspaceFamily::from_directions(&directions)?);
    let w = WeightRule::over_family(WeightKind::CanonicalSingleton, family, args.band)?;
    let recon = torus_tomo::inversion::invert_filtered(&g, &w)?;
    let grid = (2 * args.band as usize + 2).max(64);
    save_field(&recon, &dir.join("recon.field"))?;
    write_image(&dir.join("recon.pgm"), &recon, grid)?;
    if args.csv.is_none() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let disk = PhantomSpec::disk(CENTER, args.radius).realize(2, args.band, grid, &mut rng)?.field;
        let err = torus_tomo::field::sobolev_norm(&recon.checked_sub(&disk)?, 0.0);
        println!("relative L2 error against the band-limited disk: {:e}", err / torus_tomo::field::sobolev_norm(&disk, 0.0));
    }
    Ok(true)
}

fn cmd_selftest(output: Option<&PathBuf>, root: &Path) -> Result<bool> {
    let checks = run_selftest()?;
    let csv = checks_csv(&checks);
    let dir = out_dir(output, root, "selftest");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("selftest.csv"), &csv)?;
    print!("{csv}");
    Ok(checks.iter().all(|c| c.pass()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = cli.out_root.as_path();
    let outcome = match &cli.command {
        Command::Phantom(a) => cmd_phantom(a, root),
        Command::Forward(a) => cmd_forward(a, root),
        Command::Reconstruct(a) => cmd_reconstruct(a, root),
        Command::Sweep(a) => cmd_sweep(a, root),
        Command::Bridge(a) => cmd_bridge(a, root),
        Command::Selftest { output } => cmd_selftest(output.as_ref(), root),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("invariant check failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
