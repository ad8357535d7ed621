use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use oceandc::io::geotiff::{write_geotiff, GeoTiffWriteOptions};
use oceandc::netcdf::read_netcdf;
use oceandc::pipeline::{classify_slice, run_build, BuildConfig, CubeSummary};
use oceandc::{band_id_of, BandId, Error};

/// Build and query multi-sensor Earth observation data cubes.
#[derive(Parser)]
#[command(name = "oceandc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a NetCDF cube from a JSON configuration.
    Build {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Print the summary as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Describe a cube file.
    Info {
        cube: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write the class codes of one product and time step as a GeoTIFF.
    Classify {
        cube: PathBuf,
        #[arg(long)]
        index: String,
        #[arg(long, default_value_t = 0)]
        time: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(Error::Config { .. }) => 2,
        Some(Error::Io { .. } | Error::Write { .. }) => 4,
        _ => 3,
    }
}

fn report(err: &anyhow::Error) {
    match err.downcast_ref::<Error>() {
        Some(e) => {
            let root = e.root();
            let ctx = e.context();
            if ctx.is_empty() {
                eprintln!("error[{}]: {root}", root.kind_name());
            } else {
                eprintln!("error[{}]: {root} ({})", root.kind_name(), ctx.join(", "));
            }
        }
        None => eprintln!("error: {err:#}"),
    }
}

fn print_summary(summary: &CubeSummary) {
    let [t, b, h, w] = summary.shape;
    let g = &summary.grid;
    println!("dimensions: time={t} band={b} y={h} x={w}");
    println!("crs: EPSG:{}", g.epsg);
    println!(
        "grid: origin=({}, {}) pixel=({}, {})",
        g.origin_x, g.origin_y, g.pixel_size_x, g.pixel_size_y
    );
    println!("time steps:");
    for (k, s) in summary.slices.iter().enumerate() {
        println!("  [{k}] {} {} {}", s.time.to_rfc3339(), s.sensor, s.scene_id);
    }
    println!("fill % per band:");
    let header: Vec<String> = (0..summary.slices.len()).map(|k| format!("{:>7}", format!("t{k}"))).collect();
    println!("  {:>3} {:<24}{}", "id", "band", header.join(""));
    for band in BandId::all() {
        let cols: Vec<String> = summary
            .slices
            .iter()
            .map(|s| format!("{:>7.1}", s.fill_percent[band.index()]))
            .collect();
        println!("  {:>3} {:<24}{}", band.get(), band.name(), cols.join(""));
    }
}

fn build(config: PathBuf, jobs: Option<usize>, json: bool) -> Result<()> {
    let cfg = BuildConfig::load(&config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build().context("cannot start worker threads")?;
    let summary = pool.install(|| run_build(&cfg))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!("wrote {}", summary.output.display());
        print_summary(&summary.cube);
        for p in &summary.classifications {
            println!("class raster: {}", p.display());
        }
    }
    Ok(())
}

fn info_cmd(path: PathBuf, json: bool) -> Result<()> {
    let cube = read_netcdf(&path)?;
    let summary = CubeSummary::of(&cube);
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        print_summary(&summary);
    }
    Ok(())
}

fn classify_cmd(path: PathBuf, index: &str, time: usize, out: PathBuf) -> Result<()> {
    let id = band_id_of(index)?;
    let cube = read_netcdf(&path)?;
    let raster = classify_slice(&cube, id, time)?;
    write_geotiff(&out, &raster, &GeoTiffWriteOptions::default())?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { config, jobs, json } => build(config, jobs, json),
        Command::Info { cube, json } => info_cmd(cube, json),
        Command::Classify { cube, index, time, out } => classify_cmd(cube, &index, time, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report(&err);
            ExitCode::from(exit_code(&err))
        }
    }
}
