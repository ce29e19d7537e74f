//! The `houghface` command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage, parse or validation errors, 2 on I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Aggregation, PipelineConfig};
use crate::descriptor::{describe_stages, extract_from_path, load_descriptor, run_stages, save_descriptor};
use crate::error::{Error, Result};
use crate::harness::dump;
use crate::harness::evaluate::{evaluate_detailed, with_jobs};
use crate::harness::manifest::{load_manifest, Role};
use crate::harness::metrics::{metrics, metrics_table, parse_counts, report_text, ConfusionCounts};
use crate::hough::hough_transform;
use crate::imageops::load_image;
use crate::matcher::{Gallery, Matcher};

const GALLERY_CONFIG: &str = "config.txt";
const GALLERY_INDEX: &str = "gallery.txt";

#[derive(Debug, Parser)]
#[command(
    name = "houghface",
    version,
    about = "Face identification from Hough peaks of significant gradient blocks"
)]
struct Cli {
    /// Pipeline configuration file (`key = value` lines).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for the random block search.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Reduction of gated chi-square values per probe block.
    #[arg(long, global = true, value_parser = parse_aggregation)]
    agg: Option<Aggregation>,

    /// Worker threads for extraction and matching.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the descriptor of one image into an .hfd file.
    Extract {
        image: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Identifier stored in the descriptor (defaults to the image path).
        #[arg(long)]
        id: Option<String>,
    },
    /// Extract descriptors of all train records of a manifest into a gallery directory.
    Enroll {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Identify one image against an enrolled gallery.
    Identify {
        image: PathBuf,
        #[arg(long)]
        gallery: PathBuf,
        /// Match even if descriptor config fingerprints differ.
        #[arg(long)]
        ignore_fingerprint: bool,
    },
    /// Run the genuine/impostor protocol of a manifest, or report on precomputed counts.
    Evaluate {
        #[arg(required_unless_present = "counts", conflicts_with = "counts")]
        manifest: Option<PathBuf>,
        /// `key: value` file with tp, fp, tn and fn instead of a manifest.
        #[arg(long, value_name = "FILE")]
        counts: Option<PathBuf>,
        /// Write machine-readable `key: value` metrics here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Dump an intermediate stage as a PGM image.
    Inspect {
        image: PathBuf,
        #[arg(long, value_enum)]
        stage: Stage,
        #[arg(long)]
        out: PathBuf,
        /// Block whose accumulator is dumped by `--stage hough`.
        #[arg(long, default_value_t = 0)]
        block: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stage {
    Gradient,
    Binary,
    Blocks,
    Hough,
}

fn parse_aggregation(s: &str) -> std::result::Result<Aggregation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI with the given arguments (including the program name).
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_config(cli: &Cli, fallback: Option<&Path>) -> Result<PipelineConfig> {
    let mut cfg = match (&cli.config, fallback) {
        (Some(path), _) => PipelineConfig::load(path)?,
        (None, Some(path)) if path.exists() => PipelineConfig::load(path)?,
        _ => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(agg) = cli.agg {
        cfg.aggregation = agg;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if cli.jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Extract { image, output, id } => {
            let cfg = resolve_config(&cli, None)?;
            let id = id.clone().unwrap_or_else(|| image.display().to_string());
            let d = extract_from_path(image, &id, &cfg)?;
            save_descriptor(&d, output)?;
            writeln!(out, "entries: {}", d.len()).map_err(io_out)?;
        }
        Command::Enroll { manifest, output } => {
            let cfg = resolve_config(&cli, None)?;
            let manifest = load_manifest(manifest)?;
            let train: Vec<_> = manifest.with_role(Role::Train).collect();
            if train.is_empty() {
                return Err(Error::Validation("manifest has no train records to enroll".into()));
            }
            std::fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;
            use rayon::prelude::*;
            let descriptors = with_jobs(cli.jobs, || {
                train
                    .par_iter()
                    .map(|r| extract_from_path(&r.path, &r.path.display().to_string(), &cfg))
                    .collect::<Result<Vec<_>>>()
            })??;
            let mut index = String::new();
            for (i, (r, d)) in train.iter().zip(&descriptors).enumerate() {
                let name = format!("{i:05}.hfd");
                save_descriptor(d, &output.join(&name))?;
                index.push_str(&format!("{} {name}\n", r.class_id));
            }
            write_file(&output.join(GALLERY_INDEX), index)?;
            write_file(&output.join(GALLERY_CONFIG), cfg.to_text())?;
            writeln!(out, "enrolled: {}", descriptors.len()).map_err(io_out)?;
        }
        Command::Identify {
            image,
            gallery,
            ignore_fingerprint,
        } => {
            let cfg = resolve_config(&cli, Some(&gallery.join(GALLERY_CONFIG)))?;
            let gallery = load_gallery(gallery)?;
            let probe = extract_from_path(image, &image.display().to_string(), &cfg)?;
            let matcher = Matcher::new(&cfg)?.allow_fingerprint_mismatch(*ignore_fingerprint);
            let result = with_jobs(cli.jobs, || matcher.classify(&probe, &gallery))??;
            writeln!(out, "class: {}", result.class_id).map_err(io_out)?;
            writeln!(out, "distance: {}", result.distance).map_err(io_out)?;
        }
        Command::Evaluate {
            manifest,
            counts,
            report,
        } => {
            let c = match (manifest, counts) {
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    parse_counts(&text)?
                }
                (Some(path), None) => {
                    let cfg = resolve_config(&cli, None)?;
                    let manifest = load_manifest(path)?;
                    with_jobs(cli.jobs, || evaluate_detailed(&manifest, &cfg))??.counts
                }
                (None, None) => unreachable!("clap requires a manifest or --counts"),
            };
            emit_metrics(&c, report.as_deref(), out)?;
        }
        Command::Inspect {
            image,
            stage,
            out: dest,
            block,
        } => {
            let cfg = resolve_config(&cli, None)?;
            let img = load_image(image, cfg.target_dims())?;
            let stages = run_stages(&img, &cfg)?;
            let (w, h) = stages.gray.dimensions();
            let mut buf = Vec::new();
            match stage {
                Stage::Gradient => dump::write_pgm_p5(&mut buf, w, h, &dump::gradient_raster(&stages.gradient)),
                Stage::Binary => dump::write_pgm_p5(&mut buf, w, h, &dump::binary_raster(&stages.dilated)),
                Stage::Blocks => {
                    let overlay = dump::blocks_overlay(&stages.gray, &stages.blocks);
                    let entries = describe_stages(&stages, "", &cfg)?.len();
                    writeln!(out, "blocks: {}", stages.blocks.len()).map_err(io_out)?;
                    writeln!(out, "entries: {entries}").map_err(io_out)?;
                    dump::write_pgm_p5(&mut buf, w, h, overlay.data())
                }
                Stage::Hough => {
                    let b = stages.blocks.blocks.get(*block).ok_or_else(|| {
                        Error::Validation(format!(
                            "block {block} requested but only {} blocks were selected",
                            stages.blocks.len()
                        ))
                    })?;
                    let window = stages.dilated.crop(b.x, b.y, b.size, b.size)?;
                    let acc = hough_transform(&window, &cfg.hough)?;
                    let mut sidecar = dest.clone().into_os_string();
                    sidecar.push(".txt");
                    write_file(Path::new(&sidecar), dump::accumulator_matrix(&acc))?;
                    writeln!(out, "block: {} {} {}", b.x, b.y, b.size).map_err(io_out)?;
                    dump::write_pgm_p2(
                        &mut buf,
                        acc.theta_bins(),
                        acc.rho_bins(),
                        &dump::accumulator_raster(&acc),
                    )
                }
            }
            .expect("writing to a Vec cannot fail");
            write_file(dest, buf)?;
        }
    }
    Ok(())
}

fn emit_metrics(c: &ConfusionCounts, report: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let m = metrics(c)?;
    write!(out, "{}", metrics_table(c, &m)).map_err(io_out)?;
    if let Some(path) = report {
        write_file(path, report_text(c, &m))?;
    }
    Ok(())
}

/// Reads a gallery directory written by `enroll`.
pub fn load_gallery(dir: &Path) -> Result<Gallery> {
    let index_path = dir.join(GALLERY_INDEX);
    let index = std::fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
    let mut gallery = Gallery::new();
    for (i, line) in index.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (class_id, file) = line.split_once(' ').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected `<class_id> <file>` in {}", index_path.display()),
        })?;
        gallery.push(load_descriptor(&dir.join(file.trim()))?, class_id);
    }
    if gallery.is_empty() {
        return Err(Error::Validation(format!("gallery {} is empty", dir.display())));
    }
    Ok(gallery)
}
