//! `attend`: saliency, foveation and perturbation tools plus the training,
//! sweep, evaluation, reporting and plotting drivers.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use attend_core::agent::Checkpoint;
use attend_core::experiment::{self, EvalOptions, TrainConfig};
use attend_core::foveation::{blend_additive, blend_foveate, heatmap_overlay};
use attend_core::imaging::{rgb_to_gray, Image};
use attend_core::perturbation::{perturb_indexed, PerturbCategory, PerturbConfig};
use attend_core::saliency::{spectral_residual, SpectralConfig};

#[derive(Parser)]
#[command(name = "attend", version, about = "Saliency-foveated observations for actor-critic agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral-residual saliency map of a PNG, written as PNG or `.fpl`.
    Saliency {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 64)]
        size: usize,
    },
    /// Foveate a PNG with its own saliency map.
    Foveate {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        alpha: f64,
        /// Additive blend instead of the multiplicative mask.
        #[arg(long)]
        literal_additive: bool,
    },
    /// Jet heatmap of the saliency map over the image.
    Overlay {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        weight: f64,
    },
    /// Apply one perturbation category to a PNG.
    Perturb {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        category: PerturbCategory,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train an agent.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// One training run per alpha.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.69,0.75,1")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint under a perturbation category.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "none")]
        category: PerturbCategory,
        #[arg(long, default_value_t = 25)]
        games: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pick the most likely action instead of sampling.
        #[arg(long)]
        greedy: bool,
        #[arg(long)]
        label: Option<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render evaluation reports found under a directory as a table.
    Report {
        #[arg(long)]
        runs: Option<PathBuf>,
        /// Text table path; the CSV goes next to it with a `.csv` extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Episode returns of a uniformly random policy.
    Baseline {
        /// Maze and episode length are taken from this training config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 25)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// SVG learning curves from metrics CSVs.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => TrainConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(TrainConfig::default()),
    }
}

fn saliency_of(img: &Image, size: usize) -> Result<attend_core::saliency::SaliencyMap> {
    let cfg = SpectralConfig {
        working_size: size,
        ..Default::default()
    };
    Ok(spectral_residual(&rgb_to_gray(img)?, &cfg)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Saliency { input, output, size } => {
            let img = Image::load_png(&input)?;
            let smap = saliency_of(&img, size)?;
            match output.extension().and_then(|e| e.to_str()) {
                Some("fpl") => smap.plane().save_fpl(&output)?,
                Some("png") => smap.plane().to_gray_image().save_png(&output)?,
                _ => bail!("output must end in .png or .fpl"),
            }
        }
        Command::Foveate {
            input,
            output,
            alpha,
            literal_additive,
        } => {
            let img = Image::load_png(&input)?;
            let smap = saliency_of(&img, 64)?;
            let out = if literal_additive {
                blend_additive(&img, &smap, alpha)?
            } else {
                blend_foveate(&img, &smap, alpha)?
            };
            out.save_png(&output)?;
        }
        Command::Overlay { input, output, weight } => {
            let img = Image::load_png(&input)?;
            let smap = saliency_of(&img, 64)?;
            heatmap_overlay(&img, &smap, weight)?.save_png(&output)?;
        }
        Command::Perturb {
            input,
            output,
            category,
            seed,
        } => {
            let img = Image::load_png(&input)?;
            let cfg = PerturbConfig {
                seed,
                ..Default::default()
            };
            perturb_indexed(&img, category, &cfg, 0)?.0.save_png(&output)?;
        }
        Command::Train { config, out } => {
            let cfg = load_config(config.as_deref())?;
            let started = std::time::Instant::now();
            let outcome = experiment::train(&cfg, &out)?;
            eprintln!(
                "trained {} steps in {:.1}s; final mean return {:.3}; checkpoint {}",
                cfg.total_env_steps,
                started.elapsed().as_secs_f64(),
                outcome.final_mean_return(),
                outcome.checkpoint_path.display()
            );
        }
        Command::Sweep {
            config,
            alphas,
            repeats,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            for run in experiment::alpha_sweep(&cfg, &alphas, repeats, &out)? {
                eprintln!(
                    "alpha {} repeat {}: final mean return {:.3}",
                    run.alpha,
                    run.repeat,
                    run.outcome.final_mean_return()
                );
            }
        }
        Command::Eval {
            checkpoint,
            category,
            games,
            seed,
            greedy,
            label,
            out,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let opts = EvalOptions {
                sample_actions: greedy.then_some(false),
                label,
                ..Default::default()
            };
            let report = experiment::evaluate(&ckpt, category, games, seed, &opts)?;
            match out {
                Some(path) => report.save_json(path)?,
                None => println!("{}", report.to_json()?),
            }
        }
        Command::Report { runs, out } => {
            let reports = match runs {
                Some(dir) => experiment::load_reports(&dir)?,
                None => Vec::new(),
            };
            let table = experiment::report_table(&reports)?;
            let csv_path = if out.extension().is_some_and(|e| e == "csv") {
                out.with_extension("csv.csv")
            } else {
                out.with_extension("csv")
            };
            std::fs::write(&out, &table.text).with_context(|| format!("writing {}", out.display()))?;
            std::fs::write(&csv_path, &table.csv)
                .with_context(|| format!("writing {}", csv_path.display()))?;
            print!("{}", table.text);
        }
        Command::Baseline { config, episodes, seed } => {
            if episodes == 0 {
                bail!("--episodes must be >= 1");
            }
            let cfg = load_config(config.as_deref())?;
            let (mean, std, _) = experiment::random_policy_baseline(&cfg.maze()?, episodes, seed);
            println!("random policy over {episodes} episodes: mean {mean:.3} std {std:.3}");
        }
        Command::Plot { csv, out } => {
            let svg = experiment::plot_metrics(&csv)?;
            std::fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
