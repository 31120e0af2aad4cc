use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::ber::{evaluate_ber_in, write_csv, ExperimentSpec};
use super::detector::DetectorSpec;
use super::model_io::save_model;
use super::run_depth_search;
use crate::error::{Error, Result};
use crate::presets::{find_preset, load_preset_file, model_path, preset_catalog, Preset, PresetBody};
use crate::train::train_with;

#[derive(Parser, Debug)]
#[command(name = "ubpnet", version, about = "BP and deep-unfolded BP detectors for massive MIMO")]
struct Cli {
    /// Overrides the seed of the selected preset or config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accepted for scripts; every reduction already runs in a fixed order,
    /// so outputs do not depend on the thread count.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Source {
    /// Built-in preset name (see `presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML config file in the preset format.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<Preset> {
        match (&self.preset, &self.config) {
            (Some(name), None) => find_preset(name),
            (None, Some(path)) => load_preset_file(path),
            _ => Err(Error::InvalidConfig("give exactly one of --preset or --config".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a network and write `<out>/<name>.ubp` and `<out>/<name>-loss.csv`.
    Train {
        #[command(flatten)]
        source: Source,
        /// Overrides the number of training iterations.
        #[arg(long)]
        iterations: Option<usize>,
        /// Writes `<out>/<name>-iter<k>.ubp` every k iterations.
        #[arg(long)]
        checkpoint_every: Option<usize>,
    },
    /// Run one BER experiment and write `<out>/<name>.csv`.
    Evaluate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: EvalOverrides,
    },
    /// Run every experiment preset whose name starts with a prefix.
    Sweep {
        #[arg(long, default_value = "fig")]
        prefix: String,
        #[command(flatten)]
        overrides: EvalOverrides,
    },
    /// Greedy search over network depth; writes `<out>/<name>-depth.csv`.
    DepthSearch {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args, Debug)]
struct EvalOverrides {
    /// Replaces the detector list; `kind` or `kind:model-path`.
    #[arg(long = "detector")]
    detectors: Vec<String>,
    /// Replaces the SNR grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    snr: Vec<f64>,
    #[arg(long)]
    min_bits: Option<u64>,
    /// Early-stop error count; 0 disables early stopping.
    #[arg(long)]
    max_errors: Option<u64>,
    /// Directory model paths are resolved against.
    #[arg(long, default_value = ".")]
    models: PathBuf,
}

impl EvalOverrides {
    fn apply(&self, spec: &mut ExperimentSpec, seed: Option<u64>) -> Result<()> {
        if !self.detectors.is_empty() {
            spec.detectors = self
                .detectors
                .iter()
                .map(|d| DetectorSpec::parse(d))
                .collect::<Result<_>>()?;
        }
        if !self.snr.is_empty() {
            spec.snr_grid_db = self.snr.clone();
        }
        if let Some(b) = self.min_bits {
            spec.min_bits = b;
        }
        if let Some(e) = self.max_errors {
            spec.max_bit_errors = (e > 0).then_some(e);
        }
        if let Some(s) = seed {
            spec.seed = s;
        }
        Ok(())
    }
}

/// Entry point of the `ubpnet` binary; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Presets => {
            for p in preset_catalog() {
                println!("{:<28} {:<13} {}", p.name, p.body.kind(), p.description);
            }
            Ok(())
        }
        Command::Train {
            source,
            iterations,
            checkpoint_every,
        } => {
            let preset = source.load()?;
            let PresetBody::Training(mut t) = preset.body else {
                return Err(Error::InvalidConfig(format!("`{}` is not a training preset", preset.name)));
            };
            if let Some(it) = iterations {
                t.schedule.total_iterations = *it;
            }
            if let Some(s) = cli.seed {
                t.schedule.seed = s;
            }
            if let Some(k) = checkpoint_every {
                t.schedule.checkpoint_interval = *k;
            }
            ensure_dir(&cli.out)?;
            let every = t.schedule.checkpoint_interval;
            let mut trace = String::from("iteration,loss\n");
            let out = train_with(t.system, t.variant, t.layers, &t.schedule, |p| {
                let _ = writeln!(trace, "{},{}", p.iteration + 1, p.loss);
                if every > 0 && (p.iteration + 1) % every == 0 {
                    let path = cli.out.join(format!("{}-iter{}.ubp", preset.name, p.iteration + 1));
                    save_model(p.network, path)?;
                }
                Ok(())
            });
            let loss_path = cli.out.join(format!("{}-loss.csv", preset.name));
            if let Err(Error::Divergence { trace: losses, .. }) = &out {
                let mut partial = String::from("iteration,loss\n");
                for (i, l) in losses.iter().enumerate() {
                    let _ = writeln!(partial, "{},{l}", i + 1);
                }
                std::fs::write(&loss_path, partial).map_err(|e| Error::io(&loss_path, e))?;
            }
            let out = out?;
            std::fs::write(&loss_path, trace).map_err(|e| Error::io(&loss_path, e))?;
            let model = model_path(&cli.out, &preset.name);
            save_model(&out.network, &model)?;
            println!(
                "trained {} ({} iterations, final loss {:.5}) -> {}",
                preset.name,
                out.losses.len(),
                out.losses.last().copied().unwrap_or(f64::NAN),
                model.display()
            );
            Ok(())
        }
        Command::Evaluate { source, overrides } => {
            let preset = source.load()?;
            let PresetBody::Experiment(mut spec) = preset.body else {
                return Err(Error::InvalidConfig(format!("`{}` is not an experiment", preset.name)));
            };
            overrides.apply(&mut spec, cli.seed)?;
            run_experiment(&preset.name, &spec, &overrides.models, &cli.out)
        }
        Command::Sweep { prefix, overrides } => {
            let selected: Vec<Preset> = preset_catalog()
                .into_iter()
                .filter(|p| p.name.starts_with(prefix.as_str()) && matches!(p.body, PresetBody::Experiment(_)))
                .collect();
            if selected.is_empty() {
                return Err(Error::UnknownPreset(format!("{prefix}*")));
            }
            for p in selected {
                let PresetBody::Experiment(mut spec) = p.body else { unreachable!() };
                overrides.apply(&mut spec, cli.seed)?;
                run_experiment(&p.name, &spec, &overrides.models, &cli.out)?;
            }
            Ok(())
        }
        Command::DepthSearch {
            source,
            iterations,
            budget,
        } => {
            let preset = source.load()?;
            let PresetBody::DepthSearch(mut d) = preset.body else {
                return Err(Error::InvalidConfig(format!("`{}` is not a depth search", preset.name)));
            };
            if let Some(b) = budget {
                d.budget = Some(*b);
            }
            if let Some(s) = cli.seed {
                d.schedule.seed = s;
            }
            let result = run_depth_search(&d, *iterations)?;
            ensure_dir(&cli.out)?;
            let mut csv = String::from("layers,validation_ber\n");
            for (l, b) in &result.trace {
                let _ = writeln!(csv, "{l},{b}");
            }
            let path = cli.out.join(format!("{}-depth.csv", preset.name));
            std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
            if result.budget_exhausted {
                eprintln!("warning: budget exhausted before a plateau; reporting the best depth seen");
            }
            println!("chosen L = {}", result.chosen);
            Ok(())
        }
    }
}

fn run_experiment(name: &str, spec: &ExperimentSpec, models: &Path, out: &Path) -> Result<()> {
    let records = evaluate_ber_in(spec, models)?;
    ensure_dir(out)?;
    let path = out.join(format!("{name}.csv"));
    write_csv(&records, &path)?;
    println!("{name}: {} records -> {}", records.len(), path.display());
    Ok(())
}
