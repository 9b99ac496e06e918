use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mlseq::csvio;
use mlseq::experiment::{build_method, to_blocks, write_outputs, ExperimentSpec, DEFAULT_METRICS};
use mlseq::model_io::ModelFile;
use mlseq::synth::{synth_traveller, SynthTravellerConfig};
use mlseq::{arff, SequenceData};
use mlseq_core::harness::two_fold_cv;
use mlseq_core::metrics::Metric;
use mlseq_core::transform::Window;
use mlseq_core::{BaseLearner, Dataset, EvalReport, LabelVector, MultiLabelModel};

#[derive(Parser)]
#[command(
    name = "mlseq",
    about = "Multi-label methods for sequence prediction",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block-transform a sequence file into a multi-label dataset CSV.
    Transform {
        #[command(flatten)]
        input: InputArgs,
        /// Output file (default: standard output).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Train a method and save the model.
    Train {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        save: PathBuf,
    },
    /// Predict with a saved model; writes a predictions CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Score a saved model on labelled data, or run two-fold
    /// cross-validation of a method when no model is given.
    Evaluate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
        /// Comma-separated metrics to print.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        /// Print the full report as one JSON object.
        #[arg(long)]
        json: bool,
    },
    /// Run a dataset-by-method grid from a spec file.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Generate a synthetic traveller sequence file.
    SynthTraveller {
        /// `key = value` generator settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Canonical multi-label dataset CSV.
    Dataset,
    /// Sequence CSV: seq_id, features..., state.
    Sequences,
    Arff,
}

#[derive(Args)]
struct InputArgs {
    /// Input file.
    input: PathBuf,
    /// Input format (default: by extension and header).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Window length; required for sequence input.
    #[arg(long)]
    tau: Option<usize>,
    /// Pad the end of each sequence with its final state.
    #[arg(long)]
    pad: bool,
    /// Class attribute of an ARFF file (default: the last).
    #[arg(long)]
    class: Option<String>,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value = "ic")]
    method: String,
    #[arg(long, default_value = "nb")]
    base: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    prune: Option<usize>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MethodArgs {
    fn spec(&self) -> Result<mlseq_core::MethodSpec> {
        let mut opts = vec![("base".to_string(), self.base.clone())];
        let mut add = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                opts.push((k.to_string(), v));
            }
        };
        add("k", self.k.map(|v| v.to_string()));
        add("alpha", self.alpha.map(|v| v.to_string()));
        add("ell", self.ell.map(|v| v.to_string()));
        add("samples", self.samples.map(|v| v.to_string()));
        add("prune", self.prune.map(|v| v.to_string()));
        add("order", self.order.clone());
        add("min_leaf", self.min_leaf.map(|v| v.to_string()));
        add("max_depth", self.max_depth.map(|v| v.to_string()));
        Ok(build_method(
            &self.method,
            &self.method,
            &opts,
            BaseLearner::NaiveBayes,
        )?)
    }
}

fn sniff(path: &Path) -> Result<Format> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff")) {
        return Ok(Format::Arff);
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap_or("");
    Ok(if header.contains(":label:") {
        Format::Dataset
    } else {
        Format::Sequences
    })
}

impl InputArgs {
    fn sequences(&self, format: Format) -> Result<SequenceData> {
        Ok(match format {
            Format::Arff => {
                let a = arff::load_arff(&self.input)?;
                let class = match &self.class {
                    Some(c) => Some(a.attribute_index(c).with_context(|| format!("no attribute `{c}`"))?),
                    None => None,
                };
                a.to_sequences(class)?
            }
            Format::Sequences => csvio::load_sequences(&self.input)?,
            Format::Dataset => bail!("{} is already a dataset", self.input.display()),
        })
    }

    fn load(&self) -> Result<Dataset> {
        let format = match self.format {
            Some(f) => f,
            None => sniff(&self.input)?,
        };
        if let Format::Dataset = format {
            if self.tau.is_some() {
                bail!("--tau applies to sequence input only");
            }
            return Ok(csvio::load_dataset(&self.input)?);
        }
        let Some(tau) = self.tau else {
            bail!("--tau is required for sequence input");
        };
        let name = self.input.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
        let seqs = self.sequences(format)?;
        Ok(to_blocks(name, &seqs, Window { tau, pad: self.pad })?)
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn print_report(report: &EvalReport, metrics: &[String], json: bool) -> Result<()> {
    let mut out = std::io::stdout().lock();
    if json {
        let v = serde_json::json!({
            "hamming_loss": report.hamming_loss,
            "zero_one_loss": report.zero_one_loss,
            "levenshtein_norm": report.levenshtein_norm,
            "lcs_norm": report.lcs_norm,
            "per_horizon": report.per_horizon,
            "n": report.n,
        });
        writeln!(out, "{v}")?;
        return Ok(());
    }
    let metrics: Vec<Metric> = if metrics.is_empty() {
        DEFAULT_METRICS.to_vec()
    } else {
        metrics.iter().map(|m| m.parse()).collect::<Result<_, _>>()?
    };
    for m in metrics {
        writeln!(out, "{} = {}", m.name(), report.get(m))?;
    }
    let curve: Vec<String> = report.per_horizon.iter().map(|e| e.to_string()).collect();
    writeln!(out, "per_horizon = {}", curve.join(","))?;
    writeln!(out, "n = {}", report.n)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Transform { input, output } => {
            let d = input.load()?;
            csvio::write_dataset(sink(&output)?, &d)?;
            eprintln!(
                "{} instances, {} features, {} labels",
                d.len(),
                d.features.len(),
                d.schema.len()
            );
        }
        Command::Train { input, method, save } => {
            let d = input.load()?;
            let spec = method.spec()?;
            let model = spec.train(&d, method.seed)?;
            ModelFile::new(spec, method.seed, model).save(&save)?;
        }
        Command::Predict { model, input, output } => {
            let m = ModelFile::load(&model)?;
            let d = input.load()?;
            let preds = d
                .instances
                .iter()
                .map(|inst| m.model.predict(inst.x.values()))
                .collect::<Result<Vec<LabelVector>, _>>()?;
            csvio::write_predictions(sink(&output)?, &preds)?;
        }
        Command::Evaluate {
            model,
            input,
            method,
            metrics,
            json,
        } => {
            let d = input.load()?;
            let report = match model {
                Some(path) => {
                    let m = ModelFile::load(&path)?;
                    let pairs = d
                        .instances
                        .iter()
                        .map(|inst| Ok((inst.y.clone(), m.model.predict(inst.x.values())?)))
                        .collect::<Result<Vec<_>, mlseq_core::Error>>()?;
                    EvalReport::from_pairs(&pairs)?
                }
                None => two_fold_cv(&d, &method.spec()?, method.seed)?,
            };
            print_report(&report, &metrics, json)?;
        }
        Command::Experiment { spec, out, threads } => {
            let spec = ExperimentSpec::load(&spec)?;
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            }
            let grid = mlseq::experiment::run_experiment(&spec)?;
            let written = write_outputs(&grid, &spec.metrics, &out)?;
            eprintln!("wrote {} files to {}", written.len(), out.display());
        }
        Command::SynthTraveller {
            config,
            seed,
            steps,
            output,
        } => {
            let mut cfg = SynthTravellerConfig::default();
            if let Some(path) = config {
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                for (i, line) in text.lines().enumerate() {
                    let line = line.split('#').next().unwrap_or("").trim();
                    if line.is_empty() {
                        continue;
                    }
                    let (k, v) = line
                        .split_once('=')
                        .with_context(|| format!("{}:{}: expected `key = value`", path.display(), i + 1))?;
                    cfg.set(k.trim(), v.trim())
                        .with_context(|| format!("{}:{}", path.display(), i + 1))?;
                }
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = steps {
                cfg.n_steps = n;
            }
            csvio::write_sequences(sink(&output)?, &synth_traveller(&cfg)?)?;
        }
        Command::Version => println!("mlseq {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

/// A closed downstream pipe (`mlseq ... | head`) is not an error.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c
            .downcast_ref::<std::io::Error>()
            .or_else(|| match c.downcast_ref::<mlseq::IoError>() {
                Some(mlseq::IoError::Io(io)) => Some(io),
                _ => None,
            })
            .or_else(|| match c.downcast_ref::<csv::Error>().map(csv::Error::kind) {
                Some(csv::ErrorKind::Io(io)) => Some(io),
                _ => None,
            });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("mlseq: {msg}");
            ExitCode::FAILURE
        }
    }
}
