//! Experiment specs, the parallel method grid and its output files.
//!
//! A spec is a flat `key = value` file. Top-level keys set the seed, label
//! order, metrics and default base learner; `[dataset NAME]` and
//! `[method NAME]` sections declare the grid:
//!
//! ```text
//! seed = 1
//! metrics = hamming_loss, zero_one_loss, levenshtein_norm
//!
//! [dataset elec05]
//! format = arff
//! path = elecNormNew.arff
//! tau = 5
//!
//! [method rakeld]
//! k = 3
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mlseq_core::harness::{evaluate_cell, Grid, ResultsTable};
use mlseq_core::methods::{LabelOrder, MethodKind};
use mlseq_core::metrics::Metric;
use mlseq_core::transform::{window_transform, Window};
use mlseq_core::{BaseLearner, Dataset, DecisionTreeConfig, MethodSpec};
use rayon::prelude::*;

use crate::error::{read_to_string, IoError, IoResult};
use crate::synth::{synth_traveller, SynthTravellerConfig};
use crate::{arff, csvio, SequenceData};

/// Builds a method from its kind name and `key = value` options.
///
/// Recognised keys: `base` (`nb` | `dt`), `min_leaf`, `max_depth`, `order`
/// (`time` | `random`), `samples`, `prune`, `k`, `sequential`, `ell`,
/// `alpha`. A key the method does not use is an error.
pub fn build_method(
    name: &str,
    kind: &str,
    opts: &[(String, String)],
    default_base: BaseLearner,
) -> IoResult<MethodSpec> {
    let kind_label = kind.to_string();
    let mut kind = MethodKind::with_defaults(kind)?;
    let mut base = default_base;
    let mut tree = match base {
        BaseLearner::DecisionTree(cfg) => cfg,
        BaseLearner::NaiveBayes => DecisionTreeConfig::default(),
    };
    let mut tree_touched = false;
    for (key, value) in opts {
        let bad = || IoError::Format(format!("method `{name}`: bad value `{value}` for `{key}`"));
        let int = || value.parse::<usize>().map_err(|_| bad());
        let unused = || IoError::Format(format!("method `{name}`: `{key}` does not apply to {kind_label}"));
        match key.as_str() {
            "base" => {
                base = match value.as_str() {
                    "nb" => BaseLearner::NaiveBayes,
                    "dt" => BaseLearner::DecisionTree(tree),
                    _ => return Err(bad()),
                }
            }
            "min_leaf" => {
                tree.min_leaf = int()?;
                tree_touched = true;
            }
            "max_depth" => {
                tree.max_depth = Some(int()?);
                tree_touched = true;
            }
            "order" => {
                let o: LabelOrder = value.parse().map_err(|_| bad())?;
                match &mut kind {
                    MethodKind::Cc { order } | MethodKind::Pcc { order, .. } | MethodKind::Ct { order, .. } => {
                        *order = o
                    }
                    _ => return Err(unused()),
                }
            }
            "samples" => match &mut kind {
                MethodKind::Pcc { samples, .. } => *samples = int()?,
                _ => return Err(unused()),
            },
            "prune" => match &mut kind {
                MethodKind::Lp { prune } => *prune = Some(int()?),
                _ => return Err(unused()),
            },
            "k" => match &mut kind {
                MethodKind::Rakeld { k, .. } => *k = int()?,
                _ => return Err(unused()),
            },
            "sequential" => match &mut kind {
                MethodKind::Rakeld { sequential, .. } => *sequential = value.parse().map_err(|_| bad())?,
                _ => return Err(unused()),
            },
            "ell" => match &mut kind {
                MethodKind::Ct { ell, .. } => *ell = int()?,
                _ => return Err(unused()),
            },
            "alpha" => match &mut kind {
                MethodKind::Sicl { alpha } => *alpha = int()?,
                _ => return Err(unused()),
            },
            _ => return Err(IoError::Format(format!("method `{name}`: unknown key `{key}`"))),
        }
    }
    if let BaseLearner::DecisionTree(_) = base {
        base = BaseLearner::DecisionTree(tree);
    } else if tree_touched {
        return Err(IoError::Format(format!("method `{name}`: tree options need base = dt")));
    }
    Ok(MethodSpec::named(name, kind, base))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Arff {
        path: PathBuf,
        class: Option<String>,
    },
    Sequences {
        path: PathBuf,
    },
    /// Canonical dataset CSV, used as is.
    Dataset {
        path: PathBuf,
    },
    Synth(SynthTravellerConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub source: Source,
    pub window: Window,
}

/// Block-transforms raw sequences.
pub fn to_blocks(name: &str, data: &SequenceData, window: Window) -> IoResult<Dataset> {
    Ok(window_transform(
        name,
        &data.sequences,
        &data.features,
        data.n_states(),
        window,
    )?)
}

impl DatasetSpec {
    pub fn load(&self) -> IoResult<Dataset> {
        let seqs = match &self.source {
            Source::Dataset { path } => {
                let mut d = csvio::load_dataset(path)?;
                d.name = self.name.clone();
                return Ok(d);
            }
            Source::Arff { path, class } => {
                let a = arff::load_arff(path)?;
                let idx = match class {
                    Some(c) => Some(
                        a.attribute_index(c)
                            .ok_or_else(|| IoError::Format(format!("no attribute `{c}` in {}", path.display())))?,
                    ),
                    None => None,
                };
                a.to_sequences(idx)?
            }
            Source::Sequences { path } => csvio::load_sequences(path)?,
            Source::Synth(cfg) => synth_traveller(cfg)?,
        };
        to_blocks(&self.name, &seqs, self.window)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub label_order: LabelOrder,
    pub metrics: Vec<Metric>,
    pub datasets: Vec<DatasetSpec>,
    pub methods: Vec<MethodSpec>,
}

pub const DEFAULT_METRICS: [Metric; 3] = [Metric::HammingLoss, Metric::ZeroOneLoss, Metric::LevenshteinNorm];

struct Section {
    header: Option<(String, String)>,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

fn sections(text: &str) -> IoResult<Vec<Section>> {
    let mut out = vec![Section {
        header: None,
        line: 0,
        entries: Vec::new(),
    }];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(body) = s.strip_prefix('[') {
            let body = body
                .strip_suffix(']')
                .ok_or_else(|| IoError::parse(line, "unterminated section header"))?;
            let mut it = body.split_whitespace();
            let (Some(kind), Some(name), None) = (it.next(), it.next(), it.next()) else {
                return Err(IoError::parse(
                    line,
                    "section header must be `[dataset NAME]` or `[method NAME]`",
                ));
            };
            if kind != "dataset" && kind != "method" {
                return Err(IoError::parse(line, format!("unknown section kind `{kind}`")));
            }
            out.push(Section {
                header: Some((kind.to_string(), name.to_string())),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| IoError::parse(line, "expected `key = value`"))?;
        out.last_mut()
            .expect("top section")
            .entries
            .push((k.trim().to_string(), v.trim().to_string(), line));
    }
    Ok(out)
}

fn parse_bool(v: &str, line: usize) -> IoResult<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(IoError::parse(line, format!("`{v}` is not a boolean"))),
    }
}

fn parse_dataset(name: &str, line: usize, entries: &[(String, String, usize)], dir: &Path) -> IoResult<DatasetSpec> {
    let mut format = None;
    let mut path = None;
    let mut class = None;
    let mut tau = None;
    let mut pad = false;
    let mut synth = SynthTravellerConfig::default();
    let mut synth_keys = false;
    for (k, v, l) in entries {
        match k.as_str() {
            "format" => format = Some(v.clone()),
            "path" => path = Some(dir.join(v)),
            "class" => class = Some(v.clone()),
            "tau" => {
                tau = Some(
                    v.parse::<usize>()
                        .map_err(|_| IoError::parse(*l, format!("bad tau `{v}`")))?,
                )
            }
            "pad" => pad = parse_bool(v, *l)?,
            _ => {
                synth
                    .set(k, v)
                    .map_err(|e| IoError::parse(*l, format!("dataset `{name}`: {e}")))?;
                synth_keys = true;
            }
        }
    }
    let format = format.ok_or_else(|| IoError::parse(line, format!("dataset `{name}` needs a format")))?;
    let need_path = || {
        path.clone()
            .ok_or_else(|| IoError::parse(line, format!("dataset `{name}` needs a path")))
    };
    let source = match format.as_str() {
        "arff" => Source::Arff {
            path: need_path()?,
            class,
        },
        "sequences" => Source::Sequences { path: need_path()? },
        "dataset" => Source::Dataset { path: need_path()? },
        "synth" => Source::Synth(synth),
        other => return Err(IoError::parse(line, format!("unknown dataset format `{other}`"))),
    };
    if synth_keys && !matches!(source, Source::Synth(_)) {
        return Err(IoError::parse(
            line,
            format!("dataset `{name}` has generator keys but format {format}"),
        ));
    }
    let tau = match (&source, tau) {
        (Source::Dataset { .. }, _) => 1,
        (_, Some(t)) if t >= 1 => t,
        _ => return Err(IoError::parse(line, format!("dataset `{name}` needs tau >= 1"))),
    };
    Ok(DatasetSpec {
        name: name.to_string(),
        source,
        window: Window { tau, pad },
    })
}

impl ExperimentSpec {
    /// Parses a spec; relative dataset paths resolve against `dir`.
    pub fn parse(text: &str, dir: &Path) -> IoResult<Self> {
        let mut spec = ExperimentSpec {
            seed: 0,
            label_order: LabelOrder::Time,
            metrics: DEFAULT_METRICS.to_vec(),
            datasets: Vec::new(),
            methods: Vec::new(),
        };
        let mut default_base = BaseLearner::NaiveBayes;
        let all = sections(text)?;
        for (k, v, l) in &all[0].entries {
            let bad = || IoError::parse(*l, format!("bad value `{v}` for `{k}`"));
            match k.as_str() {
                "seed" => spec.seed = v.parse().map_err(|_| bad())?,
                "label_order" => spec.label_order = v.parse().map_err(|_| bad())?,
                "metrics" => {
                    spec.metrics = v
                        .split(',')
                        .map(|m| m.parse::<Metric>().map_err(|_| bad()))
                        .collect::<IoResult<_>>()?
                }
                "base" => {
                    default_base = match v.as_str() {
                        "nb" => BaseLearner::NaiveBayes,
                        "dt" => BaseLearner::tree(),
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(IoError::parse(*l, format!("unknown key `{k}`"))),
            }
        }
        for s in &all[1..] {
            let (kind, name) = s.header.as_ref().expect("named section");
            match kind.as_str() {
                "dataset" => {
                    if spec.datasets.iter().any(|d| &d.name == name) {
                        return Err(IoError::parse(s.line, format!("duplicate dataset `{name}`")));
                    }
                    spec.datasets.push(parse_dataset(name, s.line, &s.entries, dir)?);
                }
                _ => {
                    if spec.methods.iter().any(|m| &m.name == name) {
                        return Err(IoError::parse(s.line, format!("duplicate method `{name}`")));
                    }
                    let mut method_kind = name.clone();
                    let mut opts = Vec::new();
                    for (k, v, _) in &s.entries {
                        if k == "kind" {
                            method_kind = v.clone();
                        } else {
                            opts.push((k.clone(), v.clone()));
                        }
                    }
                    let m = build_method(name, &method_kind, &opts, default_base)
                        .map_err(|e| IoError::parse(s.line, e.to_string()))?;
                    spec.methods.push(m);
                }
            }
        }
        if spec.datasets.is_empty() || spec.methods.is_empty() {
            return Err(IoError::Format("spec needs at least one dataset and one method".into()));
        }
        if spec.metrics.is_empty() {
            return Err(IoError::Format("spec needs at least one metric".into()));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> IoResult<Self> {
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&read_to_string(path)?, dir).map_err(|e| match e {
            IoError::Parse { line, reason } => IoError::Format(format!("{}:{line}: {reason}", path.display())),
            other => other,
        })
    }
}

/// Runs every cell of the grid in parallel. Each cell's randomness is keyed
/// by (seed, dataset, method, fold), so the numbers match a sequential run
/// or a single cell run alone.
pub fn run_grid_parallel(
    datasets: &[Dataset],
    methods: &[MethodSpec],
    seed: u64,
    label_order: LabelOrder,
) -> IoResult<Grid> {
    let cells: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..methods.len()).map(move |m| (d, m)))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(d, m)| evaluate_cell(&datasets[d], &methods[m], seed, label_order))
        .collect();
    let mut results = results.into_iter();
    Ok(Grid::fill_with(
        datasets.iter().map(|d| d.name.clone()).collect(),
        methods.iter().map(|m| m.name.clone()).collect(),
        |_, _| results.next().expect("one result per cell"),
    )?)
}

pub fn run_experiment(spec: &ExperimentSpec) -> IoResult<Grid> {
    let datasets = spec
        .datasets
        .par_iter()
        .map(DatasetSpec::load)
        .collect::<IoResult<Vec<_>>>()?;
    run_grid_parallel(&datasets, &spec.methods, spec.seed, spec.label_order)
}

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

/// `dataset, m1, m1_rank, m2, m2_rank, ...` plus a final `avg_rank` row.
pub fn table_csv(t: &ResultsTable) -> String {
    let mut out = String::from("dataset");
    for m in &t.methods {
        write!(out, ",{m},{m}_rank").expect("string write");
    }
    out.push('\n');
    for (d, name) in t.datasets.iter().enumerate() {
        out.push_str(name);
        for m in 0..t.methods.len() {
            write!(out, ",{},{}", fmt_value(t.values[d][m]), t.ranks[d][m]).expect("string write");
        }
        out.push('\n');
    }
    out.push_str("avg_rank");
    for r in &t.average_rank {
        write!(out, ",,{}", fmt_value(*r)).expect("string write");
    }
    out.push('\n');
    out
}

/// Plain-text tables of every metric with `value (rank)` cells.
pub fn summary_text(grid: &Grid, metrics: &[Metric]) -> String {
    let mut out = String::new();
    let name_w = grid.datasets.iter().map(String::len).chain([8]).max().unwrap_or(8);
    let col_w = grid.methods.iter().map(String::len).chain([12]).max().unwrap_or(12);
    for &metric in metrics {
        let t = grid.table(metric);
        let dir = if metric.lower_is_better() {
            "lower is better"
        } else {
            "higher is better"
        };
        writeln!(out, "{} ({dir})", metric.name()).expect("string write");
        write!(out, "{:name_w$}", "").expect("string write");
        for m in &t.methods {
            write!(out, "  {m:>col_w$}").expect("string write");
        }
        out.push('\n');
        for (d, name) in t.datasets.iter().enumerate() {
            write!(out, "{name:name_w$}").expect("string write");
            for m in 0..t.methods.len() {
                let cell = format!("{:.3} ({})", t.values[d][m], t.ranks[d][m]);
                write!(out, "  {cell:>col_w$}").expect("string write");
            }
            out.push('\n');
        }
        write!(out, "{:name_w$}", "avg rank").expect("string write");
        for r in &t.average_rank {
            write!(out, "  {:>col_w$}", format!("{r:.2}")).expect("string write");
        }
        out.push_str("\n\n");
    }
    out
}

/// `horizon_offset, error` with offsets starting at 1.
pub fn curve_csv(per_horizon: &[f64]) -> String {
    let mut out = String::from("horizon_offset,error\n");
    for (j, e) in per_horizon.iter().enumerate() {
        writeln!(out, "{},{}", j + 1, e).expect("string write");
    }
    out
}

/// Writes `results_<metric>.csv`, `summary.txt` and
/// `curves/<dataset>__<method>.csv` under `dir`. Returns the written paths.
pub fn write_outputs(grid: &Grid, metrics: &[Metric], dir: &Path) -> IoResult<Vec<PathBuf>> {
    let curves = dir.join("curves");
    std::fs::create_dir_all(&curves).map_err(|e| IoError::file(&curves, e))?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> IoResult<()> {
        std::fs::write(&path, text).map_err(|e| IoError::file(&path, e))?;
        written.push(path);
        Ok(())
    };
    for &m in metrics {
        put(dir.join(format!("results_{}.csv", m.name())), table_csv(&grid.table(m)))?;
    }
    put(dir.join("summary.txt"), summary_text(grid, metrics))?;
    for (d, dname) in grid.datasets.iter().enumerate() {
        for (m, mname) in grid.methods.iter().enumerate() {
            put(
                curves.join(format!("{dname}__{mname}.csv")),
                curve_csv(&grid.reports[d][m].per_horizon),
            )?;
        }
    }
    Ok(written)
}
