//! Acceptance run: prints one PASS/FAIL line per criterion.
//!
//! A criterion that cannot run because external data is missing prints a
//! FAIL line tagged `[blocked: ...]` and does not change the exit status;
//! every other FAIL does.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mlseq::experiment::{run_experiment, run_grid_parallel, to_blocks, write_outputs, ExperimentSpec};
use mlseq::synth::{synth_traveller, SynthTravellerConfig};
use mlseq::{arff, csvio, SequenceData};
use mlseq_core::base::Row;
use mlseq_core::gen::{random_dataset, RandomDatasetConfig};
use mlseq_core::harness::{evaluate_cell, rank_row, two_fold_cv};
use mlseq_core::methods::{chain::ChainModel, memm_train, LabelOrder, MethodKind};
use mlseq_core::metrics::{hamming_loss, levenshtein};
use mlseq_core::transform::{window_transform, Sequence, Window};
use mlseq_core::{seed, BaseLearner, Dataset, FeatureKind, FeatureVector, MethodSpec, MultiLabelModel, Value};
use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

type Check = (u8, &'static str, fn() -> Outcome);

fn main() {
    let checks: [Check; 10] = [
        (1, "viterbi exactness", c1_viterbi),
        (2, "dominance of exact decoders", c2_dominance),
        (3, "metric oracles", c3_metrics),
        (4, "block transform fidelity", c4_transform),
        (5, "rank semantics", c5_ranks),
        (6, "degenerate equivalences", c6_equivalences),
        (7, "electricity band and grid time", c7_electricity),
        (8, "horizon decay", c8_horizon),
        (9, "determinism", c9_determinism),
        (10, "naive bayes hand oracle", c10_naive_bayes),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in checks {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(d) => println!("PASS {id:>2} {name}: {d} ({secs:.1}s)"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {d} ({secs:.1}s)");
            }
            Outcome::Blocked(d) => println!("FAIL {id:>2} {name}: {d} ({secs:.1}s)"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn random_problem(rng: &mut impl Rng, s: u64, max_t: usize) -> Dataset {
    let cfg = RandomDatasetConfig::random_shape(rng, max_t, 4);
    random_dataset(&cfg, s).expect("valid generated dataset")
}

fn base_for(s: u64) -> BaseLearner {
    if s.is_multiple_of(2) {
        BaseLearner::NaiveBayes
    } else {
        BaseLearner::tree()
    }
}

fn all_paths(cards: &[u32]) -> Vec<Vec<u32>> {
    cards.iter().fold(vec![vec![]], |acc, &l| {
        acc.into_iter()
            .flat_map(|p| {
                (0..l).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect()
    })
}

fn direct_product(m: &ChainModel, x: &[Value], path: &[u32]) -> f64 {
    path.iter()
        .enumerate()
        .map(|(t, &k)| {
            let prev: Vec<u32> = if t == 0 { vec![] } else { vec![path[t - 1]] };
            m.models()[t].predict_dist(Row::new(x, &prev)).unwrap().prob(k)
        })
        .product()
}

fn c1_viterbi() -> Outcome {
    let started = Instant::now();
    let mut rng = seed::rng(1001);
    let (mut inputs, mut ties, mut bad) = (0, 0, Vec::new());
    for s in 0..500 {
        let d = random_problem(&mut rng, s, 6);
        let m = memm_train(&d, &base_for(s)).unwrap();
        let paths = all_paths(m.schema().cardinalities());
        for inst in d.instances.iter().take(3) {
            let x = inst.x.values();
            let (best_path, best_prob) = m.predict_viterbi(x).unwrap();
            let mut best = f64::NEG_INFINITY;
            let mut argmax = Vec::new();
            for p in &paths {
                let score = m.log_joint(x, p).unwrap();
                if score > best {
                    best = score;
                    argmax.clear();
                }
                if score == best {
                    argmax.push(p);
                }
            }
            inputs += 1;
            if argmax.len() > 1 {
                ties += 1;
            }
            let path_ok = if argmax.len() == 1 {
                &best_path == argmax[0]
            } else {
                m.log_joint(x, &best_path).unwrap() == best
            };
            let direct = direct_product(&m, x, &best_path);
            let prob_ok = ((best_prob - direct) / direct).abs() <= 1e-12;
            if !(path_ok && prob_ok) {
                bad.push(s);
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        bad.is_empty() && secs < 60.0,
        format!(
            "500 models, {inputs} inputs, {} mismatches; {ties} inputs with several exactly tied optima, decoded path attains the optimum; {secs:.1}s < 60s",
            bad.len()
        ),
    )
}

fn c2_dominance() -> Outcome {
    let mut rng = seed::rng(2002);
    let (mut checked, mut violations) = (0, 0);
    for s in 0..200 {
        let d = random_problem(&mut rng, s, 6);
        let base = base_for(s);
        let train = |kind: MethodKind| MethodSpec::new(kind, base).train(&d, s).unwrap();
        let memm = train(MethodKind::Memm);
        let vcc = train(MethodKind::Vcc);
        let cc = train(MethodKind::Cc {
            order: LabelOrder::Time,
        });
        let pcc = train(MethodKind::Pcc {
            order: LabelOrder::Time,
            samples: 100,
        });
        for inst in &d.instances {
            let x = inst.x.values();
            let js = |m: &mlseq_core::TrainedModel, by: &mlseq_core::TrainedModel| {
                m.joint_score(x, by.predict(x).unwrap().values()).unwrap().unwrap()
            };
            checked += 1;
            if js(&vcc, &vcc) < js(&vcc, &memm) {
                violations += 1;
            }
            if js(&pcc, &pcc) < js(&pcc, &cc) {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("200 problems, {checked} inputs, {violations} violations"),
    )
}

fn lev_memo(a: &[u32], b: &[u32]) -> usize {
    fn go(a: &[u32], b: &[u32], i: usize, j: usize, memo: &mut [Option<usize>], w: usize) -> usize {
        if i.min(j) == 0 {
            return i.max(j);
        }
        if let Some(v) = memo[i * w + j] {
            return v;
        }
        let v = (go(a, b, i - 1, j, memo, w) + 1)
            .min(go(a, b, i, j - 1, memo, w) + 1)
            .min(go(a, b, i - 1, j - 1, memo, w) + usize::from(a[i - 1] != b[j - 1]));
        memo[i * w + j] = Some(v);
        v
    }
    let w = b.len() + 1;
    go(a, b, a.len(), b.len(), &mut vec![None; (a.len() + 1) * w], w)
}

fn c3_metrics() -> Outcome {
    let (y, p) = ([0u32, 8, 2, 9, 7], [8u32, 2, 9, 7, 0]);
    let printed = levenshtein(&y, &p) == 2 && hamming_loss(&y, &p).unwrap() == 1.0;
    let mut strings: Vec<Vec<u32>> = vec![vec![]];
    let mut frontier: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..6 {
        frontier = frontier
            .iter()
            .flat_map(|s| {
                (0..3).map(move |c| {
                    let mut t = s.clone();
                    t.push(c);
                    t
                })
            })
            .collect();
        strings.extend(frontier.iter().cloned());
    }
    let mut mismatches = 0u64;
    let mut pairs = 0u64;
    for a in &strings {
        for b in &strings {
            pairs += 1;
            if levenshtein(a, b) != lev_memo(a, b) {
                mismatches += 1;
            }
        }
    }
    verdict(
        printed && mismatches == 0,
        format!(
            "printed example lev=2 HL=1 {}; {pairs} pairs, {mismatches} mismatches",
            if printed { "ok" } else { "WRONG" }
        ),
    )
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn c4_transform() -> Outcome {
    let data = csvio::load_sequences(&data_dir().join("toy_six.csv")).unwrap();
    let d = to_blocks("toy", &data, Window::new(2)).unwrap();
    let row = |xs: [u32; 2], ys: [u32; 2]| {
        vec![
            Value::Num(10.0 * xs[0] as f64),
            Value::Num(10.0 * xs[1] as f64),
            Value::Cat(ys[0]),
            Value::Cat(ys[1]),
        ]
    };
    let want = [
        (row([2, 3], [1, 2]), vec![3, 4]),
        (row([3, 4], [2, 3]), vec![4, 5]),
        (row([4, 5], [3, 4]), vec![5, 6]),
    ];
    let got: Vec<_> = d.instances.iter().map(|i| (i.x.0.clone(), i.y.0.clone())).collect();
    let rows_ok = got == want;

    let mut rng = seed::rng(4004);
    let mut wrong = 0;
    for _ in 0..100 {
        let tau = rng.gen_range(1..=8);
        let len = rng.gen_range(2 * tau..=2 * tau + 30);
        let seq = Sequence::new(
            "r",
            (0..len).map(|s| FeatureVector(vec![Value::Num(s as f64)])).collect(),
            vec![0; len],
        );
        let n = window_transform("r", &[seq], &[FeatureKind::Numeric], 2, Window::new(tau))
            .unwrap()
            .len();
        // anchors t (1-based) whose past and future windows both fit
        let oracle = (1..=len).filter(|&t| t > tau && t + tau - 1 <= len).count();
        if n != oracle || n != len - 2 * tau + 1 {
            wrong += 1;
        }
    }
    verdict(
        rows_ok && wrong == 0,
        format!(
            "toy rows {}; 100 random (T, tau), {wrong} count mismatches",
            if rows_ok { "match" } else { "DIFFER" }
        ),
    )
}

fn c5_ranks() -> Outcome {
    let row = [0.278, 0.283, 0.271, 0.272, 0.270, 0.277, 0.272, 0.272];
    let got = rank_row(&row, true);
    verdict(got == [7, 8, 2, 3, 1, 6, 3, 3], format!("ranks {got:?}"))
}

fn c6_equivalences() -> Outcome {
    let mut rng = seed::rng(6006);
    let mut differ = 0;
    for s in 0..20 {
        let d = random_problem(&mut rng, s, 6);
        let base = base_for(s);
        let t = d.schema.len();
        let lp = MethodSpec::new(MethodKind::Lp { prune: None }, base)
            .train(&d, s)
            .unwrap();
        let rk = MethodSpec::new(
            MethodKind::Rakeld {
                k: t,
                sequential: false,
            },
            base,
        )
        .train(&d, s)
        .unwrap();
        let sicl = MethodSpec::new(MethodKind::Sicl { alpha: t }, base)
            .train(&d, s)
            .unwrap();
        for inst in &d.instances {
            let x = inst.x.values();
            let want = lp.predict(x).unwrap();
            differ += usize::from(rk.predict(x).unwrap() != want) + usize::from(sicl.predict(x).unwrap() != want);
        }
    }

    let names = ["ic", "cc", "pcc", "memm", "vcc", "lp", "rakeld", "ct", "sicl"];
    let (mut compared, mut skipped, mut collapse_bad) = (0, 0, 0);
    for s in 0..20 {
        let d = random_problem(&mut rng, 100 + s, 1);
        let base = base_for(s);
        let l = d.schema.cardinality(0) as usize;
        let labels = d.label_column(0);
        let rows: Vec<FeatureVector> = d.instances.iter().map(|i| i.x.clone()).collect();
        let bare = base.fit_rows(&rows, &labels, l, &d.features).unwrap();
        for name in names {
            let kind = match MethodKind::with_defaults(name).unwrap() {
                MethodKind::Rakeld { sequential, .. } => MethodKind::Rakeld { k: 1, sequential },
                k => k,
            };
            let m = MethodSpec::new(kind, base).train(&d, s).unwrap();
            for inst in &d.instances {
                let x = inst.x.values();
                let dist = bare.predict_dist(Row::plain(x)).unwrap();
                let top = dist.argmax();
                let tied = dist
                    .probs()
                    .iter()
                    .enumerate()
                    .any(|(c, &p)| c != top as usize && p == dist.prob(top));
                if tied || !labels.contains(&top) {
                    skipped += 1;
                    continue;
                }
                compared += 1;
                if m.predict(x).unwrap().values() != [top] {
                    collapse_bad += 1;
                }
            }
        }
    }
    verdict(
        differ == 0 && collapse_bad == 0,
        format!(
            "20 datasets, {differ} RAkELd/SICL vs LP differences; T=1: {compared} predictions, {collapse_bad} differ from the bare classifier ({skipped} skipped: tied or unseen top class)"
        ),
    )
}

fn elec_path() -> PathBuf {
    std::env::var_os("MLSEQ_ELEC_ARFF")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/elecNormNew.arff"))
}

fn eight_methods() -> Vec<MethodSpec> {
    ["ic", "cc", "memm", "vcc", "rakeld", "pcc", "ct", "sicl"]
        .iter()
        .map(|n| MethodSpec::new(MethodKind::with_defaults(n).unwrap(), BaseLearner::NaiveBayes))
        .collect()
}

/// Same shape as the electricity stream: 45,312 half-hourly steps, eight
/// attributes, a persistent binary class.
fn electricity_surrogate() -> SequenceData {
    let mut rng = seed::stream(7, &["electricity-surrogate".into()]);
    let n = 45_312;
    let mut class = 0u32;
    let mut emissions = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        if rng.gen::<f64>() < 0.15 {
            class = 1 - class;
        }
        let price = 0.05 + 0.03 * class as f64 + 0.02 * rng.gen::<f64>();
        emissions.push(FeatureVector(vec![
            Value::Num(i as f64 / n as f64),
            Value::Cat(((i / 48) % 7) as u32),
            Value::Num((i % 48) as f64 / 47.0),
            Value::Num(price),
            Value::Num(0.4 + 0.2 * rng.gen::<f64>()),
            Value::Num(0.003 + 0.001 * rng.gen::<f64>()),
            Value::Num(0.4 + 0.1 * rng.gen::<f64>()),
            Value::Num(0.4 + 0.1 * rng.gen::<f64>()),
        ]));
        states.push(class);
    }
    let mut features = vec![FeatureKind::Numeric; 8];
    features[1] = FeatureKind::Categorical { cardinality: 7 };
    SequenceData {
        feature_names: [
            "date",
            "day",
            "period",
            "nswprice",
            "nswdemand",
            "vicprice",
            "vicdemand",
            "transfer",
        ]
        .map(String::from)
        .to_vec(),
        features,
        state_names: vec!["DOWN".into(), "UP".into()],
        sequences: vec![Sequence::new("surrogate", emissions, states)],
    }
}

fn timed_grid(d: &Dataset) -> (f64, f64) {
    let started = Instant::now();
    let grid = run_grid_parallel(std::slice::from_ref(d), &eight_methods(), 0, LabelOrder::Time).unwrap();
    (started.elapsed().as_secs_f64(), grid.reports[0][0].hamming_loss)
}

fn sicl_vs_rakeld() -> String {
    let data = synth_traveller(&SynthTravellerConfig::default()).unwrap();
    let d = to_blocks("traveller", &data, Window::new(5)).unwrap();
    let hl = |n: &str| {
        let m = MethodSpec::new(MethodKind::with_defaults(n).unwrap(), BaseLearner::NaiveBayes);
        two_fold_cv(&d, &m, 0).unwrap().hamming_loss
    };
    let (sicl, rakeld) = (hl("sicl"), hl("rakeld"));
    format!(
        "report only: synthetic traveller HL sicl {sicl:.4} vs rakeld {rakeld:.4} ({})",
        if sicl <= rakeld {
            "sicl <= rakeld"
        } else {
            "sicl > rakeld"
        }
    )
}

fn c7_electricity() -> Outcome {
    let path = elec_path();
    let report = sicl_vs_rakeld();
    if !path.exists() {
        let d = to_blocks("Elec05-surrogate", &electricity_surrogate(), Window::new(5)).unwrap();
        let (secs, _) = timed_grid(&d);
        return Outcome::Blocked(format!(
            "[blocked: dataset not available at {}; set MLSEQ_ELEC_ARFF] HL band not checked; 8-method grid on a {}-instance surrogate took {secs:.1}s (< 600s: {}); {report}",
            path.display(),
            d.len(),
            secs < 600.0
        ));
    }
    let a = match arff::load_arff(&path) {
        Ok(a) => a,
        Err(e) => return Outcome::Fail(format!("cannot load {}: {e}", path.display())),
    };
    let seqs = a.to_sequences(None).unwrap();
    let d = to_blocks("Elec05", &seqs, Window::new(5)).unwrap();
    let ic = MethodSpec::new(MethodKind::Ic, BaseLearner::NaiveBayes);
    let hl = two_fold_cv(&d, &ic, 0).unwrap().hamming_loss;
    let (secs, _) = timed_grid(&d);
    let in_band = (0.228..=0.328).contains(&hl);
    verdict(
        in_band && secs < 600.0,
        format!(
            "{} steps; IC NB HL {hl:.4} in [0.228, 0.328]: {in_band}; 8-method grid {secs:.1}s < 600s; {report}",
            seqs.total_len()
        ),
    )
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            r[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    r
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn c8_horizon() -> Outcome {
    let offsets: Vec<f64> = (1..=10).map(f64::from).collect();
    let ic = MethodSpec::new(MethodKind::Ic, BaseLearner::NaiveBayes);
    let rhos: Vec<f64> = (0..5)
        .map(|s| {
            let cfg = SynthTravellerConfig {
                seed: s,
                ..Default::default()
            };
            let d = to_blocks("traveller", &synth_traveller(&cfg).unwrap(), Window::new(10)).unwrap();
            spearman(&offsets, &two_fold_cv(&d, &ic, s).unwrap().per_horizon)
        })
        .collect();
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let shown: Vec<String> = rhos.iter().map(|r| format!("{r:.3}")).collect();
    verdict(
        mean > 0.0,
        format!("mean spearman {mean:.3} over seeds [{}]", shown.join(", ")),
    )
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let toy = data_dir().join("toy_six.csv");
    let text = format!(
        "seed = 11\nlabel_order = random\nmetrics = hamming, zero_one, levenshtein, lcs\n\
         [dataset trav]\nformat = synth\nn_nodes = 30\nn_steps = 1500\ntau = 3\n\
         [dataset toy]\nformat = sequences\npath = {}\ntau = 2\n\
         [method ic]\nkind = ic\n[method pcc]\nkind = pcc\nsamples = 20\n[method rakeld]\nkind = rakeld\nk = 2\n\
         [method ct]\nkind = ct\nbase = dt\n[method vcc]\nkind = vcc\n",
        toy.display()
    );
    let spec = ExperimentSpec::parse(&text, tmp.path()).unwrap();
    let out = |dir: &str| {
        let grid = run_experiment(&spec).unwrap();
        let files = write_outputs(&grid, &spec.metrics, &tmp.path().join(dir)).unwrap();
        let bytes: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|f| {
                (
                    f.strip_prefix(tmp.path().join(dir)).unwrap().display().to_string(),
                    std::fs::read(f).unwrap(),
                )
            })
            .collect();
        (grid, bytes)
    };
    let (grid, a) = out("a");
    let (_, b) = out("b");
    let identical = a == b;
    let datasets: Vec<Dataset> = spec.datasets.iter().map(|d| d.load().unwrap()).collect();
    let mut cells = 0;
    let mut differ = 0;
    for (di, d) in datasets.iter().enumerate() {
        for (mi, m) in spec.methods.iter().enumerate() {
            cells += 1;
            if evaluate_cell(d, m, spec.seed, spec.label_order).unwrap() != grid.reports[di][mi] {
                differ += 1;
            }
        }
    }
    verdict(
        identical && differ == 0,
        format!(
            "{} output files byte-identical: {identical}; {cells} cells rerun alone, {differ} differ",
            a.len()
        ),
    )
}

fn c10_naive_bayes() -> Outcome {
    let rows: Vec<FeatureVector> = [0, 0, 1, 1]
        .iter()
        .map(|&v| FeatureVector(vec![Value::Cat(v)]))
        .collect();
    let kinds = [FeatureKind::Categorical { cardinality: 2 }];
    let m = BaseLearner::NaiveBayes
        .fit_rows(&rows, &[0, 0, 1, 0], 2, &kinds)
        .unwrap();
    let p = m.predict_dist(Row::plain(&[Value::Cat(0)])).unwrap().prob(0);
    verdict(
        (p - 18.0 / 23.0).abs() < 1e-9,
        format!("p = {p:.12}, 18/23 = {:.12}", 18.0 / 23.0),
    )
}
