use std::fs;
use std::path::{Path, PathBuf};

use qlabel::baselines::{train_baseline, BaselineKind, BaselineModel};
use qlabel::data::{load_iris, load_mnist, subsample, Dataset, FeaturePipeline};
use qlabel::labels::{min_label_distance, QuantumLabelSet};
use qlabel::persist::{
    baseline_from_doc, baseline_to_doc, clustering_from_doc, clustering_to_doc, model_from_doc, model_to_doc,
    pipeline_from_doc, pipeline_to_doc, TextDoc,
};
use qlabel::seed;
use qlabel::training::{
    resolve_r, suggest_r, train_clustering, train_supervised, Evaluation, TrainConfig, TrainedModel,
};

use crate::config::{DatasetKind, RunConfig};
use crate::failure::Failure;
use crate::io::{parse_row, read_dataset, read_doc, write_dataset, write_doc, write_text};

pub type Outcome = Result<(), Failure>;

/// Appends the resolved configuration and the raw configuration file to an
/// artifact.
pub fn echo(doc: &mut TextDoc, command: &str, run: &RunConfig) {
    let mut entries = vec![("command".to_string(), command.to_string())];
    entries.extend(run.entries());
    doc.kv_section("run", &entries);
    if !run.file_lines.is_empty() {
        doc.section("run.file", run.file_lines.clone());
    }
}

fn check_qubits(run: &RunConfig, data: &Dataset, path: &Path) -> Outcome {
    match run.qubits {
        Some(q) if q != data.dim() => Err(Failure::Data(format!(
            "{}: features have dimension {} but qubits = {q}",
            path.display(),
            data.dim()
        ))),
        _ => Ok(()),
    }
}

pub struct PrepareArgs {
    pub data: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn prepare(args: &PrepareArgs, run: &RunConfig) -> Outcome {
    let raw = match run.dataset {
        DatasetKind::Iris => {
            let path = args
                .data
                .as_ref()
                .ok_or_else(|| Failure::Usage("iris needs --data <iris.csv>".into()))?;
            load_iris(path)?
        }
        DatasetKind::Mnist => match (&args.images, &args.labels) {
            (Some(i), Some(l)) => load_mnist(i, l)?,
            _ => return Err(Failure::Usage("mnist needs --images and --labels".into())),
        },
    };
    let classes = run.classes.clone().unwrap_or_else(|| (0..raw.n_classes()).collect());
    if let Some(&c) = classes.iter().find(|&&c| c >= raw.n_classes()) {
        return Err(Failure::Usage(format!(
            "class {c} not present ({} classes)",
            raw.n_classes()
        )));
    }
    let (n_train, n_test) = run.split_sizes();
    let (train, test) = subsample(&raw, n_train, n_test, &classes, seed::derive(run.train.seed, "split"))?;
    let pipeline = FeaturePipeline::fit(&train.features(), run.default_qubits())?;
    let train = train.map_features(|f| pipeline.transform(f))?;
    let mut clamped = 0;
    let test = test.map_features(|f| {
        let (v, c) = pipeline.transform_checked(f)?;
        clamped += usize::from(c);
        Ok(v)
    })?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    write_dataset(&args.out.join("train.csv"), &train)?;
    write_dataset(&args.out.join("test.csv"), &test)?;
    let mut doc = pipeline_to_doc(&pipeline);
    doc.section("classes", classes.iter().map(|&c| raw.class_names[c].clone()).collect());
    echo(&mut doc, "prepare", run);
    write_doc(&args.out.join("pipeline.txt"), &doc)?;
    say!(
        "train {} test {} dim {} (pca {}), {} test rows clamped",
        train.len(),
        test.len(),
        pipeline.output_dim(),
        if pipeline.pca.is_some() { "on" } else { "off" },
        clamped
    );
    Ok(())
}

fn print_label_summary(labels: &QuantumLabelSet) {
    say!(
        "min label distance {:.6}, suggested r {:.6}",
        min_label_distance(labels),
        suggest_r(labels)
    );
}

pub fn cluster(train_path: &Path, out: &Path, run: &RunConfig) -> Outcome {
    let train = read_dataset(train_path, None)?;
    check_qubits(run, &train, train_path)?;
    let result = train_clustering(&train, &run.train)?;
    let mut doc = clustering_to_doc(&result, &run.train);
    echo(&mut doc, "cluster", run);
    write_doc(out, &doc)?;
    say!(
        "clustering loss {:.6} after {} evaluations{}",
        result.history.iter().copied().fold(f64::INFINITY, f64::min),
        result.history.len(),
        if result.budget_exhausted {
            " (budget exhausted)"
        } else {
            ""
        }
    );
    print_label_summary(&result.labels);
    Ok(())
}

/// Loads a clustering checkpoint; its stored configuration is the base the
/// command-line configuration is layered on.
pub fn load_checkpoint(path: &Path) -> Result<(qlabel::training::ClusteringResult, TrainConfig), Failure> {
    clustering_from_doc(&read_doc(path)?).map_err(|e| Failure::in_file(e, path))
}

pub fn train(train_path: &Path, checkpoint: Option<&Path>, out: &Path, run: &RunConfig) -> Outcome {
    let train = read_dataset(train_path, None)?;
    check_qubits(run, &train, train_path)?;
    let clustering = match checkpoint {
        Some(path) => {
            let (c, _) = load_checkpoint(path)?;
            if c.n_qubits != train.dim() || c.labels.len() != train.n_classes() {
                return Err(Failure::Data(format!(
                    "{}: checkpoint has {} qubits and {} classes, training data has {} features and {} classes",
                    path.display(),
                    c.n_qubits,
                    c.labels.len(),
                    train.dim(),
                    train.n_classes()
                )));
            }
            c
        }
        None => train_clustering(&train, &run.train)?,
    };
    let model = train_supervised(&train, &clustering, &run.train)?;
    let mut doc = model_to_doc(&model);
    echo(&mut doc, "train", run);
    write_doc(out, &doc)?;
    let best = model.history.supervised.iter().copied().fold(f64::INFINITY, f64::min);
    say!("supervised loss {best:.6}, r {:.6}", model.r);
    print_label_summary(&model.labels);
    Ok(())
}

pub enum AnyModel {
    Labels(TrainedModel),
    Baseline(BaselineModel),
}

impl AnyModel {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let doc = read_doc(path)?;
        let loaded = match doc.kind().map_err(|e| Failure::in_file(e, path))? {
            "model" => model_from_doc(&doc).map(AnyModel::Labels),
            _ => baseline_from_doc(&doc).map(AnyModel::Baseline),
        };
        loaded.map_err(|e| Failure::in_file(e, path))
    }

    fn n_classes(&self) -> usize {
        match self {
            AnyModel::Labels(m) => m.labels.len(),
            AnyModel::Baseline(m) => m.n_classes,
        }
    }

    fn n_qubits(&self) -> usize {
        match self {
            AnyModel::Labels(m) => m.ansatz.n_qubits,
            AnyModel::Baseline(m) => m.ansatz.n_qubits,
        }
    }

    pub fn config(&self) -> &TrainConfig {
        match self {
            AnyModel::Labels(m) => &m.config,
            AnyModel::Baseline(m) => &m.config,
        }
    }

    fn set_config(&mut self, config: TrainConfig) {
        match self {
            AnyModel::Labels(m) => m.config = config,
            AnyModel::Baseline(m) => m.config = config,
        }
    }

    fn evaluate(&self, test: &Dataset) -> Result<Evaluation, Failure> {
        Ok(match self {
            AnyModel::Labels(m) => m.evaluate(test)?,
            AnyModel::Baseline(m) => m.evaluate(test)?,
        })
    }
}

fn confusion_csv(e: &Evaluation) -> String {
    let k = e.confusion.len();
    let mut s = String::from("class");
    for p in 0..k {
        s.push_str(&format!(",pred_{p}"));
    }
    s.push('\n');
    for (c, row) in e.confusion.iter().enumerate() {
        s.push_str(&c.to_string());
        for n in row {
            s.push_str(&format!(",{n}"));
        }
        s.push('\n');
    }
    s
}

fn bloch_csv(e: &Evaluation) -> Option<String> {
    let mut s = String::from("class,predicted,rx,ry,rz\n");
    for r in &e.records {
        let b = r.bloch?;
        s.push_str(&format!("{},{},{},{},{}\n", r.class, r.predicted, b.rx, b.ry, b.rz));
    }
    Some(s)
}

fn metrics_csv(e: &Evaluation) -> String {
    let correct = e.records.iter().filter(|r| r.class == r.predicted).count();
    let mut s = String::from("metric,value\n");
    s.push_str(&format!("accuracy,{}\n", e.accuracy));
    s.push_str(&format!("n_test,{}\n", e.records.len()));
    s.push_str(&format!("n_correct,{correct}\n"));
    for (c, row) in e.confusion.iter().enumerate() {
        let total: usize = row.iter().sum();
        if total > 0 {
            s.push_str(&format!("recall_{c},{}\n", row[c] as f64 / total as f64));
        }
    }
    s
}

pub fn eval(model_path: &Path, test_path: &Path, out: Option<&Path>, mut model: AnyModel, run: &RunConfig) -> Outcome {
    model.set_config(run.train.clone());
    let test = read_dataset(test_path, Some(model.n_classes()))?;
    if test.dim() != model.n_qubits() {
        return Err(Failure::Data(format!(
            "{}: features have dimension {}, model expects {}",
            test_path.display(),
            test.dim(),
            model.n_qubits()
        )));
    }
    let e = model.evaluate(&test)?;
    let correct = e.records.iter().filter(|r| r.class == r.predicted).count();
    say!("accuracy {:.6} ({correct}/{})", e.accuracy, e.records.len());
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|err| Failure::Data(format!("{}: {err}", dir.display())))?;
        write_text(&dir.join("confusion.csv"), &confusion_csv(&e))?;
        write_text(&dir.join("metrics.csv"), &metrics_csv(&e))?;
        if let Some(b) = bloch_csv(&e) {
            write_text(&dir.join("bloch.csv"), &b)?;
        }
        let mut doc = TextDoc::new("eval");
        doc.set("model", model_path.display());
        doc.set("test", test_path.display());
        doc.set("accuracy", e.accuracy);
        doc.set("n_test", e.records.len());
        echo(&mut doc, "eval", run);
        write_doc(&dir.join("eval.txt"), &doc)?;
    }
    Ok(())
}

pub fn predict(model: &AnyModel, features: &str, pipeline: Option<&Path>) -> Outcome {
    let mut x = parse_row(features)?;
    if let Some(path) = pipeline {
        let p = pipeline_from_doc(&read_doc(path)?).map_err(|e| Failure::in_file(e, path))?;
        if x.len() != p.input_dim() {
            return Err(Failure::Data(format!(
                "feature row has {} values, pipeline expects {}",
                x.len(),
                p.input_dim()
            )));
        }
        x = p.transform(&x)?;
    }
    if x.len() != model.n_qubits() {
        return Err(Failure::Data(format!(
            "feature row has {} values, model expects {}",
            x.len(),
            model.n_qubits()
        )));
    }
    match model {
        AnyModel::Labels(m) => {
            let v = m.readout_of(&x)?;
            say!("class {}", m.predict(&x)?);
            say!("readout {} {} {}", v.rx, v.ry, v.rz);
            for (k, d) in m.distances(&x)?.iter().enumerate() {
                say!("distance {k} {d:.6}");
            }
        }
        AnyModel::Baseline(m) => {
            let zs = m.expectations(&x)?;
            say!("class {}", m.classify(&zs));
            for (q, z) in m.readout_qubits().iter().zip(&zs) {
                say!("z {q} {z:.6}");
            }
        }
    }
    Ok(())
}

pub fn labels(path: &Path) -> Outcome {
    let doc = read_doc(path)?;
    let (labels, r) = match doc.kind().map_err(|e| Failure::in_file(e, path))? {
        "clustering" => {
            let (c, config) = clustering_from_doc(&doc).map_err(|e| Failure::in_file(e, path))?;
            let r = resolve_r(&config, &c.labels);
            (c.labels, r)
        }
        _ => {
            let m = model_from_doc(&doc).map_err(|e| Failure::in_file(e, path))?;
            (m.labels, m.r)
        }
    };
    for (k, y) in labels.as_slice().iter().enumerate() {
        say!("label {k} {} {} {}", y.rx, y.ry, y.rz);
    }
    say!("distances");
    for row in labels.distance_matrix() {
        say!(
            "{}",
            row.iter().map(|d| format!("{d:.6}")).collect::<Vec<_>>().join(" ")
        );
    }
    say!("min label distance {:.6}", min_label_distance(&labels));
    say!("suggested r {:.6}", suggest_r(&labels));
    say!("r {r:.6}");
    Ok(())
}

pub fn baseline(
    kind: BaselineKind,
    train_path: &Path,
    test_path: Option<&Path>,
    out: &Path,
    run: &RunConfig,
) -> Outcome {
    let train = read_dataset(train_path, None)?;
    check_qubits(run, &train, train_path)?;
    let model = train_baseline(kind, &train, &run.train)?;
    let mut doc = baseline_to_doc(&model);
    echo(&mut doc, "baseline", run);
    write_doc(out, &doc)?;
    let best = model.history.iter().copied().fold(f64::INFINITY, f64::min);
    say!("{} loss {best:.6}", kind.name());
    if let Some(tp) = test_path {
        let test = read_dataset(tp, Some(model.n_classes))?;
        let e = model.evaluate(&test)?;
        say!("accuracy {:.6}", e.accuracy);
    }
    Ok(())
}
