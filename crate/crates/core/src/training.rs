//! Two-step training: variational clustering to find quantum labels, then
//! supervised fine-tuning towards them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{build_qcnn, AnsatzSpec, EncodingSpec};
use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::labels::{
    average_patterns, build_pair_set, compute_quantum_labels, cosine_distance, min_label_distance, scaler_array,
    ClusterPairSet, ClusteringObjective, QuantumLabelSet, ScalerArray, DEFAULT_DIAGONAL, DEFAULT_PER_CLASS,
};
use crate::optim::{minimize, OptimSettings};
use crate::readout::{PreparedInput, Readout};
use crate::seed;
use crate::sim::NoiseSpec;
use crate::tomography::{BlochVector, ReadoutMode};

/// Largest possible cosine distance; automatic `r` never exceeds it.
pub const MAX_DISTANCE: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Adjuster threshold; `None` picks [`suggest_r`] (capped at 2) once the
    /// labels are known.
    pub r: Option<f64>,
    pub w: f64,
    /// When false the supervised loss is the plain label distance.
    pub adjuster: bool,
    pub cluster_steps: usize,
    pub supervised_steps: usize,
    /// Instances per class sampled for the clustering pairs.
    pub per_class: usize,
    /// Instances per class averaged into each quantum label.
    pub per_class_eval: usize,
    pub diagonal: f64,
    /// When false every off-diagonal scaler is 1.
    pub correlation: bool,
    /// Sampling seeds inside the mode are ignored; they are derived from `seed`.
    pub mode: ReadoutMode,
    pub seed: u64,
    pub rhobeg: f64,
    pub rhoend: f64,
    pub encoding: EncodingSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            r: None,
            w: 0.3,
            adjuster: true,
            cluster_steps: 300,
            supervised_steps: 300,
            per_class: DEFAULT_PER_CLASS,
            per_class_eval: DEFAULT_PER_CLASS,
            diagonal: DEFAULT_DIAGONAL,
            correlation: true,
            mode: ReadoutMode::Exact,
            seed: 0,
            rhobeg: 0.5,
            rhoend: 1e-4,
            encoding: EncodingSpec::default(),
        }
    }
}

/// Formats a mode as `exact`, `shots N`, or `noisy P1 P2 PM [N]`.
pub fn format_mode(mode: &ReadoutMode) -> String {
    match mode {
        ReadoutMode::Exact => "exact".into(),
        ReadoutMode::Shots { shots, .. } => format!("shots {shots}"),
        ReadoutMode::Noisy { noise, shots, .. } => {
            let mut s = format!("noisy {} {} {}", noise.p_depol_1q, noise.p_depol_2q, noise.p_meas_flip);
            if let Some(n) = shots {
                s.push_str(&format!(" {n}"));
            }
            s
        }
    }
}

pub fn parse_mode(text: &str) -> Result<ReadoutMode> {
    let bad = || {
        Error::Config(format!(
            "invalid mode `{text}`; expected `exact`, `shots N` or `noisy P1 P2 PM [N]`"
        ))
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let shots = |t: &str| -> Result<u32> {
        match t.parse::<u32>() {
            Ok(0) => Err(Error::ZeroShots),
            Ok(n) => Ok(n),
            Err(_) => Err(bad()),
        }
    };
    match tokens.as_slice() {
        ["exact"] => Ok(ReadoutMode::Exact),
        ["shots", n] => Ok(ReadoutMode::Shots {
            shots: shots(n)?,
            seed: 0,
        }),
        ["noisy", p1, p2, pm, rest @ ..] if rest.len() <= 1 => {
            let p = |t: &str| t.parse::<f64>().map_err(|_| bad());
            Ok(ReadoutMode::Noisy {
                noise: NoiseSpec::new(p(p1)?, p(p2)?, p(pm)?)?,
                shots: rest.first().map(|t| shots(t)).transpose()?,
                seed: 0,
            })
        }
        _ => Err(bad()),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value `{value}` for `{key}`"))),
    }
}

impl TrainConfig {
    pub const KEYS: [&'static str; 14] = [
        "r",
        "w",
        "adjuster",
        "cluster_steps",
        "supervised_steps",
        "per_class",
        "per_class_eval",
        "diagonal",
        "correlation",
        "mode",
        "seed",
        "rhobeg",
        "rhoend",
        "encoding_scale",
    ];

    /// Sets one field from its textual form. Values are validated as a whole
    /// by [`TrainConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "r" => {
                self.r = match value {
                    "auto" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "w" => self.w = parse_num(key, value)?,
            "adjuster" => self.adjuster = parse_bool(key, value)?,
            "cluster_steps" => self.cluster_steps = parse_num(key, value)?,
            "supervised_steps" => self.supervised_steps = parse_num(key, value)?,
            "per_class" => self.per_class = parse_num(key, value)?,
            "per_class_eval" => self.per_class_eval = parse_num(key, value)?,
            "diagonal" => self.diagonal = parse_num(key, value)?,
            "correlation" => self.correlation = parse_bool(key, value)?,
            "mode" => self.mode = parse_mode(value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "rhobeg" => self.rhobeg = parse_num(key, value)?,
            "rhoend" => self.rhoend = parse_num(key, value)?,
            "encoding_scale" => self.encoding = EncodingSpec::angle(parse_num(key, value)?)?,
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// All fields as `(key, value)` pairs that [`TrainConfig::set`] accepts.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        Self::KEYS
            .iter()
            .map(|&k| {
                let v = match k {
                    "r" => self.r.map_or("auto".to_string(), |r| r.to_string()),
                    "w" => self.w.to_string(),
                    "adjuster" => self.adjuster.to_string(),
                    "cluster_steps" => self.cluster_steps.to_string(),
                    "supervised_steps" => self.supervised_steps.to_string(),
                    "per_class" => self.per_class.to_string(),
                    "per_class_eval" => self.per_class_eval.to_string(),
                    "diagonal" => self.diagonal.to_string(),
                    "correlation" => self.correlation.to_string(),
                    "mode" => format_mode(&self.mode),
                    "seed" => self.seed.to_string(),
                    "rhobeg" => self.rhobeg.to_string(),
                    "rhoend" => self.rhoend.to_string(),
                    "encoding_scale" => self.encoding.scale.to_string(),
                    _ => unreachable!(),
                };
                (k, v)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::Config(format!("w must lie in [0, 1], got {}", self.w)));
        }
        if let Some(r) = self.r {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("r must be a finite value >= 0, got {r}")));
            }
        }
        if self.cluster_steps == 0 || self.supervised_steps == 0 {
            return Err(Error::Config("optimizer step counts must be at least 1".into()));
        }
        if self.per_class == 0 || self.per_class_eval == 0 {
            return Err(Error::Config("per-class sample sizes must be at least 1".into()));
        }
        if !(self.diagonal < 0.0) {
            return Err(Error::Config(format!(
                "scaler diagonal must be negative, got {}",
                self.diagonal
            )));
        }
        if let ReadoutMode::Noisy { noise, .. } = &self.mode {
            noise.validate()?;
        }
        self.optimizer(1).validate()
    }

    pub fn optimizer(&self, max_evals: usize) -> OptimSettings {
        OptimSettings {
            rhobeg: self.rhobeg,
            rhoend: self.rhoend,
            max_evals,
        }
    }

    /// Readout mode with its sampling seed derived from the run seed and a
    /// stage label.
    pub fn mode_for(&self, stage: &str) -> ReadoutMode {
        self.mode.reseeded(seed::derive(self.seed, &format!("readout/{stage}")))
    }
}

/// Cosine distance between readout and target label.
pub fn supervised_loss(v: BlochVector, y: BlochVector) -> Result<f64> {
    cosine_distance(v, y)
}

/// Sum of distances to the wrong labels lying within `r` of `v`, counted only
/// while `v` itself is within `r` of its correct label.
pub fn adjuster(v: BlochVector, labels: &QuantumLabelSet, correct: usize, r: f64) -> Result<f64> {
    if cosine_distance(v, labels.get(correct))? > r {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (k, &y) in labels.as_slice().iter().enumerate() {
        if k != correct {
            let d = cosine_distance(y, v)?;
            if d <= r {
                total += d;
            }
        }
    }
    Ok(total)
}

/// `w · L_sup − (1 − w) · R`.
pub fn combined_loss(v: BlochVector, correct: usize, labels: &QuantumLabelSet, r: f64, w: f64) -> Result<f64> {
    let sup = supervised_loss(v, labels.get(correct))?;
    let adj = adjuster(v, labels, correct, r)?;
    Ok(w * sup - (1.0 - w) * adj)
}

/// How the supervised objective scores a single readout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SupervisedLoss {
    Plain,
    Adjusted { r: f64, w: f64 },
}

impl SupervisedLoss {
    pub fn eval(&self, v: BlochVector, correct: usize, labels: &QuantumLabelSet) -> Result<f64> {
        match *self {
            SupervisedLoss::Plain => supervised_loss(v, labels.get(correct)),
            SupervisedLoss::Adjusted { r, w } => combined_loss(v, correct, labels, r, w),
        }
    }
}

/// Mean supervised loss over a training set, with encodings prepared once.
pub struct SupervisedObjective<'a> {
    readout: Readout<'a>,
    prepared: Vec<PreparedInput>,
    classes: Vec<usize>,
    labels: &'a QuantumLabelSet,
    loss: SupervisedLoss,
}

impl<'a> SupervisedObjective<'a> {
    pub fn new(
        train: &Dataset,
        labels: &'a QuantumLabelSet,
        loss: SupervisedLoss,
        readout: Readout<'a>,
    ) -> Result<Self> {
        if labels.len() != train.n_classes() {
            return Err(Error::DimensionMismatch {
                expected: train.n_classes(),
                actual: labels.len(),
            });
        }
        let prepared = readout.prepare(&train.features())?;
        Ok(SupervisedObjective {
            readout,
            prepared,
            classes: train.instances.iter().map(|i| i.class).collect(),
            labels,
            loss,
        })
    }

    pub fn eval(&self, params: &[f64]) -> Result<f64> {
        let vs = self.readout.bloch_batch(params, &self.prepared)?;
        let mut total = 0.0;
        for (v, &c) in vs.into_iter().zip(&self.classes) {
            total += self.loss.eval(v, c, self.labels)?;
        }
        Ok(total / self.classes.len() as f64)
    }
}

pub fn supervised_objective(
    params: &[f64],
    train: &Dataset,
    labels: &QuantumLabelSet,
    loss: SupervisedLoss,
    readout: Readout<'_>,
) -> Result<f64> {
    SupervisedObjective::new(train, labels, loss, readout)?.eval(params)
}

/// `1.5 ×` the smallest distance between two labels.
pub fn suggest_r(labels: &QuantumLabelSet) -> f64 {
    1.5 * min_label_distance(labels)
}

/// Objective values of every optimizer evaluation of both stages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingHistory {
    pub cluster: Vec<f64>,
    pub supervised: Vec<f64>,
}

/// Output of the clustering stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringResult {
    pub n_qubits: usize,
    pub params: Vec<f64>,
    pub labels: QuantumLabelSet,
    pub scaler: ScalerArray,
    pub history: Vec<f64>,
    pub budget_exhausted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub ansatz: AnsatzSpec,
    pub params: Vec<f64>,
    pub labels: QuantumLabelSet,
    pub config: TrainConfig,
    /// Adjuster threshold actually used.
    pub r: f64,
    pub history: TrainingHistory,
}

pub fn initial_params(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, "init"));
    (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect()
}

pub fn scaler_for(train: &Dataset, config: &TrainConfig) -> Result<ScalerArray> {
    if config.correlation {
        scaler_array(&average_patterns(train)?, config.diagonal)
    } else {
        Ok(ScalerArray::uniform(train.n_classes(), config.diagonal))
    }
}

fn label_members(train: &Dataset, pairs: &ClusterPairSet, config: &TrainConfig) -> Result<Vec<Instance>> {
    if config.per_class_eval <= config.per_class {
        Ok(pairs.members.clone())
    } else {
        Ok(build_pair_set(train, config.per_class_eval, seed::derive(config.seed, "label-members"))?.members)
    }
}

/// Minimizes the clustering objective from random parameters and derives the
/// quantum labels from the resulting readouts.
pub fn train_clustering(train: &Dataset, config: &TrainConfig) -> Result<ClusteringResult> {
    config.validate()?;
    if train.n_classes() < 2 {
        return Err(Error::TooFewClasses {
            needed: 2,
            actual: train.n_classes(),
        });
    }
    let ansatz = build_qcnn(train.dim())?;
    let scaler = scaler_for(train, config)?;
    let pairs = build_pair_set(train, config.per_class, seed::derive(config.seed, "pairs"))?;
    let readout = Readout::new(&ansatz, &config.encoding, config.mode_for("cluster"));
    let objective = ClusteringObjective::new(&pairs, &scaler, readout)?;
    let x0 = initial_params(ansatz.n_params(), config.seed);
    let result = minimize(|p| objective.eval(p), &x0, &config.optimizer(config.cluster_steps))?;

    let members = label_members(train, &pairs, config)?;
    let readout = Readout::new(&ansatz, &config.encoding, config.mode_for("labels"));
    let labels = compute_quantum_labels(&result.x, &members, config.per_class_eval, train.n_classes(), readout)?;
    Ok(ClusteringResult {
        n_qubits: ansatz.n_qubits,
        params: result.x,
        labels,
        scaler,
        history: result.history,
        budget_exhausted: result.budget_exhausted,
    })
}

/// Threshold used for a given label set under `config`.
pub fn resolve_r(config: &TrainConfig, labels: &QuantumLabelSet) -> f64 {
    config.r.unwrap_or_else(|| suggest_r(labels).min(MAX_DISTANCE))
}

/// Fine-tunes the clustering parameters towards the frozen labels.
pub fn train_supervised(train: &Dataset, clustering: &ClusteringResult, config: &TrainConfig) -> Result<TrainedModel> {
    config.validate()?;
    let ansatz = build_qcnn(train.dim())?;
    if clustering.params.len() != ansatz.n_params() {
        return Err(Error::ParamLengthMismatch {
            expected: ansatz.n_params(),
            actual: clustering.params.len(),
        });
    }
    let r = resolve_r(config, &clustering.labels);
    let loss = if config.adjuster {
        SupervisedLoss::Adjusted { r, w: config.w }
    } else {
        SupervisedLoss::Plain
    };
    let readout = Readout::new(&ansatz, &config.encoding, config.mode_for("supervised"));
    let objective = SupervisedObjective::new(train, &clustering.labels, loss, readout)?;
    let result = minimize(
        |p| objective.eval(p),
        &clustering.params,
        &config.optimizer(config.supervised_steps),
    )?;
    Ok(TrainedModel {
        params: result.x,
        labels: clustering.labels.clone(),
        config: config.clone(),
        r,
        history: TrainingHistory {
            cluster: clustering.history.clone(),
            supervised: result.history,
        },
        ansatz,
    })
}

/// Both stages back to back.
pub fn train(train_set: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    let clustering = train_clustering(train_set, config)?;
    train_supervised(train_set, &clustering, config)
}

/// Index of the nearest label; ties go to the smallest index.
pub fn nearest_label(v: BlochVector, labels: &QuantumLabelSet) -> Result<usize> {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, &y) in labels.as_slice().iter().enumerate() {
        let d = cosine_distance(v, y)?;
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    Ok(best)
}

impl TrainedModel {
    pub fn readout(&self) -> Readout<'_> {
        Readout::new(&self.ansatz, &self.config.encoding, self.config.mode_for("eval"))
    }

    pub fn readout_of(&self, features: &[f64]) -> Result<BlochVector> {
        let r = self.readout();
        r.bloch(&self.params, &r.prepare_one(features, 0)?)
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        nearest_label(self.readout_of(features)?, &self.labels)
    }

    /// Distances from the readout of `features` to every label.
    pub fn distances(&self, features: &[f64]) -> Result<Vec<f64>> {
        let v = self.readout_of(features)?;
        self.labels.as_slice().iter().map(|&y| cosine_distance(v, y)).collect()
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<Evaluation> {
        let readout = self.readout();
        let prepared = readout.prepare(&test.features())?;
        let vs = readout.bloch_batch(&self.params, &prepared)?;
        let mut records = Vec::with_capacity(vs.len());
        for (v, inst) in vs.into_iter().zip(&test.instances) {
            records.push(Record {
                class: inst.class,
                predicted: nearest_label(v, &self.labels)?,
                bloch: Some(v),
            });
        }
        Ok(Evaluation::from_records(records, self.labels.len()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub class: usize,
    pub predicted: usize,
    /// Readout Bloch vector, for classifiers that measure all three axes.
    pub bloch: Option<BlochVector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub records: Vec<Record>,
}

impl Evaluation {
    pub fn from_records(records: Vec<Record>, k: usize) -> Self {
        let mut confusion = vec![vec![0; k]; k];
        for r in &records {
            confusion[r.class][r.predicted] += 1;
        }
        let correct = records.iter().filter(|r| r.class == r.predicted).count();
        let accuracy = if records.is_empty() {
            0.0
        } else {
            correct as f64 / records.len() as f64
        };
        Evaluation {
            accuracy,
            confusion,
            records,
        }
    }
}
