//! Reference classifiers that read only `⟨σz⟩`.
//!
//! BaseBin thresholds the z expectation of the same single readout qubit used
//! by the label classifier. BaseMea pools less aggressively so that at least
//! `K` qubits stay active and reads one qubit per class as a ±1 one-hot code.
//! Both train from random parameters with the combined evaluation budget of
//! the two-step classifier.

use crate::ansatz::{build_qcnn, build_qcnn_truncated, AnsatzSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::optim::minimize;
use crate::readout::{PreparedInput, Readout};
use crate::training::{initial_params, Evaluation, Record, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    BaseBin,
    BaseMea,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::BaseBin => "basebin",
            BaselineKind::BaseMea => "basemea",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "basebin" => Ok(BaselineKind::BaseBin),
            "basemea" => Ok(BaselineKind::BaseMea),
            _ => Err(Error::Config(format!(
                "unknown baseline `{text}`; expected `basebin` or `basemea`"
            ))),
        }
    }
}

/// Target of class `c` for BaseBin: class 0 is `+1`, class 1 is `-1`.
pub fn basebin_target(class: usize) -> f64 {
    if class == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(z − y)²`.
pub fn basebin_loss(z: f64, y: f64) -> f64 {
    (z - y) * (z - y)
}

/// Class 0 for `z ≥ 0`, class 1 otherwise.
pub fn basebin_predict(z: f64) -> usize {
    usize::from(z < 0.0)
}

/// Mean squared error against the ±1 one-hot code of `class`.
pub fn basemea_loss(zs: &[f64], class: usize) -> f64 {
    zs.iter()
        .enumerate()
        .map(|(k, z)| {
            let t = if k == class { 1.0 } else { -1.0 };
            (z - t) * (z - t)
        })
        .sum::<f64>()
        / zs.len() as f64
}

/// Index of the largest expectation; ties go to the smallest index.
pub fn basemea_predict(zs: &[f64]) -> usize {
    let mut best = 0;
    for (k, &z) in zs.iter().enumerate() {
        if z > zs[best] {
            best = k;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineModel {
    pub kind: BaselineKind,
    pub ansatz: AnsatzSpec,
    pub params: Vec<f64>,
    pub n_classes: usize,
    pub config: TrainConfig,
    pub history: Vec<f64>,
}

/// Ansatz and readout qubits for `kind` on `n_qubits` with `k` classes.
pub fn baseline_ansatz(kind: BaselineKind, n_qubits: usize, k: usize) -> Result<(AnsatzSpec, Vec<usize>)> {
    match kind {
        BaselineKind::BaseBin => {
            if k != 2 {
                return Err(Error::Config(format!("basebin needs exactly 2 classes, got {k}")));
            }
            let ansatz = build_qcnn(n_qubits)?;
            let readout = vec![ansatz.readout()];
            Ok((ansatz, readout))
        }
        BaselineKind::BaseMea => {
            if k < 2 || k > n_qubits {
                return Err(Error::Config(format!(
                    "basemea needs between 2 and {n_qubits} classes, got {k}"
                )));
            }
            let ansatz = build_qcnn_truncated(n_qubits, k)?;
            let readout = ansatz.active[..k].to_vec();
            Ok((ansatz, readout))
        }
    }
}

impl BaselineModel {
    pub fn readout_qubits(&self) -> Vec<usize> {
        match self.kind {
            BaselineKind::BaseBin => vec![self.ansatz.readout()],
            BaselineKind::BaseMea => self.ansatz.active[..self.n_classes].to_vec(),
        }
    }

    fn readout(&self, stage: &str) -> Readout<'_> {
        Readout::new(&self.ansatz, &self.config.encoding, self.config.mode_for(stage))
    }

    pub fn classify(&self, zs: &[f64]) -> usize {
        match self.kind {
            BaselineKind::BaseBin => basebin_predict(zs[0]),
            BaselineKind::BaseMea => basemea_predict(zs),
        }
    }

    /// z expectations of the readout qubits for one input.
    pub fn expectations(&self, features: &[f64]) -> Result<Vec<f64>> {
        let r = self.readout("eval");
        r.z_expectations(&self.params, &r.prepare_one(features, 0)?, &self.readout_qubits())
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(self.classify(&self.expectations(features)?))
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<Evaluation> {
        let r = self.readout("eval");
        let prepared = r.prepare(&test.features())?;
        let zs = r.z_batch(&self.params, &prepared, &self.readout_qubits())?;
        let records = zs
            .iter()
            .zip(&test.instances)
            .map(|(z, inst)| Record {
                class: inst.class,
                predicted: self.classify(z),
                bloch: None,
            })
            .collect();
        Ok(Evaluation::from_records(records, self.n_classes))
    }
}

fn sample_loss(kind: BaselineKind, zs: &[f64], class: usize) -> f64 {
    match kind {
        BaselineKind::BaseBin => basebin_loss(zs[0], basebin_target(class)),
        BaselineKind::BaseMea => basemea_loss(zs, class),
    }
}

/// Trains a baseline with `cluster_steps + supervised_steps` evaluations.
pub fn train_baseline(kind: BaselineKind, train: &Dataset, config: &TrainConfig) -> Result<BaselineModel> {
    config.validate()?;
    let k = train.n_classes();
    let (ansatz, qubits) = baseline_ansatz(kind, train.dim(), k)?;
    let readout = Readout::new(&ansatz, &config.encoding, config.mode_for("baseline"));
    let prepared: Vec<PreparedInput> = readout.prepare(&train.features())?;
    let classes: Vec<usize> = train.instances.iter().map(|i| i.class).collect();
    let objective = |params: &[f64]| -> Result<f64> {
        let zs = readout.z_batch(params, &prepared, &qubits)?;
        let total: f64 = zs.iter().zip(&classes).map(|(z, &c)| sample_loss(kind, z, c)).sum();
        Ok(total / classes.len() as f64)
    };
    let x0 = initial_params(ansatz.n_params(), config.seed);
    let budget = config.cluster_steps + config.supervised_steps;
    let result = minimize(objective, &x0, &config.optimizer(budget))?;
    Ok(BaselineModel {
        kind,
        n_classes: k,
        params: result.x,
        config: config.clone(),
        history: result.history,
        ansatz,
    })
}
