//! Browser bindings: train a small Iris classifier in the page, classify
//! slider-chosen flowers, and tomograph a single rotated qubit with finite
//! shots.

use qlabel::data::{parse_iris, subsample, Dataset, FeaturePipeline};
use qlabel::labels::{cosine_distance, min_label_distance};
use qlabel::sim::{Angle, Circuit, Gate, StateVector};
use qlabel::tomography::{readout_bloch, ReadoutMode};
use qlabel::training::{train, TrainConfig, TrainedModel};
use wasm_bindgen::prelude::*;

const IRIS: &str = include_str!("../../../data/iris.csv");

/// A trained Iris model together with its held-out test set.
#[wasm_bindgen]
pub struct IrisDemo {
    model: TrainedModel,
    pipeline: FeaturePipeline,
    test: Dataset,
}

fn demo_config(seed: u64, steps: usize) -> TrainConfig {
    TrainConfig {
        seed,
        w: 0.5,
        r: Some(0.3),
        rhobeg: 1.0,
        cluster_steps: steps,
        supervised_steps: steps,
        ..TrainConfig::default()
    }
}

impl IrisDemo {
    pub fn train_native(seed: u64, steps: usize) -> qlabel::Result<IrisDemo> {
        let iris = parse_iris(IRIS)?;
        let (train_raw, test_raw) = subsample(&iris, 35, 15, &[0, 1, 2], seed)?;
        let pipeline = FeaturePipeline::fit(&train_raw.features(), 4)?;
        let train_set = train_raw.map_features(|f| pipeline.transform(f))?;
        let test = test_raw.map_features(|f| pipeline.transform(f))?;
        let model = train(&train_set, &demo_config(seed, steps.max(1)))?;
        Ok(IrisDemo { model, pipeline, test })
    }

    pub fn classify_native(&self, raw: &[f64]) -> qlabel::Result<Vec<f64>> {
        let x = self.pipeline.transform(raw)?;
        let v = self.model.readout_of(&x)?;
        let class = self.model.predict(&x)?;
        let mut out = vec![class as f64, v.rx, v.ry, v.rz];
        for &y in self.model.labels.as_slice() {
            out.push(cosine_distance(v, y)?);
        }
        Ok(out)
    }

    pub fn test_points_native(&self) -> qlabel::Result<Vec<f64>> {
        let e = self.model.evaluate(&self.test)?;
        Ok(e.records
            .iter()
            .flat_map(|r| {
                let b = r.bloch.expect("label model records carry readouts");
                [r.class as f64, r.predicted as f64, b.rx, b.ry, b.rz]
            })
            .collect())
    }
}

fn js_err(e: qlabel::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl IrisDemo {
    /// Trains with `steps` optimizer evaluations per stage.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, steps: u32) -> Result<IrisDemo, JsError> {
        IrisDemo::train_native(u64::from(seed), steps as usize).map_err(js_err)
    }

    /// Test-set accuracy.
    pub fn accuracy(&self) -> Result<f64, JsError> {
        self.model.evaluate(&self.test).map(|e| e.accuracy).map_err(js_err)
    }

    /// Quantum labels as `[x0, y0, z0, x1, …]`.
    pub fn labels(&self) -> Vec<f64> {
        self.model.labels.as_slice().iter().flat_map(|y| y.to_array()).collect()
    }

    pub fn min_label_distance(&self) -> f64 {
        min_label_distance(&self.model.labels)
    }

    /// `[class, predicted, rx, ry, rz]` per test flower, concatenated.
    pub fn test_points(&self) -> Result<Vec<f64>, JsError> {
        self.test_points_native().map_err(js_err)
    }

    /// Raw centimetre measurements to `[class, rx, ry, rz, d0, d1, d2]`.
    pub fn classify(
        &self,
        sepal_len: f64,
        sepal_wid: f64,
        petal_len: f64,
        petal_wid: f64,
    ) -> Result<Vec<f64>, JsError> {
        self.classify_native(&[sepal_len, sepal_wid, petal_len, petal_wid])
            .map_err(js_err)
    }
}

/// Bloch vector of `RZ(c) RY(b) RX(a) |0⟩` reconstructed from x, y and z
/// measurements; `shots = 0` gives exact expectations.
pub fn rotated_qubit_native(a: f64, b: f64, c: f64, shots: u32, seed: u64) -> qlabel::Result<[f64; 3]> {
    let mut circuit = Circuit::new(1);
    circuit.extend([
        Gate::Rx(0, Angle::Fixed(a)),
        Gate::Ry(0, Angle::Fixed(b)),
        Gate::Rz(0, Angle::Fixed(c)),
    ])?;
    let mode = if shots == 0 {
        ReadoutMode::Exact
    } else {
        ReadoutMode::Shots { shots, seed }
    };
    Ok(readout_bloch(&circuit, &[], &StateVector::zero(1), 0, &mode)?.to_array())
}

#[wasm_bindgen]
pub fn rotated_qubit(a: f64, b: f64, c: f64, shots: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    rotated_qubit_native(a, b, c, shots, u64::from(seed))
        .map(|v| v.to_vec())
        .map_err(js_err)
}
