//! Plain-text artifact format shared by models, checkpoints and pipelines.
//!
//! ```text
//! # qlabel artifact
//! format = 1
//! kind = model
//! n_qubits = 4
//!
//! [params]
//! 1.2345678901234567e0
//!
//! [labels]
//! 0 1.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0
//!
//! [config]
//! w = 0.3
//! ```
//!
//! A header of `key = value` lines is followed by named sections whose lines
//! are kept verbatim. Reals are written with 17 significant digits so that
//! loading reproduces them bit for bit. `#` starts a comment line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::ansatz::{build_qcnn, EncodingKind, EncodingSpec};
use crate::baselines::{baseline_ansatz, BaselineKind, BaselineModel};
use crate::data::{FeaturePipeline, PcaModel};
use crate::error::{Error, Result};
use crate::labels::{QuantumLabelSet, ScalerArray};
use crate::tomography::BlochVector;
use crate::training::{ClusteringResult, TrainConfig, TrainedModel, TrainingHistory};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TextDoc {
    pub header: Vec<(String, String)>,
    pub sections: Vec<(String, Vec<String>)>,
}

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(" ")
}

impl TextDoc {
    pub fn new(kind: &str) -> Self {
        let mut doc = TextDoc::default();
        doc.set("format", FORMAT_VERSION);
        doc.set("kind", kind);
        doc
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn section(&mut self, name: &str, lines: Vec<String>) {
        self.sections.push((name.to_string(), lines));
    }

    pub fn kv_section(&mut self, name: &str, entries: &[(impl AsRef<str>, impl AsRef<str>)]) {
        let lines = entries
            .iter()
            .map(|(k, v)| format!("{} = {}", k.as_ref(), v.as_ref()))
            .collect();
        self.section(name, lines);
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Config(format!("artifact header lacks `{key}`")))
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::Config(format!("artifact header `{key}` has invalid value `{v}`")))
    }

    pub fn lines(&self, name: &str) -> Result<&[String]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| l.as_slice())
            .ok_or_else(|| Error::Config(format!("artifact lacks section [{name}]")))
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|(n, _)| n == name)
    }

    /// `key = value` pairs of a section.
    pub fn kv_lines(&self, name: &str) -> Result<Vec<(String, String)>> {
        self.lines(name)?
            .iter()
            .map(|l| {
                l.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Config(format!("section [{name}]: expected `key = value`, got `{l}`")))
            })
            .collect()
    }

    /// Every whitespace-separated real of a section, in order.
    pub fn reals(&self, name: &str) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for l in self.lines(name)? {
            out.extend(parse_reals(l)?);
        }
        Ok(out)
    }

    pub fn kind(&self) -> Result<&str> {
        self.get("kind")
    }

    pub fn expect_kind(&self, kinds: &[&str]) -> Result<&str> {
        let kind = self.kind()?;
        if kinds.contains(&kind) {
            Ok(kind)
        } else {
            Err(Error::Config(format!(
                "expected an artifact of kind {}, found `{kind}`",
                kinds.join(" or ")
            )))
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# qlabel artifact\n");
        for (k, v) in &self.header {
            writeln!(out, "{k} = {v}").unwrap();
        }
        for (name, lines) in &self.sections {
            writeln!(out, "\n[{name}]").unwrap();
            for l in lines {
                writeln!(out, "{l}").unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = TextDoc::default();
        let mut current: Option<(String, Vec<String>)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                doc.sections.extend(current.take());
                current = Some((name.to_string(), Vec::new()));
                continue;
            }
            match &mut current {
                Some((_, lines)) => lines.push(line.to_string()),
                None => {
                    let (k, v) = line
                        .split_once('=')
                        .ok_or_else(|| Error::parse(i + 1, format!("expected `key = value`, got `{line}`")))?;
                    doc.header.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
        }
        doc.sections.extend(current);
        let version: u32 = doc.get_parsed("format")?;
        if version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported artifact format {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        Ok(doc)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn parse_reals(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{t}` is not a number")))
        })
        .collect()
}

fn label_lines(labels: &QuantumLabelSet) -> Vec<String> {
    labels.to_rows().lines().map(str::to_string).collect()
}

fn parse_labels(doc: &TextDoc, k: usize) -> Result<QuantumLabelSet> {
    let lines = doc.lines("labels")?;
    if lines.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: lines.len(),
        });
    }
    let mut vs = Vec::with_capacity(k);
    for (i, l) in lines.iter().enumerate() {
        let xs = parse_reals(l)?;
        if xs.len() != 4 || xs[0] != i as f64 {
            return Err(Error::Config(format!("malformed label row `{l}`")));
        }
        vs.push(BlochVector::new(xs[1], xs[2], xs[3]));
    }
    QuantumLabelSet::new(vs)
}

fn write_encoding(doc: &mut TextDoc, enc: &EncodingSpec) {
    doc.set(
        "encoding",
        match enc.kind {
            EncodingKind::Angle => "angle",
        },
    );
    doc.set("encoding_scale", enc.scale);
}

fn read_config(doc: &TextDoc) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    for (k, v) in doc.kv_lines("config")? {
        cfg.set(&k, &v)?;
    }
    if doc.get("encoding")? != "angle" {
        return Err(Error::Config(format!(
            "unsupported encoding `{}`",
            doc.get("encoding")?
        )));
    }
    cfg.encoding = EncodingSpec::angle(doc.get_parsed("encoding_scale")?)?;
    Ok(cfg)
}

fn history_lines(h: &[f64]) -> Vec<String> {
    h.iter().map(|&x| fmt_real(x)).collect()
}

fn check_params(params: &[f64], expected: usize) -> Result<()> {
    if params.len() != expected {
        return Err(Error::ParamLengthMismatch {
            expected,
            actual: params.len(),
        });
    }
    Ok(())
}

pub fn model_to_doc(m: &TrainedModel) -> TextDoc {
    let mut doc = TextDoc::new("model");
    doc.set("n_qubits", m.ansatz.n_qubits);
    doc.set("n_classes", m.labels.len());
    doc.set("n_params", m.ansatz.n_params());
    write_encoding(&mut doc, &m.config.encoding);
    doc.set("readout", m.ansatz.readout());
    doc.set("r", fmt_real(m.r));
    doc.section("params", history_lines(&m.params));
    doc.section("labels", label_lines(&m.labels));
    doc.kv_section("config", &m.config.entries());
    doc.section("history.cluster", history_lines(&m.history.cluster));
    doc.section("history.supervised", history_lines(&m.history.supervised));
    doc
}

pub fn model_from_doc(doc: &TextDoc) -> Result<TrainedModel> {
    doc.expect_kind(&["model"])?;
    let ansatz = build_qcnn(doc.get_parsed("n_qubits")?)?;
    let params = doc.reals("params")?;
    check_params(&params, ansatz.n_params())?;
    let labels = parse_labels(doc, doc.get_parsed("n_classes")?)?;
    Ok(TrainedModel {
        params,
        labels,
        config: read_config(doc)?,
        r: doc.get_parsed("r")?,
        history: TrainingHistory {
            cluster: doc.reals("history.cluster")?,
            supervised: doc.reals("history.supervised")?,
        },
        ansatz,
    })
}

pub fn baseline_to_doc(m: &BaselineModel) -> TextDoc {
    let mut doc = TextDoc::new(m.kind.name());
    doc.set("n_qubits", m.ansatz.n_qubits);
    doc.set("n_classes", m.n_classes);
    doc.set("n_params", m.ansatz.n_params());
    write_encoding(&mut doc, &m.config.encoding);
    doc.set(
        "readout",
        m.readout_qubits()
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    doc.section("params", history_lines(&m.params));
    doc.kv_section("config", &m.config.entries());
    doc.section("history", history_lines(&m.history));
    doc
}

pub fn baseline_from_doc(doc: &TextDoc) -> Result<BaselineModel> {
    let kind = BaselineKind::parse(doc.expect_kind(&["basebin", "basemea"])?)?;
    let n_classes: usize = doc.get_parsed("n_classes")?;
    let (ansatz, _) = baseline_ansatz(kind, doc.get_parsed("n_qubits")?, n_classes)?;
    let params = doc.reals("params")?;
    check_params(&params, ansatz.n_params())?;
    Ok(BaselineModel {
        kind,
        n_classes,
        params,
        config: read_config(doc)?,
        history: doc.reals("history")?,
        ansatz,
    })
}

pub fn clustering_to_doc(c: &ClusteringResult, config: &TrainConfig) -> TextDoc {
    let mut doc = TextDoc::new("clustering");
    doc.set("n_qubits", c.n_qubits);
    doc.set("n_classes", c.labels.len());
    doc.set("n_params", c.params.len());
    write_encoding(&mut doc, &config.encoding);
    doc.set("budget_exhausted", c.budget_exhausted);
    doc.section("params", history_lines(&c.params));
    doc.section("labels", label_lines(&c.labels));
    doc.section("scaler", c.scaler.rows().iter().map(|r| fmt_reals(r)).collect());
    doc.kv_section("config", &config.entries());
    doc.section("history", history_lines(&c.history));
    doc
}

pub fn clustering_from_doc(doc: &TextDoc) -> Result<(ClusteringResult, TrainConfig)> {
    doc.expect_kind(&["clustering"])?;
    let n_qubits: usize = doc.get_parsed("n_qubits")?;
    let k: usize = doc.get_parsed("n_classes")?;
    let params = doc.reals("params")?;
    check_params(&params, build_qcnn(n_qubits)?.n_params())?;
    let rows = doc
        .lines("scaler")?
        .iter()
        .map(|l| parse_reals(l))
        .collect::<Result<Vec<_>>>()?;
    let scaler = ScalerArray::from_rows(rows)?;
    if scaler.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: scaler.k(),
        });
    }
    let result = ClusteringResult {
        n_qubits,
        params,
        labels: parse_labels(doc, k)?,
        scaler,
        history: doc.reals("history")?,
        budget_exhausted: doc.get_parsed("budget_exhausted")?,
    };
    Ok((result, read_config(doc)?))
}

pub fn pipeline_to_doc(p: &FeaturePipeline) -> TextDoc {
    let mut doc = TextDoc::new("pipeline");
    doc.set("input_dim", p.input_dim());
    doc.set("output_dim", p.output_dim());
    doc.set("pca", p.pca.is_some());
    if let Some(pca) = &p.pca {
        doc.section("pca.mean", vec![fmt_reals(&pca.mean)]);
        doc.section("pca.components", pca.components.iter().map(|c| fmt_reals(c)).collect());
        doc.section("pca.variances", vec![fmt_reals(&pca.variances)]);
    }
    doc.section("range.lo", vec![fmt_reals(&p.lo)]);
    doc.section("range.hi", vec![fmt_reals(&p.hi)]);
    doc
}

pub fn pipeline_from_doc(doc: &TextDoc) -> Result<FeaturePipeline> {
    doc.expect_kind(&["pipeline"])?;
    let input_dim: usize = doc.get_parsed("input_dim")?;
    let output_dim: usize = doc.get_parsed("output_dim")?;
    let pca = if doc.get_parsed::<bool>("pca")? {
        let components = doc
            .lines("pca.components")?
            .iter()
            .map(|l| parse_reals(l))
            .collect::<Result<Vec<_>>>()?;
        let model = PcaModel {
            mean: doc.reals("pca.mean")?,
            components,
            variances: doc.reals("pca.variances")?,
        };
        if model.mean.len() != input_dim
            || model.components.len() != output_dim
            || model.components.iter().any(|c| c.len() != input_dim)
            || model.variances.len() != output_dim
        {
            return Err(Error::Config(
                "PCA sections disagree with the declared dimensions".into(),
            ));
        }
        Some(model)
    } else {
        None
    };
    let lo = doc.reals("range.lo")?;
    let hi = doc.reals("range.hi")?;
    if lo.len() != output_dim || hi.len() != output_dim {
        return Err(Error::Config("range sections disagree with output_dim".into()));
    }
    Ok(FeaturePipeline { pca, lo, hi })
}
