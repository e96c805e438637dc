use std::fs;
use std::path::Path;

use qlabel::data::{Dataset, Instance};
use qlabel::persist::TextDoc;

use crate::failure::Failure;

fn data_err(path: &Path, msg: impl std::fmt::Display) -> Failure {
    Failure::Data(format!("{}: {msg}", path.display()))
}

/// Writes `f0,...,f{d-1},class` rows with shortest round-trip floats.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| data_err(path, e))?;
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("f{j}")).collect();
    header.push("class".into());
    w.write_record(&header).map_err(|e| data_err(path, e))?;
    for inst in &data.instances {
        let mut row: Vec<String> = inst.features.iter().map(f64::to_string).collect();
        row.push(inst.class.to_string());
        w.write_record(&row).map_err(|e| data_err(path, e))?;
    }
    w.flush().map_err(|e| data_err(path, e))
}

/// Reads a file written by [`write_dataset`]. Class names are the indices;
/// the class count is `max(class) + 1` unless `n_classes` is given.
pub fn read_dataset(path: &Path, n_classes: Option<usize>) -> Result<Dataset, Failure> {
    let mut r = csv::Reader::from_path(path).map_err(|e| data_err(path, e))?;
    let header = r.headers().map_err(|e| data_err(path, e))?.clone();
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = (0..d).map(|j| format!("f{j}")).chain(["class".to_string()]).collect();
    if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(data_err(path, "header must be `f0,...,fN,class`"));
    }
    let mut instances = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| data_err(path, e))?;
        let mut features = Vec::with_capacity(d);
        for (j, field) in rec.iter().take(d).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| data_err(path, format!("line {line}: invalid number `{field}`")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(data_err(
                    path,
                    format!("line {line}: feature {j} = {v} is outside [0, 1]"),
                ));
            }
            features.push(v);
        }
        let class: usize = rec[d]
            .trim()
            .parse()
            .map_err(|_| data_err(path, format!("line {line}: invalid class `{}`", &rec[d])))?;
        if let Some(k) = n_classes {
            if class >= k {
                return Err(data_err(
                    path,
                    format!("line {line}: class {class} but the model knows {k} classes"),
                ));
            }
        }
        instances.push(Instance { features, class });
    }
    if instances.is_empty() {
        return Err(data_err(path, "no instances"));
    }
    let k = n_classes.unwrap_or_else(|| instances.iter().map(|i| i.class).max().unwrap_or(0) + 1);
    let names = (0..k).map(|c| c.to_string()).collect();
    Dataset::new(instances, names).map_err(|e| Failure::in_file(e, path))
}

pub fn read_doc(path: &Path) -> Result<TextDoc, Failure> {
    TextDoc::read(path).map_err(|e| Failure::in_file(e, path))
}

pub fn write_doc(path: &Path, doc: &TextDoc) -> Result<(), Failure> {
    doc.write(path).map_err(Failure::from)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| data_err(path, e))
}

/// Parses a comma- or whitespace-separated row of numbers.
pub fn parse_row(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::Usage(format!("invalid feature value `{t}`")))
        })
        .collect()
}
