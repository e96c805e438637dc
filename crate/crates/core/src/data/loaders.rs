use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use super::dataset::{Dataset, Instance};
use crate::error::{Error, Result};

pub const IRIS_CLASSES: [&str; 3] = ["setosa", "versicolor", "virginica"];

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Parses comma-separated Iris rows: four measurements then the species name
/// (`Iris-setosa` or `setosa`). Blank lines are skipped.
pub fn parse_iris(text: &str) -> Result<Dataset> {
    let mut instances = Vec::new();
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                lineno,
                format!("expected 5 comma-separated fields, found {}", fields.len()),
            ));
        }
        let features = fields[..4]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("`{f}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let name = fields[4].strip_prefix("Iris-").unwrap_or(fields[4]);
        let class = IRIS_CLASSES
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::UnknownClass(fields[4].to_string()))?;
        instances.push(Instance { features, class });
    }
    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(instances, IRIS_CLASSES.iter().map(|s| s.to_string()).collect())
}

pub fn load_iris(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_iris(&text)
}

fn maybe_gunzip(bytes: Vec<u8>) -> std::io::Result<Vec<u8>> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::parse(0, "truncated IDX header"))
}

/// Decodes a pair of IDX buffers (optionally gzip-compressed). Pixels are
/// scaled to `[0, 1]`.
pub fn parse_mnist(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let magic = be_u32(images, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let magic = be_u32(labels, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let n_images = be_u32(images, 4)? as usize;
    let rows = be_u32(images, 8)? as usize;
    let cols = be_u32(images, 12)? as usize;
    let n_labels = be_u32(labels, 4)? as usize;
    if n_images != n_labels {
        return Err(Error::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }
    let pixels = rows * cols;
    let image_data = &images[16..];
    let label_data = &labels[8..];
    if image_data.len() < n_images * pixels || label_data.len() < n_labels {
        return Err(Error::parse(0, "IDX payload shorter than its header declares"));
    }
    let mut instances = Vec::with_capacity(n_images);
    for i in 0..n_images {
        let class = label_data[i] as usize;
        if class > 9 {
            return Err(Error::parse(0, format!("label {class} at index {i} is not a digit")));
        }
        let features = image_data[i * pixels..(i + 1) * pixels]
            .iter()
            .map(|&p| f64::from(p) / 255.0)
            .collect();
        instances.push(Instance { features, class });
    }
    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(instances, (0..10).map(|d| d.to_string()).collect())
}

pub fn load_mnist(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let read = |p: &Path| fs::read(p).and_then(maybe_gunzip).map_err(|e| Error::io(p, e));
    parse_mnist(&read(images.as_ref())?, &read(labels.as_ref())?)
}
