use std::fs;
use std::path::Path;

use qlabel::training::TrainConfig;

use crate::failure::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    Iris,
    Mnist,
}

impl DatasetKind {
    fn name(self) -> &'static str {
        match self {
            DatasetKind::Iris => "iris",
            DatasetKind::Mnist => "mnist",
        }
    }
}

/// Everything a command needs besides file paths. Optional fields resolve
/// to per-dataset defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetKind,
    pub classes: Option<Vec<usize>>,
    pub qubits: Option<usize>,
    pub train_per_class: Option<usize>,
    pub test_per_class: Option<usize>,
    pub train: TrainConfig,
    /// Non-empty lines of the configuration file, kept for the echo.
    pub file_lines: Vec<String>,
}

const RUN_KEYS: [&str; 5] = ["dataset", "classes", "qubits", "train_per_class", "test_per_class"];

fn auto<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

fn parse_auto<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, Failure> {
    if value == "auto" {
        return Ok(None);
    }
    value
        .parse()
        .map(Some)
        .map_err(|_| Failure::Usage(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn new(train: TrainConfig) -> Self {
        RunConfig {
            dataset: DatasetKind::Iris,
            classes: None,
            qubits: None,
            train_per_class: None,
            test_per_class: None,
            train,
            file_lines: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let value = value.trim();
        match key {
            "dataset" => {
                self.dataset = match value {
                    "iris" => DatasetKind::Iris,
                    "mnist" => DatasetKind::Mnist,
                    _ => {
                        return Err(Failure::Usage(format!(
                            "unknown dataset `{value}`; expected `iris` or `mnist`"
                        )))
                    }
                }
            }
            "classes" => {
                self.classes = match value {
                    "auto" => None,
                    v => Some(
                        v.split(',')
                            .map(|c| c.trim().parse::<usize>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| Failure::Usage(format!("invalid class list `{v}`")))?,
                    ),
                }
            }
            "qubits" => self.qubits = parse_auto(key, value)?,
            "train_per_class" => self.train_per_class = parse_auto(key, value)?,
            "test_per_class" => self.test_per_class = parse_auto(key, value)?,
            _ => self.train.set(key, value)?,
        }
        Ok(())
    }

    /// Applies `key=value` assignments; `source` names them in diagnostics.
    pub fn apply_pairs<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>, source: &str) -> Result<(), Failure> {
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("{source}: expected `key=value`, got `{pair}`")))?;
            self.set(k.trim(), v).map_err(|e| e.context(source))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let mut assignments = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.file_lines.push(line.to_string());
            assignments.push((i + 1, line));
        }
        for (n, line) in assignments {
            self.apply_pairs([line], &format!("{}:{n}", path.display()))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.train.validate()?;
        if let Some(classes) = &self.classes {
            if classes.len() < 2 {
                return Err(Failure::Usage("at least 2 classes are required".into()));
            }
            let mut sorted = classes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != classes.len() {
                return Err(Failure::Usage("class list contains duplicates".into()));
            }
        }
        if self.qubits == Some(0) {
            return Err(Failure::Usage("qubits must be at least 1".into()));
        }
        Ok(())
    }

    pub fn default_qubits(&self) -> usize {
        self.qubits.unwrap_or(match self.dataset {
            DatasetKind::Iris => 4,
            DatasetKind::Mnist => 8,
        })
    }

    pub fn split_sizes(&self) -> (usize, usize) {
        let (tr, te) = match self.dataset {
            DatasetKind::Iris => (35, 15),
            DatasetKind::Mnist => (200, 50),
        };
        (self.train_per_class.unwrap_or(tr), self.test_per_class.unwrap_or(te))
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        let classes = self.classes.as_ref().map_or_else(
            || "auto".to_string(),
            |c| c.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        );
        let run = [
            self.dataset.name().to_string(),
            classes,
            auto(&self.qubits),
            auto(&self.train_per_class),
            auto(&self.test_per_class),
        ];
        RUN_KEYS
            .iter()
            .map(|k| k.to_string())
            .zip(run)
            .chain(self.train.entries().into_iter().map(|(k, v)| (k.to_string(), v)))
            .collect()
    }
}
