use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub features: Vec<f64>,
    pub class: usize,
}

/// Labeled feature vectors with class indices in `[0, n_classes)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(instances: Vec<Instance>, class_names: Vec<String>) -> Result<Self> {
        if let Some(first) = instances.first() {
            let dim = first.features.len();
            for inst in &instances {
                if inst.features.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: inst.features.len(),
                    });
                }
                if inst.class >= class_names.len() {
                    return Err(Error::Config(format!(
                        "class index {} but only {} classes",
                        inst.class,
                        class_names.len()
                    )));
                }
            }
        }
        Ok(Dataset { instances, class_names })
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn dim(&self) -> usize {
        self.instances.first().map_or(0, |i| i.features.len())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Indices of the instances of each class, in dataset order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes()];
        for (i, inst) in self.instances.iter().enumerate() {
            out[inst.class].push(i);
        }
        out
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.instances.iter().map(|i| i.features.as_slice()).collect()
    }

    pub fn map_features<F: FnMut(&[f64]) -> Result<Vec<f64>>>(&self, mut f: F) -> Result<Dataset> {
        let instances = self
            .instances
            .iter()
            .map(|inst| {
                Ok(Instance {
                    features: f(&inst.features)?,
                    class: inst.class,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            instances,
            class_names: self.class_names.clone(),
        })
    }
}

/// Draws disjoint per-class train and test sets from the listed `classes`
/// (indices into `dataset`), relabeling them `0..classes.len()` in the given
/// order. Deterministic for a given seed.
pub fn subsample(
    dataset: &Dataset,
    per_class_train: usize,
    per_class_test: usize,
    classes: &[usize],
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let by_class = dataset.class_indices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(per_class_train * classes.len());
    let mut test = Vec::with_capacity(per_class_test * classes.len());
    for (new_class, &class) in classes.iter().enumerate() {
        let pool = by_class
            .get(class)
            .ok_or_else(|| Error::Config(format!("class {class} not present ({} classes)", dataset.n_classes())))?;
        let needed = per_class_train + per_class_test;
        if pool.len() < needed {
            return Err(Error::InsufficientInstances {
                class,
                needed,
                available: pool.len(),
            });
        }
        let chosen: Vec<usize> = pool.choose_multiple(&mut rng, needed).copied().collect();
        let relabel = |i: usize| Instance {
            features: dataset.instances[i].features.clone(),
            class: new_class,
        };
        train.extend(chosen[..per_class_train].iter().map(|&i| relabel(i)));
        test.extend(chosen[per_class_train..].iter().map(|&i| relabel(i)));
    }
    let names: Vec<String> = classes.iter().map(|&c| dataset.class_names[c].clone()).collect();
    Ok((Dataset::new(train, names.clone())?, Dataset::new(test, names)?))
}
