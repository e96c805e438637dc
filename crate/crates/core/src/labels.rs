//! Interclass correlation, the clustering objective, and quantum labels.
//!
//! Classes whose average patterns are far apart (large MSE) get a large
//! off-diagonal scaler, so minimizing `-S[i][j] · dist` pushes their readout
//! states further apart than those of strongly correlated classes. The
//! diagonal is negative, which turns the same-class term into a pull.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::readout::{PreparedInput, Readout};
use crate::tomography::BlochVector;

pub const DEFAULT_DIAGONAL: f64 = -1.0;
pub const DEFAULT_PER_CLASS: usize = 5;

/// Per-class mean feature vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternSet {
    pub patterns: Vec<Vec<f64>>,
}

pub fn average_patterns(dataset: &Dataset) -> Result<PatternSet> {
    let dim = dataset.dim();
    let mut sums = vec![vec![0.0; dim]; dataset.n_classes()];
    let mut counts = vec![0usize; dataset.n_classes()];
    for inst in &dataset.instances {
        counts[inst.class] += 1;
        for (s, x) in sums[inst.class].iter_mut().zip(&inst.features) {
            *s += x;
        }
    }
    for (class, (sum, &count)) in sums.iter_mut().zip(&counts).enumerate() {
        if count == 0 {
            return Err(Error::EmptyClass(class));
        }
        sum.iter_mut().for_each(|s| *s /= count as f64);
    }
    Ok(PatternSet { patterns: sums })
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Symmetric `K × K` interclass scaler array.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalerArray {
    k: usize,
    values: Vec<f64>,
}

impl ScalerArray {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Config("scaler array must be square".into()));
        }
        Ok(ScalerArray {
            k,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Correlation-blind variant: `diag` on the diagonal, 1 elsewhere.
    pub fn uniform(k: usize, diag: f64) -> Self {
        let values = (0..k * k).map(|i| if i / k == i % k { diag } else { 1.0 }).collect();
        ScalerArray { k, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.k).map(<[f64]>::to_vec).collect()
    }
}

/// Off-diagonal MSEs min-max mapped onto `[0.5, 1]` (smallest MSE → 0.5);
/// all map to 1 when they coincide. The diagonal is `diag`.
pub fn scaler_array(patterns: &PatternSet, diag: f64) -> Result<ScalerArray> {
    let k = patterns.patterns.len();
    if k < 2 {
        return Err(Error::TooFewClasses { needed: 2, actual: k });
    }
    if !(diag < 0.0) {
        return Err(Error::Config(format!("scaler diagonal must be negative, got {diag}")));
    }
    let raw = |i: usize, j: usize| mse(&patterns.patterns[i], &patterns.patterns[j]);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        for j in i + 1..k {
            let m = raw(i, j);
            lo = lo.min(m);
            hi = hi.max(m);
        }
    }
    let mut values = vec![diag; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let s = if hi > lo {
                0.5 + 0.5 * (raw(i, j) - lo) / (hi - lo)
            } else {
                1.0
            };
            values[i * k + j] = s;
            values[j * k + i] = s;
        }
    }
    Ok(ScalerArray { k, values })
}

/// Instances selected for clustering and every unordered pair among them.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterPairSet {
    pub members: Vec<Instance>,
    pub pairs: Vec<(usize, usize)>,
}

/// Picks `per_class` instances of each class uniformly at random and forms all
/// `C(per_class · K, 2)` pairs among them.
pub fn build_pair_set(dataset: &Dataset, per_class: usize, seed: u64) -> Result<ClusterPairSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(per_class * dataset.n_classes());
    for (class, pool) in dataset.class_indices().into_iter().enumerate() {
        if pool.len() < per_class {
            return Err(Error::InsufficientInstances {
                class,
                needed: per_class,
                available: pool.len(),
            });
        }
        members.extend(
            pool.choose_multiple(&mut rng, per_class)
                .map(|&i| dataset.instances[i].clone()),
        );
    }
    let n = members.len();
    let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    Ok(ClusterPairSet { members, pairs })
}

/// `1 - (v1 · v2) / (‖v1‖ ‖v2‖)`, in `[0, 2]`.
pub fn cosine_distance(v1: BlochVector, v2: BlochVector) -> Result<f64> {
    let (n1, n2) = (v1.norm(), v2.norm());
    if n1 <= 1e-9 || n2 <= 1e-9 {
        return Err(Error::DegenerateReadout);
    }
    let cos = (v1.dot(v2) / (n1 * n2)).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}

/// `-S[i][j] · dist(vi, vj)`.
pub fn clustering_loss(scaler: &ScalerArray, i: usize, j: usize, vi: BlochVector, vj: BlochVector) -> Result<f64> {
    Ok(-scaler.get(i, j) * cosine_distance(vi, vj)?)
}

/// Mean clustering loss over a pair set given each member's readout.
pub fn pair_set_loss(pairs: &ClusterPairSet, scaler: &ScalerArray, readouts: &[BlochVector]) -> Result<f64> {
    let mut total = 0.0;
    for &(a, b) in &pairs.pairs {
        let (ca, cb) = (pairs.members[a].class, pairs.members[b].class);
        total += clustering_loss(scaler, ca, cb, readouts[a], readouts[b])?;
    }
    Ok(total / pairs.pairs.len() as f64)
}

/// Clustering objective with the pair members' encodings prepared once.
///
/// Each member appears in many pairs; its readout depends only on the
/// parameters, so it is computed once per evaluation and shared by all of
/// its pairs.
pub struct ClusteringObjective<'a> {
    pairs: &'a ClusterPairSet,
    scaler: &'a ScalerArray,
    readout: Readout<'a>,
    prepared: Vec<PreparedInput>,
}

impl<'a> ClusteringObjective<'a> {
    pub fn new(pairs: &'a ClusterPairSet, scaler: &'a ScalerArray, readout: Readout<'a>) -> Result<Self> {
        let rows: Vec<&[f64]> = pairs.members.iter().map(|m| m.features.as_slice()).collect();
        let prepared = readout.prepare(&rows)?;
        Ok(ClusteringObjective {
            pairs,
            scaler,
            readout,
            prepared,
        })
    }

    pub fn eval(&self, params: &[f64]) -> Result<f64> {
        let readouts = self.readout.bloch_batch(params, &self.prepared)?;
        pair_set_loss(self.pairs, self.scaler, &readouts)
    }
}

pub fn clustering_objective(
    params: &[f64],
    pairs: &ClusterPairSet,
    scaler: &ScalerArray,
    readout: Readout<'_>,
) -> Result<f64> {
    ClusteringObjective::new(pairs, scaler, readout)?.eval(params)
}

/// One unit Bloch vector per class.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumLabelSet {
    labels: Vec<BlochVector>,
}

impl QuantumLabelSet {
    /// Normalizes each vector; rejects zero vectors and coincident labels.
    pub fn new(labels: Vec<BlochVector>) -> Result<Self> {
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(k, v)| v.normalized().ok_or(Error::DegenerateCluster(k)))
            .collect::<Result<Vec<_>>>()?;
        for a in 0..labels.len() {
            for b in a + 1..labels.len() {
                if cosine_distance(labels[a], labels[b])? <= 1e-6 {
                    return Err(Error::DuplicateLabels(a, b));
                }
            }
        }
        Ok(QuantumLabelSet { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, k: usize) -> BlochVector {
        self.labels[k]
    }

    pub fn as_slice(&self) -> &[BlochVector] {
        &self.labels
    }

    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        self.labels
            .iter()
            .map(|&a| {
                self.labels
                    .iter()
                    .map(|&b| cosine_distance(a, b).expect("labels are unit vectors"))
                    .collect()
            })
            .collect()
    }

    /// Plain-text rows `class_index rx ry rz`.
    pub fn to_rows(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.labels.iter().enumerate() {
            writeln!(out, "{k} {:.16e} {:.16e} {:.16e}", v.rx, v.ry, v.rz).unwrap();
        }
        out
    }
}

/// Per-class mean of the given readouts, renormalized to unit length.
pub fn centroid_labels(readouts: &[(usize, BlochVector)], k: usize) -> Result<QuantumLabelSet> {
    let mut sums = vec![BlochVector::default(); k];
    let mut counts = vec![0usize; k];
    for &(class, v) in readouts {
        sums[class] = sums[class] + v;
        counts[class] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(class));
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s.scale(1.0 / c as f64))
        .collect();
    QuantumLabelSet::new(means)
}

/// Quantum labels from the first `per_class_eval` instances of each class in
/// `members`.
pub fn compute_quantum_labels(
    params: &[f64],
    members: &[Instance],
    per_class_eval: usize,
    n_classes: usize,
    readout: Readout<'_>,
) -> Result<QuantumLabelSet> {
    let mut taken = vec![0usize; n_classes];
    let chosen: Vec<&Instance> = members
        .iter()
        .filter(|m| {
            let keep = taken[m.class] < per_class_eval;
            taken[m.class] += usize::from(keep);
            keep
        })
        .collect();
    if let Some(class) = taken.iter().position(|&t| t < per_class_eval) {
        return Err(Error::InsufficientInstances {
            class,
            needed: per_class_eval,
            available: taken[class],
        });
    }
    let rows: Vec<&[f64]> = chosen.iter().map(|m| m.features.as_slice()).collect();
    let prepared = readout.prepare(&rows)?;
    let vs = readout.bloch_batch(params, &prepared)?;
    let tagged: Vec<(usize, BlochVector)> = chosen.iter().map(|m| m.class).zip(vs).collect();
    centroid_labels(&tagged, n_classes)
}

pub fn min_label_distance(labels: &QuantumLabelSet) -> f64 {
    let d = labels.distance_matrix();
    let mut best = f64::INFINITY;
    for a in 0..d.len() {
        for b in a + 1..d.len() {
            best = best.min(d[a][b]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[(&[f64], usize)], k: usize) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|(f, c)| Instance {
                    features: f.to_vec(),
                    class: *c,
                })
                .collect(),
            (0..k).map(|c| c.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn patterns() {
        let d = ds(&[(&[0.0, 0.0], 0), (&[2.0, 2.0], 0), (&[3.0, 1.0], 1)], 2);
        let p = average_patterns(&d).unwrap();
        assert_eq!(p.patterns, vec![vec![1.0, 1.0], vec![3.0, 1.0]]);
        let d = ds(&[(&[0.0], 0)], 2);
        assert!(matches!(average_patterns(&d), Err(Error::EmptyClass(1))));
    }

    #[test]
    fn scaler_examples() {
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        let two = PatternSet {
            patterns: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
        };
        let s = scaler_array(&two, -1.0).unwrap();
        assert_eq!(s.rows(), vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
        let three = PatternSet {
            patterns: vec![vec![0.0], vec![1.0], vec![3.0]],
        };
        let s = scaler_array(&three, -2.0).unwrap();
        // raw MSEs: (0,1)=1, (0,2)=9, (1,2)=4
        assert_eq!(s.get(0, 1), 0.5);
        assert_eq!(s.get(0, 2), 1.0);
        assert_eq!(s.get(1, 2), 0.5 + 0.5 * 3.0 / 8.0);
        assert_eq!(s.get(2, 1), s.get(1, 2));
        assert_eq!(s.get(1, 1), -2.0);
        let one = PatternSet {
            patterns: vec![vec![0.0]],
        };
        assert!(matches!(scaler_array(&one, -1.0), Err(Error::TooFewClasses { .. })));
        assert!(scaler_array(&two, 0.0).is_err());
    }

    #[test]
    fn pair_counts() {
        let rows: Vec<(Vec<f64>, usize)> = (0..3)
            .flat_map(|c| (0..8).map(move |i| (vec![(c * 10 + i) as f64], c)))
            .collect();
        let refs: Vec<(&[f64], usize)> = rows.iter().map(|(f, c)| (f.as_slice(), *c)).collect();
        let d3 = ds(&refs, 3);
        let p = build_pair_set(&d3, 5, 3).unwrap();
        assert_eq!(p.pairs.len(), 105);
        for m in 0..p.members.len() {
            let degree = p.pairs.iter().filter(|(a, b)| *a == m || *b == m).count();
            assert_eq!(degree, 14);
        }
        assert_eq!(p, build_pair_set(&d3, 5, 3).unwrap());
        let d2 = ds(&refs[..16], 2);
        assert_eq!(build_pair_set(&d2, 5, 3).unwrap().pairs.len(), 45);
        assert!(matches!(
            build_pair_set(&d2, 9, 3),
            Err(Error::InsufficientInstances { .. })
        ));
    }

    #[test]
    fn distances() {
        let v = BlochVector::new(0.3, -0.4, 0.5);
        assert!(cosine_distance(v, v).unwrap().abs() < 1e-15);
        let x = BlochVector::new(1.0, 0.0, 0.0);
        let y = BlochVector::new(0.0, 1.0, 0.0);
        assert_eq!(cosine_distance(x, y).unwrap(), 1.0);
        let up = BlochVector::new(0.0, 0.0, 1.0);
        let down = BlochVector::new(0.0, 0.0, -1.0);
        assert_eq!(cosine_distance(up, down).unwrap(), 2.0);
        assert!(matches!(
            cosine_distance(BlochVector::default(), x),
            Err(Error::DegenerateReadout)
        ));
    }

    #[test]
    fn clustering_loss_examples() {
        let s = ScalerArray::uniform(2, -1.0);
        let v = BlochVector::new(0.0, 0.0, 1.0);
        assert_eq!(clustering_loss(&s, 0, 0, v, v).unwrap(), 0.0);
        assert_eq!(clustering_loss(&s, 1, 1, v, v.scale(-1.0)).unwrap(), 2.0);
        let x = BlochVector::new(1.0, 0.0, 0.0);
        let y = BlochVector::new(0.0, 1.0, 0.0);
        assert_eq!(clustering_loss(&s, 0, 1, x, y).unwrap(), -1.0);
    }

    #[test]
    fn centroids() {
        let v = BlochVector::new(0.0, 0.6, 0.0);
        let w = BlochVector::new(0.0, 0.0, -0.2);
        let l = centroid_labels(&[(0, v), (0, v), (1, w)], 2).unwrap();
        assert_eq!(l.get(0), BlochVector::new(0.0, 1.0, 0.0));
        let l = centroid_labels(
            &[
                (0, BlochVector::new(1.0, 0.0, 0.0)),
                (0, BlochVector::new(0.0, 1.0, 0.0)),
                (1, w),
            ],
            2,
        )
        .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let got = l.get(0);
        assert!((got.rx - h).abs() < 1e-15 && (got.ry - h).abs() < 1e-15 && got.rz == 0.0);
        assert!(matches!(
            centroid_labels(&[(0, v), (0, v.scale(-1.0)), (1, w)], 2),
            Err(Error::DegenerateCluster(0))
        ));
        assert!(matches!(
            centroid_labels(&[(0, v), (1, v)], 2),
            Err(Error::DuplicateLabels(0, 1))
        ));
    }

    #[test]
    fn min_distance_two_labels() {
        let l = QuantumLabelSet::new(vec![BlochVector::new(1.0, 0.0, 0.0), BlochVector::new(0.0, 0.0, 1.0)]).unwrap();
        assert_eq!(min_label_distance(&l), 1.0);
        let rows = l.to_rows();
        assert!(rows.starts_with("0 1.0000000000000000e0 0.0000000000000000e0"));
    }
}
