use super::jacobi::symmetric_eigen;
use crate::error::{Error, Result};

/// Top principal directions of a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `m` rows of length `d`, orthonormal, ordered by decreasing variance.
    pub components: Vec<Vec<f64>>,
    /// Variance captured by each component.
    pub variances: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }
}

/// Fits `m` principal components to `rows` with the `1/(N-1)` covariance.
/// Each component's largest-magnitude entry is made positive.
pub fn pca_fit(rows: &[&[f64]], m: usize) -> Result<PcaModel> {
    if rows.len() < 2 {
        return Err(Error::Config(format!(
            "PCA needs at least 2 instances, got {}",
            rows.len()
        )));
    }
    let d = rows[0].len();
    if m == 0 || m > d {
        return Err(Error::Config(format!(
            "cannot extract {m} components from {d}-dimensional data"
        )));
    }
    for r in rows {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: r.len(),
            });
        }
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for (acc, x) in mean.iter_mut().zip(r.iter()) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|x| *x /= n);

    // Constant coordinates only contribute zero-variance eigenvectors along
    // their own axes; leave them out of the eigenproblem.
    let live: Vec<usize> = (0..d).filter(|&j| rows.iter().any(|r| r[j] != rows[0][j])).collect();
    let k = live.len();
    let mut cov = vec![0.0; k * k];
    let mut centered = vec![0.0; k];
    for r in rows {
        for (c, &j) in centered.iter_mut().zip(&live) {
            *c = r[j] - mean[j];
        }
        for a in 0..k {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            let row = &mut cov[a * k..(a + 1) * k];
            for b in a..k {
                row[b] += ca * centered[b];
            }
        }
    }
    for a in 0..k {
        for b in a..k {
            let v = cov[a * k + b] / (n - 1.0);
            cov[a * k + b] = v;
            cov[b * k + a] = v;
        }
    }
    let (values, vectors) = symmetric_eigen(&cov, k);

    let mut components = Vec::with_capacity(m);
    let mut variances = Vec::with_capacity(m);
    for (value, vector) in values.into_iter().zip(vectors).take(m) {
        let mut full = vec![0.0; d];
        for (x, &j) in vector.iter().zip(&live) {
            full[j] = *x;
        }
        components.push(full);
        variances.push(value.max(0.0));
    }
    let dead = (0..d).filter(|j| !live.contains(j));
    for j in dead.take(m - components.len()) {
        let mut axis = vec![0.0; d];
        axis[j] = 1.0;
        components.push(axis);
        variances.push(0.0);
    }
    for c in &mut components {
        let lead = c
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(PcaModel {
        mean,
        components,
        variances,
    })
}

/// Projects `features` onto the principal components.
pub fn pca_transform(model: &PcaModel, features: &[f64]) -> Result<Vec<f64>> {
    if features.len() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: features.len(),
        });
    }
    Ok(model
        .components
        .iter()
        .map(|c| {
            c.iter()
                .zip(features.iter().zip(&model.mean))
                .map(|(w, (x, mu))| w * (x - mu))
                .sum()
        })
        .collect())
}

/// Optional PCA projection followed by per-dimension min-max scaling onto
/// `[0, 1]` using the ranges of the training projections.
#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePipeline {
    /// `None` when the input already has the target dimension.
    pub pca: Option<PcaModel>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl FeaturePipeline {
    /// Reduces to `m` dimensions with PCA when the data has more than `m`;
    /// data that is already `m`-dimensional is only rescaled.
    pub fn fit(rows: &[&[f64]], m: usize) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        let pca = if d == m { None } else { Some(pca_fit(rows, m)?) };
        Self::fit_with(rows, pca)
    }

    pub fn fit_with(rows: &[&[f64]], pca: Option<PcaModel>) -> Result<Self> {
        let mut pipeline = FeaturePipeline {
            pca,
            lo: Vec::new(),
            hi: Vec::new(),
        };
        for r in rows {
            let y = pipeline.project(r)?;
            if pipeline.lo.is_empty() {
                pipeline.lo = y.clone();
                pipeline.hi = y;
                continue;
            }
            if y.len() != pipeline.lo.len() {
                return Err(Error::DimensionMismatch {
                    expected: pipeline.lo.len(),
                    actual: y.len(),
                });
            }
            for (j, v) in y.into_iter().enumerate() {
                pipeline.lo[j] = pipeline.lo[j].min(v);
                pipeline.hi[j] = pipeline.hi[j].max(v);
            }
        }
        if pipeline.lo.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(pipeline)
    }

    pub fn input_dim(&self) -> usize {
        self.pca.as_ref().map_or(self.lo.len(), PcaModel::input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.lo.len()
    }

    fn project(&self, features: &[f64]) -> Result<Vec<f64>> {
        match &self.pca {
            Some(pca) => pca_transform(pca, features),
            None if self.lo.is_empty() || features.len() == self.lo.len() => Ok(features.to_vec()),
            None => Err(Error::DimensionMismatch {
                expected: self.lo.len(),
                actual: features.len(),
            }),
        }
    }

    /// Returns the scaled features and whether any coordinate was clamped.
    pub fn transform_checked(&self, features: &[f64]) -> Result<(Vec<f64>, bool)> {
        let mut clamped = false;
        let out = self
            .project(features)?
            .into_iter()
            .enumerate()
            .map(|(j, y)| {
                let span = self.hi[j] - self.lo[j];
                let u = if span > 0.0 { (y - self.lo[j]) / span } else { 0.0 };
                if !(0.0..=1.0).contains(&u) {
                    clamped = true;
                }
                u.clamp(0.0, 1.0)
            })
            .collect();
        Ok((out, clamped))
    }

    pub fn transform(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.transform_checked(features).map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_data_gives_identity_components() {
        // Variance 4 along x, 1 along y.
        let rows: Vec<Vec<f64>> = vec![vec![2.0, 0.0], vec![-2.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let model = pca_fit(&refs, 2).unwrap();
        assert_eq!(model.components[0], vec![1.0, 0.0]);
        assert_eq!(model.components[1], vec![0.0, 1.0]);
    }

    #[test]
    fn rank_one_cloud() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, 5.0]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let model = pca_fit(&refs, 1).unwrap();
        let total: f64 = {
            let full = pca_fit(&refs, 3).unwrap();
            full.variances.iter().sum()
        };
        assert!((model.variances[0] / total - 1.0).abs() < 1e-12);
        let dir = &model.components[0];
        assert!((dir[1] / dir[0] - 2.0).abs() < 1e-12);
        assert!(dir[1] > 0.0);
    }

    #[test]
    fn errors() {
        let rows = [vec![1.0, 2.0], vec![3.0, 1.0]];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        assert!(pca_fit(&refs, 3).is_err());
        assert!(pca_fit(&refs[..1], 1).is_err());
        let model = pca_fit(&refs, 1).unwrap();
        assert!(matches!(
            pca_transform(&model, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pipeline_maps_train_to_unit_box() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos(), i as f64 * 0.1])
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let p = FeaturePipeline::fit(&refs, 2).unwrap();
        let out: Vec<Vec<f64>> = refs.iter().map(|r| p.transform(r).unwrap()).collect();
        for j in 0..2 {
            let lo = out.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
            let hi = out.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!((lo, hi), (0.0, 1.0));
        }
        let (v, clamped) = p.transform_checked(&[10.0, 10.0, 10.0]).unwrap();
        assert!(clamped);
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn pipeline_without_reduction_is_minmax() {
        let rows = [vec![1.0, 10.0], vec![3.0, 20.0], vec![2.0, 30.0]];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let p = FeaturePipeline::fit(&refs, 2).unwrap();
        assert!(p.pca.is_none());
        assert_eq!(p.transform(&[2.0, 20.0]).unwrap(), vec![0.5, 0.5]);
        assert!(p.transform(&[2.0]).is_err());
    }
}
