use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use qlabel::data::{
    parse_mnist, pca_fit, pca_transform, subsample, symmetric_eigen, Dataset, FeaturePipeline, Instance,
};
use qlabel::labels::average_patterns;
use qlabel::persist::{pipeline_from_doc, pipeline_to_doc, TextDoc};
use qlabel::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rows(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Anisotropic scales so the spectrum has a clear ordering.
    (0..n)
        .map(|_| (0..d).map(|j| rng.random_range(-1.0..1.0) * (d - j) as f64).collect())
        .collect()
}

#[test]
fn jacobi_matches_nalgebra_eigen() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in [2, 3, 5, 8, 12] {
        let b = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &b + b.transpose();
        let flat: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
        let (vals, vecs) = symmetric_eigen(&flat, n);
        let mut want: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
        want.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (g, w) in vals.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "n={n}: {vals:?} vs {want:?}");
        }
        for (lambda, v) in vals.iter().zip(&vecs) {
            let v = nalgebra::DVector::from_column_slice(v);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!((&a * &v - &v * *lambda).norm() < 1e-9);
        }
    }
}

#[test]
fn pca_reconstructs_full_rank_data_and_decorrelates() {
    let rows = random_rows(32, 20, 8);
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let model = pca_fit(&refs, 8).unwrap();
    for r in &rows {
        let y = pca_transform(&model, r).unwrap();
        let back: Vec<f64> = (0..8)
            .map(|j| model.mean[j] + (0..8).map(|k| y[k] * model.components[k][j]).sum::<f64>())
            .collect();
        for (a, b) in back.iter().zip(r) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    // Projections onto the top 3 components: sample covariance is diagonal
    // with the reported variances.
    let model = pca_fit(&refs, 3).unwrap();
    let ys: Vec<Vec<f64>> = rows.iter().map(|r| pca_transform(&model, r).unwrap()).collect();
    for a in 0..3 {
        for b in 0..3 {
            let cov = ys.iter().map(|y| y[a] * y[b]).sum::<f64>() / 19.0;
            let want = if a == b { model.variances[a] } else { 0.0 };
            assert!((cov - want).abs() < 1e-9, "cov[{a}][{b}] = {cov}");
        }
    }
    assert!(model.variances.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn pipeline_round_trips_through_text() {
    let rows = random_rows(33, 30, 6);
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    for m in [3, 6] {
        let p = FeaturePipeline::fit(&refs, m).unwrap();
        let text = pipeline_to_doc(&p).render();
        let q = pipeline_from_doc(&TextDoc::parse(&text).unwrap()).unwrap();
        assert_eq!(p, q);
        for r in &rows {
            let y = q.transform(r).unwrap();
            assert!(y.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn class_patterns_match_naive_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let instances: Vec<Instance> = (0..90)
        .map(|i| Instance {
            features: (0..5).map(|_| rng.random::<f64>()).collect(),
            class: i % 3,
        })
        .collect();
    let ds = Dataset::new(instances.clone(), vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let patterns = average_patterns(&ds).unwrap().patterns;
    for (k, pattern) in patterns.iter().enumerate() {
        let members: Vec<&Instance> = instances.iter().filter(|i| i.class == k).collect();
        for j in 0..5 {
            let mean = members.iter().map(|i| i.features[j]).sum::<f64>() / members.len() as f64;
            assert!((pattern[j] - mean).abs() < 1e-14);
        }
    }
}

fn idx_images(n: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    for v in [0x0000_0803, n, rows, cols] {
        out.extend(v.to_be_bytes());
    }
    out.extend(pixels);
    out
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend(0x0000_0801u32.to_be_bytes());
    out.extend((labels.len() as u32).to_be_bytes());
    out.extend(labels);
    out
}

#[test]
fn idx_parsing_and_errors() {
    let images = idx_images(2, 2, 2, &[0, 255, 51, 102, 255, 0, 0, 0]);
    let labels = idx_labels(&[7, 1]);
    let ds = parse_mnist(&images, &labels).unwrap();
    assert_eq!(ds.len(), 2);
    assert_eq!(ds.instances[0].features, vec![0.0, 1.0, 0.2, 0.4]);
    assert_eq!(ds.instances[1].class, 1);

    let mut bad = images.clone();
    bad[3] = 0x01;
    assert!(matches!(parse_mnist(&bad, &labels), Err(Error::BadMagic { .. })));
    assert!(matches!(
        parse_mnist(&images, &idx_labels(&[7, 1, 2])),
        Err(Error::CountMismatch { images: 2, labels: 3 })
    ));
    assert!(matches!(parse_mnist(&images[..20], &labels), Err(Error::Parse { .. })));
}

#[test]
fn subsample_is_disjoint_and_balanced() {
    let instances: Vec<Instance> = (0..60)
        .map(|i| Instance {
            features: vec![i as f64],
            class: i % 3,
        })
        .collect();
    let ds = Dataset::new(instances, vec!["a".into(), "b".into(), "c".into()]).unwrap();
    let (train, test) = subsample(&ds, 12, 5, &[2, 0], 9).unwrap();
    assert_eq!(train.class_names, vec!["c".to_string(), "a".to_string()]);
    for (set, n) in [(&train, 12), (&test, 5)] {
        for k in 0..2 {
            assert_eq!(set.instances.iter().filter(|i| i.class == k).count(), n);
        }
    }
    let ids = |d: &Dataset| d.instances.iter().map(|i| i.features[0] as usize).collect::<Vec<_>>();
    let tr = ids(&train);
    assert!(ids(&test).iter().all(|x| !tr.contains(x)));
    // Relabeled class 0 holds original class 2.
    assert!(train
        .instances
        .iter()
        .filter(|i| i.class == 0)
        .all(|i| i.features[0] as usize % 3 == 2));
    assert_eq!(subsample(&ds, 12, 5, &[2, 0], 9).unwrap(), (train, test));
    assert!(matches!(
        subsample(&ds, 18, 5, &[0], 1),
        Err(Error::InsufficientInstances { needed: 23, .. })
    ));
}

proptest! {
    #[test]
    fn jacobi_eigenvectors_are_orthonormal(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-2.0..2.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let (vals, vecs) = symmetric_eigen(&a, n);
        prop_assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-9);
            }
        }
    }
}
