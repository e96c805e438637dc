//! Datasets, loaders, splits and PCA preprocessing.

mod dataset;
mod jacobi;
mod loaders;
mod pca;

pub use dataset::{subsample, Dataset, Instance};
pub use jacobi::symmetric_eigen;
pub use loaders::{load_iris, load_mnist, parse_iris, parse_mnist, IRIS_CLASSES};
pub use pca::{pca_fit, pca_transform, FeaturePipeline, PcaModel};
