pub mod ansatz;
pub mod baselines;
pub mod data;
pub mod error;
pub mod labels;
pub mod optim;
pub mod persist;
pub mod readout;
pub mod seed;
pub mod sim;
pub mod tomography;
pub mod training;

pub use error::{Error, Result};
