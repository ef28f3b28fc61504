// Negated comparisons are how validation rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod convnet;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod matrix;
pub mod scalar;
pub mod signal;
pub mod tensor;
pub mod tfr;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

/// Double-precision aliases for the generic types.
pub type Tensor = tensor::Tensor3<f64>;
pub type Factors = tensor::CpFactors<f64>;
pub type Projector = tensor::Projector<f64>;
pub type CpResult = tensor::CpResult<f64>;
pub type Record = signal::MultiChannelRecord<f64>;
pub type Segment = signal::Segment<f64>;
pub type Image = tfr::TfImage<f64>;
pub type Network = convnet::TrainedNetwork<f64>;
pub type Pca = baselines::PcaModel<f64>;
pub type Svm = baselines::SvmModel<f64>;
pub type Features = baselines::FeatureVector<f64>;
pub type DenseMatrix = Matrix<f64>;
