//! Comparison methods: PCA reduction of TF images, and DWT sub-band
//! statistics classified with KNN or a linear SVM.

mod dwt;
mod features;
mod knn;
mod pca;
mod svm;

pub use dwt::{dwt, dwt_features, Extension, Wavelet};
pub use features::{read_features, write_features, FeatureVector};
pub use knn::knn_classify;
pub use pca::{pca_fit, pca_fit_variance, pca_inverse, pca_transform, PcaModel, PcaSelection};
pub use svm::{svm_objective, svm_predict, svm_train, SvmModel, SvmOptions};
