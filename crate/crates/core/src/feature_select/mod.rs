//! Three-stage reduction: correlation filter, recursive feature elimination,
//! and PCA.

pub mod correlation;
pub mod pca;
pub mod rfe;

pub use correlation::{correlation_filter, pearson, CorrelationSplit, DEFAULT_CORRELATION_THRESHOLD};
pub use pca::{
    choose_components, jacobi_eigen, pca_fit, pca_transform, PcaModel, SymmetricEigen,
    DEFAULT_VARIANCE_TARGET,
};
pub use rfe::{rfe_rank, rfe_select, FeatureRanking, RankerConfig};
