//! False discovery rate control for high-dimensional mean vectors with
//! correlated coordinates.
//!
//! The filter whitens the sample mean with the square root of the precision
//! matrix, screens coordinates with a LASSO fit on one half of the data,
//! refits on the other half and thresholds the product of the two
//! standardized estimates, whose null distribution is symmetric about zero.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read more naturally in the dense matrix kernels.
#![allow(clippy::needless_range_loop)]

pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimation;
pub mod filter;
pub mod glasso;
pub mod linalg;
pub mod rng;
pub mod screening;
pub mod sim;

pub use data::DataMatrix;
pub use error::{Result, SdaError};
pub use estimation::PrecisionSpec;
pub use filter::{run_rsda, run_sda, sda_threshold, SdaFilter, SdaOptions, SelectionResult, T1Mode};
pub use linalg::SymMatrix;
