//! Synthetic designs and the replicated-experiment harness.

mod covariance;
mod experiment;
mod metrics;
mod sample;
mod signal;

pub use covariance::{build_covariance, CovarianceKind, Structure};
pub use experiment::{run_experiment, Cell, MetricsRecord, PrecisionMode, Procedure, SimulationConfig};
pub use metrics::fdp_tdp;
pub use sample::{gen_sample, ErrorLaw, SampleGenerator};
pub use signal::{gen_signal, SignalSpec, TruthVector};
