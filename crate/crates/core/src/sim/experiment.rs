use std::sync::Arc;

use log::warn;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::covariance::{build_covariance, Structure};
use super::metrics::fdp_tdp;
use super::sample::{ErrorLaw, SampleGenerator};
use super::signal::{gen_signal, SignalSpec, TruthVector};
use crate::baselines::{bh_marginal, ss_from_fit};
use crate::error::{invalid, Result, SdaError};
use crate::estimation::{PrecisionSpec, Whitener};
use crate::filter::{check_alpha, run_rsda_with, SdaFilter, SdaOptions, T1Mode};
use crate::linalg::sym_eigen;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Procedure {
    Sda,
    SdaPlus,
    Rsda,
    Bh,
    Ss,
}

impl Procedure {
    pub const ALL: [Procedure; 5] = [Procedure::Sda, Procedure::SdaPlus, Procedure::Rsda, Procedure::Bh, Procedure::Ss];

    pub fn label(self) -> &'static str {
        match self {
            Procedure::Sda => "SDA",
            Procedure::SdaPlus => "SDA+",
            Procedure::Rsda => "R-SDA",
            Procedure::Bh => "BH",
            Procedure::Ss => "SS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SDA" => Some(Procedure::Sda),
            "SDA+" | "SDAPLUS" => Some(Procedure::SdaPlus),
            "R-SDA" | "RSDA" => Some(Procedure::Rsda),
            "BH" => Some(Procedure::Bh),
            "SS" => Some(Procedure::Ss),
            _ => None,
        }
    }
}

/// Where the filters get their precision matrix from in simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PrecisionMode {
    /// The true `Σ⁻¹`; BH uses the true unit variances.
    Known,
    Identity,
    /// Graphical lasso on the screening half; `None` uses the default penalty.
    Glasso(Option<f64>),
}

impl PrecisionMode {
    pub fn label(self) -> &'static str {
        match self {
            PrecisionMode::Known => "known",
            PrecisionMode::Identity => "identity",
            PrecisionMode::Glasso(_) => "glasso",
        }
    }
}

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub structure: Structure,
    pub rho: f64,
    pub dist: ErrorLaw,
    pub n: usize,
    pub p: usize,
    pub pi1: f64,
    pub mu0: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub seed: u64,
    pub reps: usize,
    pub alpha: f64,
    pub procedures: Vec<Procedure>,
    pub rsda_runs: usize,
    pub precision: PrecisionMode,
    pub t1_mode: T1Mode,
    pub cells: Vec<Cell>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl SimulationConfig {
    pub fn new(seed: u64, cells: Vec<Cell>) -> Self {
        Self {
            seed,
            reps: 200,
            alpha: 0.2,
            procedures: Procedure::ALL.to_vec(),
            rsda_runs: crate::filter::DEFAULT_RSDA_RUNS,
            precision: PrecisionMode::Known,
            t1_mode: T1Mode::Scaled,
            cells,
            workers: None,
        }
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.reps == 0 {
            return invalid("reps must be at least 1");
        }
        if self.procedures.is_empty() {
            return invalid("no procedures requested");
        }
        if self.rsda_runs == 0 {
            return invalid("R-SDA needs at least one split");
        }
        if self.workers == Some(0) {
            return invalid("worker count must be at least 1");
        }
        for cell in &self.cells {
            if cell.n < 3 {
                return invalid(format!("cell needs n >= 3, got {}", cell.n));
            }
            SignalSpec::new(cell.pi1, cell.mu0).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub procedure: Procedure,
    pub cell: Cell,
    pub alpha: f64,
    /// Replications that produced a selection.
    pub reps: usize,
    pub fdr: f64,
    pub fdr_se: f64,
    pub ap: f64,
    pub ap_se: f64,
    pub fdp_sd: f64,
    pub dropped: usize,
    /// Replications whose refit needed the ridge fallback.
    pub flagged: usize,
    /// More than 5% of replications were dropped.
    pub unreliable: bool,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    fdp: f64,
    tdp: f64,
    flagged: bool,
}

/// Everything about a cell that does not change between replications.
struct CellContext {
    generator: SampleGenerator,
    filter: SdaFilter,
    bh_variances: Option<Vec<f64>>,
    signal: SignalSpec,
}

impl CellContext {
    fn new(config: &SimulationConfig, cell: &Cell, cell_id: u64) -> Result<Self> {
        let mut rng = stream_rng(config.seed, &[cell_id, u64::MAX]);
        let sigma = build_covariance(cell.structure.with_rho(cell.rho), cell.p, &mut rng)?;
        let eig = sym_eigen(&sigma)?;
        if eig.min_value() <= 0.0 {
            return Err(SdaError::NotPsd { min_eigenvalue: eig.min_value() });
        }
        let generator = SampleGenerator::from_root(eig.map_spectrum(f64::sqrt), cell.dist);
        let options = SdaOptions { t1_mode: config.t1_mode, ..SdaOptions::default() };
        let (filter, bh_variances) = match config.precision {
            PrecisionMode::Known => {
                let x = eig.map_spectrum(|v| 1.0 / v.sqrt());
                let whitener = Whitener::from_root(x);
                (SdaFilter::with_whitener(Arc::new(whitener), options), Some(sigma.diagonal()))
            }
            PrecisionMode::Identity => (SdaFilter::new(&PrecisionSpec::IdentityWorking, options)?, None),
            PrecisionMode::Glasso(penalty) => {
                (SdaFilter::new(&PrecisionSpec::GraphicalLasso { penalty }, options)?, None)
            }
        };
        Ok(Self { generator, filter, bh_variances, signal: SignalSpec::new(cell.pi1, cell.mu0) })
    }

    fn replicate(&self, config: &SimulationConfig, cell_id: u64, rep: u64) -> Vec<Option<Outcome>> {
        let mut rng = stream_rng(config.seed, &[cell_id, rep]);
        let prepared = gen_signal(self.generator.dim(), &self.signal, &mut rng)
            .and_then(|truth| Ok((self.generator.generate(&truth.mu, cell_n(config, cell_id), &mut rng)?, truth)));
        let (data, truth) = match prepared {
            Ok(v) => v,
            Err(e) => {
                warn!("cell {cell_id} rep {rep}: data generation failed: {e}");
                return vec![None; config.procedures.len()];
            }
        };
        let rsda_master = rng.next_u64();
        let needs_fit =
            config.procedures.iter().any(|p| matches!(p, Procedure::Sda | Procedure::SdaPlus | Procedure::Ss));
        // SDA, SDA+ and SS share one split so they differ only in how they threshold.
        let fit = if needs_fit { Some(self.filter.fit(&data, &mut rng).map(|(_, fit)| fit)) } else { None };

        let score = |rejected: &[usize], flagged: bool, truth: &TruthVector| {
            let (fdp, tdp) = fdp_tdp(rejected, truth);
            Outcome { fdp, tdp, flagged }
        };
        config
            .procedures
            .iter()
            .map(|&procedure| {
                let result = match procedure {
                    Procedure::Sda | Procedure::SdaPlus => match fit.as_ref().expect("fit computed") {
                        Ok(fit) => fit
                            .select(config.alpha, procedure == Procedure::SdaPlus)
                            .map(|sel| score(&sel.rejected, sel.flags.ridge_fallback, &truth)),
                        Err(e) => Err(e.clone()),
                    },
                    Procedure::Ss => match fit.as_ref().expect("fit computed") {
                        Ok(fit) => ss_from_fit(fit, config.alpha).map(|r| score(&r, fit.flags.ridge_fallback, &truth)),
                        Err(e) => Err(e.clone()),
                    },
                    Procedure::Bh => {
                        bh_marginal(&data, self.bh_variances.as_deref(), config.alpha).map(|r| score(&r, false, &truth))
                    }
                    Procedure::Rsda => run_rsda_with(&self.filter, &data, config.alpha, config.rsda_runs, rsda_master)
                        .map(|agg| {
                            score(&agg.final_selection.rejected, agg.final_selection.flags.ridge_fallback, &truth)
                        }),
                };
                match result {
                    Ok(o) => Some(o),
                    Err(e) => {
                        warn!("cell {cell_id} rep {rep}: {} failed: {e}", procedure.label());
                        None
                    }
                }
            })
            .collect()
    }
}

fn cell_n(config: &SimulationConfig, cell_id: u64) -> usize {
    config.cells[cell_id as usize].n
}

/// Runs every cell of the grid. Replication `r` of cell `c` draws from the
/// stream `(seed, c, r)` and results are merged in `(cell, rep)` order, so
/// the table does not depend on the worker count.
pub fn run_experiment(config: &SimulationConfig) -> Result<Vec<MetricsRecord>> {
    config.validate()?;
    let body = || -> Result<Vec<MetricsRecord>> {
        let mut records = Vec::new();
        for (c, cell) in config.cells.iter().enumerate() {
            let cell_id = c as u64;
            let ctx = CellContext::new(config, cell, cell_id)?;
            let outcomes: Vec<Vec<Option<Outcome>>> =
                (0..config.reps as u64).into_par_iter().map(|r| ctx.replicate(config, cell_id, r)).collect();
            for (k, &procedure) in config.procedures.iter().enumerate() {
                let kept: Vec<Outcome> = outcomes.iter().filter_map(|rep| rep[k]).collect();
                records.push(summarize(procedure, cell, config, &kept));
            }
        }
        Ok(records)
    };
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SdaError::NumericalFailure(format!("cannot start worker pool: {e}")))?
            .install(body),
        None => body(),
    }
}

fn summarize(procedure: Procedure, cell: &Cell, config: &SimulationConfig, kept: &[Outcome]) -> MetricsRecord {
    let reps = kept.len();
    let dropped = config.reps - reps;
    let (fdr, fdp_sd) = mean_sd(kept.iter().map(|o| o.fdp));
    let (ap, tdp_sd) = mean_sd(kept.iter().map(|o| o.tdp));
    let root = (reps.max(1) as f64).sqrt();
    MetricsRecord {
        procedure,
        cell: *cell,
        alpha: config.alpha,
        reps,
        fdr,
        fdr_se: fdp_sd / root,
        ap,
        ap_se: tdp_sd / root,
        fdp_sd,
        dropped,
        flagged: kept.iter().filter(|o| o.flagged).count(),
        unreliable: dropped as f64 > 0.05 * config.reps as f64,
    }
}

/// Mean and sample standard deviation; `NaN` mean for an empty sample.
fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
