//! End-to-end evaluations behind the `weights`, `point` and `oracle`
//! subcommands, reported with every intermediate quantity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::quantum_temperature;
use crate::error::Result;
use crate::oracle::{analytic_reference, run_to_steady, Arrival, OracleConfig, OracleOutcome};
use crate::pair_thermo::{compute_weights, Coupling, PairWeights, StreamCoeffs};
use crate::params::ModelParams;
use crate::spectral_filter::{lorentzian_filter, FilterResult};
use crate::steady_state::SteadyReport;
use crate::sweep::TOOL_VERSION;

fn resolved(params: &ModelParams) -> BTreeMap<String, String> {
    params.describe().into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub tool: String,
    pub params: BTreeMap<String, String>,
    pub weights: PairWeights,
    pub coefficients: Vec<StreamCoeffs>,
}

pub fn run_weights(params: &ModelParams) -> Result<WeightsReport> {
    params.validate()?;
    let weights = compute_weights(&params.pair())?;
    Ok(WeightsReport {
        tool: TOOL_VERSION.into(),
        params: resolved(params),
        weights,
        coefficients: params
            .variant
            .couplings()
            .iter()
            .map(|&c| StreamCoeffs::for_coupling(&weights, c))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub coupling: Coupling,
    pub coefficients: StreamCoeffs,
    pub steady: SteadyReport,
    pub t_cav_mk: f64,
    pub ratio_t_cav_over_t_atom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub tool: String,
    pub params: BTreeMap<String, String>,
    /// `ħω₁/k_B` (K).
    pub cavity_quantum_temperature: f64,
    pub weights: PairWeights,
    pub phi: f64,
    pub rate_tau: f64,
    pub filter: FilterResult,
    pub warnings: Vec<String>,
    pub variants: Vec<VariantReport>,
}

pub fn run_point(params: &ModelParams) -> Result<PointReport> {
    params.validate()?;
    let validity = params.coll().check_validity()?;
    let weights = compute_weights(&params.pair())?;
    let env = params.env();
    let coll = params.coll();
    let variants = params
        .variant
        .couplings()
        .iter()
        .map(|&c| {
            let coefficients = StreamCoeffs::for_coupling(&weights, c);
            let steady = SteadyReport::evaluate(&env, &coll, &coefficients)?;
            Ok(VariantReport {
                coupling: c,
                coefficients,
                steady,
                t_cav_mk: steady.t_cav * 1e3,
                ratio_t_cav_over_t_atom: steady.t_cav / params.t_atom,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointReport {
        tool: TOOL_VERSION.into(),
        params: resolved(params),
        cavity_quantum_temperature: quantum_temperature(params.omega1),
        weights,
        phi: validity.phi,
        rate_tau: validity.rate_tau,
        filter: lorentzian_filter(&coll.filter(params.kappa)),
        warnings: validity.warnings,
        variants,
    })
}

/// Oracle run settings beyond the model parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleOptions {
    pub seed: u64,
    pub mean_field: bool,
    pub n_max: Option<usize>,
    pub collisions: Option<usize>,
    pub burn_in: Option<usize>,
    pub exchange_during_dwell: bool,
    pub check_every_step: bool,
    pub record_trajectory: bool,
}

impl OracleOptions {
    pub fn config(&self, params: &ModelParams, coupling: Coupling) -> Result<OracleConfig> {
        let arrival = if self.mean_field {
            Arrival::MeanField
        } else {
            Arrival::Poisson { seed: self.seed }
        };
        let mut cfg = OracleConfig::new(coupling, params.pair(), params.env(), params.coll(), arrival)?;
        if let Some(n) = self.n_max {
            cfg = cfg.with_n_max(n);
        }
        if let Some(b) = self.burn_in {
            let extra = cfg.collisions - cfg.burn_in;
            cfg.burn_in = b;
            cfg.collisions = b + extra;
        }
        if let Some(c) = self.collisions {
            cfg.collisions = c;
        }
        cfg.exchange_during_dwell = self.exchange_during_dwell;
        cfg.check_every_step = self.check_every_step;
        cfg.record_trajectory = self.record_trajectory;
        Ok(cfg)
    }
}

/// Agreement band between oracle and analytic steady state.
pub fn oracle_tolerance(std_error: f64, n_star: f64) -> f64 {
    (3.0 * std_error).max(0.01).max(0.02 * n_star + 1e-3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub coupling: Coupling,
    pub n_estimate: f64,
    pub std_error: f64,
    /// Analytic `n*` at the oracle's coupling strength (`χ = 2` for two-atom).
    pub n_star_analytic: f64,
    pub abs_discrepancy: f64,
    /// Discrepancy in units of the standard error; `null` for mean-field runs.
    pub sigma_discrepancy: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub outcome: OracleOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub tool: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub mean_field: bool,
    pub warnings: Vec<String>,
    pub runs: Vec<OracleComparison>,
    pub pass: bool,
}

pub fn compare_oracle(cfg: &OracleConfig) -> Result<OracleComparison> {
    let outcome = run_to_steady(cfg)?;
    let (_, n_star) = analytic_reference(cfg.coupling, &cfg.pair, &cfg.env, &cfg.coll)?;
    let abs_discrepancy = (outcome.n_estimate - n_star).abs();
    let tolerance = oracle_tolerance(outcome.std_error, n_star);
    Ok(OracleComparison {
        coupling: cfg.coupling,
        n_estimate: outcome.n_estimate,
        std_error: outcome.std_error,
        n_star_analytic: n_star,
        abs_discrepancy,
        sigma_discrepancy: (outcome.std_error > 0.0).then(|| abs_discrepancy / outcome.std_error),
        tolerance,
        pass: abs_discrepancy <= tolerance,
        outcome,
    })
}

pub fn run_oracle(params: &ModelParams, opts: &OracleOptions) -> Result<OracleReport> {
    params.validate()?;
    let validity = params.coll().check_validity()?;
    let runs = params
        .variant
        .couplings()
        .iter()
        .map(|&c| compare_oracle(&opts.config(params, c)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        tool: TOOL_VERSION.into(),
        params: resolved(params),
        seed: opts.seed,
        mean_field: opts.mean_field,
        warnings: validity.warnings,
        pass: runs.iter().all(|r| r.pass),
        runs,
    })
}
