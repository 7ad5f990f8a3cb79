use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::bath::{evolve, uniformize, BathGenerator};
use super::collision::{build_pair_state, collide, CollisionChannel, CollisionUnitary, DwellParams, PairState};
use super::fock::FockDist;
use crate::error::{Error, Result};
use crate::pair_thermo::{compute_weights, Coupling, PairParams, StreamCoeffs};
use crate::steady_state::{bath_occupation, n_star, rates, CavityEnv, CollisionParams};

const BATCHES: usize = 20;
const MIN_N_MAX: usize = 10;
const DEFAULT_N_MAX_FLOOR: usize = 30;
const DEFAULT_TAIL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arrival {
    /// Exponential inter-arrival gaps from a seeded ChaCha8 stream.
    Poisson { seed: u64 },
    /// Deterministic evolution under the arrival-averaged generator
    /// `L_bath + R (T − I)`.
    MeanField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub n_max: usize,
    pub coupling: Coupling,
    pub arrival: Arrival,
    /// Total clock ticks, including burn-in.
    pub collisions: usize,
    pub burn_in: usize,
    pub pair: PairParams,
    pub env: CavityEnv,
    pub coll: CollisionParams,
    /// Keep the `λ` exchange switched on during the dwell.
    pub exchange_during_dwell: bool,
    /// Apply every collision through the full joint-state map and run all
    /// leakage checks, instead of the compiled transfer matrix.
    pub check_every_step: bool,
    pub record_trajectory: bool,
    pub initial: FockDist,
}

/// Coupling strength the oracle realizes: collective coupling of two
/// identical atoms is the symmetric case, `χ = 2`.
fn oracle_coll(coll: &CollisionParams, coupling: Coupling) -> CollisionParams {
    match coupling {
        Coupling::OneAtom => *coll,
        Coupling::TwoAtom => CollisionParams { chi: 2.0, ..*coll },
    }
}

/// Analytic `(Γ↓, n*)` for the oracle's own coupling strength.
pub fn analytic_reference(
    coupling: Coupling,
    pair: &PairParams,
    env: &CavityEnv,
    coll: &CollisionParams,
) -> Result<(f64, f64)> {
    let w = compute_weights(pair)?;
    let coeffs = StreamCoeffs::for_coupling(&w, coupling);
    let r = rates(env, &oracle_coll(coll, coupling), &coeffs)?;
    Ok((r.gamma_down, n_star(&r)))
}

/// Smallest truncation whose thermal tail at `n_ref` is below `1e-8`,
/// and never below 30.
pub fn default_n_max(n_ref: f64) -> usize {
    if !(n_ref > 0.0) {
        return DEFAULT_N_MAX_FLOOR;
    }
    let q = n_ref / (n_ref + 1.0);
    let n = ((DEFAULT_TAIL / (1.0 - q)).ln() / q.ln()).ceil();
    (n.max(0.0) as usize).max(DEFAULT_N_MAX_FLOOR)
}

fn clock_rate(env: &CavityEnv, coll: &CollisionParams) -> f64 {
    if coll.rate > 0.0 {
        coll.rate
    } else {
        env.kappa
    }
}

impl OracleConfig {
    /// Configuration with derived defaults: truncation from the larger of
    /// `n̄₁` and the analytic `n*`, burn-in of five analytic relaxation times,
    /// forty more relaxation times of averaging, start from vacuum.
    pub fn new(
        coupling: Coupling,
        pair: PairParams,
        env: CavityEnv,
        coll: CollisionParams,
        arrival: Arrival,
    ) -> Result<Self> {
        pair.validate()?;
        env.validate()?;
        coll.validate()?;
        let clock = clock_rate(&env, &coll);
        if !(clock > 0.0) {
            return Err(Error::param("rate", "oracle needs R > 0 or κ > 0"));
        }
        let (gamma, ns) = analytic_reference(coupling, &pair, &env, &coll)?;
        let n_max = default_n_max(bath_occupation(&env).max(ns));
        let relax = (clock / gamma).ceil().max(1.0);
        let burn_in = (5.0 * relax) as usize;
        let collisions = burn_in + (40.0 * relax) as usize;
        Ok(OracleConfig {
            n_max,
            coupling,
            arrival,
            collisions,
            burn_in,
            pair,
            env,
            coll,
            exchange_during_dwell: false,
            check_every_step: false,
            record_trajectory: false,
            initial: FockDist::vacuum(n_max),
        })
    }

    /// Changes the truncation, re-embedding the initial state.
    pub fn with_n_max(mut self, n_max: usize) -> Self {
        let mut probs = self.initial.probs().to_vec();
        let dropped: f64 = probs.iter().skip(n_max + 1).sum();
        probs.resize(n_max + 1, 0.0);
        self.initial = if dropped > 0.0 {
            FockDist::vacuum(n_max)
        } else {
            FockDist::from_vector(DVector::from_vec(probs))
        };
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        self.env.validate()?;
        self.coll.validate()?;
        if self.n_max < MIN_N_MAX {
            return Err(Error::param("n_max", format!("must be >= {MIN_N_MAX}, got {}", self.n_max)));
        }
        if self.collisions < self.burn_in + BATCHES {
            return Err(Error::param(
                "collisions",
                format!(
                    "need at least {BATCHES} ticks after burn-in (collisions {}, burn-in {})",
                    self.collisions, self.burn_in
                ),
            ));
        }
        if self.initial.n_max() != self.n_max {
            return Err(Error::param("initial", "initial state truncation differs from n_max"));
        }
        if !(clock_rate(&self.env, &self.coll) > 0.0) {
            return Err(Error::param("rate", "oracle needs R > 0 or κ > 0"));
        }
        Ok(())
    }

    pub fn dwell(&self) -> DwellParams {
        DwellParams {
            coupling: self.coupling,
            g: self.coll.g,
            tau: self.coll.tau,
            delta: self.coll.delta,
            exchange: self.exchange_during_dwell.then_some(self.pair.lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub n_mean: f64,
    pub tail_mass: f64,
}

/// Worst values of the per-step checks seen during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub max_offdiag: f64,
    pub max_imag_diag: f64,
    pub max_trace_error: f64,
    pub min_prob: f64,
    pub max_tail_mass: f64,
    /// Collisions that went through the full joint-state map.
    pub checked_collisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub coupling: Coupling,
    pub arrival: Arrival,
    /// Time-averaged `⟨n⟩` after burn-in.
    pub n_estimate: f64,
    /// Batch-means standard error; zero for mean-field runs.
    pub std_error: f64,
    pub first_half: f64,
    pub second_half: f64,
    pub n_max: usize,
    pub collisions: usize,
    pub burn_in: usize,
    pub simulated_time: f64,
    pub final_probs: Vec<f64>,
    pub diagnostics: RunDiagnostics,
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryPoint>,
}

impl OracleOutcome {
    /// Trajectory as `t,n_mean,tail_mass` CSV.
    pub fn write_trajectory<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.trajectory {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Tick {
    dt: f64,
    mean_integral: f64,
}

fn batch_statistics(ticks: &[Tick]) -> Vec<f64> {
    let size = ticks.len() / BATCHES;
    (0..BATCHES)
        .map(|b| {
            let end = if b + 1 == BATCHES { ticks.len() } else { (b + 1) * size };
            let chunk = &ticks[b * size..end];
            let t: f64 = chunk.iter().map(|k| k.dt).sum();
            chunk.iter().map(|k| k.mean_integral).sum::<f64>() / t
        })
        .collect()
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

fn weighted_mean(ticks: &[Tick]) -> f64 {
    ticks.iter().map(|k| k.mean_integral).sum::<f64>() / ticks.iter().map(|k| k.dt).sum::<f64>()
}

struct Stepper {
    pair: PairState,
    unitary: CollisionUnitary,
    channel: CollisionChannel,
    bath: BathGenerator,
    check_every_step: bool,
}

impl Stepper {
    fn collide(&self, cav: &FockDist, diag: &mut RunDiagnostics) -> Result<FockDist> {
        if self.check_every_step {
            let (out, d) = collide(cav, &self.pair, &self.unitary)?;
            diag.max_offdiag = diag.max_offdiag.max(d.max_offdiag);
            diag.max_imag_diag = diag.max_imag_diag.max(d.max_imag_diag);
            diag.checked_collisions += 1;
            Ok(out)
        } else {
            self.channel.apply(cav)
        }
    }
}

/// Runs the repeated-interaction simulation to its steady state.
pub fn run_to_steady(cfg: &OracleConfig) -> Result<OracleOutcome> {
    cfg.validate()?;
    let weights = compute_weights(&cfg.pair)?;
    let pair = build_pair_state(&weights)?;
    let unitary = CollisionUnitary::new(cfg.dwell(), cfg.n_max)?;
    let channel = CollisionChannel::compile(&unitary, &pair)?;
    let bath = BathGenerator::new(&cfg.env, cfg.n_max)?;
    let stepper = Stepper {
        pair,
        unitary,
        channel,
        bath,
        check_every_step: cfg.check_every_step,
    };
    let rate = cfg.coll.rate;
    let clock = clock_rate(&cfg.env, &cfg.coll);

    let mut diag = RunDiagnostics {
        max_offdiag: stepper.channel.max_offdiag(),
        min_prob: cfg.initial.min_prob(),
        max_tail_mass: cfg.initial.tail_mass(),
        ..Default::default()
    };
    let mut cav = cfg.initial.clone();
    cav.check_tail()?;
    let mut t = 0.0;
    let mut trajectory = Vec::new();
    let record = |traj: &mut Vec<TrajectoryPoint>, t: f64, cav: &FockDist| {
        traj.push(TrajectoryPoint {
            t,
            n_mean: cav.mean(),
            tail_mass: cav.tail_mass(),
        })
    };
    if cfg.record_trajectory {
        record(&mut trajectory, t, &cav);
    }
    let mut ticks = Vec::with_capacity(cfg.collisions - cfg.burn_in);

    match cfg.arrival {
        Arrival::Poisson { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gaps = Exp::new(clock).map_err(|e| Error::param("rate", e.to_string()))?;
            for i in 0..cfg.collisions {
                let dt: f64 = gaps.sample(&mut rng);
                let step = evolve(&cav, &stepper.bath, dt)?;
                cav = step.state;
                cav.check_tail()?;
                if rate > 0.0 {
                    cav = stepper.collide(&cav, &mut diag)?;
                }
                t += dt;
                if i >= cfg.burn_in {
                    ticks.push(Tick {
                        dt,
                        mean_integral: step.mean_integral,
                    });
                }
                diag.max_trace_error = diag.max_trace_error.max((cav.trace() - 1.0).abs());
                diag.min_prob = diag.min_prob.min(cav.min_prob());
                diag.max_tail_mass = diag.max_tail_mass.max(cav.tail_mass());
                if cfg.record_trajectory {
                    record(&mut trajectory, t, &cav);
                }
            }
        }
        Arrival::MeanField => {
            let dim = cfg.n_max + 1;
            let channel = &stepper.channel;
            let lambda = stepper.bath.max_rate() + rate;
            let dt = 1.0 / clock;
            for i in 0..cfg.collisions {
                let (p, integral) = uniformize(cav.vector(), lambda, dt, |v| {
                    let mut g = stepper.bath.apply(v);
                    if rate > 0.0 {
                        g += (channel.mul(v) - v) * rate;
                    }
                    g / lambda + v
                });
                let mut next = FockDist::from_vector(p);
                let drift = (next.trace() - 1.0).abs();
                if drift > 1e-10 {
                    return Err(Error::Consistency {
                        what: "trace change in mean-field step",
                        value: drift,
                    });
                }
                next.check_and_clip()?;
                next.check_tail()?;
                cav = next;
                t += dt;
                if i >= cfg.burn_in {
                    ticks.push(Tick {
                        dt,
                        mean_integral: (0..dim).map(|n| n as f64 * integral[n]).sum(),
                    });
                }
                diag.max_trace_error = diag.max_trace_error.max(drift);
                diag.min_prob = diag.min_prob.min(cav.min_prob());
                diag.max_tail_mass = diag.max_tail_mass.max(cav.tail_mass());
                if cfg.record_trajectory {
                    record(&mut trajectory, t, &cav);
                }
            }
        }
    }

    let n_estimate = weighted_mean(&ticks);
    let batches = batch_statistics(&ticks);
    let (first_half, v1) = mean_and_var(&batches[..BATCHES / 2]);
    let (second_half, v2) = mean_and_var(&batches[BATCHES / 2..]);
    let std_error = match cfg.arrival {
        Arrival::Poisson { .. } => (mean_and_var(&batches).1 / BATCHES as f64).sqrt(),
        Arrival::MeanField => 0.0,
    };
    let sigma_diff = match cfg.arrival {
        Arrival::Poisson { .. } => ((v1 + v2) / (BATCHES / 2) as f64).sqrt(),
        Arrival::MeanField => 0.0,
    };
    let tolerance = 5.0 * sigma_diff + 2e-3 * (1.0 + n_estimate.abs());
    if (first_half - second_half).abs() > tolerance {
        return Err(Error::Convergence {
            first_half,
            second_half,
            tolerance,
        });
    }

    Ok(OracleOutcome {
        coupling: cfg.coupling,
        arrival: cfg.arrival,
        n_estimate,
        std_error,
        first_half,
        second_half,
        n_max: cfg.n_max,
        collisions: cfg.collisions,
        burn_in: cfg.burn_in,
        simulated_time: t,
        final_probs: cav.probs().to_vec(),
        diagnostics: diag,
        trajectory,
    })
}

/// Stationary distribution of the arrival-averaged generator
/// `L_bath + R (T − I)`, by a direct linear solve.
pub fn stationary_distribution(cfg: &OracleConfig) -> Result<FockDist> {
    cfg.validate()?;
    let weights = compute_weights(&cfg.pair)?;
    let pair = build_pair_state(&weights)?;
    let unitary = CollisionUnitary::new(cfg.dwell(), cfg.n_max)?;
    let channel = CollisionChannel::compile(&unitary, &pair)?;
    let bath = BathGenerator::new(&cfg.env, cfg.n_max)?;
    let dim = cfg.n_max + 1;

    let mut g = (channel.transfer() - DMatrix::<f64>::identity(dim, dim)) * cfg.coll.rate;
    let (down, up) = bath.rates();
    for n in 0..dim {
        g[(n, n)] -= down[n] + up[n];
        if n > 0 {
            g[(n - 1, n)] += down[n];
        }
        if n + 1 < dim {
            g[(n + 1, n)] += up[n];
        }
    }
    for j in 0..dim {
        g[(dim - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(dim);
    rhs[dim - 1] = 1.0;
    let p = g
        .lu()
        .solve(&rhs)
        .ok_or(Error::Consistency {
            what: "singular stationary generator, pivot",
            value: 0.0,
        })?;
    let mut out = FockDist::from_vector(p);
    out.check_and_clip()?;
    Ok(out)
}
