//! Thermal damping of the cavity populations between collisions.
//!
//! On the photon-number diagonal the bath is the birth–death generator
//!
//! ```text
//! dp_n/dt = κ(n̄+1)[(n+1)p_{n+1} − n p_n] + κn̄[n p_{n−1} − (n+1)p_n]
//! ```
//!
//! truncated so that no probability leaves `{0, …, n_max}`. It is propagated
//! exactly by uniformization, which also yields the time integral of the
//! state over the step.

use nalgebra::DVector;

use super::fock::FockDist;
use crate::error::{Error, Result};
use crate::steady_state::{bath_occupation, CavityEnv};

/// Largest `Λh` handled in one uniformization chunk.
const MAX_CHUNK: f64 = 30.0;
/// Poisson mass left out of each series.
const SERIES_TAIL: f64 = 1e-15;

/// Exact `p(h) = e^{Gh} p` and `∫₀^h p(t) dt` for a generator `G` presented
/// through the matrix-vector product `v ↦ (I + G/Λ) v`, where `Λ` bounds the
/// exit rates so that `I + G/Λ` is stochastic.
pub(crate) fn uniformize<F>(p: &DVector<f64>, lambda: f64, h: f64, mut jump: F) -> (DVector<f64>, DVector<f64>)
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let mut state = p.clone();
    let mut integral = DVector::zeros(p.len());
    if h <= 0.0 || lambda <= 0.0 {
        integral.axpy(h.max(0.0), p, 0.0);
        return (state, integral);
    }
    let chunks = (lambda * h / MAX_CHUNK).ceil().max(1.0) as usize;
    let dt = h / chunks as f64;
    let a = lambda * dt;
    for _ in 0..chunks {
        let mut weight = (-a).exp();
        let mut cumulative = weight;
        let mut power = state.clone();
        let mut next = power.scale(weight);
        let mut chunk_integral = power.scale(1.0 - cumulative);
        let mut k = 0usize;
        while 1.0 - cumulative > SERIES_TAIL {
            k += 1;
            power = jump(&power);
            weight *= a / k as f64;
            cumulative += weight;
            next.axpy(weight, &power, 1.0);
            chunk_integral.axpy((1.0 - cumulative).max(0.0), &power, 1.0);
            if k > 10_000 {
                break;
            }
        }
        integral.axpy(1.0 / lambda, &chunk_integral, 1.0);
        state = next;
    }
    (state, integral)
}

/// Birth–death rates of the truncated bath.
#[derive(Debug, Clone)]
pub struct BathGenerator {
    /// `down[n]`: rate `n → n−1`.
    down: Vec<f64>,
    /// `up[n]`: rate `n → n+1`, zero at `n_max`.
    up: Vec<f64>,
    lambda: f64,
}

impl BathGenerator {
    pub fn new(env: &CavityEnv, n_max: usize) -> Result<Self> {
        env.validate()?;
        let n_bar = bath_occupation(env);
        Ok(Self::with_occupation(env.kappa, n_bar, n_max))
    }

    pub fn with_occupation(kappa: f64, n_bar: f64, n_max: usize) -> Self {
        let down: Vec<f64> = (0..=n_max).map(|n| kappa * (n_bar + 1.0) * n as f64).collect();
        let up: Vec<f64> = (0..=n_max)
            .map(|n| if n < n_max { kappa * n_bar * (n + 1) as f64 } else { 0.0 })
            .collect();
        let lambda = down.iter().zip(&up).map(|(d, u)| d + u).fold(0.0, f64::max);
        BathGenerator { down, up, lambda }
    }

    pub fn n_max(&self) -> usize {
        self.down.len() - 1
    }

    /// Largest exit rate.
    pub fn max_rate(&self) -> f64 {
        self.lambda
    }

    /// `G p`.
    pub fn apply(&self, p: &DVector<f64>) -> DVector<f64> {
        let n_max = self.n_max();
        DVector::from_fn(n_max + 1, |n, _| {
            let mut v = -(self.down[n] + self.up[n]) * p[n];
            if n < n_max {
                v += self.down[n + 1] * p[n + 1];
            }
            if n > 0 {
                v += self.up[n - 1] * p[n - 1];
            }
            v
        })
    }

    pub(crate) fn rates(&self) -> (&[f64], &[f64]) {
        (&self.down, &self.up)
    }

    /// Evolves `p` over `dt` and returns the new state with `∫₀^dt p(t) dt`.
    pub fn propagate(&self, p: &DVector<f64>, dt: f64) -> (DVector<f64>, DVector<f64>) {
        let lambda = self.lambda;
        uniformize(p, lambda, dt, |v| {
            let mut out = self.apply(v);
            out.axpy(1.0, v, 1.0 / lambda);
            out
        })
    }
}

/// Result of one bath interval.
#[derive(Debug, Clone)]
pub struct BathStep {
    pub state: FockDist,
    /// `∫⟨n⟩ dt` over the interval.
    pub mean_integral: f64,
}

/// Evolves the populations under the bath for `dt`.
pub fn bath_step(cav: &FockDist, env: &CavityEnv, dt: f64) -> Result<FockDist> {
    let generator = BathGenerator::new(env, cav.n_max())?;
    Ok(evolve(cav, &generator, dt)?.state)
}

pub(crate) fn evolve(cav: &FockDist, generator: &BathGenerator, dt: f64) -> Result<BathStep> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be finite and >= 0, got {dt}")));
    }
    let (p, integral) = generator.propagate(cav.vector(), dt);
    let mean_integral = integral.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
    let mut state = FockDist::from_vector(p);
    let drift = (state.trace() - cav.trace()).abs();
    if drift > 1e-10 {
        return Err(Error::Consistency {
            what: "trace change in bath step",
            value: drift,
        });
    }
    state.check_and_clip()?;
    Ok(BathStep {
        state,
        mean_integral,
    })
}
