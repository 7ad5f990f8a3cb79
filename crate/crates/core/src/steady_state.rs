//! Closed-form photon-number dynamics of the phonon-tethered cavity.
//!
//! Bath and stream together give a linear birth–death equation for the mean
//! photon number,
//!
//! ```text
//! dn/dt = -Γ↓ n + J↑
//! Γ↓ = κ + R (r2 − r1) φ_eff² L(Δ)
//! J↑ = κ n̄₁ + R r1 φ_eff² L(Δ)
//! ```
//!
//! with `φ_eff² = φ²` for one-atom coupling and `χφ²` for two-atom coupling.
//! The steady state `n* = J↑/Γ↓` is converted to an effective temperature by
//! inverting the Bose occupation at the cavity frequency.

use serde::{Deserialize, Serialize};

use crate::constants::quantum_temperature;
use crate::error::{Error, Result};
use crate::pair_thermo::{Coupling, StreamCoeffs};
use crate::spectral_filter::{lorentzian_filter, FilterParams};

pub const PHI_WARN: f64 = 0.3;
pub const PHI_MAX: f64 = 1.0;
pub const RATE_TAU_WARN: f64 = 0.25;
pub const RATE_TAU_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityEnv {
    /// Cavity angular frequency (rad/s).
    pub omega1: f64,
    /// Phonon bath temperature (K).
    pub t_bath: f64,
    /// Cavity–bath energy damping rate (1/s).
    pub kappa: f64,
}

impl CavityEnv {
    pub fn new(omega1: f64, t_bath: f64, kappa: f64) -> Result<Self> {
        let env = CavityEnv {
            omega1,
            t_bath,
            kappa,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega1 > 0.0) || !self.omega1.is_finite() {
            return Err(Error::param("omega1", format!("must be > 0, got {}", self.omega1)));
        }
        if !(self.t_bath >= 0.0) || !self.t_bath.is_finite() {
            return Err(Error::param("t_bath", format!("must be >= 0, got {}", self.t_bath)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::param("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Bose occupation `1/(e^{ħω/k_B T} − 1)`; zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (quantum_temperature(omega) / temperature).exp_m1()
}

/// Thermal occupation `n̄₁` of the bath at the cavity frequency.
pub fn bath_occupation(env: &CavityEnv) -> f64 {
    bose_occupation(env.omega1, env.t_bath)
}

/// Temperature whose Bose occupation at `omega1` equals `n_star`.
///
/// Returns 0 K for an empty mode and a domain error for negative occupation.
pub fn t_cav(n_star: f64, omega1: f64) -> Result<f64> {
    if n_star == 0.0 {
        return Ok(0.0);
    }
    if !(n_star > 0.0) || !n_star.is_finite() {
        return Err(Error::Domain(format!(
            "effective temperature needs a positive photon number, got {n_star}"
        )));
    }
    Ok(quantum_temperature(omega1) / (1.0 / n_star).ln_1p())
}

/// Per-collision parameters of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    /// Atom–cavity coupling `g` (rad/s).
    pub g: f64,
    /// Dwell time `τ` (s).
    pub tau: f64,
    /// Two-atom coherent enhancement, `1 ≤ χ ≤ 2`.
    pub chi: f64,
    /// Poisson arrival rate of pairs (1/s).
    pub rate: f64,
    /// Detuning `Δ = ω − ω₁` (rad/s).
    pub delta: f64,
}

/// Soft warnings raised by [`CollisionParams::check_validity`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub phi: f64,
    pub rate_tau: f64,
    pub warnings: Vec<String>,
}

impl CollisionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(Error::param("g", format!("must be >= 0, got {}", self.g)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::param("tau", format!("must be > 0, got {}", self.tau)));
        }
        if !(1.0..=2.0).contains(&self.chi) {
            return Err(Error::param("chi", format!("must lie in [1, 2], got {}", self.chi)));
        }
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(Error::param("rate", format!("must be >= 0, got {}", self.rate)));
        }
        if !self.delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        Ok(())
    }

    /// Single-atom collision angle `φ = gτ`.
    pub fn phi(&self) -> f64 {
        self.g * self.tau
    }

    /// `φ²` for one-atom coupling, `χφ²` for two-atom coupling.
    pub fn phi_eff_sq(&self, coupling: Coupling) -> f64 {
        let phi2 = self.phi() * self.phi();
        match coupling {
            Coupling::OneAtom => phi2,
            Coupling::TwoAtom => self.chi * phi2,
        }
    }

    pub fn filter(&self, kappa: f64) -> FilterParams {
        FilterParams {
            delta: self.delta,
            kappa,
            tau: self.tau,
        }
    }

    /// Hard limits `φ < 1`, `Rτ < 1`; warnings above `φ = 0.3` and `Rτ = 0.25`.
    pub fn check_validity(&self) -> Result<Validity> {
        self.validate()?;
        let phi = self.phi();
        let rate_tau = self.rate * self.tau;
        if phi >= PHI_MAX {
            return Err(Error::Validity(format!(
                "collision angle φ = gτ = {phi:.4} is not small (limit {PHI_MAX})"
            )));
        }
        if rate_tau >= RATE_TAU_MAX {
            return Err(Error::Validity(format!(
                "collisions overlap: Rτ = {rate_tau:.4} (limit {RATE_TAU_MAX})"
            )));
        }
        let mut warnings = Vec::new();
        if phi > PHI_WARN {
            warnings.push(format!("φ = {phi:.4} exceeds {PHI_WARN}; small-angle expansion is strained"));
        }
        if rate_tau > RATE_TAU_WARN * (1.0 + 1e-9) {
            warnings.push(format!(
                "Rτ = {rate_tau:.4} exceeds {RATE_TAU_WARN}; Markov coarse-graining is strained"
            ));
        }
        Ok(Validity {
            phi,
            rate_tau,
            warnings,
        })
    }
}

/// Birth–death rates of the cavity photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub coupling: Coupling,
    /// Net damping `Γ↓` (1/s).
    pub gamma_down: f64,
    /// Injection `J↑` (photons/s).
    pub j_up: f64,
    /// Total upward rate `A↑ = κn̄₁ + R r1 φ_eff² L`.
    pub a_up: f64,
    /// Total downward rate `A↓ = κ(n̄₁+1) + R r2 φ_eff² L`.
    pub a_down: f64,
    pub n_bar1: f64,
    pub l_delta: f64,
    pub gamma_over: f64,
    pub phi_eff_sq: f64,
}

pub fn rates(env: &CavityEnv, coll: &CollisionParams, coeffs: &StreamCoeffs) -> Result<Rates> {
    env.validate()?;
    coll.validate()?;
    let n_bar1 = bath_occupation(env);
    let filter = lorentzian_filter(&coll.filter(env.kappa));
    let phi_eff_sq = coll.phi_eff_sq(coeffs.variant);
    let stream = coll.rate * phi_eff_sq * filter.l_delta;

    let gamma_down = env.kappa + stream * coeffs.bias;
    let j_up = env.kappa * n_bar1 + stream * coeffs.r1;
    let a_down = env.kappa * (n_bar1 + 1.0) + stream * coeffs.r2;
    if !(gamma_down > 0.0) {
        return Err(Error::Stability { gamma_down });
    }
    Ok(Rates {
        coupling: coeffs.variant,
        gamma_down,
        j_up,
        a_up: j_up,
        a_down,
        n_bar1,
        l_delta: filter.l_delta,
        gamma_over: filter.gamma_over,
        phi_eff_sq,
    })
}

/// Steady-state photon number `J↑/Γ↓`.
pub fn n_star(rates: &Rates) -> f64 {
    rates.j_up / rates.gamma_down
}

/// Relaxation `n(t) = n* + (n₀ − n*) e^{-Γ↓ t}`.
pub fn n_of_t(rates: &Rates, n0: f64, t: f64) -> f64 {
    let ns = n_star(rates);
    ns + (n0 - ns) * (-rates.gamma_down * t).exp()
}

/// Everything the analytic pipeline produces for one coupling geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub coupling: Coupling,
    pub r1: f64,
    pub r2: f64,
    pub gamma_down: f64,
    pub j_up: f64,
    pub a_up: f64,
    pub a_down: f64,
    pub n_star: f64,
    /// Effective cavity temperature (K).
    pub t_cav: f64,
    pub n_bar1: f64,
    pub l_delta: f64,
    pub gamma_over: f64,
    pub phi_eff_sq: f64,
}

impl SteadyReport {
    pub fn evaluate(env: &CavityEnv, coll: &CollisionParams, coeffs: &StreamCoeffs) -> Result<Self> {
        let r = rates(env, coll, coeffs)?;
        let ns = n_star(&r);
        Ok(SteadyReport {
            coupling: coeffs.variant,
            r1: coeffs.r1,
            r2: coeffs.r2,
            gamma_down: r.gamma_down,
            j_up: r.j_up,
            a_up: r.a_up,
            a_down: r.a_down,
            n_star: ns,
            t_cav: t_cav(ns, env.omega1)?,
            n_bar1: r.n_bar1,
            l_delta: r.l_delta,
            gamma_over: r.gamma_over,
            phi_eff_sq: r.phi_eff_sq,
        })
    }
}
