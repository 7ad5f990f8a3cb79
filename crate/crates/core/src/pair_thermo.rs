//! Thermal state of the correlated two-atom pair and the stream coefficients
//! it presents to the cavity.
//!
//! Each pair is prepared in the Gibbs state of an XY exchange Hamiltonian with
//! local splitting `ħω` and exchange `ħλ`. In the product basis
//! `{|ee⟩, |eg⟩, |ge⟩, |gg⟩}` the state has populations
//! `(ρ_e, ρ_d, ρ_d, ρ_g)` and a single coherence `ρ_nd` between `|eg⟩` and
//! `|ge⟩`:
//!
//! ```text
//! ρ_e = e^{-βħω}/Z    ρ_g = e^{+βħω}/Z
//! ρ_d = cosh(βħλ)/Z   ρ_nd = -sinh(βħλ)/Z
//! Z   = 2[cosh(βħω) + cosh(βħλ)]
//! ```
//!
//! All ratios are evaluated with the largest exponent factored out, so
//! millikelvin preparation temperatures do not overflow.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};

/// Which members of each pair couple to the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// Only atom A interacts (Jaynes–Cummings with `σ_A^±`).
    OneAtom,
    /// Both atoms interact collectively through `S_± = σ_A^± + σ_B^±`.
    TwoAtom,
}

impl Coupling {
    pub const ALL: [Coupling; 2] = [Coupling::OneAtom, Coupling::TwoAtom];

    pub fn label(self) -> &'static str {
        match self {
            Coupling::OneAtom => "one",
            Coupling::TwoAtom => "two",
        }
    }
}

/// Preparation parameters of the pair reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    /// Preparation temperature (K).
    pub t_atom: f64,
    /// Single-atom angular frequency (rad/s).
    pub omega: f64,
    /// Intra-pair exchange angular frequency (rad/s); negative is ferromagnetic.
    pub lambda: f64,
}

impl PairParams {
    pub fn new(t_atom: f64, omega: f64, lambda: f64) -> Result<Self> {
        let p = PairParams {
            t_atom,
            omega,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_atom > 0.0) {
            return Err(Error::param("t_atom", format!("must be > 0, got {}", self.t_atom)));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::param("omega", format!("must be > 0, got {}", self.omega)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        Ok(())
    }

    /// `βħω` with `β = 1/(k_B T_atom)`.
    pub fn beta_hbar_omega(&self) -> f64 {
        HBAR * self.omega / (BOLTZMANN * self.t_atom)
    }

    /// `βħλ`.
    pub fn beta_hbar_lambda(&self) -> f64 {
        HBAR * self.lambda / (BOLTZMANN * self.t_atom)
    }
}

/// Thermal weights of the pair state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWeights {
    pub rho_e: f64,
    pub rho_g: f64,
    pub rho_d: f64,
    pub rho_nd: f64,
    /// Partition function. May be `+inf` deep in the log-domain regime; use
    /// [`PairWeights::ln_z`] there.
    pub z: f64,
    pub ln_z: f64,
    /// `ρ_d + ρ_nd = e^{-βħλ}/Z`, the symmetric (triplet) single-excitation
    /// weight, evaluated without cancellation.
    pub rho_sym: f64,
    /// `ρ_d - ρ_nd = e^{+βħλ}/Z`, the antisymmetric (singlet) weight.
    pub rho_anti: f64,
    pub beta_hbar_omega: f64,
    pub beta_hbar_lambda: f64,
}

impl PairWeights {
    /// `ρ_e + ρ_g + 2ρ_d`.
    pub fn trace(&self) -> f64 {
        self.rho_e + self.rho_g + 2.0 * self.rho_d
    }

    /// Population bias `ρ_g − ρ_e = 2 sinh(βħω)/Z`, common to both coupling
    /// geometries.
    pub fn bias(&self) -> f64 {
        self.rho_g - self.rho_e
    }
}

pub fn compute_weights(p: &PairParams) -> Result<PairWeights> {
    p.validate()?;
    let x = p.beta_hbar_omega();
    let y = p.beta_hbar_lambda();
    if !x.is_finite() {
        return Err(Error::Overflow {
            what: "βħω",
            value: x,
        });
    }
    if !y.is_finite() {
        return Err(Error::Overflow {
            what: "βħλ",
            value: y,
        });
    }

    // Z = e^x + e^-x + e^y + e^-y, scaled by e^-m.
    let m = x.abs().max(y.abs());
    let ex_p = (x - m).exp();
    let ex_m = (-x - m).exp();
    let ey_p = (y - m).exp();
    let ey_m = (-y - m).exp();
    let zs = ex_p + ex_m + ey_p + ey_m;
    let ln_z = m + zs.ln();

    let rho_e = ex_m / zs;
    let rho_g = ex_p / zs;
    let rho_d = 0.5 * (ey_p + ey_m) / zs;
    let rho_nd = -0.5 * (ey_p - ey_m) / zs;
    let rho_sym = ey_m / zs;
    let rho_anti = ey_p / zs;

    Ok(PairWeights {
        rho_e,
        rho_g,
        rho_d,
        rho_nd,
        z: ln_z.exp(),
        ln_z,
        rho_sym,
        rho_anti,
        beta_hbar_omega: x,
        beta_hbar_lambda: y,
    })
}

/// Effective up (`r1`) and down (`r2`) coefficients of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamCoeffs {
    pub r1: f64,
    pub r2: f64,
    /// `r2 − r1`, carried separately because it is evaluated as `ρ_g − ρ_e`
    /// rather than by subtraction of two nearly equal sums.
    pub bias: f64,
    pub variant: Coupling,
}

impl StreamCoeffs {
    pub fn for_coupling(w: &PairWeights, variant: Coupling) -> Self {
        match variant {
            Coupling::OneAtom => stream_coeffs_one(w),
            Coupling::TwoAtom => stream_coeffs_two(w),
        }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Marginals of atom A: `r1 = ρ_e + ρ_d`, `r2 = ρ_g + ρ_d`.
pub fn stream_coeffs_one(w: &PairWeights) -> StreamCoeffs {
    StreamCoeffs {
        r1: w.rho_e + w.rho_d,
        r2: w.rho_g + w.rho_d,
        bias: w.bias(),
        variant: Coupling::OneAtom,
    }
}

/// Collective correlators: `r1 = ρ_e + ρ_d + ρ_nd`, `r2 = ρ_g + ρ_d + ρ_nd`.
pub fn stream_coeffs_two(w: &PairWeights) -> StreamCoeffs {
    StreamCoeffs {
        r1: w.rho_e + w.rho_sym,
        r2: w.rho_g + w.rho_sym,
        bias: w.bias(),
        variant: Coupling::TwoAtom,
    }
}
