//! Full model parameter set, in SI units internally and in the human-facing
//! units of the config keys at the boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::angular;
use crate::error::{Error, Result};
use crate::pair_thermo::{Coupling, PairParams};
use crate::steady_state::{CavityEnv, CollisionParams};

/// Which coupling geometries to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    One,
    Two,
    Both,
}

impl Variant {
    pub fn couplings(self) -> &'static [Coupling] {
        match self {
            Variant::One => &[Coupling::OneAtom],
            Variant::Two => &[Coupling::TwoAtom],
            Variant::Both => &Coupling::ALL,
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "one" | "one-atom" => Ok(Variant::One),
            "two" | "two-atom" => Ok(Variant::Two),
            "both" => Ok(Variant::Both),
            _ => Err(format!("unknown variant `{s}` (expected one, two or both)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::One => "one",
            Variant::Two => "two",
            Variant::Both => "both",
        })
    }
}

/// A numeric config key: name stem, unit suffix, and the factor taking the
/// config value to SI (angular frequencies for the frequency keys).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Key {
    TAtom,
    TBath,
    FCavity,
    FAtom,
    Delta,
    FLambda,
    G,
    Tau,
    Rate,
    Kappa,
    Chi,
}

impl Key {
    pub const ALL: [Key; 11] = [
        Key::TAtom,
        Key::TBath,
        Key::FCavity,
        Key::FAtom,
        Key::Delta,
        Key::FLambda,
        Key::G,
        Key::Tau,
        Key::Rate,
        Key::Kappa,
        Key::Chi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Key::TAtom => "t_atom_mK",
            Key::TBath => "t_bath_K",
            Key::FCavity => "f_cavity_GHz",
            Key::FAtom => "f_atom_GHz",
            Key::Delta => "delta_MHz",
            Key::FLambda => "f_lambda_GHz",
            Key::G => "g_over_2pi_MHz",
            Key::Tau => "tau_ns",
            Key::Rate => "rate_R_per_s",
            Key::Kappa => "kappa_per_s",
            Key::Chi => "chi",
        }
    }

    /// `(stem, unit)`, e.g. `("t_bath", "K")`.
    pub fn parts(self) -> (&'static str, &'static str) {
        match self {
            Key::TAtom => ("t_atom", "mK"),
            Key::TBath => ("t_bath", "K"),
            Key::FCavity => ("f_cavity", "GHz"),
            Key::FAtom => ("f_atom", "GHz"),
            Key::Delta => ("delta", "MHz"),
            Key::FLambda => ("f_lambda", "GHz"),
            Key::G => ("g_over_2pi", "MHz"),
            Key::Tau => ("tau", "ns"),
            Key::Rate => ("rate_R", "per_s"),
            Key::Kappa => ("kappa", "per_s"),
            Key::Chi => ("chi", ""),
        }
    }

    pub fn parse(name: &str) -> std::result::Result<Key, String> {
        if let Some(k) = Key::ALL.into_iter().find(|k| k.name() == name) {
            return Ok(k);
        }
        for k in Key::ALL {
            let (stem, unit) = k.parts();
            if !unit.is_empty() {
                if let Some(rest) = name.strip_prefix(stem).and_then(|r| r.strip_prefix('_')) {
                    return Err(format!(
                        "unit suffix mismatch in `{name}`: `{stem}` is given in {unit} (`{}`), not `{rest}`",
                        k.name()
                    ));
                }
            }
        }
        Err(format!("unknown key `{name}`; valid keys: {}", valid_keys()))
    }

    /// Whether a trailing unit token after the value names this key's unit.
    pub fn accepts_unit(self, token: &str) -> bool {
        let (_, unit) = self.parts();
        match unit {
            "per_s" => matches!(token, "per_s" | "/s" | "1/s" | "s^-1"),
            "" => false,
            u => token == u,
        }
    }
}

pub fn valid_keys() -> String {
    let mut names: Vec<&str> = Key::ALL.iter().map(|k| k.name()).collect();
    names.push("variant");
    names.join(", ")
}

/// Every model input, SI units and angular frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Pair preparation temperature (K).
    pub t_atom: f64,
    /// Bath temperature (K).
    pub t_bath: f64,
    /// Cavity angular frequency `ω₁` (rad/s).
    pub omega1: f64,
    /// Detuning `Δ = ω − ω₁` (rad/s).
    pub delta: f64,
    /// Exchange `λ` (rad/s).
    pub lambda: f64,
    /// Coupling `g` (rad/s).
    pub g: f64,
    pub tau: f64,
    pub rate: f64,
    pub kappa: f64,
    pub chi: f64,
    pub variant: Variant,
    /// When set, the atomic frequency stays at `ω₁` while `Δ` varies, so only
    /// the filter sees the detuning.
    pub freeze_omega: bool,
}

impl Default for ModelParams {
    /// Baseline: 50 mK pairs at 5 GHz with 5 GHz exchange, 10 K bath,
    /// `g/2π = 0.5 MHz`, `τ = 50 ns`, `R = 5·10⁶ /s`, `κ = 10⁴ /s`, `χ = 2`.
    fn default() -> Self {
        ModelParams {
            t_atom: 0.05,
            t_bath: 10.0,
            omega1: angular(5e9),
            delta: 0.0,
            lambda: angular(5e9),
            g: angular(0.5e6),
            tau: 50e-9,
            rate: 5e6,
            kappa: 1e4,
            chi: 2.0,
            variant: Variant::Both,
            freeze_omega: false,
        }
    }
}

impl ModelParams {
    /// Atomic angular frequency `ω = ω₁ + Δ`, or `ω₁` when frozen.
    pub fn omega(&self) -> f64 {
        if self.freeze_omega {
            self.omega1
        } else {
            self.omega1 + self.delta
        }
    }

    pub fn pair(&self) -> PairParams {
        PairParams {
            t_atom: self.t_atom,
            omega: self.omega(),
            lambda: self.lambda,
        }
    }

    pub fn env(&self) -> CavityEnv {
        CavityEnv {
            omega1: self.omega1,
            t_bath: self.t_bath,
            kappa: self.kappa,
        }
    }

    pub fn coll(&self) -> CollisionParams {
        CollisionParams {
            g: self.g,
            tau: self.tau,
            chi: self.chi,
            rate: self.rate,
            delta: self.delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pair().validate()?;
        self.env().validate()?;
        self.coll().validate()
    }

    /// Value of `key` in its config unit.
    pub fn get(&self, key: Key) -> f64 {
        match key {
            Key::TAtom => self.t_atom * 1e3,
            Key::TBath => self.t_bath,
            Key::FCavity => self.omega1 / angular(1e9),
            Key::FAtom => (self.omega1 + self.delta) / angular(1e9),
            Key::Delta => self.delta / angular(1e6),
            Key::FLambda => self.lambda / angular(1e9),
            Key::G => self.g / angular(1e6),
            Key::Tau => self.tau * 1e9,
            Key::Rate => self.rate,
            Key::Kappa => self.kappa,
            Key::Chi => self.chi,
        }
    }

    /// Sets `key` from a value in its config unit. Setting `f_atom_GHz` fixes
    /// `Δ` relative to the current cavity frequency.
    pub fn set(&mut self, key: Key, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::param(key.name(), format!("must be finite, got {value}")));
        }
        match key {
            Key::TAtom => self.t_atom = value * 1e-3,
            Key::TBath => self.t_bath = value,
            Key::FCavity => self.omega1 = angular(value * 1e9),
            Key::FAtom => self.delta = angular(value * 1e9) - self.omega1,
            Key::Delta => self.delta = angular(value * 1e6),
            Key::FLambda => self.lambda = angular(value * 1e9),
            Key::G => self.g = angular(value * 1e6),
            Key::Tau => self.tau = value * 1e-9,
            Key::Rate => self.rate = value,
            Key::Kappa => self.kappa = value,
            Key::Chi => self.chi = value,
        }
        Ok(())
    }

    /// Resolved parameters as `(key, value)` pairs in config units.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Key::ALL
            .iter()
            .map(|&k| (k.name().to_string(), format!("{}", self.get(k))))
            .collect();
        out.push(("variant".into(), self.variant.to_string()));
        out.push(("freeze_omega".into(), self.freeze_omega.to_string()));
        out
    }
}
