//! Spectral overlap between the damped cavity line and the finite collision
//! window.
//!
//! The second-order energy exchange in one collision is governed by
//!
//! ```text
//! I(Δ) = ∫₀^τ dt ∫₀^τ ds e^{-(κ/2)|t-s|} e^{iΔ(t-s)}
//!      = 2 Re{ (τ/α)(1 - e^{-ατ}) - (1/α²)(1 - e^{-ατ}(1 + ατ)) },   α = κ/2 - iΔ
//! ```
//!
//! which interpolates between a cavity-limited Lorentzian (`κτ ≫ 1`) and a
//! time-window `sinc²` (`κτ ≪ 1`). The coarse-grained generator replaces it
//! by a single Lorentzian of width `Γ_over = κ + 1/τ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|α|τ` the closed form loses digits to cancellation and the
/// kernel is summed as a power series instead.
const SERIES_THRESHOLD: f64 = 0.1;
const SERIES_TERMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Detuning `Δ = ω − ω₁` (rad/s).
    pub delta: f64,
    /// Cavity energy-damping rate (1/s).
    pub kappa: f64,
    /// Collision duration (s).
    pub tau: f64,
}

impl FilterParams {
    pub fn new(delta: f64, kappa: f64, tau: f64) -> Result<Self> {
        let p = FilterParams { delta, kappa, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::param("tau", format!("must be > 0, got {}", self.tau)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::param("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if !self.delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        Ok(())
    }

    /// `α = κ/2 − iΔ`.
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(0.5 * self.kappa, -self.delta)
    }

    /// `Γ_over = κ + 1/τ`.
    pub fn gamma_over(&self) -> f64 {
        self.kappa + 1.0 / self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    /// Exact kernel `I(Δ)` in s², for diagnostics.
    pub i_delta: f64,
    /// Lorentzian filter `L(Δ) ∈ (0, 1]`.
    pub l_delta: f64,
    /// Overlap linewidth `κ + 1/τ` (1/s).
    pub gamma_over: f64,
}

/// Exact finite-time, damped overlap kernel `I(Δ)` (s²).
pub fn exact_kernel(p: &FilterParams) -> f64 {
    let alpha = p.alpha();
    let z = alpha * p.tau;
    if z.norm() < SERIES_THRESHOLD {
        // 2 Re ∫₀^τ (τ-u) e^{-αu} du = τ² Σ_k 2(-z)^k/(k+2)!
        let mut term = Complex64::new(1.0, 0.0); // (-z)^k / (k+2)! * 2, starting at k = 0
        let mut sum = term;
        for k in 1..SERIES_TERMS {
            term *= -z / (k as f64 + 2.0);
            sum += term;
        }
        p.tau * p.tau * sum.re
    } else {
        let e = (-z).exp();
        let first = (p.tau / alpha) * (1.0 - e);
        let second = (1.0 - e * (1.0 + z)) / (alpha * alpha);
        2.0 * (first - second).re
    }
}

/// `L(Δ) = 1 / (1 + (2Δ/Γ_over)²)` together with `Γ_over` and the exact kernel.
pub fn lorentzian_filter(p: &FilterParams) -> FilterResult {
    let gamma_over = p.gamma_over();
    let x = 2.0 * p.delta / gamma_over;
    FilterResult {
        i_delta: exact_kernel(p),
        l_delta: 1.0 / (1.0 + x * x),
        gamma_over,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct two-dimensional midpoint quadrature of the defining integral,
    /// reduced to the single lag integral `2∫₀^τ (τ-u) e^{-κu/2} cos(Δu) du`.
    fn quadrature(p: &FilterParams) -> f64 {
        let n = 20_000;
        let h = p.tau / n as f64;
        (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) * h;
                (p.tau - u) * (-0.5 * p.kappa * u).exp() * (p.delta * u).cos()
            })
            .sum::<f64>()
            * 2.0
            * h
    }

    #[test]
    fn undamped_resonant_kernel_is_tau_squared() {
        let tau = 50e-9;
        let p = FilterParams::new(0.0, 0.0, tau).unwrap();
        assert!((exact_kernel(&p) / (tau * tau) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &(kt, dt) in &[(0.5, 0.0), (2.0, 1.0), (0.3, 4.0), (10.0, 7.5), (0.2, 0.05)] {
            let tau = 1e-6;
            let p = FilterParams::new(dt / tau, kt / tau, tau).unwrap();
            let q = quadrature(&p);
            assert!(
                (exact_kernel(&p) - q).abs() < 1e-7 * tau * tau,
                "κτ={kt} Δτ={dt}: {} vs {q}",
                exact_kernel(&p)
            );
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_threshold() {
        let tau = 1.0;
        for angle in [0.0, 0.7, 1.5] {
            let r = SERIES_THRESHOLD;
            let below = FilterParams::new(
                -(r * 0.999) * f64::sin(angle),
                2.0 * r * 0.999 * f64::cos(angle),
                tau,
            )
            .unwrap();
            let above = FilterParams::new(
                -(r * 1.001) * f64::sin(angle),
                2.0 * r * 1.001 * f64::cos(angle),
                tau,
            )
            .unwrap();
            let a = exact_kernel(&below);
            let b = exact_kernel(&above);
            assert!((a - b).abs() < 1e-3 * r, "{a} vs {b}");
            assert!((a - quadrature(&below)).abs() < 1e-9);
            assert!((b - quadrature(&above)).abs() < 1e-9);
        }
    }

    #[test]
    fn small_damping_tends_to_tau_squared() {
        let tau = 1.0;
        for kt in [1e-6, 1e-4, 1e-2] {
            let p = FilterParams::new(0.0, kt / tau, tau).unwrap();
            let i = exact_kernel(&p);
            // leading correction is -κτ/6 since Re α = κ/2.
            assert!((i - (1.0 - kt / 6.0)).abs() < kt * kt);
        }
    }

    #[test]
    fn filter_values() {
        let p = FilterParams::new(0.0, 1e4, 50e-9).unwrap();
        assert_eq!(lorentzian_filter(&p).l_delta, 1.0);

        let g = p.gamma_over();
        let half = FilterParams::new(0.5 * g, 1e4, 50e-9).unwrap();
        assert_eq!(lorentzian_filter(&half).l_delta, 0.5);
    }

    #[test]
    fn ten_megahertz_detuning() {
        let p = FilterParams::new(2.0 * PI * 1e7, 1e4, 50e-9).unwrap();
        let f = lorentzian_filter(&p);
        assert!((f.gamma_over - 2.001e7).abs() < 1e-6);
        assert!((f.l_delta - 0.024_728_622_669_464_76).abs() < 1e-14);
        // The exact normalized overlap sits near the sinc² value 0.405 here, far
        // above the Lorentzian interpolation.
        let i0 = exact_kernel(&FilterParams::new(0.0, 1e4, 50e-9).unwrap());
        let ratio = f.i_delta / i0;
        assert!((ratio - 0.405_318_507_633_926_76).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(FilterParams::new(0.0, 1.0, 0.0).is_err());
        assert!(FilterParams::new(0.0, -1.0, 1.0).is_err());
        assert!(FilterParams::new(f64::NAN, 1.0, 1.0).is_err());
    }
}
