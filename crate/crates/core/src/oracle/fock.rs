use nalgebra::DVector;

use crate::error::{Error, Result};

/// Largest tolerated population in the top Fock level.
pub const TAIL_LIMIT: f64 = 1e-6;
/// Negative populations down to this size are rounding noise and get clipped.
pub const NEGATIVE_CLIP: f64 = 1e-12;

/// Photon-number distribution on the truncated space `{|0⟩, …, |n_max⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDist {
    probs: DVector<f64>,
}

impl FockDist {
    pub fn vacuum(n_max: usize) -> Self {
        let mut probs = DVector::zeros(n_max + 1);
        probs[0] = 1.0;
        FockDist { probs }
    }

    pub fn number_state(n: usize, n_max: usize) -> Self {
        assert!(n <= n_max, "number state {n} outside truncation {n_max}");
        let mut probs = DVector::zeros(n_max + 1);
        probs[n] = 1.0;
        FockDist { probs }
    }

    /// Truncated and renormalized geometric distribution with mean `n_bar`
    /// (before truncation).
    pub fn thermal(n_bar: f64, n_max: usize) -> Self {
        if n_bar <= 0.0 {
            return Self::vacuum(n_max);
        }
        let q = n_bar / (n_bar + 1.0);
        let mut probs = DVector::from_iterator(n_max + 1, (0..=n_max).map(|n| q.powi(n as i32)));
        let s = probs.sum();
        probs /= s;
        FockDist { probs }
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("probs", "empty distribution"));
        }
        let d = FockDist {
            probs: DVector::from_vec(probs),
        };
        d.check_positive()?;
        let s = d.trace();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency {
                what: "trace of supplied distribution minus one",
                value: s - 1.0,
            });
        }
        Ok(d)
    }

    pub(crate) fn from_vector(probs: DVector<f64>) -> Self {
        FockDist { probs }
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        self.probs.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<f64> {
        &self.probs
    }

    pub fn trace(&self) -> f64 {
        self.probs.sum()
    }

    /// `⟨a†a⟩ = Σ n p_n`.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Population of the top retained level.
    pub fn tail_mass(&self) -> f64 {
        self.probs[self.n_max()]
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.min()
    }

    pub fn check_tail(&self) -> Result<()> {
        let tail = self.tail_mass();
        if tail >= TAIL_LIMIT {
            return Err(Error::Truncation {
                n_max: self.n_max(),
                tail,
                limit: TAIL_LIMIT,
            });
        }
        Ok(())
    }

    fn check_positive(&self) -> Result<()> {
        let min = self.min_prob();
        if min < -NEGATIVE_CLIP {
            return Err(Error::Consistency {
                what: "negative photon-number population",
                value: min,
            });
        }
        Ok(())
    }

    /// Fails on populations below `-1e-12`, then clips the remaining rounding
    /// noise to zero.
    pub(crate) fn check_and_clip(&mut self) -> Result<()> {
        self.check_positive()?;
        for p in self.probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        Ok(())
    }
}
