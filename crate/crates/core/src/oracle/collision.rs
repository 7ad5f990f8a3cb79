//! Exact single-collision map on `cavity ⊗ pair`.
//!
//! The dwell Hamiltonian (cavity rotating frame)
//!
//! ```text
//! H/ħ = Δ (n_A + n_B) + g (a σ⁺ + a† σ⁻) [+ λ (σ_A⁺σ_B⁻ + σ_A⁻σ_B⁺)]
//! ```
//!
//! with `σ = σ_A` (one-atom) or `σ = S = σ_A + σ_B` (two-atom) conserves the
//! total excitation `N = n + n_A + n_B`. The propagator is therefore assembled
//! block by block from real symmetric matrices of dimension at most four.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use super::fock::FockDist;
use crate::error::{Error, Result};
use crate::pair_thermo::{Coupling, PairWeights};

/// Tolerance on forbidden cavity coherences and trace drift.
pub const LEAKAGE_LIMIT: f64 = 1e-10;

/// Product basis `{|ee⟩, |eg⟩, |ge⟩, |gg⟩}`; the first letter is atom A.
pub const PAIR_BASIS: [&str; 4] = ["ee", "eg", "ge", "gg"];

const fn atom_a_excited(b: usize) -> bool {
    b == 0 || b == 1
}

const fn atom_b_excited(b: usize) -> bool {
    b == 0 || b == 2
}

const fn pair_index(a: bool, b: bool) -> usize {
    match (a, b) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

const fn excitations(b: usize) -> usize {
    atom_a_excited(b) as usize + atom_b_excited(b) as usize
}

/// 4×4 pair density matrix in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub rho: Matrix4<f64>,
}

/// Diagonal `(ρ_e, ρ_d, ρ_d, ρ_g)` with coherence `ρ_nd` between `|eg⟩` and
/// `|ge⟩`. Its spectrum is `{ρ_e, ρ_g, ρ_d + ρ_nd, ρ_d − ρ_nd}`.
pub fn build_pair_state(w: &PairWeights) -> Result<PairState> {
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = w.rho_e;
    rho[(1, 1)] = w.rho_d;
    rho[(2, 2)] = w.rho_d;
    rho[(3, 3)] = w.rho_g;
    rho[(1, 2)] = w.rho_nd;
    rho[(2, 1)] = w.rho_nd;
    let state = PairState { rho };
    let min = state.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(Error::InvalidWeights { eigenvalue: min });
    }
    Ok(state)
}

impl PairState {
    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.rho).eigenvalues.iter().copied().collect()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace()
    }

    /// `⟨S₊S₋⟩` for the collective ladder.
    pub fn collective_up(&self) -> f64 {
        let r = &self.rho;
        // S₊S₋ = n_A + n_B + σ_A⁺σ_B⁻ + σ_B⁺σ_A⁻
        (r[(0, 0)] + r[(1, 1)]) + (r[(0, 0)] + r[(2, 2)]) + r[(2, 1)] + r[(1, 2)]
    }

    /// `⟨S₋S₊⟩`.
    pub fn collective_down(&self) -> f64 {
        let r = &self.rho;
        (r[(3, 3)] + r[(2, 2)]) + (r[(3, 3)] + r[(1, 1)]) + r[(2, 1)] + r[(1, 2)]
    }
}

/// Dwell-time dynamics of one collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellParams {
    pub coupling: Coupling,
    /// Per-atom coupling `g` (rad/s).
    pub g: f64,
    pub tau: f64,
    /// Detuning `Δ` (rad/s).
    pub delta: f64,
    /// Exchange `λ` applied during the dwell, or `None` to leave it out.
    pub exchange: Option<f64>,
}

#[derive(Debug, Clone)]
struct Block {
    /// `(photon number, pair index)` of each basis state.
    states: Vec<(usize, usize)>,
    u: DMatrix<Complex64>,
}

/// Propagator `e^{-iHτ}` stored per excitation block on a truncated cavity.
#[derive(Debug, Clone)]
pub struct CollisionUnitary {
    n_max: usize,
    params: DwellParams,
    blocks: Vec<Block>,
}

/// Matrix elements `⟨n', b'| H |n, b⟩ / ħ` for fixed `(n, b)`.
fn hamiltonian_column(p: &DwellParams, n: usize, b: usize, out: &mut Vec<(usize, usize, f64)>) {
    out.clear();
    let energy = p.delta * excitations(b) as f64;
    if energy != 0.0 {
        out.push((n, b, energy));
    }
    let (ea, eb) = (atom_a_excited(b), atom_b_excited(b));
    let coupled: &[bool] = match p.coupling {
        Coupling::OneAtom => &[true],
        Coupling::TwoAtom => &[true, false],
    };
    for &on_a in coupled {
        let excited = if on_a { ea } else { eb };
        let flip = |e: bool| if on_a { pair_index(e, eb) } else { pair_index(ea, e) };
        if excited {
            // a† σ⁻
            out.push((n + 1, flip(false), p.g * ((n + 1) as f64).sqrt()));
        } else if n > 0 {
            // a σ⁺
            out.push((n - 1, flip(true), p.g * (n as f64).sqrt()));
        }
    }
    if let Some(lambda) = p.exchange {
        if ea != eb {
            out.push((n, pair_index(eb, ea), lambda));
        }
    }
}

impl CollisionUnitary {
    pub fn new(params: DwellParams, n_max: usize) -> Result<Self> {
        if !(params.tau > 0.0) || !params.g.is_finite() || params.g < 0.0 {
            return Err(Error::param("dwell", "need τ > 0 and finite g >= 0"));
        }
        let mut blocks = Vec::with_capacity(n_max + 3);
        let mut column = Vec::with_capacity(4);
        for total in 0..=n_max + 2 {
            let states: Vec<(usize, usize)> = (0..4)
                .filter_map(|b| {
                    let k = excitations(b);
                    (total >= k && total - k <= n_max).then(|| (total - k, b))
                })
                .collect();
            let index: HashMap<(usize, usize), usize> =
                states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
            let d = states.len();
            let mut h = DMatrix::<f64>::zeros(d, d);
            for (j, &(n, b)) in states.iter().enumerate() {
                hamiltonian_column(&params, n, b, &mut column);
                for &(n2, b2, amp) in &column {
                    // transitions leaving the truncated space are dropped
                    if let Some(&i) = index.get(&(n2, b2)) {
                        h[(i, j)] += amp;
                    }
                }
            }
            let eig = SymmetricEigen::new(h);
            let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
            let phases = DMatrix::from_diagonal(&DVector::from_iterator(
                d,
                eig.eigenvalues.iter().map(|e| Complex64::from_polar(1.0, -e * params.tau)),
            ));
            let u = &v * phases * v.adjoint();
            blocks.push(Block { states, u });
        }
        Ok(CollisionUnitary {
            n_max,
            params,
            blocks,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn params(&self) -> &DwellParams {
        &self.params
    }

    /// Largest `‖U†U − I‖_max` over blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let d = b.u.nrows();
                (b.u.adjoint() * &b.u - DMatrix::<Complex64>::identity(d, d))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Checks gathered while applying one collision.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CollideDiagnostics {
    /// Largest `|⟨m|ρ_cav|m'⟩|`, `m ≠ m'`, after the pair is traced out.
    pub max_offdiag: f64,
    /// Largest imaginary part on the reduced diagonal.
    pub max_imag_diag: f64,
    pub trace_error: f64,
}

fn collide_raw(
    cav: &FockDist,
    pair: &PairState,
    unitary: &CollisionUnitary,
) -> Result<(FockDist, CollideDiagnostics)> {
    if cav.n_max() != unitary.n_max {
        return Err(Error::param(
            "n_max",
            format!("cavity truncation {} != propagator truncation {}", cav.n_max(), unitary.n_max),
        ));
    }
    let p = cav.probs();
    let mut diag = vec![Complex64::new(0.0, 0.0); p.len()];
    let mut off: HashMap<(usize, usize), Complex64> = HashMap::new();

    for block in &unitary.blocks {
        let d = block.states.len();
        let rho_in = DMatrix::from_fn(d, d, |i, j| {
            let (ni, bi) = block.states[i];
            let (nj, bj) = block.states[j];
            if ni == nj {
                Complex64::new(p[ni] * pair.rho[(bi, bj)], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let rho_out = &block.u * rho_in * block.u.adjoint();
        for i in 0..d {
            for j in 0..d {
                let (ni, bi) = block.states[i];
                let (nj, bj) = block.states[j];
                if bi != bj {
                    continue;
                }
                if ni == nj {
                    diag[ni] += rho_out[(i, j)];
                } else {
                    *off.entry((ni, nj)).or_default() += rho_out[(i, j)];
                }
            }
        }
    }

    let max_offdiag = off.values().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imag_diag = diag.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let probs = DVector::from_iterator(diag.len(), diag.iter().map(|z| z.re));
    let mut out = FockDist::from_vector(probs);
    let trace_error = (out.trace() - cav.trace()).abs();
    let diagnostics = CollideDiagnostics {
        max_offdiag,
        max_imag_diag,
        trace_error,
    };
    if max_offdiag > LEAKAGE_LIMIT {
        return Err(Error::Consistency {
            what: "cavity coherence generated by a collision",
            value: max_offdiag,
        });
    }
    if max_imag_diag > LEAKAGE_LIMIT {
        return Err(Error::Consistency {
            what: "imaginary photon-number population",
            value: max_imag_diag,
        });
    }
    if trace_error > LEAKAGE_LIMIT {
        return Err(Error::Consistency {
            what: "trace change in collision",
            value: trace_error,
        });
    }
    out.check_and_clip()?;
    Ok((out, diagnostics))
}

/// Forms `ρ_cav ⊗ ρ_pair`, applies the dwell propagator, traces out the pair.
pub fn collide(
    cav: &FockDist,
    pair: &PairState,
    unitary: &CollisionUnitary,
) -> Result<(FockDist, CollideDiagnostics)> {
    cav.check_tail()?;
    let (out, diagnostics) = collide_raw(cav, pair, unitary)?;
    out.check_tail()?;
    Ok((out, diagnostics))
}

/// The collision map restricted to diagonal cavity states, compiled into a
/// column-stochastic transfer matrix `T[m, n] = P(n → m)`.
///
/// Column `n` is `collide` applied to `|n⟩⟨n|`; by linearity `T p` equals
/// `collide` for every diagonal input, so the coherence checks made while
/// compiling cover every later application.
#[derive(Debug, Clone)]
pub struct CollisionChannel {
    transfer: DMatrix<f64>,
    /// Column `n` of `transfer`, rows `n - 2 ..= n + 2`.
    band: Vec<[f64; 5]>,
    max_offdiag: f64,
}

/// A pair carries at most two excitations, so one collision moves at most two
/// quanta.
const REACH: usize = 2;

impl CollisionChannel {
    pub fn compile(unitary: &CollisionUnitary, pair: &PairState) -> Result<Self> {
        let dim = unitary.n_max + 1;
        let mut transfer = DMatrix::zeros(dim, dim);
        let mut max_offdiag: f64 = 0.0;
        for n in 0..dim {
            let (col, diag) = collide_raw(&FockDist::number_state(n, unitary.n_max), pair, unitary)?;
            max_offdiag = max_offdiag.max(diag.max_offdiag);
            transfer.set_column(n, col.vector());
        }
        let mut band = vec![[0.0; 2 * REACH + 1]; dim];
        for (n, b) in band.iter_mut().enumerate() {
            for (m, p) in transfer.column(n).iter().enumerate() {
                if m.abs_diff(n) <= REACH {
                    b[m + REACH - n] = *p;
                } else if p.abs() > LEAKAGE_LIMIT {
                    return Err(Error::Consistency {
                        what: "collision moved more than two quanta",
                        value: p.abs(),
                    });
                }
            }
        }
        Ok(CollisionChannel {
            transfer,
            band,
            max_offdiag,
        })
    }

    /// `T v` using the band structure of `T`.
    pub(crate) fn mul(&self, v: &DVector<f64>) -> DVector<f64> {
        let dim = v.len();
        let mut out = DVector::zeros(dim);
        for (n, b) in self.band.iter().enumerate() {
            let x = v[n];
            if x == 0.0 {
                continue;
            }
            for (k, t) in b.iter().enumerate() {
                let m = n + k;
                if m >= REACH && m - REACH < dim {
                    out[m - REACH] += t * x;
                }
            }
        }
        out
    }

    pub fn transfer(&self) -> &DMatrix<f64> {
        &self.transfer
    }

    pub fn max_offdiag(&self) -> f64 {
        self.max_offdiag
    }

    pub fn apply(&self, cav: &FockDist) -> Result<FockDist> {
        cav.check_tail()?;
        let mut out = FockDist::from_vector(self.mul(cav.vector()));
        let trace_error = (out.trace() - cav.trace()).abs();
        if trace_error > LEAKAGE_LIMIT {
            return Err(Error::Consistency {
                what: "trace change in collision",
                value: trace_error,
            });
        }
        out.check_and_clip()?;
        out.check_tail()?;
        Ok(out)
    }

    /// Expected change of `⟨n⟩` in one collision.
    pub fn mean_transfer(&self, cav: &FockDist) -> f64 {
        let out = FockDist::from_vector(self.mul(cav.vector()));
        out.mean() - cav.mean()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular;
    use crate::pair_thermo::{compute_weights, PairParams};

    fn baseline_pair() -> (PairWeights, PairState) {
        let w = compute_weights(&PairParams::new(0.05, angular(5e9), angular(5e9)).unwrap()).unwrap();
        (w, build_pair_state(&w).unwrap())
    }

    fn dwell(coupling: Coupling, phi: f64, delta: f64) -> DwellParams {
        let tau = 50e-9;
        DwellParams {
            coupling,
            g: phi / tau,
            tau,
            delta,
            exchange: None,
        }
    }

    #[test]
    fn pair_state_spectrum() {
        let (w, s) = baseline_pair();
        assert!((s.trace() - 1.0).abs() < 1e-15);
        let mut ev = s.eigenvalues();
        ev.sort_by(f64::total_cmp);
        let mut expected = vec![w.rho_e, w.rho_g, w.rho_d + w.rho_nd, w.rho_d - w.rho_nd];
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        // smallest eigenvalue e^{-βħλ}/Z
        assert!((ev[0] - 3.391_337_236_422_167e-5).abs() < 1e-15);
    }

    #[test]
    fn pair_state_limits() {
        let hot = compute_weights(&PairParams::new(1e9, angular(5e9), angular(5e9)).unwrap()).unwrap();
        let s = build_pair_state(&hot).unwrap();
        assert!((s.rho - Matrix4::identity() * 0.25).abs().max() < 1e-9);

        let uncorrelated = compute_weights(&PairParams::new(0.05, angular(5e9), 0.0).unwrap()).unwrap();
        let s = build_pair_state(&uncorrelated).unwrap();
        assert_eq!(s.rho[(1, 2)], 0.0);
        assert!((s.rho - Matrix4::from_diagonal(&s.rho.diagonal())).abs().max() == 0.0);
    }

    #[test]
    fn rejects_non_positive_pair() {
        let (mut w, _) = baseline_pair();
        w.rho_nd = -0.4;
        assert!(matches!(build_pair_state(&w), Err(Error::InvalidWeights { .. })));
    }

    #[test]
    fn collective_correlators() {
        let (w, s) = baseline_pair();
        assert!((s.collective_up() - 2.0 * (w.rho_e + w.rho_d + w.rho_nd)).abs() < 1e-15);
        assert!((s.collective_down() - 2.0 * (w.rho_g + w.rho_d + w.rho_nd)).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let (_, s) = baseline_pair();
        let u = CollisionUnitary::new(dwell(Coupling::TwoAtom, 0.0, angular(3e6)), 40).unwrap();
        let cav = FockDist::thermal(0.7, 40);
        let (out, _) = collide(&cav, &s, &u).unwrap();
        for (a, b) in out.probs().iter().zip(cav.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ground_pair_leaves_vacuum_alone() {
        let mut gg = Matrix4::zeros();
        gg[(3, 3)] = 1.0;
        let pair = PairState { rho: gg };
        for c in Coupling::ALL {
            let u = CollisionUnitary::new(dwell(c, 0.8, 0.0), 10).unwrap();
            let (out, _) = collide(&FockDist::vacuum(10), &pair, &u).unwrap();
            assert!((out.probs()[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn jaynes_cummings_rabi_from_vacuum() {
        // single excited atom A: p₁ = sin²(φ) exactly on resonance
        let mut eg = Matrix4::zeros();
        eg[(1, 1)] = 1.0;
        let pair = PairState { rho: eg };
        let phi = 0.4;
        let u = CollisionUnitary::new(dwell(Coupling::OneAtom, phi, 0.0), 8).unwrap();
        let (out, _) = collide(&FockDist::vacuum(8), &pair, &u).unwrap();
        assert!((out.probs()[1] - phi.sin().powi(2)).abs() < 1e-14);
        assert!(u.unitarity_defect() < 1e-13);
    }

    #[test]
    fn second_order_gain_from_vacuum() {
        let (w, s) = baseline_pair();
        let phi: f64 = 0.05;
        let r1 = w.rho_e + w.rho_d;
        let u = CollisionUnitary::new(dwell(Coupling::OneAtom, phi, 0.0), 10).unwrap();
        let (out, _) = collide(&FockDist::vacuum(10), &s, &u).unwrap();
        assert!((out.probs()[1] - r1 * phi * phi).abs() < 1e-4);
        assert!((out.probs()[1] - r1 * phi.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn compiled_channel_matches_direct_collision() {
        let (_, s) = baseline_pair();
        for c in Coupling::ALL {
            let u = CollisionUnitary::new(dwell(c, 0.2, angular(2e6)), 60).unwrap();
            let ch = CollisionChannel::compile(&u, &s).unwrap();
            assert!(ch.max_offdiag() < LEAKAGE_LIMIT);
            let cav = FockDist::thermal(1.3, 60);
            let (direct, _) = collide(&cav, &s, &u).unwrap();
            let compiled = ch.apply(&cav).unwrap();
            for (a, b) in direct.probs().iter().zip(compiled.probs()) {
                assert!((a - b).abs() < 1e-14);
            }
            // column-stochastic; at most two photons change hands
            for n in 0..=20 {
                let col = ch.transfer().column(n);
                assert!((col.sum() - 1.0).abs() < 1e-12);
                for m in 0..=20usize {
                    if m.abs_diff(n) > 2 {
                        assert!(col[m].abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_guard() {
        let (_, s) = baseline_pair();
        let u = CollisionUnitary::new(dwell(Coupling::OneAtom, 0.05, 0.0), 10).unwrap();
        let hot = FockDist::thermal(5.0, 10);
        assert!(matches!(collide(&hot, &s, &u), Err(Error::Truncation { .. })));
    }

    /// Dense reference: full `(n_max+1)·4` Hilbert space, matrix exponential of
    /// the complex generator, explicit partial trace.
    #[test]
    fn block_propagator_matches_dense_exponential() {
        let (_, s) = baseline_pair();
        let n_max = 6;
        for (c, exchange) in [
            (Coupling::OneAtom, None),
            (Coupling::TwoAtom, None),
            (Coupling::OneAtom, Some(angular(1e6))),
        ] {
            let p = DwellParams {
                exchange,
                ..dwell(c, 0.35, angular(1.5e6))
            };
            let dim = (n_max + 1) * 4;
            let idx = |n: usize, b: usize| n * 4 + b;
            let mut h = DMatrix::<Complex64>::zeros(dim, dim);
            let mut col = Vec::new();
            for n in 0..=n_max {
                for b in 0..4 {
                    hamiltonian_column(&p, n, b, &mut col);
                    for &(n2, b2, amp) in &col {
                        if n2 <= n_max {
                            h[(idx(n2, b2), idx(n, b))] += Complex64::new(amp, 0.0);
                        }
                    }
                }
            }
            let u = (h * Complex64::new(0.0, -p.tau)).exp();
            let cav = FockDist::thermal(0.4, n_max);
            let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
            for n in 0..=n_max {
                for a in 0..4 {
                    for b in 0..4 {
                        rho[(idx(n, a), idx(n, b))] =
                            Complex64::new(cav.probs()[n] * s.rho[(a, b)], 0.0);
                    }
                }
            }
            let out = &u * rho * u.adjoint();
            let mut reduced = DMatrix::<Complex64>::zeros(n_max + 1, n_max + 1);
            for m in 0..=n_max {
                for m2 in 0..=n_max {
                    for b in 0..4 {
                        reduced[(m, m2)] += out[(idx(m, b), idx(m2, b))];
                    }
                }
            }
            let blocks = CollisionUnitary::new(p, n_max).unwrap();
            let (fast, _) = collide_raw(&cav, &s, &blocks).unwrap();
            for m in 0..=n_max {
                assert!((reduced[(m, m)].re - fast.probs()[m]).abs() < 1e-12);
                for m2 in 0..=n_max {
                    if m != m2 {
                        assert!(reduced[(m, m2)].norm() < 1e-12);
                    }
                }
            }
        }
    }
}
