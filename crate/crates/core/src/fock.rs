//! Fock basis states and sparse state vectors over optical modes.
//!
//! A [`FockState`] labels a basis ket by the photon count in each mode, e.g.
//! `|2,0,1⟩`. A [`StateVector`] is a sparse map from basis kets to complex
//! amplitudes; terms whose magnitude falls below [`PRUNE_THRESHOLD`] are
//! dropped so that destructive-interference residue never grows the support.
//!
//! Amplitudes are stored in a `BTreeMap`, so iteration is always in
//! lexicographic occupation order. Reports and sampling rely on that.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Stored amplitudes with magnitude below this are dropped.
///
/// Far below every tolerance used by the gate drivers (the smallest physical
/// scale in the circuits here is ~0.1), but large enough to absorb
/// floating-point cancellation residue.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("basis state has {found} occupation entries, state has {expected} modes")]
    OccupationLength { expected: usize, found: usize },
    #[error("mode count mismatch: {left} vs {right}")]
    ModeCountMismatch { left: usize, right: usize },
}

/// A photon-number basis state: one occupation count per mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockState(Vec<u32>);

impl FockState {
    pub fn new(occupations: impl Into<Vec<u32>>) -> Self {
        FockState(occupations.into())
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn total_photons(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn photons_in(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    /// Concatenate the occupations of `self` and `other`.
    pub fn concat(&self, other: &FockState) -> FockState {
        let mut occ = Vec::with_capacity(self.0.len() + other.0.len());
        occ.extend_from_slice(&self.0);
        occ.extend_from_slice(&other.0);
        FockState(occ)
    }
}

impl fmt::Display for FockState {
    /// Comma-joined occupations, e.g. `2,0,1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl From<&[u32]> for FockState {
    fn from(occ: &[u32]) -> Self {
        FockState(occ.to_vec())
    }
}

/// Sparse complex state vector over a fixed number of optical modes.
///
/// A `mode_count` of zero is permitted: it represents the scalar factor that
/// remains after measuring every mode, with the empty occupation tuple as its
/// only basis ket.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    mode_count: usize,
    amplitudes: BTreeMap<FockState, Complex64>,
}

impl StateVector {
    /// Build a state from `(basis ket, amplitude)` terms.
    ///
    /// Duplicate kets are summed; amplitudes below [`PRUNE_THRESHOLD`] are
    /// dropped. Fails if any ket's length differs from `mode_count`.
    pub fn from_terms<I>(mode_count: usize, terms: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (FockState, Complex64)>,
    {
        let mut state = StateVector {
            mode_count,
            amplitudes: BTreeMap::new(),
        };
        for (ket, amp) in terms {
            if ket.mode_count() != mode_count {
                return Err(StateError::OccupationLength {
                    expected: mode_count,
                    found: ket.mode_count(),
                });
            }
            state.accumulate(ket, amp);
        }
        state.prune();
        Ok(state)
    }

    /// Single basis ket with amplitude 1.
    pub fn basis(occupations: impl Into<Vec<u32>>) -> Self {
        let ket = FockState::new(occupations);
        let mode_count = ket.mode_count();
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(ket, Complex64::new(1.0, 0.0));
        StateVector {
            mode_count,
            amplitudes,
        }
    }

    /// The vacuum ket `|0,…,0⟩` with amplitude 1.
    pub fn vacuum(mode_count: usize) -> Self {
        StateVector::basis(vec![0u32; mode_count])
    }

    /// The zero-mode state holding the bare scalar 1. This is what remains
    /// as the residual when every mode of a state is measured.
    pub fn scalar_unit() -> Self {
        StateVector::basis(Vec::new())
    }

    /// State with no stored terms (norm zero).
    pub fn zero(mode_count: usize) -> Self {
        StateVector {
            mode_count,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn term_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitude of `ket`, zero if not stored.
    pub fn amplitude(&self, ket: &FockState) -> Complex64 {
        self.amplitudes
            .get(ket)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Terms in lexicographic occupation order.
    pub fn terms(&self) -> impl Iterator<Item = (&FockState, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Add `amp` onto `ket`, keeping whatever lands there (pruning is a
    /// separate pass so mid-application cancellations still combine).
    pub(crate) fn accumulate(&mut self, ket: FockState, amp: Complex64) {
        debug_assert_eq!(ket.mode_count(), self.mode_count);
        let entry = self
            .amplitudes
            .entry(ket)
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += amp;
    }

    /// Drop all terms with magnitude below [`PRUNE_THRESHOLD`].
    pub(crate) fn prune(&mut self) {
        self.amplitudes.retain(|_, amp| amp.norm() >= PRUNE_THRESHOLD);
    }

    /// Σ |amplitude|². Zero iff the state has no stored terms.
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// True iff |norm² − 1| ≤ `tol`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_squared() - 1.0).abs() <= tol
    }

    /// Multiply every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex64) -> StateVector {
        let mut out = StateVector::zero(self.mode_count);
        for (ket, amp) in &self.amplitudes {
            out.accumulate(ket.clone(), amp * factor);
        }
        out.prune();
        out
    }

    /// Tensor product: `self`'s modes first, then `other`'s.
    ///
    /// The amplitude of a concatenated ket is the product of the factor
    /// amplitudes, so the norm multiplies.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut out = StateVector::zero(self.mode_count + other.mode_count);
        for (ket_a, amp_a) in &self.amplitudes {
            for (ket_b, amp_b) in &other.amplitudes {
                out.accumulate(ket_a.concat(ket_b), amp_a * amp_b);
            }
        }
        out.prune();
        out
    }

    /// The anchor ket for phase alignment: the ket with the largest
    /// amplitude magnitude, ties broken by lexicographically smallest
    /// occupation tuple. Magnitudes within a relative 1e-9 of the maximum
    /// count as tied, so rounding noise on equal components cannot move the
    /// anchor. `None` for an empty state.
    pub fn phase_anchor(&self) -> Option<(&FockState, Complex64)> {
        let max = self
            .amplitudes
            .values()
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        let cutoff = max * (1.0 - 1e-9);
        self.amplitudes
            .iter()
            .find(|(_, amp)| amp.norm() >= cutoff)
            .map(|(ket, amp)| (ket, *amp))
    }

    /// Rotate the global phase so the anchor ket's amplitude is real and
    /// non-negative. Empty states are returned unchanged.
    pub fn phase_aligned(&self) -> StateVector {
        match self.phase_anchor() {
            Some((_, anchor)) if anchor.norm() > 0.0 => {
                self.scaled(anchor.conj() / anchor.norm())
            }
            _ => self.clone(),
        }
    }

    /// Compare two states up to a global phase.
    ///
    /// Returns true iff there is a unit complex λ with
    /// max over kets of |a(k) − λ·b(k)| ≤ `tol`, where `a` is `self` and `b`
    /// is `other`. λ is fixed deterministically by aligning the amplitudes
    /// of `b`'s anchor ket (see [`StateVector::phase_anchor`]): λ is the
    /// unit-modulus direction of a(k*)/b(k*).
    ///
    /// Both states are expected to be normalized; the comparison itself does
    /// not renormalize.
    pub fn equal_up_to_global_phase(
        &self,
        other: &StateVector,
        tol: f64,
    ) -> Result<bool, StateError> {
        if self.mode_count != other.mode_count {
            return Err(StateError::ModeCountMismatch {
                left: self.mode_count,
                right: other.mode_count,
            });
        }
        let Some((anchor, b_amp)) = other.phase_anchor() else {
            // `other` stores nothing: equal iff `self` is negligible too.
            return Ok(self.amplitudes.values().all(|a| a.norm() <= tol));
        };
        let a_amp = self.amplitude(anchor);
        let lambda = if a_amp.norm() == 0.0 {
            // No alignment possible; the anchor-ket difference |b(k*)| will
            // decide (and reject, for any normalized b with tol < |b(k*)|).
            Complex64::new(1.0, 0.0)
        } else {
            let ratio = a_amp / b_amp;
            ratio / ratio.norm()
        };

        let mut max_dev: f64 = 0.0;
        for (ket, b) in &other.amplitudes {
            let dev = (self.amplitude(ket) - lambda * b).norm();
            max_dev = max_dev.max(dev);
        }
        for (ket, a) in &self.amplitudes {
            if !other.amplitudes.contains_key(ket) {
                max_dev = max_dev.max(a.norm());
            }
        }
        Ok(max_dev <= tol)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0");
        }
        for (i, (ket, amp)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{}⟩", amp.re, amp.im, ket)?;
        }
        Ok(())
    }
}

/// Single-mode input to the nonlinear-sign gate: amplitudes of the 0-, 1-,
/// and 2-photon components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputQutrit {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl InputQutrit {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Self {
        InputQutrit { alpha, beta, gamma }
    }

    pub fn from_reals(alpha: f64, beta: f64, gamma: f64) -> Self {
        InputQutrit {
            alpha: Complex64::new(alpha, 0.0),
            beta: Complex64::new(beta, 0.0),
            gamma: Complex64::new(gamma, 0.0),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr() + self.gamma.norm_sqr()
    }

    /// True iff |α|² + |β|² + |γ|² is within `tol` of 1.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_squared() - 1.0).abs() <= tol
    }

    /// Rescale to unit norm. `None` when all three amplitudes are zero.
    pub fn normalized(&self) -> Option<InputQutrit> {
        let n2 = self.norm_squared();
        if n2 == 0.0 {
            return None;
        }
        let inv = Complex64::new(1.0 / n2.sqrt(), 0.0);
        Some(InputQutrit {
            alpha: self.alpha * inv,
            beta: self.beta * inv,
            gamma: self.gamma * inv,
        })
    }

    /// The one-mode state α|0⟩ + β|1⟩ + γ|2⟩.
    pub fn to_state(&self) -> StateVector {
        StateVector::from_terms(
            1,
            [
                (FockState::new([0]), self.alpha),
                (FockState::new([1]), self.beta),
                (FockState::new([2]), self.gamma),
            ],
        )
        .expect("qutrit kets are well-formed")
    }
}
