//! Photon-number measurement on mode subsets: exact outcome distributions,
//! post-selection, and seeded Monte Carlo sampling.
//!
//! Detectors are ideal number-resolving projectors. A measurement groups the
//! state's kets by their occupation pattern on the detector modes; each
//! pattern gets the summed probability mass and the renormalized residual
//! state on the remaining modes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fock::{FockState, StateVector};

/// Patterns with probability below this are omitted from distributions;
/// suppresses cancellation residue far below the physical branch scales.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("detector mode {mode} listed twice")]
    DuplicateMode { mode: usize },
    #[error("no detector modes given")]
    NoModes,
    #[error("detector mode {mode} out of range for a state with {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },
    #[error("postselection pattern has {found} entries, measurement has {expected} modes")]
    PatternLength { expected: usize, found: usize },
    #[error("shot count must be positive")]
    ZeroShots,
}

/// An ordered set of distinct detector modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpec {
    modes: Vec<usize>,
}

impl MeasurementSpec {
    pub fn new(modes: impl Into<Vec<usize>>) -> Result<Self, MeasureError> {
        let modes = modes.into();
        if modes.is_empty() {
            return Err(MeasureError::NoModes);
        }
        let mut seen = std::collections::BTreeSet::new();
        for &mode in &modes {
            if !seen.insert(mode) {
                return Err(MeasureError::DuplicateMode { mode });
            }
        }
        Ok(MeasurementSpec { modes })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    fn validate(&self, mode_count: usize) -> Result<(), MeasureError> {
        for &mode in &self.modes {
            if mode >= mode_count {
                return Err(MeasureError::ModeOutOfRange { mode, mode_count });
            }
        }
        Ok(())
    }
}

/// One measurement branch: its probability and the renormalized conditional
/// state on the unmeasured modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub residual: StateVector,
}

/// All measurement branches, keyed by detector pattern in lexicographic
/// order. Probabilities sum to the squared norm of the measured state.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    modes: Vec<usize>,
    entries: BTreeMap<FockState, Outcome>,
}

impl OutcomeDistribution {
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn entries(&self) -> &BTreeMap<FockState, Outcome> {
        &self.entries
    }

    pub fn get(&self, pattern: &FockState) -> Option<&Outcome> {
        self.entries.get(pattern)
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.values().map(|o| o.probability).sum()
    }
}

/// Exact outcome distribution of a photon-number measurement on the modes
/// named by `spec`.
///
/// For each occupation pattern on the detector modes, the probability is the
/// summed |amplitude|² of the matching kets and the residual is their
/// renormalized restriction to the unmeasured modes. Measuring every mode
/// leaves the zero-mode scalar unit as the residual. Patterns below
/// [`PROBABILITY_FLOOR`] are omitted.
pub fn outcome_distribution(
    state: &StateVector,
    spec: &MeasurementSpec,
) -> Result<OutcomeDistribution, MeasureError> {
    spec.validate(state.mode_count())?;
    let residual_modes: Vec<usize> = (0..state.mode_count())
        .filter(|m| !spec.modes.contains(m))
        .collect();

    // Per-pattern accumulators. Kets arrive in lexicographic order from the
    // state, so each pattern's probability is accumulated in a fixed order.
    let mut probabilities: BTreeMap<FockState, f64> = BTreeMap::new();
    let mut residuals: BTreeMap<FockState, StateVector> = BTreeMap::new();
    for (ket, amp) in state.terms() {
        let pattern = FockState::new(
            spec.modes
                .iter()
                .map(|&m| ket.photons_in(m))
                .collect::<Vec<u32>>(),
        );
        let residual_ket = FockState::new(
            residual_modes
                .iter()
                .map(|&m| ket.photons_in(m))
                .collect::<Vec<u32>>(),
        );
        *probabilities.entry(pattern.clone()).or_insert(0.0) += amp.norm_sqr();
        residuals
            .entry(pattern)
            .or_insert_with(|| StateVector::zero(residual_modes.len()))
            .accumulate(residual_ket, *amp);
    }

    let mut entries = BTreeMap::new();
    for (pattern, probability) in probabilities {
        if probability < PROBABILITY_FLOOR {
            continue;
        }
        let unnormalized = residuals.remove(&pattern).expect("residual exists");
        let residual = unnormalized.scaled(Complex64::new(1.0 / probability.sqrt(), 0.0));
        entries.insert(
            pattern,
            Outcome {
                probability,
                residual,
            },
        );
    }
    Ok(OutcomeDistribution {
        modes: spec.modes.clone(),
        entries,
    })
}

/// Project onto a single detector pattern.
///
/// Shares the arithmetic of [`outcome_distribution`], so the probability is
/// bit-identical to the corresponding distribution entry. A pattern with no
/// support yields probability zero and no residual.
pub fn postselect(
    state: &StateVector,
    spec: &MeasurementSpec,
    pattern: &FockState,
) -> Result<(f64, Option<StateVector>), MeasureError> {
    if pattern.mode_count() != spec.modes.len() {
        return Err(MeasureError::PatternLength {
            expected: spec.modes.len(),
            found: pattern.mode_count(),
        });
    }
    let distribution = outcome_distribution(state, spec)?;
    Ok(match distribution.entries.get(pattern) {
        Some(outcome) => (outcome.probability, Some(outcome.residual.clone())),
        None => (0.0, None),
    })
}

/// Draw `shots` detector patterns from the measurement distribution by
/// inverse CDF over the lexicographically ordered patterns.
///
/// The generator is ChaCha8 seeded from `seed`, so the counts are fully
/// reproducible for a given (state, spec, shots, seed). Every emitted
/// pattern appears in the result, including those never drawn; counts sum
/// to `shots`.
pub fn sample_outcomes(
    state: &StateVector,
    spec: &MeasurementSpec,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<FockState, u64>, MeasureError> {
    if shots == 0 {
        return Err(MeasureError::ZeroShots);
    }
    let distribution = outcome_distribution(state, spec)?;
    if distribution.entries.is_empty() {
        // Nothing to draw from; only reachable for a zero-norm state.
        return Ok(BTreeMap::new());
    }

    let patterns: Vec<&FockState> = distribution.entries.keys().collect();
    let mut cumulative = Vec::with_capacity(patterns.len());
    let mut running = 0.0;
    for outcome in distribution.entries.values() {
        running += outcome.probability;
        cumulative.push(running);
    }

    let mut counts: BTreeMap<FockState, u64> =
        patterns.iter().map(|&p| (p.clone(), 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        // Scale by the total mass so unnormalized inputs still sample their
        // own distribution.
        let u: f64 = rng.gen::<f64>() * running;
        let idx = cumulative.partition_point(|&edge| edge <= u);
        let idx = idx.min(patterns.len() - 1);
        *counts.get_mut(patterns[idx]).expect("pattern present") += 1;
    }
    Ok(counts)
}
