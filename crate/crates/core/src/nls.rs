//! The teleportation-based nonlinear-sign gate and its two-photon teleport
//! variant.
//!
//! The circuit: an input qutrit α|0⟩+β|1⟩+γ|2⟩ on mode 0 is joined with a
//! photon-pair ancilla |1,1⟩ on modes 1 and 2. A beam splitter at angle θ
//! entangles the ancilla pair, a symmetric beam splitter mixes modes 0 and 1,
//! and number-resolving detectors watch modes 0 and 1. Heralding on the
//! patterns (2,0) or (0,2) leaves mode 2 carrying the gate output; the (0,2)
//! branch needs a π-phase correction. At the canonical angle
//! (sin 2θ = 2/√5) each branch fires with probability 1/10 and the output is
//! α|0⟩+β|1⟩−γ|2⟩.
//!
//! With θ = π/4 the ancilla's |1,1⟩ component vanishes and the same circuit
//! teleports superpositions of vacuum and two-photon states instead; there a
//! π/2-phase correction completes either branch and each fires with
//! probability 1/8.

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockState, InputQutrit, StateVector};
use crate::measure::{outcome_distribution, MeasurementSpec, OutcomeDistribution};
use crate::optics::{apply_beam_splitter, apply_phase_shifter, BeamSplitterElement, PhaseShifterElement};

/// Tolerance on the squared norm of gate inputs.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

/// The herald pattern (2,0): both photons on the first detector.
pub const HERALD_2_0: [u32; 2] = [2, 0];
/// The herald pattern (0,2): both photons on the second detector.
pub const HERALD_0_2: [u32; 2] = [0, 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlsError {
    #[error("input state is not normalized: squared norm {norm_squared} deviates from 1 by {deficit}")]
    InputNotNormalized { norm_squared: f64, deficit: f64 },
    #[error("pattern ({0},{1}) is not a herald pattern; only (2,0) and (0,2) herald the gate")]
    NotAHeraldPattern(u32, u32),
}

/// Beam-splitter angle for the gate, with the canonical choice
/// sin 2θ = 2/√5 taken in (0, π/4) so that cos 2θ = +1/√5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsAngle {
    theta: f64,
}

impl NlsAngle {
    pub fn new(theta: f64) -> Self {
        NlsAngle { theta }
    }

    /// θ = ½·arcsin(2/√5) ≈ 0.5536 rad.
    pub fn canonical() -> Self {
        NlsAngle {
            theta: 0.5 * (2.0 / 5.0_f64.sqrt()).asin(),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// True iff sin 2θ is within 1e-12 of 2/√5.
    pub fn is_canonical(&self) -> bool {
        ((2.0 * self.theta).sin() - 2.0 / 5.0_f64.sqrt()).abs() <= 1e-12
    }
}

/// θ = ½·arcsin(2/√5), the angle that makes both herald branches carry the
/// ideal gate output.
pub fn canonical_theta() -> f64 {
    NlsAngle::canonical().theta()
}

/// One herald branch of a gate report.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport {
    /// Detector pattern (photons on detector 1, photons on detector 2).
    pub pattern: [u32; 2],
    pub probability: f64,
    /// Output-mode amplitudes on (|0⟩,|1⟩,|2⟩) after the branch correction,
    /// normalized and phase-aligned so the report is deterministic.
    pub amplitudes: [Complex64; 3],
    /// Correction element applied to the raw residual, if any.
    pub correction: Option<PhaseShifterElement>,
}

/// Full gate report: both herald branches plus the probability accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct NlsReport {
    pub branch_2_0: BranchReport,
    pub branch_0_2: BranchReport,
    /// Sum of the two herald probabilities.
    pub total_success_probability: f64,
    /// Summed probability of every non-herald detector pattern.
    pub failure_probability: f64,
}

/// A raw (uncorrected, unnormalized) herald branch: the projected output
/// amplitudes exactly as they appear in the pre-measurement state.
#[derive(Debug, Clone, PartialEq)]
pub struct RawBranch {
    pub pattern: [u32; 2],
    pub probability: f64,
    /// Unnormalized amplitudes on (|0⟩,|1⟩,|2⟩) of the output mode.
    pub amplitudes: [Complex64; 3],
}

impl RawBranch {
    /// The residual renormalized to unit norm; zero if the branch has no
    /// support.
    pub fn normalized_amplitudes(&self) -> [Complex64; 3] {
        if self.probability == 0.0 {
            return [Complex64::new(0.0, 0.0); 3];
        }
        let inv = 1.0 / self.probability.sqrt();
        self.amplitudes.map(|a| a * inv)
    }
}

/// Send the photon-pair ancilla |1,1⟩ through a beam splitter at angle θ:
/// (sin2θ/√2)(|2,0⟩ − |0,2⟩) + cos2θ·|1,1⟩.
pub fn build_ancilla(theta: f64) -> StateVector {
    let bs = BeamSplitterElement::new(0, 1, theta).expect("distinct modes");
    apply_beam_splitter(&StateVector::basis([1, 1]), &bs).expect("modes in range")
}

fn check_normalized(norm_squared: f64) -> Result<(), NlsError> {
    let deficit = (norm_squared - 1.0).abs();
    if deficit > INPUT_NORM_TOLERANCE {
        return Err(NlsError::InputNotNormalized {
            norm_squared,
            deficit,
        });
    }
    Ok(())
}

/// The three-mode state just before detection: (input ⊗ ancilla) mixed on
/// modes 0 and 1 by the symmetric beam splitter.
fn evolved_state(input: &InputQutrit, theta: f64) -> StateVector {
    let joint = input.to_state().tensor(&build_ancilla(theta));
    let bs2 = BeamSplitterElement::symmetric(0, 1).expect("distinct modes");
    apply_beam_splitter(&joint, &bs2).expect("modes in range")
}

fn detector_spec() -> MeasurementSpec {
    MeasurementSpec::new([0usize, 1]).expect("distinct detector modes")
}

fn herald_pattern(pattern: [u32; 2]) -> FockState {
    FockState::new(pattern.to_vec())
}

/// Extract (|0⟩,|1⟩,|2⟩) amplitudes from a one-mode residual.
fn qutrit_amplitudes(residual: &StateVector) -> [Complex64; 3] {
    [0u32, 1, 2].map(|n| residual.amplitude(&FockState::new([n])))
}

fn branch_report(
    distribution: &OutcomeDistribution,
    pattern: [u32; 2],
    correction: Option<PhaseShifterElement>,
) -> BranchReport {
    let (probability, amplitudes) = match distribution.get(&herald_pattern(pattern)) {
        Some(outcome) => {
            let corrected = match correction {
                Some(ps) => apply_phase_shifter(&outcome.residual, &ps).expect("mode in range"),
                None => outcome.residual.clone(),
            };
            (outcome.probability, qutrit_amplitudes(&corrected.phase_aligned()))
        }
        // A dead branch (herald probability zero) reports zero amplitudes.
        None => (0.0, [Complex64::new(0.0, 0.0); 3]),
    };
    BranchReport {
        pattern,
        probability,
        amplitudes,
        correction,
    }
}

fn run_heralded(
    input: &InputQutrit,
    theta: f64,
    correction_2_0: Option<PhaseShifterElement>,
    correction_0_2: Option<PhaseShifterElement>,
) -> Result<NlsReport, NlsError> {
    check_normalized(input.norm_squared())?;
    let distribution =
        outcome_distribution(&evolved_state(input, theta), &detector_spec()).expect("valid spec");

    let branch_2_0 = branch_report(&distribution, HERALD_2_0, correction_2_0);
    let branch_0_2 = branch_report(&distribution, HERALD_0_2, correction_0_2);
    let total_success_probability = branch_2_0.probability + branch_0_2.probability;
    let failure_probability: f64 = distribution
        .entries()
        .iter()
        .filter(|(pattern, _)| {
            **pattern != herald_pattern(HERALD_2_0) && **pattern != herald_pattern(HERALD_0_2)
        })
        .map(|(_, outcome)| outcome.probability)
        .sum();

    Ok(NlsReport {
        branch_2_0,
        branch_0_2,
        total_success_probability,
        failure_probability,
    })
}

/// Run the nonlinear-sign gate on a normalized input qutrit.
///
/// The (2,0) branch is reported as measured; the (0,2) branch is reported
/// after its π-phase correction. At the canonical angle both branches output
/// (α, β, −γ) up to a global phase and fire with probability 1/10 each.
pub fn nls_gate(input: &InputQutrit, theta: f64) -> Result<NlsReport, NlsError> {
    run_heralded(
        input,
        theta,
        None,
        Some(PhaseShifterElement::pi(0)),
    )
}

/// The raw post-selected residual of one herald branch, before any
/// correction or renormalization.
///
/// For pattern (2,0) the amplitudes are (sin2θ·α, 2cos2θ·β, −sin2θ·γ)/(2√2);
/// for (0,2) the β term flips sign.
pub fn nls_branch_state(
    input: &InputQutrit,
    theta: f64,
    pattern: [u32; 2],
) -> Result<RawBranch, NlsError> {
    if pattern != HERALD_2_0 && pattern != HERALD_0_2 {
        return Err(NlsError::NotAHeraldPattern(pattern[0], pattern[1]));
    }
    check_normalized(input.norm_squared())?;
    let evolved = evolved_state(input, theta);
    let amplitudes =
        [0u32, 1, 2].map(|n| evolved.amplitude(&FockState::new([pattern[0], pattern[1], n])));
    let probability = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    Ok(RawBranch {
        pattern,
        probability,
        amplitudes,
    })
}

/// Teleport a superposition of vacuum and two-photon states through the
/// gate circuit with a symmetric ancilla beam splitter (θ = π/4).
///
/// Either herald pattern occurs with probability 1/8 and leaves
/// α|0⟩ − γ|2⟩ on the output mode; a π/2-phase shifter restores
/// α|0⟩ + γ|2⟩ in both branches. Total success probability 1/4.
pub fn teleport_vacuum_two_photon(alpha: Complex64, gamma: Complex64) -> Result<NlsReport, NlsError> {
    let input = InputQutrit::new(alpha, Complex64::new(0.0, 0.0), gamma);
    let correction = PhaseShifterElement::new(0, std::f64::consts::FRAC_PI_2);
    run_heralded(
        &input,
        std::f64::consts::FRAC_PI_4,
        Some(correction),
        Some(correction),
    )
}
