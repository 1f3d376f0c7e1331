//! Exact Fock-state simulation of multimode linear-optical circuits with
//! photon-number-resolving detection and post-selection.
//!
//! The crate models optical modes in the photon-number basis with sparse
//! complex amplitudes, applies beam splitters and phase shifters exactly,
//! and projects on number-resolving detector patterns. On top of that it
//! ships a heralded nonlinear-sign gate driver (α|0⟩+β|1⟩+γ|2⟩ →
//! α|0⟩+β|1⟩−γ|2⟩, success probability 20%), a vacuum/two-photon
//! teleporter, a text circuit format, and a CLI.
//!
//! ```
//! use focksim::fock::InputQutrit;
//! use focksim::nls::{canonical_theta, nls_gate};
//!
//! let q = InputQutrit::from_reals(1.0, 1.0, 1.0).normalized().unwrap();
//! let report = nls_gate(&q, canonical_theta()).unwrap();
//! assert!((report.total_success_probability - 0.2).abs() < 1e-12);
//! ```

pub mod circuit;
pub mod cli;
pub mod fock;
pub mod measure;
pub mod nls;
pub mod optics;

pub use fock::{FockState, InputQutrit, StateVector};
pub use measure::{MeasurementSpec, OutcomeDistribution};
pub use nls::{NlsReport, RawBranch};
pub use optics::{BeamSplitterElement, PhaseShifterElement};
