//! Box-quantized electromagnetic field in the covariant (Gupta-Bleuler)
//! formulation, with the volume-integrated Poynting momentum split into its
//! classical, cross and zitterbewegung pieces.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: periodic box, reciprocal lattice, plane waves.
//! * [`polarization`]: helicity basis and the four covariant polarizations.
//! * [`fock`]: truncated indefinite-metric Fock space, sparse operators.
//! * [`forms`]: symbolic linear/quadratic forms in ladder operators.
//! * [`fields`]: potential and field-intensity expansions, Maxwell checks.
//! * [`momentum`]: grid-quadrature and closed-form momentum operators,
//!   expectation series and spectral analysis.
//! * [`constraint`]: physical-state condition, kernels, gauge shifts.
//! * [`gravity`]: weak static metric perturbation and the modified gauge
//!   condition.
//! * [`suite`]: the invariant checks shared by the CLI `verify` scenario.

pub mod constraint;
pub mod error;
pub mod fields;
pub mod fock;
pub mod forms;
pub mod gravity;
pub mod lattice;
pub mod momentum;
pub mod polarization;
pub mod suite;
pub mod vector;

pub use num_complex::Complex64 as C64;

pub use constraint::{ConstraintReport, ConstraintStack};
pub use error::{Error, Result};
pub use fields::FieldModel;
pub use fock::{FockSpace, Ladder, OperatorMatrix, StateVector};
pub use forms::{LinearForm, QuadraticForm, VectorForm};
pub use gravity::{MetricPerturbation, PerturbationKind};
pub use lattice::{BoxGeometry, ModeIndex, ModeSet};
pub use momentum::{ExpectationProfile, MomentumDecomposition, TimeSeries, ZbSummary};
pub use polarization::PolarizationBasis;

/// Imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
