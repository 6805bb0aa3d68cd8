//! Event-level simulation and design calculator for grating-filtered SPDC
//! pairs and a heralded unequal-path Michelson interferometer.
//!
//! Analytic pieces are generic over [`Scalar`], so design identities can be
//! checked exactly with [`Exact`] rationals; the event simulation runs in
//! `f64` with integer femtosecond timestamps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod coincidence;
pub mod config;
pub mod design;
pub mod error;
pub mod experiment;
pub mod grating;
pub mod interferometer;
pub mod io;
pub mod num;
pub mod physics;
pub mod rng;
pub mod selftest;
pub mod source;
pub mod units;

pub use analysis::{
    arm_classification_error, fringe_visibility, switching_contrast, Channel, Estimate, SweepResult, SweepRow,
    VisibilityEstimate,
};
pub use coincidence::{match_streams, CoincidenceWindow, DetectionEvent, Detector, Histogram, Matching};
pub use config::{Experiment, RunConfig};
pub use design::{design, DesignInputs, DesignReport};
pub use error::{Error, Result};
pub use experiment::{run_experiment_a, run_experiment_b, run_phase, Stage, SweepOutcome, SyncReport, SyncStats};
pub use grating::{GratingGeometry, PhotonLocalityModel};
pub use interferometer::{Arm, DetectorSpec, EventModel, Interferometer, InterferometerGeometry, PhaseSetting};
pub use num::{ratio, Exact, Real, Scalar};
pub use physics::{CoherenceSpec, SpectralShape, SpectrumSpec};
pub use source::{generate_pairs, Photon, PhotonPair, SourceConfig, SourceStrategy};
pub use units::Femtos;

pub type Grating = GratingGeometry<f64>;
pub type ExactGrating = GratingGeometry<Exact>;
pub type Spectrum = SpectrumSpec<f64>;
pub type ExactSpectrum = SpectrumSpec<Exact>;
pub type Coherence = CoherenceSpec<f64>;
pub type ExactCoherence = CoherenceSpec<Exact>;
pub type Geometry = InterferometerGeometry<f64>;
pub type ExactGeometry = InterferometerGeometry<Exact>;
pub type Setting = PhaseSetting<f64>;
pub type Design = DesignReport<f64>;
pub type ExactDesign = DesignReport<Exact>;
