//! Link-level simulator for codebook-based user tracking on an IRS-assisted
//! mmWave downlink.
//!
//! A base station reaches a mobile user only through an intelligent
//! reflecting surface (IRS) whose per-cell phase shifts are drawn from a
//! quadratic codebook. The library provides:
//!
//! * [`geometry`] — direction parameterization, direction cosines, and UPA
//!   steering vectors,
//! * [`codebook`] — quadratic phase-shift codewords, factorized IRS response
//!   evaluation, main-lobe search with a persistent cache,
//! * [`channel`] — geometry-based Rician channel drops and received-signal
//!   synthesis,
//! * [`mobility`] — the three-stage enter/orbit/leave movement model,
//! * [`tracking`] — GLRT direction estimation, polynomial trajectory
//!   extrapolation, and codeword selection,
//! * [`baselines`] — full codebook search and full-CSI per-cell phase
//!   optimization references,
//! * [`harness`] — frame schedules, overhead and effective-rate metrics,
//!   Monte-Carlo orchestration, configuration, and CSV output.
//!
//! All numeric kernels are generic over the scalar type through [`Real`]
//! (`f32` or `f64`); concrete `*F64`/`*F32` aliases are exported at the
//! crate root. The simulation harness itself runs at `f64`.

pub mod baselines;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mobility;
pub mod num;
pub mod tracking;

pub use error::Error;
pub use num::Real;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

pub type ComplexF64 = num_complex::Complex<f64>;
pub type ComplexF32 = num_complex::Complex<f32>;

pub type Vec3F64 = geometry::Vec3<f64>;
pub type Vec3F32 = geometry::Vec3<f32>;
pub type DirectionF64 = geometry::Direction<f64>;
pub type DirectionF32 = geometry::Direction<f32>;
pub type PlaneFrameF64 = geometry::PlaneFrame<f64>;
pub type PlaneFrameF32 = geometry::PlaneFrame<f32>;

pub type CodebookConfigF64 = codebook::CodebookConfig<f64>;
pub type CodebookConfigF32 = codebook::CodebookConfig<f32>;
pub type MainLobeTableF64 = codebook::MainLobeTable<f64>;

pub type ChannelConfigF64 = channel::ChannelConfig<f64>;
pub type ChannelDropF64 = channel::ChannelDrop<f64>;
pub type ScenarioF64 = channel::Scenario<f64>;

pub type MobilityConfigF64 = mobility::MobilityConfig<f64>;
pub type TrajectoryF64 = mobility::Trajectory<f64>;

pub type TrajectoryPolynomialF64 = tracking::TrajectoryPolynomial<f64>;
pub type EstimateHistoryF64 = tracking::EstimateHistory<f64>;
pub type HypothesisGridF64 = tracking::HypothesisGrid<f64>;

pub type PerCellCascadeF64 = baselines::PerCellCascade<f64>;
