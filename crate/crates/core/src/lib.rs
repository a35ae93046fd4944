//! Response-time-aware phase configuration design for liquid-crystal
//! reconfigurable intelligent surfaces.
//!
//! Liquid-crystal cells settle slowly, and how slowly depends on the size and
//! sign of the phase change. This crate picks codebook phases for each beam
//! so that the surface switches between beams as fast as possible while every
//! terminal still gets a required SNR.
//!
//! The numeric modules are generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`, which is what the
//! experiment harness and file formats use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codebook;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pattern;
pub mod response_model;
pub mod scalar;
pub mod solver;

pub use codebook::{PhaseCodebook, PhaseProfile};
pub use error::{Error, Result};
pub use scalar::Real;

pub type ResponseTimeModel = response_model::ResponseTimeModel<f64>;
pub type ResponseSamples = response_model::ResponseSamples<f64>;
pub type Breakpoint = response_model::Breakpoint<f64>;
pub type ArrayGeometry = channel::ArrayGeometry<f64>;
pub type DirectionAngles = channel::DirectionAngles<f64>;
pub type RadioParams = channel::RadioParams<f64>;
pub type LinkScenario = channel::LinkScenario<f64>;
pub type CouplingSet = channel::CouplingSet<f64>;
pub type SolveResult = solver::SolveResult<f64>;
pub type JointSolveResult = solver::JointSolveResult<f64>;
pub type BeamPattern = pattern::BeamPattern<f64>;
pub type PatternSimilarity = pattern::PatternSimilarity<f64>;
