//! Orbit counting, Cartan coordinates, harmonic analysis and line-model
//! representation theory for Kleinian groups acting on hyperbolic 3-space,
//! with the Apollonian group as the worked example.

pub mod error;
pub mod harmonics;
pub mod lie;
pub mod line;
pub mod numeric;
pub mod orbit;
pub mod ps;
