//! Random walk in random scenery and Brownian motion in Brownian scenery:
//! samplers, local times, Strassen-class profiles, the quenched limit
//! variable `int f dL_1`, and the experiments built on them.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod local_time;
pub mod rng;
pub mod rwrs;
pub mod sampler;
pub mod stats;
pub mod strassen;
pub mod theta;

pub use error::{Error, Result};
pub use local_time::{bm_local_time, walk_local_time, LocalTimeGrid};
pub use sampler::{simulate_bm, simulate_srw, BrownianPath, QuenchedField, SceneryLaw, WalkPath};
pub use stats::EmpiricalDistribution;
pub use strassen::{DictionaryTarget, StrassenFunction};
pub use theta::Discretization;
