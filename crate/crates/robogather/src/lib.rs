//! Simulator and verification harness for gathering of oblivious, anonymous,
//! disoriented mobile robots under atomic look-compute-move rounds.
//!
//! Modules are layered bottom-up: [`geometry`] → [`model`] → [`algorithms`],
//! [`schedulers`], [`faults`] → [`harness`].

pub mod algorithms;
pub mod faults;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod rng;
pub mod schedulers;

pub use geometry::{Point2, EPS_SNAP};
pub use model::{Configuration, RobotId};
