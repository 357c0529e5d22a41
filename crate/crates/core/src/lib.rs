//! Dynamic rays, symbolic dynamics and dimension experiments for the map
//! family `E(z) = a e^z + b e^{-z}`.
//!
//! The crate traces dynamic rays indexed by external addresses, computes
//! their landing points, builds the itinerary partition cut along rays
//! landing at the critical values, classifies points as on-ray / landing
//! point / undecided, and runs desk-scale box-counting and escape-statistics
//! experiments.

pub mod address;
pub mod classify;
pub mod dimension;
pub mod map;
pub mod palette;
pub mod partition;
pub mod ray;
pub mod render;

pub use num_complex::Complex64;
