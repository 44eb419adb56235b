//! Entanglement-free path planning for teams of tethered robots.
//!
//! Robot crossings are recorded as braids on two projection axes. Cables stay
//! untangled as long as no robot pair repeats a same-sign crossing and no
//! triplet forms one of four short entangling words; the planner searches a
//! permutation grid while rejecting any move that would create one.

pub mod braid;
pub mod geometry;
pub mod planner;
pub mod workspace;
pub mod harness;
pub mod cli;
