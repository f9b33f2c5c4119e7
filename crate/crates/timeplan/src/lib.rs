//! Timeline-based planning over dense time.
//!
//! The crate models planning domains as collections of state variables
//! whose behaviors are timelines: sequences of valued tokens with rational
//! durations. Synchronization rules constrain how tokens across timelines
//! relate in time, and [`validator`] decides whether a candidate plan
//! satisfies them. [`reduction`] compiles two-counter machines ([`minsky`])
//! into domains whose future-semantics plans are exactly the halting
//! computations, and [`solver`] searches for plans of bounded size via
//! difference-constraint feasibility.

pub mod interval;
pub mod minsky;
pub mod model;
pub mod rational;
pub mod reduction;
pub mod solver;
pub mod testing;
pub mod validator;

pub use interval::Interval;
pub use rational::Rational;
