//! Library surface of the command line front end: file formats and SVG
//! rendering. The binary in `main.rs` is a thin dispatcher over these and
//! the `timeplan` crate.

pub mod formats;
pub mod render;
