//! Command-line front end: problem files, the synthesis pipeline and batch runs.

pub mod bench;
pub mod cli;
pub mod pipeline;
pub mod problem;
