//! Library side of the command-line front end: input parsing, the
//! deterministic instance corpus, and the command runner. The binary
//! is a thin wrapper so that integration tests can drive the same
//! code paths in-process.

pub mod corpus;
pub mod input;
pub mod run;
