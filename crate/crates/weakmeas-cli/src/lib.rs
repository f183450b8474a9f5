//! Library surface of the command-line harness: config schema, pipeline, and
//! report types. The binary is a thin argument-parsing shell over [`pipeline`];
//! integration tests drive the same entry points in process.

pub mod config;
pub mod pipeline;
pub mod report;
