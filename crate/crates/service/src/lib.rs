//! HTTP service, reference agent runner and the `gridbench` command line.

pub mod agent;
pub mod api;
pub mod cli;
pub mod wire;
