//! Command line and HTTP front ends for the moralplan engine.

pub mod commands;
pub mod server;
