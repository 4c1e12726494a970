//! Stream runtime verification for cyber-physical traces.

pub mod attack;
pub mod builtin;
pub mod engine;
pub mod lang;
pub mod sim;
pub mod stream;
