//! Security assessment and key-aware scheduling for QKD trusted-relay
//! networks.

pub mod bits;
pub mod cli;
pub mod config;
pub mod fixtures;
pub mod graph;
pub mod harness;
pub mod scheduler;
pub mod security;
