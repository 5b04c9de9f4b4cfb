//! Compiles weighted MaxSAT into weighted Max2XOR through (α,β)-gadgets,
//! derives cost lower bounds with Max2XOR resolution and checks the
//! resulting proofs independently.

pub mod cli;
pub mod gadgets;
pub mod model;
pub mod oracle;
pub mod proofs;
pub mod rational;
pub mod textio;
