//! Two-boson realizations of the cubic Higgs algebra on truncated Fock spaces.

pub mod chain;
pub mod cli;
pub mod domain;
pub mod error;
pub mod fock;
pub mod higgs;
pub mod kepler;
pub mod phase;
pub mod realize_one;
pub mod realize_two;
pub mod report;
pub mod special;
pub mod suite;
pub mod unitarize;

pub use error::{Error, Result};
