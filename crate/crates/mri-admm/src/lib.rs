//! File formats and the `mri-admm` command-line tool.
//!
//! The numerical work lives in [`mri_admm_core`]; this crate adds the CKS
//! binary container, PGM previews, `key = value` config merging and the
//! `mask` / `simulate` / `reconstruct` / `evaluate` subcommands.

pub mod cks;
pub mod cli;
pub mod config;
pub mod pgm;

pub use mri_admm_core;
