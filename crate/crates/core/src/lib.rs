//! Multi-coil MRI reconstruction by unrolled half-quadratic-splitting ADMM.
//!
//! The crate is `no_std` and needs only `alloc`. It carries:
//!
//! - the shared domain types ([`ComplexImage`], [`KSpaceData`], [`SamplingMask`],
//!   [`SensitivityMaps`]) and root-sum-of-squares coil combination,
//! - centered orthonormal 2D FFTs and the SENSE-type forward operator `A^k = U F S^k`
//!   with its exact adjoint,
//! - Cartesian undersampling generators (rectilinear, Gaussian 2D, pseudo-radial,
//!   pseudo-spiral),
//! - ACS-based coil sensitivity estimation,
//! - the ADMM solver with pluggable proximal denoisers,
//! - SSIM / SSIM3D / HFEN1 / NMAE / NMSE / PSNR and the dual-domain loss,
//! - a Shepp-Logan phantom pipeline with simulated coils and k-space cropping.
//!
//! File formats and the command-line tool live in the `mri-admm` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod crop;
pub mod error;
pub mod fft;
pub mod fourier;
pub mod image;
mod math;
pub mod metrics;
pub mod phantom;
pub mod rng;
pub mod sampling;
pub mod sensitivity;
pub mod solver;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use fourier::{fft2c, ifft2c, CenteredFft2, ForwardOperator};
pub use image::{rss, ComplexImage, KSpaceData, Plane, RealImage, SensitivityMaps};
pub use sampling::{AcsRegion, MaskScheme, SamplingMask};
pub use solver::{AdmmConfig, AdmmState, DenoiserKind, DenoiserSpec};
