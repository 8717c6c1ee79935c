//! Unrolled ADMM over the half-quadratic splitting `x = w`.
//!
//! For `j = 0, …, T−1`:
//!
//! ```text
//! w ← prox_{R/λ}(x + m/λ)                                   (denoise)
//! x ← argmin ½Σ_k‖A^k x − y^k‖² + λ/2‖x − w + m/λ‖²        (data consistency, gradient descent)
//! m ← m + λ(x − w)                                          (multiplier update)
//! ```
//!
//! starting from the zero-filled image `x = w = Aᴴy` and `m = 0`. Static
//! data is the single-frame case; dynamic data runs the same loop on the
//! whole frame stack, with `A` acting on each frame.

mod admm;
pub mod denoise;

pub use admm::{
    admm_reconstruct, admm_reconstruct_traced, data_consistency_gradient, data_consistency_objective,
    data_consistency_step, multiplier_update, zero_filled_init, AdmmState,
};
pub use denoise::{denoise_step, DenoiserKind, DenoiserSpec};

use crate::error::{invalid, Result};

/// Solver hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    /// Number of unrolled ADMM rounds `T`.
    pub steps: usize,
    /// Gradient-descent iterations inside each data-consistency update.
    pub inner_iters: usize,
    /// Penalty weight `λ`.
    pub lambda: f64,
    /// Fixed gradient step; `None` means `1 / (1 + λ)`.
    pub step_size: Option<f64>,
    pub denoiser: DenoiserSpec,
}

impl AdmmConfig {
    /// 2D defaults: `T = 16`, 14 inner iterations, `λ = 1`.
    pub fn static_default() -> Self {
        Self { steps: 16, inner_iters: 14, lambda: 1.0, step_size: None, denoiser: DenoiserSpec::identity() }
    }

    /// Dynamic defaults: `T = 10`, 8 inner iterations, `λ = 1`.
    pub fn dynamic_default() -> Self {
        Self { steps: 10, inner_iters: 8, ..Self::static_default() }
    }

    pub fn with_denoiser(mut self, denoiser: DenoiserSpec) -> Self {
        self.denoiser = denoiser;
        self
    }

    pub fn step(&self) -> f64 {
        self.step_size.unwrap_or(1.0 / (1.0 + self.lambda))
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner_iters == 0 {
            invalid!("inner_iters must be ≥ 1");
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            invalid!("lambda must be positive, got {}", self.lambda);
        }
        let step = self.step();
        let max = 2.0 / (1.0 + self.lambda);
        if !(step > 0.0 && step < max) {
            invalid!("step size {step} outside (0, {max})");
        }
        self.denoiser.validate()
    }
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self::static_default()
    }
}
