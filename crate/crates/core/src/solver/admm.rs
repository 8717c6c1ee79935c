use alloc::vec::Vec;

use num_complex::Complex64;

use super::denoise::denoise_step;
use super::AdmmConfig;
use crate::error::{invalid, Result};
use crate::fourier::ForwardOperator;
use crate::image::{ComplexImage, KSpaceData, SensitivityMaps};
use crate::math;
use crate::sampling::SamplingMask;

/// The `(x, w, m)` iterate triple after `iteration` completed rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: ComplexImage,
    pub w: ComplexImage,
    pub m: ComplexImage,
    pub iteration: usize,
}

impl AdmmState {
    /// `‖x − w‖₂`.
    pub fn consensus_gap(&self) -> f64 {
        math::sqrt(self.x.data().iter().zip(self.w.data()).map(|(a, b)| (a - b).norm_sqr()).sum())
    }

    fn debug_check(&self) {
        debug_assert!(
            self.x.is_finite() && self.w.is_finite() && self.m.is_finite(),
            "non-finite ADMM iterate at round {}",
            self.iteration
        );
    }
}

fn check_same(a: &ComplexImage, b: &ComplexImage, what: &str) -> Result<()> {
    if !a.same_dims(b) {
        invalid!("{what}: dims {:?} vs {:?}", a.dims(), b.dims());
    }
    Ok(())
}

fn check_frames(x: &ComplexImage, y: &KSpaceData) -> Result<()> {
    if x.n_frames() != y.n_frames() {
        invalid!("image has {} frames but k-space has {}", x.n_frames(), y.n_frames());
    }
    Ok(())
}

/// `x⁽⁰⁾ = w⁽⁰⁾ = Σ_k conj(S^k) F⁻¹(U y^k)`.
pub fn zero_filled_init(y: &KSpaceData, mask: &SamplingMask, sens: &SensitivityMaps) -> Result<ComplexImage> {
    ForwardOperator::new(mask.clone(), sens.clone())?.adjoint(y)
}

/// `f(x) = ½ Σ_{t,k} ‖A^k x_t − y^k_t‖² + λ/2 ‖x − w + m/λ‖²`.
pub fn data_consistency_objective(
    x: &ComplexImage,
    w: &ComplexImage,
    m: &ComplexImage,
    y: &KSpaceData,
    op: &ForwardOperator,
    lambda: f64,
) -> Result<f64> {
    check_same(x, w, "x vs w")?;
    check_same(x, m, "x vs m")?;
    check_frames(x, y)?;
    let data = op.data_residual(x, y)?;
    let penalty: f64 =
        x.data().iter().zip(w.data()).zip(m.data()).map(|((xi, wi), mi)| (xi - wi + mi / lambda).norm_sqr()).sum();
    Ok(data + 0.5 * lambda * penalty)
}

/// `∇f(x) = AᴴA x − Aᴴy + λ(x − w + m/λ)`, with `Aᴴy` precomputed.
fn gradient_into(
    x: &ComplexImage,
    w: &ComplexImage,
    m: &ComplexImage,
    aty: &ComplexImage,
    op: &ForwardOperator,
    lambda: f64,
) -> Result<Vec<Complex64>> {
    let ata = op.normal(x)?;
    Ok(ata
        .data()
        .iter()
        .zip(aty.data())
        .zip(x.data().iter().zip(w.data()).zip(m.data()))
        .map(|((n, b), ((xi, wi), mi))| n - b + (xi - wi) * lambda + mi)
        .collect())
}

/// Gradient of [`data_consistency_objective`] at `x`.
pub fn data_consistency_gradient(
    x: &ComplexImage,
    w: &ComplexImage,
    m: &ComplexImage,
    y: &KSpaceData,
    op: &ForwardOperator,
    lambda: f64,
) -> Result<ComplexImage> {
    check_same(x, w, "x vs w")?;
    check_same(x, m, "x vs m")?;
    check_frames(x, y)?;
    let aty = op.adjoint(y)?;
    let g = gradient_into(x, w, m, &aty, op, lambda)?;
    let (nf, h, wd) = x.dims();
    Ok(ComplexImage::from_parts(nf, h, wd, g))
}

/// `cfg.inner_iters` fixed-step gradient-descent iterations on the
/// data-consistency objective, warm-started at `x_in`.
pub fn data_consistency_step(
    x_in: &ComplexImage,
    w: &ComplexImage,
    m: &ComplexImage,
    y: &KSpaceData,
    op: &ForwardOperator,
    cfg: &AdmmConfig,
) -> Result<ComplexImage> {
    cfg.validate()?;
    check_same(x_in, w, "x vs w")?;
    check_same(x_in, m, "x vs m")?;
    check_frames(x_in, y)?;
    let aty = op.adjoint(y)?;
    let step = cfg.step();
    let mut x = x_in.clone();
    for _ in 0..cfg.inner_iters {
        let g = gradient_into(&x, w, m, &aty, op, cfg.lambda)?;
        for (xi, gi) in x.data_mut().iter_mut().zip(&g) {
            *xi -= gi * step;
        }
    }
    Ok(x)
}

/// `m + λ (x − w)`.
pub fn multiplier_update(
    m: &ComplexImage,
    x_new: &ComplexImage,
    w_new: &ComplexImage,
    lambda: f64,
) -> Result<ComplexImage> {
    check_same(m, x_new, "m vs x")?;
    check_same(m, w_new, "m vs w")?;
    let mut out = m.clone();
    for ((mi, xi), wi) in out.data_mut().iter_mut().zip(x_new.data()).zip(w_new.data()) {
        *mi += (xi - wi) * lambda;
    }
    Ok(out)
}

/// Full unrolled reconstruction; returns `x⁽ᵀ⁾`.
pub fn admm_reconstruct(
    y: &KSpaceData,
    mask: &SamplingMask,
    sens: &SensitivityMaps,
    cfg: &AdmmConfig,
) -> Result<ComplexImage> {
    let op = ForwardOperator::new(mask.clone(), sens.clone())?;
    Ok(admm_reconstruct_traced(y, &op, cfg, |_| {})?.x)
}

/// Same as [`admm_reconstruct`] on a prepared operator, calling `observe`
/// with the initial state and after every round.
pub fn admm_reconstruct_traced(
    y: &KSpaceData,
    op: &ForwardOperator,
    cfg: &AdmmConfig,
    mut observe: impl FnMut(&AdmmState),
) -> Result<AdmmState> {
    cfg.validate()?;
    let x0 = op.adjoint(y)?;
    let (nf, h, w) = x0.dims();
    let mut state = AdmmState { w: x0.clone(), m: ComplexImage::zeros(nf, h, w)?, x: x0, iteration: 0 };
    observe(&state);
    let inv_lambda = 1.0 / cfg.lambda;
    for j in 0..cfg.steps {
        let mut v = state.x.clone();
        for (vi, mi) in v.data_mut().iter_mut().zip(state.m.data()) {
            *vi += mi * inv_lambda;
        }
        let w_new = denoise_step(&v, &cfg.denoiser, cfg.lambda)?;
        let x_new = data_consistency_step(&state.x, &w_new, &state.m, y, op, cfg)?;
        let m_new = multiplier_update(&state.m, &x_new, &w_new, cfg.lambda)?;
        state = AdmmState { x: x_new, w: w_new, m: m_new, iteration: j + 1 };
        state.debug_check();
        observe(&state);
    }
    Ok(state)
}
