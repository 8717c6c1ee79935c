//! Proximal denoisers standing in for the `w`-update.
//!
//! Each computes `prox_{R/λ}(v) = argmin_w R(w) + λ/2 ‖w − v‖²` for a classical
//! prior `R` with weight `α`. Tikhonov and TV act frame by frame on the real
//! and imaginary channels independently; the L1 prior is complex-aware and
//! shrinks the modulus while keeping the phase.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft::{Direction, Fft2d};
use crate::image::ComplexImage;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DenoiserKind {
    Identity,
    /// `R(w) = α ‖w‖₁` (complex modulus).
    L1SoftThreshold,
    /// `R(w) = α/2 ‖∇w‖²` with periodic forward differences.
    TikhonovSmooth,
    /// `R(w) = α TV(w)`, isotropic, via Chambolle's dual projection.
    TvChambolle,
}

impl DenoiserKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "identity" | "none" => DenoiserKind::Identity,
            "l1" | "l1-soft-threshold" => DenoiserKind::L1SoftThreshold,
            "tikhonov" | "tikhonov-smooth" => DenoiserKind::TikhonovSmooth,
            "tv" | "tv-chambolle" => DenoiserKind::TvChambolle,
            other => invalid!("unknown denoiser kind '{other}'"),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            DenoiserKind::Identity => "identity",
            DenoiserKind::L1SoftThreshold => "l1",
            DenoiserKind::TikhonovSmooth => "tikhonov",
            DenoiserKind::TvChambolle => "tv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiserSpec {
    pub kind: DenoiserKind,
    /// Prior weight `α ≥ 0`.
    pub strength: f64,
    /// Dual-ascent iterations (TV only).
    pub iterations: usize,
}

/// Default Chambolle iteration count.
pub const DEFAULT_TV_ITERATIONS: usize = 50;
/// Dual step of the Chambolle projection; convergent for `τ ≤ 1/8`.
pub const TV_DUAL_STEP: f64 = 0.125;

impl DenoiserSpec {
    pub fn identity() -> Self {
        Self { kind: DenoiserKind::Identity, strength: 0.0, iterations: 0 }
    }

    pub fn l1(strength: f64) -> Self {
        Self { kind: DenoiserKind::L1SoftThreshold, strength, iterations: 0 }
    }

    pub fn tikhonov(strength: f64) -> Self {
        Self { kind: DenoiserKind::TikhonovSmooth, strength, iterations: 0 }
    }

    pub fn tv(strength: f64, iterations: usize) -> Self {
        Self { kind: DenoiserKind::TvChambolle, strength, iterations }
    }

    /// Build from a kind; identity ignores `strength` and forces it to zero.
    pub fn from_kind(kind: DenoiserKind, strength: f64, iterations: usize) -> Self {
        match kind {
            DenoiserKind::Identity => Self::identity(),
            _ => Self { kind, strength, iterations },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            invalid!("denoiser strength must be ≥ 0, got {}", self.strength);
        }
        if self.kind == DenoiserKind::Identity && self.strength != 0.0 {
            invalid!("identity denoiser takes no strength");
        }
        Ok(())
    }
}

impl Default for DenoiserSpec {
    fn default() -> Self {
        Self::identity()
    }
}

/// `prox_{R/λ}(v)`.
pub fn denoise_step(v: &ComplexImage, spec: &DenoiserSpec, lambda: f64) -> Result<ComplexImage> {
    spec.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        invalid!("lambda must be positive, got {lambda}");
    }
    let mut out = v.clone();
    if spec.strength == 0.0 {
        return Ok(out);
    }
    let (nf, h, w) = v.dims();
    match spec.kind {
        DenoiserKind::Identity => {}
        DenoiserKind::L1SoftThreshold => soft_threshold(out.data_mut(), spec.strength / lambda),
        DenoiserKind::TikhonovSmooth => {
            let solver = TikhonovSolver::new(h, w, spec.strength, lambda);
            for t in 0..nf {
                solver.solve(out.frame_mut(t));
            }
        }
        DenoiserKind::TvChambolle => {
            let theta = spec.strength / lambda;
            for t in 0..nf {
                tv_prox_complex(out.frame_mut(t), h, w, theta, spec.iterations);
            }
        }
    }
    Ok(out)
}

/// Complex soft threshold: `z ↦ max(|z| − τ, 0) · z/|z|`.
pub fn soft_threshold(data: &mut [Complex64], tau: f64) {
    for z in data.iter_mut() {
        let mag = z.norm();
        *z = if mag <= tau { Complex64::new(0.0, 0.0) } else { *z * ((mag - tau) / mag) };
    }
}

/// Solves `(α ∇ᵀ∇ + λ I) w = λ v` on a periodic grid by diagonalizing the
/// Laplacian with the DFT.
struct TikhonovSolver {
    plan: Fft2d,
    /// `λ / (λ + α μ_{uv})` with `μ` the Laplacian eigenvalues, divided by `N`
    /// to undo the unnormalized transform pair.
    gain: Vec<f64>,
}

impl TikhonovSolver {
    fn new(h: usize, w: usize, alpha: f64, lambda: f64) -> Self {
        let n = (h * w) as f64;
        let mut gain = Vec::with_capacity(h * w);
        for u in 0..h {
            let su = math::sin(PI * u as f64 / h as f64);
            for v in 0..w {
                let sv = math::sin(PI * v as f64 / w as f64);
                let mu = 4.0 * (su * su + sv * sv);
                gain.push(lambda / (lambda + alpha * mu) / n);
            }
        }
        Self { plan: Fft2d::new(h, w), gain }
    }

    fn solve(&self, plane: &mut [Complex64]) {
        self.plan.process(plane, Direction::Forward);
        for (z, g) in plane.iter_mut().zip(&self.gain) {
            *z *= *g;
        }
        self.plan.process(plane, Direction::Inverse);
    }
}

fn tv_prox_complex(plane: &mut [Complex64], h: usize, w: usize, theta: f64, iterations: usize) {
    let re: Vec<f64> = plane.iter().map(|z| z.re).collect();
    let im: Vec<f64> = plane.iter().map(|z| z.im).collect();
    let re = tv_prox(&re, h, w, theta, iterations);
    let im = tv_prox(&im, h, w, theta, iterations);
    for ((z, a), b) in plane.iter_mut().zip(re).zip(im) {
        *z = Complex64::new(a, b);
    }
}

/// Forward differences with a zero last row/column (Neumann boundary).
fn gradient(u: &[f64], h: usize, w: usize, gx: &mut [f64], gy: &mut [f64]) {
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            gx[i] = if c + 1 < w { u[i + 1] - u[i] } else { 0.0 };
            gy[i] = if r + 1 < h { u[i + w] - u[i] } else { 0.0 };
        }
    }
}

/// Discrete divergence, the negative adjoint of [`gradient`].
fn divergence(px: &[f64], py: &[f64], h: usize, w: usize, out: &mut [f64]) {
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let dx = match c {
                _ if w == 1 => 0.0,
                0 => px[i],
                _ if c + 1 == w => -px[i - 1],
                _ => px[i] - px[i - 1],
            };
            let dy = match r {
                _ if h == 1 => 0.0,
                0 => py[i],
                _ if r + 1 == h => -py[i - w],
                _ => py[i] - py[i - w],
            };
            out[i] = dx + dy;
        }
    }
}

/// `argmin_u θ TV(u) + ½ ‖u − g‖²` by Chambolle's fixed-point iteration on
/// the dual field `p`, `u = g − θ div p`.
pub fn tv_prox(g: &[f64], h: usize, w: usize, theta: f64, iterations: usize) -> Vec<f64> {
    let n = h * w;
    if theta <= 0.0 {
        return g.to_vec();
    }
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut div = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut arg = vec![0.0; n];
    for _ in 0..iterations {
        divergence(&px, &py, h, w, &mut div);
        for i in 0..n {
            arg[i] = div[i] - g[i] / theta;
        }
        gradient(&arg, h, w, &mut gx, &mut gy);
        for i in 0..n {
            let norm = math::hypot(gx[i], gy[i]);
            let denom = 1.0 + TV_DUAL_STEP * norm;
            px[i] = (px[i] + TV_DUAL_STEP * gx[i]) / denom;
            py[i] = (py[i] + TV_DUAL_STEP * gy[i]) / denom;
        }
    }
    divergence(&px, &py, h, w, &mut div);
    (0..n).map(|i| g[i] - theta * div[i]).collect()
}

/// Isotropic total variation with the same discretization as [`tv_prox`].
pub fn total_variation(u: &[f64], h: usize, w: usize) -> f64 {
    let mut gx = vec![0.0; h * w];
    let mut gy = vec![0.0; h * w];
    gradient(u, h, w, &mut gx, &mut gy);
    gx.iter().zip(&gy).map(|(a, b)| math::hypot(*a, *b)).sum()
}
