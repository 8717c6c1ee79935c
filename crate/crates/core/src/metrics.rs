//! Image-quality metrics and the dual-domain training loss.
//!
//! SSIM uses dense stride-1 windows (7×7, or 7×7×7 for volumes) with uniform
//! weights and population statistics, and constants `C1 = (0.01·d)²`,
//! `C2 = (0.03·d)²` for a caller-supplied data range `d`.
//!
//! HFEN1 filters both images with a 15×15 Laplacian-of-Gaussian (σ = 2.5)
//! built like MATLAB's `fspecial('log')` and made exactly zero-sum, using
//! half-sample symmetric padding at the borders.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::image::{KSpaceData, Plane, RealImage};
use crate::math;

pub const SSIM_WINDOW: usize = 7;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const LOG_KERNEL_SIZE: usize = 15;
pub const LOG_SIGMA: f64 = 2.5;

fn ssim_constants(data_range: f64) -> Result<(f64, f64)> {
    if !(data_range.is_finite() && data_range > 0.0) {
        invalid!("data range must be positive, got {data_range}");
    }
    Ok((math::sq(SSIM_K1 * data_range), math::sq(SSIM_K2 * data_range)))
}

#[inline]
fn ssim_ratio(mu_u: f64, mu_v: f64, var_u: f64, var_v: f64, cov: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mu_u * mu_v + c1) * (2.0 * cov + c2)) / ((mu_u * mu_u + mu_v * mu_v + c1) * (var_u + var_v + c2))
}

/// Mean SSIM over all dense 7×7 windows of two planes.
pub fn ssim(u: Plane<'_>, v: Plane<'_>, data_range: f64) -> Result<f64> {
    if u.height != v.height || u.width != v.width {
        invalid!("ssim inputs differ: {}x{} vs {}x{}", u.height, u.width, v.height, v.width);
    }
    if u.height < SSIM_WINDOW || u.width < SSIM_WINDOW {
        invalid!("ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}", u.height, u.width);
    }
    let (c1, c2) = ssim_constants(data_range)?;
    let n = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let (rows, cols) = (u.height - SSIM_WINDOW + 1, u.width - SSIM_WINDOW + 1);
    let mut total = 0.0;
    for r0 in 0..rows {
        for c0 in 0..cols {
            let (mut su, mut sv, mut suu, mut svv, mut suv) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in r0..r0 + SSIM_WINDOW {
                for c in c0..c0 + SSIM_WINDOW {
                    let (a, b) = (u.at(r, c), v.at(r, c));
                    su += a;
                    sv += b;
                    suu += a * a;
                    svv += b * b;
                    suv += a * b;
                }
            }
            let (mu, mv) = (su / n, sv / n);
            total += ssim_ratio(mu, mv, suu / n - mu * mu, svv / n - mv * mv, suv / n - mu * mv, c1, c2);
        }
    }
    Ok(total / (rows * cols) as f64)
}

/// Mean SSIM over all dense 7×7×7 windows of two `(frame, row, col)` volumes.
pub fn ssim3d(u: &RealImage, v: &RealImage, data_range: f64) -> Result<f64> {
    if u.dims() != v.dims() {
        invalid!("ssim3d inputs differ: {:?} vs {:?}", u.dims(), v.dims());
    }
    let (nf, h, w) = u.dims();
    if nf < SSIM_WINDOW || h < SSIM_WINDOW || w < SSIM_WINDOW {
        invalid!("ssim3d needs every axis ≥ {SSIM_WINDOW}, got {nf}x{h}x{w}");
    }
    let (c1, c2) = ssim_constants(data_range)?;
    let (ud, vd) = (u.data(), v.data());
    let n = (SSIM_WINDOW * SSIM_WINDOW * SSIM_WINDOW) as f64;
    let (frames, rows, cols) = (nf - SSIM_WINDOW + 1, h - SSIM_WINDOW + 1, w - SSIM_WINDOW + 1);
    let mut total = 0.0;
    for t0 in 0..frames {
        for r0 in 0..rows {
            for c0 in 0..cols {
                let (mut su, mut sv, mut suu, mut svv, mut suv) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for t in t0..t0 + SSIM_WINDOW {
                    for r in r0..r0 + SSIM_WINDOW {
                        let base = (t * h + r) * w;
                        for c in c0..c0 + SSIM_WINDOW {
                            let (a, b) = (ud[base + c], vd[base + c]);
                            su += a;
                            sv += b;
                            suu += a * a;
                            svv += b * b;
                            suv += a * b;
                        }
                    }
                }
                let (mu, mv) = (su / n, sv / n);
                total += ssim_ratio(mu, mv, suu / n - mu * mu, svv / n - mv * mv, suv / n - mu * mv, c1, c2);
            }
        }
    }
    Ok(total / (frames * rows * cols) as f64)
}

/// 15×15 LoG kernel with σ = 2.5, row-major, summing to zero.
pub fn log_kernel() -> Vec<f64> {
    log_kernel_with(LOG_KERNEL_SIZE, LOG_SIGMA)
}

pub fn log_kernel_with(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size as f64 - 1.0) / 2.0;
    let s2 = sigma * sigma;
    let coords: Vec<(f64, f64)> =
        (0..size * size).map(|i| ((i % size) as f64 - half, (i / size) as f64 - half)).collect();
    let gauss: Vec<f64> = coords.iter().map(|(x, y)| math::exp(-(x * x + y * y) / (2.0 * s2))).collect();
    let max = gauss.iter().copied().fold(0.0, f64::max);
    let gauss: Vec<f64> = gauss.into_iter().map(|g| if g < f64::EPSILON * max { 0.0 } else { g }).collect();
    let sum: f64 = gauss.iter().sum();
    let h1: Vec<f64> =
        gauss.iter().zip(&coords).map(|(g, (x, y))| g / sum * (x * x + y * y - 2.0 * s2) / (s2 * s2)).collect();
    let mean = h1.iter().sum::<f64>() / (size * size) as f64;
    h1.into_iter().map(|v| v - mean).collect()
}

/// Half-sample symmetric index reflection (`…, 1, 0 | 0, 1, …, n−1 | n−1, …`).
#[inline]
fn reflect(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Correlate a plane with a square odd-sized kernel under symmetric padding.
pub fn filter_symmetric(img: Plane<'_>, kernel: &[f64], size: usize) -> Vec<f64> {
    let half = (size / 2) as i64;
    let (h, w) = (img.height, img.width);
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for kr in 0..size {
                let rr = reflect(r as i64 + kr as i64 - half, h);
                for kc in 0..size {
                    let cc = reflect(c as i64 + kc as i64 - half, w);
                    acc += kernel[kr * size + kc] * img.at(rr, cc);
                }
            }
            out[r * w + c] = acc;
        }
    }
    out
}

/// `‖G(u) − G(v)‖₁ / ‖G(u)‖₁` with `G` the LoG filter.
pub fn hfen1(u: Plane<'_>, v: Plane<'_>) -> Result<f64> {
    if u.height != v.height || u.width != v.width {
        invalid!("hfen1 inputs differ: {}x{} vs {}x{}", u.height, u.width, v.height, v.width);
    }
    let kernel = log_kernel();
    let gu = filter_symmetric(u, &kernel, LOG_KERNEL_SIZE);
    let gv = filter_symmetric(v, &kernel, LOG_KERNEL_SIZE);
    let denom: f64 = gu.iter().map(|x| x.abs()).sum();
    // A flat reference filters to rounding noise only.
    let k1: f64 = kernel.iter().map(|k| k.abs()).sum();
    let noise = 64.0 * f64::EPSILON * k1 * u.data.iter().map(|x| x.abs()).sum::<f64>();
    if denom <= noise {
        return Err(Error::UndefinedMetric("hfen1"));
    }
    Ok(gu.iter().zip(&gv).map(|(a, b)| (a - b).abs()).sum::<f64>() / denom)
}

/// Scalar element for the normalized error metrics (real or complex).
pub trait Sample: Copy {
    fn modulus(self) -> f64;
    fn distance(self, other: Self) -> f64;
}

impl Sample for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl Sample for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

fn check_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        invalid!("{what} inputs differ in length: {a} vs {b}");
    }
    Ok(())
}

/// `‖u − v‖₁ / ‖u‖₁`.
pub fn nmae<T: Sample>(u: &[T], v: &[T]) -> Result<f64> {
    check_len(u.len(), v.len(), "nmae")?;
    let denom: f64 = u.iter().map(|x| x.modulus()).sum();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric("nmae"));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a.distance(*b)).sum::<f64>() / denom)
}

/// `‖u − v‖₂² / ‖u‖₂²`.
pub fn nmse<T: Sample>(u: &[T], v: &[T]) -> Result<f64> {
    check_len(u.len(), v.len(), "nmse")?;
    let denom: f64 = u.iter().map(|x| math::sq(x.modulus())).sum();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric("nmse"));
    }
    Ok(u.iter().zip(v).map(|(a, b)| math::sq(a.distance(*b))).sum::<f64>() / denom)
}

/// `10 log₁₀(d² / MSE)`; identical inputs give `f64::INFINITY`.
pub fn psnr(u: &[f64], v: &[f64], data_range: f64) -> Result<f64> {
    check_len(u.len(), v.len(), "psnr")?;
    if u.is_empty() {
        invalid!("psnr of empty input");
    }
    if !(data_range.is_finite() && data_range > 0.0) {
        invalid!("data range must be positive, got {data_range}");
    }
    let mse = u.iter().zip(v).map(|(a, b)| math::sq(a - b)).sum::<f64>() / u.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * math::log10(data_range * data_range / mse))
}

/// Weights of the loss components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub ssim: f64,
    pub ssim3d: f64,
    pub l1: f64,
    pub hfen1: f64,
    pub nmae: f64,
}

impl Default for LossWeights {
    /// `λ_SSIM = λ_SSIM3D = λ_1 = λ_HFEN1 = 1`, `λ_NMAE = 3`.
    fn default() -> Self {
        Self { ssim: 1.0, ssim3d: 1.0, l1: 1.0, hfen1: 1.0, nmae: 3.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in
            [("ssim", self.ssim), ("ssim3d", self.ssim3d), ("l1", self.l1), ("hfen1", self.hfen1), ("nmae", self.nmae)]
        {
            if !(w.is_finite() && w >= 0.0) {
                invalid!("loss weight {name} must be finite and ≥ 0, got {w}");
            }
        }
        Ok(())
    }
}

/// Unweighted loss terms; `None` where the weight is zero or the term does not apply.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    /// `1 − SSIM`, averaged over frames.
    pub ssim: Option<f64>,
    /// `1 − SSIM3D`, dynamic data only.
    pub ssim3d: Option<f64>,
    pub l1: Option<f64>,
    /// HFEN1 averaged over frames.
    pub hfen1: Option<f64>,
    pub nmae: Option<f64>,
}

impl LossTerms {
    pub fn weighted_sum(&self, w: &LossWeights) -> f64 {
        w.ssim * self.ssim.unwrap_or(0.0)
            + w.ssim3d * self.ssim3d.unwrap_or(0.0)
            + w.l1 * self.l1.unwrap_or(0.0)
            + w.hfen1 * self.hfen1.unwrap_or(0.0)
            + w.nmae * self.nmae.unwrap_or(0.0)
    }
}

/// Image-domain terms between the reference RSS image and the predicted magnitude.
pub fn image_loss_terms(x_true: &RealImage, x_pred: &RealImage, weights: &LossWeights) -> Result<LossTerms> {
    weights.validate()?;
    if x_true.dims() != x_pred.dims() {
        invalid!("loss images differ: {:?} vs {:?}", x_true.dims(), x_pred.dims());
    }
    let nf = x_true.n_frames();
    let mut terms = LossTerms::default();
    if weights.ssim > 0.0 || (weights.ssim3d > 0.0 && nf > 1) {
        let d = x_true.max();
        if weights.ssim > 0.0 {
            let mut acc = 0.0;
            for t in 0..nf {
                acc += 1.0 - ssim(x_true.frame(t), x_pred.frame(t), d)?;
            }
            terms.ssim = Some(acc / nf as f64);
        }
        if weights.ssim3d > 0.0 && nf > 1 {
            terms.ssim3d = Some(1.0 - ssim3d(x_true, x_pred, d)?);
        }
    }
    if weights.l1 > 0.0 {
        terms.l1 = Some(x_true.data().iter().zip(x_pred.data()).map(|(a, b)| (a - b).abs()).sum());
    }
    if weights.hfen1 > 0.0 {
        let mut acc = 0.0;
        for t in 0..nf {
            acc += hfen1(x_true.frame(t), x_pred.frame(t))?;
        }
        terms.hfen1 = Some(acc / nf as f64);
    }
    Ok(terms)
}

/// All terms of the dual-domain loss.
pub fn loss_terms(
    x_true: &RealImage,
    x_pred: &RealImage,
    y_true: &KSpaceData,
    y_pred: &KSpaceData,
    weights: &LossWeights,
) -> Result<LossTerms> {
    let mut terms = image_loss_terms(x_true, x_pred, weights)?;
    if y_true.dims() != y_pred.dims() {
        invalid!("loss k-space differs: {:?} vs {:?}", y_true.dims(), y_pred.dims());
    }
    if weights.nmae > 0.0 {
        terms.nmae = Some(nmae(y_true.data(), y_pred.data())?);
    }
    Ok(terms)
}

/// `L = λ_SSIM(1 − SSIM) + λ_1‖x − x̂‖₁ + λ_HFEN HFEN1 [+ λ_SSIM3D(1 − SSIM3D)] + λ_NMAE NMAE(y, ŷ)`.
pub fn dual_domain_loss(
    x_true: &RealImage,
    x_pred: &RealImage,
    y_true: &KSpaceData,
    y_pred: &KSpaceData,
    weights: &LossWeights,
) -> Result<f64> {
    Ok(loss_terms(x_true, x_pred, y_true, y_pred, weights)?.weighted_sum(weights))
}
