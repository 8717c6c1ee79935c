//! Coil sensitivity estimation from the autocalibration (ACS) region.
//!
//! The estimate keeps only the calibration region of frame 0, tapers it
//! with a raised-cosine window, transforms each coil back to image space and
//! divides by the RSS image where the RSS clears a fraction of its maximum.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fourier::CenteredFft2;
use crate::image::{KSpaceData, SensitivityMaps};
use crate::math;
use crate::sampling::{centered_start, AcsRegion, SamplingMask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcsConfig {
    /// Support keeps pixels with `RSS > threshold · max(RSS)`.
    pub threshold: f64,
}

impl Default for AcsConfig {
    fn default() -> Self {
        Self { threshold: 0.05 }
    }
}

/// Raised cosine of length `n` with strictly positive taps.
fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.5 * (1.0 - math::cos(2.0 * PI * (j + 1) as f64 / (n + 1) as f64))).collect()
}

/// Apodization weights over the full grid, zero outside the ACS region.
pub fn acs_window(mask: &SamplingMask) -> Result<Vec<f64>> {
    let (h, w) = (mask.height(), mask.width());
    let mut window = vec![0.0; h * w];
    match mask.acs() {
        AcsRegion::Lines(n) if n >= 1 => {
            let start = centered_start(w, n);
            let cols = hann(n);
            let rows = hann(h);
            for r in 0..h {
                for (j, wc) in cols.iter().enumerate() {
                    window[r * w + start + j] = rows[r] * wc;
                }
            }
        }
        AcsRegion::Disc(radius) if radius >= 1 => {
            let (cr, cc) = mask.center();
            for i in mask.disc_indices(radius) {
                let dr = (i / w) as f64 - cr as f64;
                let dc = (i % w) as f64 - cc as f64;
                let d = math::hypot(dr, dc);
                window[i] = 0.5 * (1.0 + math::cos(PI * d / (radius + 1) as f64));
            }
        }
        _ => invalid!("mask has no autocalibration region"),
    }
    Ok(window)
}

pub fn estimate_from_acs(ksp: &KSpaceData, mask: &SamplingMask) -> Result<SensitivityMaps> {
    estimate_from_acs_with(ksp, mask, &AcsConfig::default())
}

pub fn estimate_from_acs_with(ksp: &KSpaceData, mask: &SamplingMask, cfg: &AcsConfig) -> Result<SensitivityMaps> {
    let (nc, _, h, w) = ksp.dims();
    if mask.height() != h || mask.width() != w {
        invalid!("mask is {}x{} but k-space is {h}x{w}", mask.height(), mask.width());
    }
    if !(cfg.threshold >= 0.0 && cfg.threshold < 1.0) {
        invalid!("support threshold must lie in [0, 1), got {}", cfg.threshold);
    }
    let window = acs_window(mask)?;
    let fft = CenteredFft2::new(h, w)?;
    let mut coils = vec![Complex64::new(0.0, 0.0); nc * h * w];
    for k in 0..nc {
        let plane = &mut coils[k * h * w..(k + 1) * h * w];
        for ((dst, &src), &win) in plane.iter_mut().zip(ksp.plane(k, 0)).zip(&window) {
            *dst = src * win;
        }
        fft.inverse(plane);
    }
    let n = h * w;
    let max_rss = (0..n).map(|p| math::sqrt((0..nc).map(|k| coils[k * n + p].norm_sqr()).sum())).fold(0.0, f64::max);
    if max_rss == 0.0 {
        invalid!("ACS region carries no signal");
    }
    SensitivityMaps::normalize(nc, h, w, &coils, cfg.threshold * max_rss)
}

/// Post-processing hook applied to estimated maps before reconstruction.
pub trait SensitivityRefiner {
    fn refine(&self, maps: SensitivityMaps) -> SensitivityMaps;
}

/// Passes maps through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRefiner;

impl SensitivityRefiner for IdentityRefiner {
    fn refine(&self, maps: SensitivityMaps) -> SensitivityMaps {
        maps
    }
}

pub fn refine(maps: SensitivityMaps) -> SensitivityMaps {
    IdentityRefiner.refine(maps)
}
