//! Random spatial cropping of fully sampled multi-coil k-space.
//!
//! Each coil/frame plane goes to image space, a `crop_h × crop_w` window is
//! cut out, and the window goes back to k-space. The window offset is drawn
//! once per call and shared by every coil and frame.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::fourier::CenteredFft2;
use crate::image::KSpaceData;
use crate::rng::SplitMix64;

/// Top-left corner of the window, uniform over all valid positions.
pub fn crop_offset(height: usize, width: usize, crop_h: usize, crop_w: usize, seed: u64) -> Result<(usize, usize)> {
    if crop_h == 0 || crop_w == 0 {
        invalid!("crop size must be positive, got {crop_h}x{crop_w}");
    }
    if crop_h > height || crop_w > width {
        invalid!("crop {crop_h}x{crop_w} exceeds input {height}x{width}");
    }
    let mut rng = SplitMix64::new(seed);
    let r0 = rng.below((height - crop_h + 1) as u64) as usize;
    let c0 = rng.below((width - crop_w + 1) as u64) as usize;
    Ok((r0, c0))
}

/// Crop at an explicit offset.
pub fn kspace_crop_at(ksp: &KSpaceData, crop_h: usize, crop_w: usize, r0: usize, c0: usize) -> Result<KSpaceData> {
    let (nc, nf, h, w) = ksp.dims();
    if crop_h == 0 || crop_w == 0 || r0 + crop_h > h || c0 + crop_w > w {
        invalid!("window {crop_h}x{crop_w} at ({r0}, {c0}) does not fit in {h}x{w}");
    }
    let full = CenteredFft2::new(h, w)?;
    let small = CenteredFft2::new(crop_h, crop_w)?;
    let mut out = KSpaceData::zeros(nc, nf, crop_h, crop_w)?;
    let mut plane: Vec<_> = Vec::with_capacity(h * w);
    for k in 0..nc {
        for t in 0..nf {
            plane.clear();
            plane.extend_from_slice(ksp.plane(k, t));
            full.inverse(&mut plane);
            let dst = out.plane_mut(k, t);
            for r in 0..crop_h {
                dst[r * crop_w..(r + 1) * crop_w]
                    .copy_from_slice(&plane[(r0 + r) * w + c0..(r0 + r) * w + c0 + crop_w]);
            }
            small.forward(dst);
        }
    }
    Ok(out)
}

/// Crop at a seeded offset; see [`crop_offset`].
pub fn random_kspace_crop(ksp: &KSpaceData, crop_h: usize, crop_w: usize, seed: u64) -> Result<KSpaceData> {
    let (r0, c0) = crop_offset(ksp.height(), ksp.width(), crop_h, crop_w, seed)?;
    kspace_crop_at(ksp, crop_h, crop_w, r0, c0)
}
