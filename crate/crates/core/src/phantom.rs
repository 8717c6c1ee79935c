//! Shepp-Logan phantoms and simulated multi-coil acquisitions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fourier::CenteredFft2;
use crate::image::{ComplexImage, KSpaceData, SensitivityMaps};
use crate::math;
use crate::rng::SplitMix64;

pub const MIN_PHANTOM_SIZE: usize = 16;

/// One ellipse: intensity, semi-axes, center and rotation in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    pub phi_deg: f64,
}

const fn e(intensity: f64, a: f64, b: f64, x0: f64, y0: f64, phi_deg: f64) -> Ellipse {
    Ellipse { intensity, a, b, x0, y0, phi_deg }
}

/// Modified Shepp-Logan table (Toft's contrast-enhanced intensities).
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    e(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    e(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    e(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    e(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    e(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    e(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    e(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    e(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    e(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    e(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Index into [`SHEPP_LOGAN`] of the ellipse that contracts in the dynamic phantom.
pub const BEATING_ELLIPSE: usize = 4;
/// Peak fractional shrink of the beating ellipse.
pub const BEAT_AMPLITUDE: f64 = 0.3;

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = math::sincos(self.phi_deg * PI / 180.0);
        let (dx, dy) = (x - self.x0, y - self.y0);
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        math::sq(xr / self.a) + math::sq(yr / self.b) <= 1.0
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { a: self.a * factor, b: self.b * factor, ..*self }
    }
}

/// Normalized coordinates of pixel `(r, c)`; the pixel at `(n/2, n/2)` is the origin.
pub fn pixel_coords(n: usize, r: usize, c: usize) -> (f64, f64) {
    let half = n as f64 / 2.0;
    let mid = (n / 2) as f64;
    ((c as f64 - mid) / half, (mid - r as f64) / half)
}

fn rasterize(n: usize, ellipses: &[Ellipse]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let (x, y) = pixel_coords(n, r, c);
            let v: f64 = ellipses.iter().filter(|el| el.contains(x, y)).map(|el| el.intensity).sum();
            out[r * n + c] = v.clamp(0.0, 1.0);
        }
    }
    out
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_PHANTOM_SIZE {
        invalid!("phantom size must be ≥ {MIN_PHANTOM_SIZE}, got {n}");
    }
    Ok(())
}

/// Real-valued `n × n` Shepp-Logan phantom in `[0, 1]`.
pub fn shepp_logan(n: usize) -> Result<ComplexImage> {
    check_size(n)?;
    ComplexImage::from_real(1, n, n, &rasterize(n, &SHEPP_LOGAN))
}

/// Scale of the beating ellipse at frame `t`: `1 − a(1 − cos(2πt/N))/2`.
pub fn beat_scale(t: usize, n_frames: usize) -> f64 {
    // Fold onto the first half period so frames t and N − t agree bitwise.
    let t = t % n_frames;
    let t = t.min(n_frames - t);
    1.0 - BEAT_AMPLITUDE * (1.0 - math::cos(2.0 * PI * t as f64 / n_frames as f64)) / 2.0
}

/// Cine phantom whose upper interior ellipse contracts and relaxes once over
/// `n_frames`; frame 0 is the static phantom.
pub fn dynamic_phantom(n: usize, n_frames: usize) -> Result<ComplexImage> {
    check_size(n)?;
    if n_frames == 0 {
        invalid!("n_frames must be ≥ 1");
    }
    let mut data = Vec::with_capacity(n_frames * n * n);
    let mut table = SHEPP_LOGAN;
    for t in 0..n_frames {
        table[BEATING_ELLIPSE] = SHEPP_LOGAN[BEATING_ELLIPSE].scaled(beat_scale(t, n_frames));
        data.extend(rasterize(n, &table));
    }
    ComplexImage::from_real(n_frames, n, n, &data)
}

/// Width of each Gaussian coil bump in normalized coordinates.
const COIL_SIGMA: f64 = 0.8;
/// Distance of coil centers from the FOV center.
const COIL_RADIUS: f64 = 1.1;
/// Peak phase ramp across the FOV, in radians.
const COIL_PHASE_RAMP: f64 = 0.5 * PI;

/// Unnormalized complex coil profiles `(coil, row, col)`.
///
/// Coil `k` sits at angle `2πk/n_coils` plus a seeded jitter; its phase is a
/// seeded linear ramp. Phases are referenced to coil 0.
pub fn coil_profiles(h: usize, w: usize, n_coils: usize, seed: u64) -> Result<Vec<Complex64>> {
    if n_coils == 0 {
        invalid!("n_coils must be ≥ 1");
    }
    if h == 0 || w == 0 {
        invalid!("coil grid must be non-empty, got {h}x{w}");
    }
    let mut rng = SplitMix64::new(seed);
    let spacing = 2.0 * PI / n_coils as f64;
    let params: Vec<(f64, f64, f64, f64)> = (0..n_coils)
        .map(|k| {
            let angle = k as f64 * spacing + (rng.next_f64() - 0.5) * 0.2 * spacing;
            let (s, c) = math::sincos(angle);
            let ramp_dir = 2.0 * PI * rng.next_f64();
            let offset = 2.0 * PI * rng.next_f64();
            (COIL_RADIUS * c, COIL_RADIUS * s, ramp_dir, offset)
        })
        .collect();
    let n = h * w;
    let (hh, hw) = (h as f64 / 2.0, w as f64 / 2.0);
    let mut raw = vec![Complex64::new(0.0, 0.0); n_coils * n];
    for r in 0..h {
        for c in 0..w {
            let x = (c as f64 - (w / 2) as f64) / hw;
            let y = ((h / 2) as f64 - r as f64) / hh;
            for (k, &(cx, cy, dir, offset)) in params.iter().enumerate() {
                let d2 = math::sq(x - cx) + math::sq(y - cy);
                let mag = math::exp(-d2 / (2.0 * COIL_SIGMA * COIL_SIGMA));
                let (s, co) = math::sincos(dir);
                let phase = offset + COIL_PHASE_RAMP * (x * co + y * s) / 2.0;
                raw[k * n + r * w + c] = Complex64::from_polar(mag, phase);
            }
        }
    }
    for p in 0..n {
        let reference = raw[p];
        let rot = reference.conj() / reference.norm();
        for k in 0..n_coils {
            raw[k * n + p] *= rot;
        }
    }
    Ok(raw)
}

/// Coil maps normalized on the image support (`|x| > 0` in any frame) and
/// the fully sampled k-space `fft2c(S^k ⊙ x_t)`.
pub fn simulate_coils(img: &ComplexImage, n_coils: usize, seed: u64) -> Result<(SensitivityMaps, KSpaceData)> {
    let (nf, h, w) = img.dims();
    let raw = coil_profiles(h, w, n_coils, seed)?;
    let n = h * w;
    let support: Vec<bool> = (0..n).map(|p| (0..nf).any(|t| img.frame(t)[p].norm() > 0.0)).collect();
    let sens = SensitivityMaps::normalize_where(n_coils, h, w, &raw, |p, _| support[p])?;
    let fft = CenteredFft2::new(h, w)?;
    let mut ksp = KSpaceData::zeros(n_coils, nf, h, w)?;
    for k in 0..n_coils {
        let s = sens.coil(k);
        for t in 0..nf {
            let plane = ksp.plane_mut(k, t);
            for ((dst, &sk), &x) in plane.iter_mut().zip(s).zip(img.frame(t)) {
                *dst = sk * x;
            }
            fft.forward(plane);
        }
    }
    Ok((sens, ksp))
}
