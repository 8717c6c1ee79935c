//! Centered orthonormal 2D Fourier transforms and the multi-coil forward
//! operator `A^k = U F S^k`.
//!
//! `F` is the unitary DFT (`1/√N` in both directions) with DC at
//! `(⌊h/2⌋, ⌊w/2⌋)`, i.e. `fftshift ∘ fft2 ∘ ifftshift`. Because `F` is
//! unitary, `F⁻¹ = Fᴴ` and the adjoint of the forward operator is
//! `Aᴴy = Σ_k conj(S^k) ⊙ F⁻¹(U ⊙ y^k)`.

use alloc::vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fft::{Direction, Fft2d};
use crate::image::{ComplexImage, KSpaceData, SensitivityMaps};
use crate::math;
use crate::sampling::SamplingMask;

/// Plan for centered orthonormal transforms on one grid size.
#[derive(Debug, Clone)]
pub struct CenteredFft2 {
    plan: Fft2d,
    scale: f64,
}

/// `out[(r + dr) % h][(c + dc) % w] = input[r][c]`.
fn roll(input: &[Complex64], out: &mut [Complex64], h: usize, w: usize, dr: usize, dc: usize) {
    for r in 0..h {
        let rr = (r + dr) % h;
        for c in 0..w {
            out[rr * w + (c + dc) % w] = input[r * w + c];
        }
    }
}

impl CenteredFft2 {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            invalid!("FFT grid must be non-empty, got {height}x{width}");
        }
        Ok(Self { plan: Fft2d::new(height, width), scale: 1.0 / math::sqrt((height * width) as f64) })
    }

    pub fn height(&self) -> usize {
        self.plan.height()
    }

    pub fn width(&self) -> usize {
        self.plan.width()
    }

    fn apply(&self, data: &mut [Complex64], dir: Direction) {
        let (h, w) = (self.height(), self.width());
        let mut tmp = vec![Complex64::new(0.0, 0.0); h * w];
        // ifftshift moves index ⌊n/2⌋ to 0, fftshift moves 0 to ⌊n/2⌋.
        roll(data, &mut tmp, h, w, h - h / 2, w - w / 2);
        self.plan.process(&mut tmp, dir);
        roll(&tmp, data, h, w, h / 2, w / 2);
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }

    /// In-place centered forward transform of one `height × width` plane.
    pub fn forward(&self, plane: &mut [Complex64]) {
        self.apply(plane, Direction::Forward);
    }

    /// In-place centered inverse transform of one plane.
    pub fn inverse(&self, plane: &mut [Complex64]) {
        self.apply(plane, Direction::Inverse);
    }
}

/// Centered orthonormal forward transform, applied per frame.
pub fn fft2c(img: &ComplexImage) -> Result<ComplexImage> {
    let plan = CenteredFft2::new(img.height(), img.width())?;
    let mut out = img.clone();
    for t in 0..out.n_frames() {
        plan.forward(out.frame_mut(t));
    }
    Ok(out)
}

/// Centered orthonormal inverse transform, applied per frame.
pub fn ifft2c(ksp: &ComplexImage) -> Result<ComplexImage> {
    let plan = CenteredFft2::new(ksp.height(), ksp.width())?;
    let mut out = ksp.clone();
    for t in 0..out.n_frames() {
        plan.inverse(out.frame_mut(t));
    }
    Ok(out)
}

/// Per-coil centered transforms over multi-coil k-space / coil images.
pub fn fft2c_coils(data: &KSpaceData) -> KSpaceData {
    transform_coils(data, Direction::Forward)
}

pub fn ifft2c_coils(data: &KSpaceData) -> KSpaceData {
    transform_coils(data, Direction::Inverse)
}

fn transform_coils(data: &KSpaceData, dir: Direction) -> KSpaceData {
    let (nc, nf, h, w) = data.dims();
    let plan = CenteredFft2::new(h, w).expect("KSpaceData dims are positive");
    let mut out = data.clone();
    for k in 0..nc {
        for t in 0..nf {
            plan.apply(out.plane_mut(k, t), dir);
        }
    }
    out
}

/// `A = (U F S^1, …, U F S^{N_c})`, applied frame by frame.
#[derive(Debug, Clone)]
pub struct ForwardOperator {
    mask: SamplingMask,
    sens: SensitivityMaps,
    fft: CenteredFft2,
}

impl ForwardOperator {
    pub fn new(mask: SamplingMask, sens: SensitivityMaps) -> Result<Self> {
        if mask.height() != sens.height() || mask.width() != sens.width() {
            invalid!(
                "mask is {}x{} but sensitivity maps are {}x{}",
                mask.height(),
                mask.width(),
                sens.height(),
                sens.width()
            );
        }
        let fft = CenteredFft2::new(mask.height(), mask.width())?;
        Ok(Self { mask, sens, fft })
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn sens(&self) -> &SensitivityMaps {
        &self.sens
    }

    pub fn n_coils(&self) -> usize {
        self.sens.n_coils()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    fn check_image(&self, x: &ComplexImage) -> Result<()> {
        if x.height() != self.height() || x.width() != self.width() {
            invalid!("image is {}x{} but operator is {}x{}", x.height(), x.width(), self.height(), self.width());
        }
        Ok(())
    }

    fn check_kspace(&self, y: &KSpaceData) -> Result<()> {
        if y.n_coils() != self.n_coils() || y.height() != self.height() || y.width() != self.width() {
            let (nc, _, h, w) = y.dims();
            invalid!(
                "k-space is {nc} coils x {h}x{w} but operator is {} coils x {}x{}",
                self.n_coils(),
                self.height(),
                self.width()
            );
        }
        Ok(())
    }

    fn apply_mask(&self, plane: &mut [Complex64]) {
        for (z, &keep) in plane.iter_mut().zip(self.mask.pattern()) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `U F (S^k ⊙ x_t)` for one coil and one frame plane.
    fn forward_plane(&self, k: usize, x: &[Complex64], out: &mut [Complex64]) {
        for ((o, &s), &v) in out.iter_mut().zip(self.sens.coil(k)).zip(x) {
            *o = s * v;
        }
        self.fft.forward(out);
        self.apply_mask(out);
    }

    /// Adds `conj(S^k) ⊙ F⁻¹(U y)` into `acc`; `y` is consumed as scratch.
    fn adjoint_plane_add(&self, k: usize, y: &mut [Complex64], acc: &mut [Complex64]) {
        self.apply_mask(y);
        self.fft.inverse(y);
        for ((a, &s), &v) in acc.iter_mut().zip(self.sens.coil(k)).zip(y.iter()) {
            *a += s.conj() * v;
        }
    }

    pub fn forward(&self, x: &ComplexImage) -> Result<KSpaceData> {
        self.check_image(x)?;
        let (nf, h, w) = x.dims();
        let nc = self.n_coils();
        let mut out = KSpaceData::from_parts(nc, nf, h, w, vec![Complex64::new(0.0, 0.0); nc * nf * h * w]);
        for k in 0..nc {
            for t in 0..nf {
                self.forward_plane(k, x.frame(t), out.plane_mut(k, t));
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self, y: &KSpaceData) -> Result<ComplexImage> {
        self.check_kspace(y)?;
        let (nc, nf, h, w) = y.dims();
        let mut out = ComplexImage::from_parts(nf, h, w, vec![Complex64::new(0.0, 0.0); nf * h * w]);
        let mut scratch = vec![Complex64::new(0.0, 0.0); h * w];
        for t in 0..nf {
            let acc = out.frame_mut(t);
            for k in 0..nc {
                scratch.copy_from_slice(y.plane(k, t));
                self.adjoint_plane_add(k, &mut scratch, acc);
            }
        }
        Ok(out)
    }

    /// `AᴴA x` without materializing the multi-coil k-space.
    pub fn normal(&self, x: &ComplexImage) -> Result<ComplexImage> {
        self.check_image(x)?;
        let (nf, h, w) = x.dims();
        let mut out = ComplexImage::from_parts(nf, h, w, vec![Complex64::new(0.0, 0.0); nf * h * w]);
        let mut scratch = vec![Complex64::new(0.0, 0.0); h * w];
        for t in 0..nf {
            for k in 0..self.n_coils() {
                self.forward_plane(k, x.frame(t), &mut scratch);
                self.adjoint_plane_add(k, &mut scratch, out.frame_mut(t));
            }
        }
        Ok(out)
    }

    /// `½ Σ_{t,k} ‖A^k x_t − y^k_t‖²`.
    pub fn data_residual(&self, x: &ComplexImage, y: &KSpaceData) -> Result<f64> {
        self.check_kspace(y)?;
        let ax = self.forward(x)?;
        if ax.n_frames() != y.n_frames() {
            invalid!("image has {} frames but k-space has {}", ax.n_frames(), y.n_frames());
        }
        Ok(0.5 * ax.data().iter().zip(y.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>())
    }
}
