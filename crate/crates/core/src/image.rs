//! Shared domain types and root-sum-of-squares combination.
//!
//! Every grid is row-major with the frame axis always present (length 1 for a
//! static slice). Multi-coil arrays put the coil axis outermost:
//! `(coil, frame, row, col)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::math;

fn check_finite(data: &[Complex64], what: &str) -> Result<()> {
    if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        invalid!("{what} has a non-finite entry at flat index {i}");
    }
    Ok(())
}

/// Complex image, `(frame, row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    n_frames: usize,
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn new(n_frames: usize, height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if n_frames == 0 || height == 0 || width == 0 {
            invalid!("image dims must be positive, got {n_frames}x{height}x{width}");
        }
        if data.len() != n_frames * height * width {
            invalid!("image buffer has {} entries, expected {}", data.len(), n_frames * height * width);
        }
        check_finite(&data, "image")?;
        Ok(Self { n_frames, height, width, data })
    }

    pub fn zeros(n_frames: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(n_frames, height, width, vec![Complex64::new(0.0, 0.0); n_frames * height * width])
    }

    /// Real-valued image with zero imaginary part.
    pub fn from_real(n_frames: usize, height: usize, width: usize, data: &[f64]) -> Result<Self> {
        Self::new(n_frames, height, width, data.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Stack single-frame or multi-frame images along the frame axis.
    pub fn stack(frames: &[ComplexImage]) -> Result<Self> {
        let Some(first) = frames.first() else {
            invalid!("cannot stack zero images");
        };
        let mut data = Vec::new();
        let mut n_frames = 0;
        for f in frames {
            if f.height != first.height || f.width != first.width {
                invalid!("stacked images must share spatial dims");
            }
            n_frames += f.n_frames;
            data.extend_from_slice(&f.data);
        }
        Self::new(n_frames, first.height, first.width, data)
    }

    /// Internal constructor for buffers already known to be well-formed.
    pub(crate) fn from_parts(n_frames: usize, height: usize, width: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), n_frames * height * width);
        Self { n_frames, height, width, data }
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_frames, self.height, self.width)
    }

    pub fn frame_len(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Complex64] {
        let n = self.frame_len();
        &mut self.data[t * n..(t + 1) * n]
    }

    /// Copy out frame `t` as a single-frame image.
    pub fn frame_image(&self, t: usize) -> ComplexImage {
        Self::from_parts(1, self.height, self.width, self.frame(t).to_vec())
    }

    pub fn get(&self, t: usize, row: usize, col: usize) -> Complex64 {
        self.data[(t * self.height + row) * self.width + col]
    }

    pub fn magnitude(&self) -> RealImage {
        RealImage::from_parts(self.n_frames, self.height, self.width, self.data.iter().map(|z| z.norm()).collect())
    }

    pub fn same_dims(&self, other: &ComplexImage) -> bool {
        self.dims() == other.dims()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self, other⟩ = Σ conj(self) · other`.
    pub fn inner(&self, other: &ComplexImage) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Real image, `(frame, row, col)`. Magnitudes, RSS images and metric inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    n_frames: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RealImage {
    pub fn new(n_frames: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if n_frames == 0 || height == 0 || width == 0 {
            invalid!("image dims must be positive, got {n_frames}x{height}x{width}");
        }
        if data.len() != n_frames * height * width {
            invalid!("image buffer has {} entries, expected {}", data.len(), n_frames * height * width);
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            invalid!("image has a non-finite entry at flat index {i}");
        }
        Ok(Self { n_frames, height, width, data })
    }

    pub(crate) fn from_parts(n_frames: usize, height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_frames * height * width);
        Self { n_frames, height, width, data }
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_frames, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn frame(&self, t: usize) -> Plane<'_> {
        let n = self.height * self.width;
        Plane { data: &self.data[t * n..(t + 1) * n], height: self.height, width: self.width }
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Borrowed single 2D real plane.
#[derive(Debug, Clone, Copy)]
pub struct Plane<'a> {
    pub data: &'a [f64],
    pub height: usize,
    pub width: usize,
}

impl<'a> Plane<'a> {
    pub fn new(data: &'a [f64], height: usize, width: usize) -> Result<Self> {
        if data.len() != height * width {
            invalid!("plane buffer has {} entries, expected {}x{}", data.len(), height, width);
        }
        Ok(Self { data, height, width })
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }
}

/// Multi-coil k-space, `(coil, frame, row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceData {
    n_coils: usize,
    n_frames: usize,
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl KSpaceData {
    pub fn new(n_coils: usize, n_frames: usize, height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if n_coils == 0 {
            invalid!("k-space needs at least one coil");
        }
        if n_frames == 0 || height == 0 || width == 0 {
            invalid!("k-space dims must be positive, got {n_frames}x{height}x{width}");
        }
        let len = n_coils * n_frames * height * width;
        if data.len() != len {
            invalid!("k-space buffer has {} entries, expected {len}", data.len());
        }
        check_finite(&data, "k-space")?;
        Ok(Self { n_coils, n_frames, height, width, data })
    }

    pub fn zeros(n_coils: usize, n_frames: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(n_coils, n_frames, height, width, vec![Complex64::new(0.0, 0.0); n_coils * n_frames * height * width])
    }

    pub(crate) fn from_parts(
        n_coils: usize,
        n_frames: usize,
        height: usize,
        width: usize,
        data: Vec<Complex64>,
    ) -> Self {
        debug_assert_eq!(data.len(), n_coils * n_frames * height * width);
        Self { n_coils, n_frames, height, width, data }
    }

    pub fn n_coils(&self) -> usize {
        self.n_coils
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(coils, frames, height, width)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.n_coils, self.n_frames, self.height, self.width)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn plane(&self, coil: usize, frame: usize) -> &[Complex64] {
        let n = self.plane_len();
        let start = (coil * self.n_frames + frame) * n;
        &self.data[start..start + n]
    }

    pub fn plane_mut(&mut self, coil: usize, frame: usize) -> &mut [Complex64] {
        let n = self.plane_len();
        let start = (coil * self.n_frames + frame) * n;
        &mut self.data[start..start + n]
    }

    /// Single coil as a one-coil k-space.
    pub fn coil(&self, coil: usize) -> KSpaceData {
        let n = self.n_frames * self.plane_len();
        let data = self.data[coil * n..(coil + 1) * n].to_vec();
        Self::from_parts(1, self.n_frames, self.height, self.width, data)
    }

    /// Single frame across all coils.
    pub fn frame(&self, frame: usize) -> KSpaceData {
        let mut data = Vec::with_capacity(self.n_coils * self.plane_len());
        for k in 0..self.n_coils {
            data.extend_from_slice(self.plane(k, frame));
        }
        Self::from_parts(self.n_coils, 1, self.height, self.width, data)
    }

    /// Concatenate single- or multi-frame k-space along the frame axis.
    pub fn stack_frames(parts: &[KSpaceData]) -> Result<Self> {
        let Some(first) = parts.first() else {
            invalid!("cannot stack zero k-space arrays");
        };
        let n_frames: usize = parts.iter().map(|p| p.n_frames).sum();
        for p in parts {
            if p.n_coils != first.n_coils || p.height != first.height || p.width != first.width {
                invalid!("stacked k-space arrays must share coils and spatial dims");
            }
        }
        let mut data = Vec::with_capacity(first.n_coils * n_frames * first.plane_len());
        for k in 0..first.n_coils {
            for p in parts {
                for t in 0..p.n_frames {
                    data.extend_from_slice(p.plane(k, t));
                }
            }
        }
        Ok(Self::from_parts(first.n_coils, n_frames, first.height, first.width, data))
    }

    pub fn scaled(&self, c: f64) -> KSpaceData {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= c);
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &KSpaceData) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Per-coil complex sensitivity maps `S^k`, `(coil, row, col)`, with their support.
///
/// On the support `Σ_k |S^k|² = 1`; off the support every map is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMaps {
    n_coils: usize,
    height: usize,
    width: usize,
    maps: Vec<Complex64>,
    support: Vec<bool>,
}

/// Tolerance on `Σ_k |S^k|² = 1` over the support.
pub const NORMALIZATION_TOL: f64 = 1e-6;

impl SensitivityMaps {
    /// Validate already-normalized maps against an explicit support.
    pub fn new(n_coils: usize, height: usize, width: usize, maps: Vec<Complex64>, support: Vec<bool>) -> Result<Self> {
        if n_coils == 0 || height == 0 || width == 0 {
            invalid!("sensitivity dims must be positive, got {n_coils}x{height}x{width}");
        }
        let n = height * width;
        if maps.len() != n_coils * n || support.len() != n {
            invalid!("sensitivity buffers do not match {n_coils}x{height}x{width}");
        }
        check_finite(&maps, "sensitivity maps")?;
        for p in 0..n {
            let energy: f64 = (0..n_coils).map(|k| maps[k * n + p].norm_sqr()).sum();
            if support[p] && (energy - 1.0).abs() > NORMALIZATION_TOL {
                invalid!("Σ|S|² = {energy} at support pixel {p}, expected 1");
            }
            if !support[p] && energy != 0.0 {
                invalid!("sensitivity nonzero off support at pixel {p}");
            }
        }
        Ok(Self { n_coils, height, width, maps, support })
    }

    /// Divide raw coil profiles by their RSS wherever the RSS exceeds
    /// `threshold`; zero everywhere else.
    pub fn normalize(n_coils: usize, height: usize, width: usize, raw: &[Complex64], threshold: f64) -> Result<Self> {
        Self::normalize_where(n_coils, height, width, raw, |_, rss| rss > threshold)
    }

    /// Like [`normalize`](Self::normalize) with an arbitrary support
    /// predicate over `(pixel index, rss)`. Pixels with zero RSS are always
    /// excluded.
    pub fn normalize_where(
        n_coils: usize,
        height: usize,
        width: usize,
        raw: &[Complex64],
        mut in_support: impl FnMut(usize, f64) -> bool,
    ) -> Result<Self> {
        if n_coils == 0 || height == 0 || width == 0 {
            invalid!("sensitivity dims must be positive, got {n_coils}x{height}x{width}");
        }
        let n = height * width;
        if raw.len() != n_coils * n {
            invalid!("raw coil profiles have {} entries, expected {}", raw.len(), n_coils * n);
        }
        check_finite(raw, "coil profiles")?;
        let mut maps = vec![Complex64::new(0.0, 0.0); n_coils * n];
        let mut support = vec![false; n];
        for p in 0..n {
            let rss = math::sqrt((0..n_coils).map(|k| raw[k * n + p].norm_sqr()).sum());
            if rss > 0.0 && in_support(p, rss) {
                support[p] = true;
                for k in 0..n_coils {
                    maps[k * n + p] = raw[k * n + p] / rss;
                }
            }
        }
        Ok(Self { n_coils, height, width, maps, support })
    }

    pub fn n_coils(&self) -> usize {
        self.n_coils
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn maps(&self) -> &[Complex64] {
        &self.maps
    }

    pub fn coil(&self, k: usize) -> &[Complex64] {
        let n = self.height * self.width;
        &self.maps[k * n..(k + 1) * n]
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    pub fn support_count(&self) -> usize {
        self.support.iter().filter(|&&s| s).count()
    }

    /// `Σ_k |S^k(p)|²` per pixel.
    pub fn energy(&self) -> Vec<f64> {
        let n = self.height * self.width;
        (0..n).map(|p| (0..self.n_coils).map(|k| self.maps[k * n + p].norm_sqr()).sum()).collect()
    }
}

/// Root-sum-of-squares over the coil axis of `(coil, frame, row, col)` data.
///
/// Returns a real image with the same frame and spatial dims.
pub fn rss(coil_images: &KSpaceData) -> RealImage {
    let (nc, nf, h, w) = coil_images.dims();
    let n = nf * h * w;
    let data = coil_images.data();
    let out = (0..n).map(|p| math::sqrt((0..nc).map(|k| data[k * n + p].norm_sqr()).sum())).collect();
    RealImage::from_parts(nf, h, w, out)
}

/// RSS over a raw `(coil, row, col)` buffer. Errors on an empty coil axis.
pub fn rss_planes(planes: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    let Some(first) = planes.first() else {
        invalid!("rss needs at least one coil");
    };
    if planes.iter().any(|p| p.len() != first.len()) {
        invalid!("coil planes differ in size");
    }
    Ok((0..first.len()).map(|i| math::sqrt(planes.iter().map(|p| p[i].norm_sqr()).sum())).collect())
}
