//! Cartesian undersampling patterns.
//!
//! Phase encoding runs along the width axis, so rectilinear schemes sample
//! whole columns and ACS lines are central columns. Every generator is a pure
//! function of its dimensions, acceleration, calibration size and seed.
//!
//! Scheme parameters:
//!
//! - rectilinear (equispaced / random): `⌈width / R⌉` sampled columns in
//!   total, ACS included. Extra columns are placed outside the ACS band.
//! - Gaussian 2D: `⌈height·width / R⌉` points drawn without replacement with
//!   weights from a centered Gaussian (σ = dim / 6 per axis); a central disc
//!   of radius `acs_radius` is always sampled and counts toward the budget.
//! - pseudo-radial: `⌈max(h, w)·π / (2R)⌉` lines through the center at
//!   golden-angle increments, limited to the inscribed disc.
//! - pseudo-spiral: interleaved Archimedean arms whose passes are spaced so
//!   that the arm count closest to the target acceleration is kept.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::math;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskScheme {
    Equispaced,
    RandomRectilinear,
    Gaussian2d,
    PseudoRadial,
    PseudoSpiral,
    Full,
    /// Pattern read back from disk with no generator metadata.
    Custom,
}

impl MaskScheme {
    pub fn is_rectilinear(self) -> bool {
        matches!(self, MaskScheme::Equispaced | MaskScheme::RandomRectilinear)
    }

    pub fn name(self) -> &'static str {
        match self {
            MaskScheme::Equispaced => "equispaced",
            MaskScheme::RandomRectilinear => "random",
            MaskScheme::Gaussian2d => "gaussian2d",
            MaskScheme::PseudoRadial => "radial",
            MaskScheme::PseudoSpiral => "spiral",
            MaskScheme::Full => "full",
            MaskScheme::Custom => "custom",
        }
    }
}

/// Fully sampled calibration region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcsRegion {
    None,
    /// Contiguous centered columns.
    Lines(usize),
    /// Centered disc of the given radius (pixels).
    Disc(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMask {
    height: usize,
    width: usize,
    pattern: Vec<bool>,
    acs: AcsRegion,
    scheme: MaskScheme,
    nominal_acceleration: f64,
}

/// First column of a centered band of `n` columns; the band always contains
/// the DC column `⌊width/2⌋`.
pub fn centered_start(width: usize, n: usize) -> usize {
    (width / 2).saturating_sub(n / 2).min(width - n)
}

impl SamplingMask {
    /// Validate a pattern together with its metadata.
    pub fn new(
        height: usize,
        width: usize,
        pattern: Vec<bool>,
        acs: AcsRegion,
        scheme: MaskScheme,
        nominal_acceleration: f64,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            invalid!("mask dims must be positive, got {height}x{width}");
        }
        if pattern.len() != height * width {
            invalid!("mask pattern has {} entries, expected {}", pattern.len(), height * width);
        }
        if !pattern.iter().any(|&p| p) {
            invalid!("mask samples no location");
        }
        if !(nominal_acceleration.is_finite() && nominal_acceleration > 0.0) {
            invalid!("nominal acceleration must be positive, got {nominal_acceleration}");
        }
        let mask = Self { height, width, pattern, acs, scheme, nominal_acceleration };
        if scheme.is_rectilinear() && !mask.is_column_constant() {
            invalid!("rectilinear mask has a partially sampled column");
        }
        match acs {
            AcsRegion::None => {}
            AcsRegion::Lines(n) => {
                if n > width {
                    invalid!("{n} ACS lines exceed width {width}");
                }
                let start = centered_start(width, n);
                if (start..start + n).any(|c| (0..height).any(|r| !mask.pattern[r * width + c])) {
                    invalid!("ACS columns are not fully sampled");
                }
            }
            AcsRegion::Disc(radius) => {
                if mask.disc_indices(radius).any(|i| !mask.pattern[i]) {
                    invalid!("ACS disc of radius {radius} is not fully sampled");
                }
            }
        }
        Ok(mask)
    }

    pub fn full(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![true; height * width], AcsRegion::Lines(width), MaskScheme::Full, 1.0)
    }

    /// Rebuild a mask from a bare pattern, inferring the calibration region.
    ///
    /// Column-constant patterns report the widest fully sampled centered
    /// column band; other patterns report the largest fully sampled centered
    /// disc (radius ≥ 1, else no ACS).
    pub fn from_pattern(height: usize, width: usize, pattern: Vec<bool>) -> Result<Self> {
        if pattern.len() != height * width {
            invalid!("mask pattern has {} entries, expected {}", pattern.len(), height * width);
        }
        let count = pattern.iter().filter(|&&p| p).count();
        if count == 0 {
            invalid!("mask samples no location");
        }
        let nominal = (height * width) as f64 / count as f64;
        if count == height * width {
            return Self::new(height, width, pattern, AcsRegion::Lines(width), MaskScheme::Full, 1.0);
        }
        let column_full = |c: usize| (0..height).all(|r| pattern[r * width + c]);
        let column_constant = (0..width).all(|c| (0..height).all(|r| pattern[r * width + c] == pattern[c]));
        let acs = if column_constant {
            let mut n = 0;
            while n < width {
                let start = centered_start(width, n + 1);
                if (start..start + n + 1).all(column_full) {
                    n += 1;
                } else {
                    break;
                }
            }
            if n == 0 {
                AcsRegion::None
            } else {
                AcsRegion::Lines(n)
            }
        } else {
            let probe = Self {
                height,
                width,
                pattern: pattern.clone(),
                acs: AcsRegion::None,
                scheme: MaskScheme::Custom,
                nominal_acceleration: nominal,
            };
            let mut radius = 0;
            while radius < height.max(width) && probe.disc_indices(radius + 1).all(|i| pattern[i]) {
                radius += 1;
            }
            if radius == 0 {
                AcsRegion::None
            } else {
                AcsRegion::Disc(radius)
            }
        };
        Self::new(height, width, pattern, acs, MaskScheme::Custom, nominal)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pattern(&self) -> &[bool] {
        &self.pattern
    }

    #[inline]
    pub fn is_sampled(&self, row: usize, col: usize) -> bool {
        self.pattern[row * self.width + col]
    }

    pub fn acs(&self) -> AcsRegion {
        self.acs
    }

    /// Number of ACS columns (0 for disc or no calibration region).
    pub fn acs_lines(&self) -> usize {
        match self.acs {
            AcsRegion::Lines(n) => n,
            _ => 0,
        }
    }

    pub fn scheme(&self) -> MaskScheme {
        self.scheme
    }

    pub fn nominal_acceleration(&self) -> f64 {
        self.nominal_acceleration
    }

    pub fn sampled_count(&self) -> usize {
        self.pattern.iter().filter(|&&p| p).count()
    }

    /// Columns with at least one sampled row.
    pub fn sampled_columns(&self) -> usize {
        (0..self.width).filter(|&c| (0..self.height).any(|r| self.is_sampled(r, c))).count()
    }

    pub fn is_column_constant(&self) -> bool {
        (0..self.width).all(|c| (0..self.height).all(|r| self.is_sampled(r, c) == self.is_sampled(0, c)))
    }

    pub fn center(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }

    /// Row-major indices inside the centered disc of `radius`.
    pub fn disc_indices(&self, radius: usize) -> impl Iterator<Item = usize> + '_ {
        disc(self.height, self.width, radius)
    }
}

fn disc(height: usize, width: usize, radius: usize) -> impl Iterator<Item = usize> {
    let (cr, cc) = ((height / 2) as i64, (width / 2) as i64);
    let r2 = (radius * radius) as i64;
    (0..height * width).filter(move |&i| {
        let dr = (i / width) as i64 - cr;
        let dc = (i % width) as i64 - cc;
        dr * dr + dc * dc <= r2
    })
}

/// `(height·width) / sampled points`.
pub fn achieved_acceleration(mask: &SamplingMask) -> f64 {
    (mask.height * mask.width) as f64 / mask.sampled_count() as f64
}

fn check_accel(accel: f64) -> Result<()> {
    if !(accel.is_finite() && accel >= 1.0) {
        invalid!("acceleration must be ≥ 1, got {accel}");
    }
    Ok(())
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        invalid!("mask dims must be positive, got {height}x{width}");
    }
    Ok(())
}

/// Validates rectilinear arguments and returns `(acs columns, extra columns
/// outside the ACS band)`.
fn rectilinear_budget(width: usize, accel: f64, n_acs: usize) -> Result<(Vec<usize>, Vec<usize>, usize)> {
    check_accel(accel)?;
    if n_acs > width {
        invalid!("{n_acs} ACS lines exceed width {width}");
    }
    let target = (math::ceil(width as f64 / accel) as usize).clamp(1, width);
    let start = centered_start(width, n_acs);
    let acs: Vec<usize> = (start..start + n_acs).collect();
    let outside: Vec<usize> = (0..width).filter(|c| !(start..start + n_acs).contains(c)).collect();
    let extra = target.saturating_sub(n_acs).min(outside.len());
    Ok((acs, outside, extra))
}

fn columns_to_mask(
    height: usize,
    width: usize,
    columns: &[usize],
    n_acs: usize,
    scheme: MaskScheme,
    accel: f64,
) -> Result<SamplingMask> {
    let mut sampled = vec![false; width];
    for &c in columns {
        sampled[c] = true;
    }
    let pattern = (0..height * width).map(|i| sampled[i % width]).collect();
    SamplingMask::new(height, width, pattern, AcsRegion::Lines(n_acs), scheme, accel)
}

/// Equispaced Cartesian rectilinear mask.
///
/// The extra columns are spread at a fixed (fractional) stride over the
/// columns outside the ACS band; the seed picks the stride offset.
pub fn equispaced_mask(height: usize, width: usize, accel: f64, n_acs: usize, seed: u64) -> Result<SamplingMask> {
    check_dims(height, width)?;
    let (mut columns, outside, extra) = rectilinear_budget(width, accel, n_acs)?;
    if extra > 0 {
        let stride = outside.len() as f64 / extra as f64;
        let offset = SplitMix64::new(seed).next_f64() * stride;
        columns.extend((0..extra).map(|i| {
            let pos = math::floor(offset + i as f64 * stride) as usize;
            outside[pos.min(outside.len() - 1)]
        }));
    }
    columns_to_mask(height, width, &columns, n_acs, MaskScheme::Equispaced, accel)
}

/// Random Cartesian rectilinear mask: extra columns drawn uniformly without
/// replacement from outside the ACS band.
pub fn random_rectilinear_mask(
    height: usize,
    width: usize,
    accel: f64,
    n_acs: usize,
    seed: u64,
) -> Result<SamplingMask> {
    check_dims(height, width)?;
    let (mut columns, mut outside, extra) = rectilinear_budget(width, accel, n_acs)?;
    let mut rng = SplitMix64::new(seed);
    // Partial Fisher-Yates.
    for i in 0..extra {
        let j = i + rng.below((outside.len() - i) as u64) as usize;
        outside.swap(i, j);
    }
    columns.extend_from_slice(&outside[..extra]);
    columns_to_mask(height, width, &columns, n_acs, MaskScheme::RandomRectilinear, accel)
}

/// Variable-density 2D Cartesian mask with Gaussian weighting.
///
/// Points are drawn by weighted sampling without replacement
/// (Efraimidis-Spirakis keys `ln(u) / weight`, largest kept).
pub fn gaussian2d_mask(height: usize, width: usize, accel: f64, acs_radius: usize, seed: u64) -> Result<SamplingMask> {
    check_dims(height, width)?;
    check_accel(accel)?;
    let n = height * width;
    let budget = (math::ceil(n as f64 / accel) as usize).clamp(1, n);
    let mut pattern = vec![false; n];
    let mut disc_size = 0;
    for i in disc(height, width, acs_radius) {
        pattern[i] = true;
        disc_size += 1;
    }
    if budget < disc_size {
        invalid!("point budget {budget} is smaller than the ACS disc ({disc_size} points)");
    }
    let (cr, cc) = ((height / 2) as f64, (width / 2) as f64);
    let (sr, sc) = (height as f64 / 6.0, width as f64 / 6.0);
    let mut rng = SplitMix64::new(seed);
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(n - disc_size);
    for (i, &in_disc) in pattern.iter().enumerate() {
        // Draw for every pixel so the stream position does not depend on the disc.
        let u = rng.next_f64_open();
        if in_disc {
            continue;
        }
        let dr = ((i / width) as f64 - cr) / sr;
        let dc = ((i % width) as f64 - cc) / sc;
        let log_weight = -0.5 * (dr * dr + dc * dc);
        // ln(u) / w computed in log space: -exp(ln(-ln u) - ln w).
        let key = -math::exp(math::ln(-math::ln(u)) - log_weight);
        keyed.push((key, i));
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in keyed.iter().take(budget - disc_size) {
        pattern[i] = true;
    }
    let acs = if acs_radius == 0 { AcsRegion::None } else { AcsRegion::Disc(acs_radius) };
    SamplingMask::new(height, width, pattern, acs, MaskScheme::Gaussian2d, accel)
}

/// Golden angle for radial spokes, `π (√5 − 1) / 2` (≈ 111.25°).
pub const GOLDEN_ANGLE: f64 = 1.941_611_038_725_466_4;

fn mark(pattern: &mut [bool], height: usize, width: usize, row: f64, col: f64) -> bool {
    let (r, c) = (math::round(row), math::round(col));
    if r < 0.0 || c < 0.0 || r >= height as f64 || c >= width as f64 {
        return false;
    }
    let i = r as usize * width + c as usize;
    let fresh = !pattern[i];
    pattern[i] = true;
    fresh
}

/// Pseudo-radial mask: digital lines through the center pixel at
/// golden-angle increments, added until `⌈hw/R⌉` pixels are sampled.
pub fn pseudo_radial_mask(height: usize, width: usize, accel: f64, seed: u64) -> Result<SamplingMask> {
    check_dims(height, width)?;
    check_accel(accel)?;
    let side = height.max(width) as f64;
    let target = math::ceil((height * width) as f64 / accel) as usize;
    let max_spokes = 8 * height.max(width);
    let (cr, cc) = ((height / 2) as f64, (width / 2) as f64);
    let (sr, sc) = (height as f64 / side, width as f64 / side);
    let r_max = side / 2.0;
    let theta0 = SplitMix64::new(seed).next_f64() * PI;
    let mut pattern = vec![false; height * width];
    pattern[(height / 2) * width + width / 2] = true;
    let mut count = 1;
    for s in 0..max_spokes {
        if count >= target {
            break;
        }
        let (sin, cos) = math::sincos(theta0 + s as f64 * GOLDEN_ANGLE);
        // One pixel per step along the dominant axis.
        let major = cos.abs().max(sin.abs());
        let steps = math::floor(r_max * major) as i64;
        for k in -steps..=steps {
            let t = k as f64 / major;
            count += mark(&mut pattern, height, width, cr + t * sin * sr, cc + t * cos * sc) as usize;
        }
    }
    SamplingMask::new(height, width, pattern, AcsRegion::None, MaskScheme::PseudoRadial, accel)
}

fn rasterize_spiral(height: usize, width: usize, n_arms: usize, spacing: f64, phase: f64) -> Vec<bool> {
    let side = height.max(width) as f64;
    let (cr, cc) = ((height / 2) as f64, (width / 2) as f64);
    let (sr, sc) = (height as f64 / side, width as f64 / side);
    let r_max = side / 2.0;
    // r = aθ with consecutive passes of neighbouring arms `spacing` apart.
    let a = n_arms as f64 * spacing / (2.0 * PI);
    let theta_max = r_max / a;
    let mut pattern = vec![false; height * width];
    pattern[(height / 2) * width + width / 2] = true;
    for arm in 0..n_arms {
        let rot = phase + arm as f64 * 2.0 * PI / n_arms as f64;
        let mut theta = 0.0;
        while theta <= theta_max {
            let r = a * theta;
            let (sin, cos) = math::sincos(theta + rot);
            mark(&mut pattern, height, width, cr + r * sin * sr, cc + r * cos * sc);
            theta += 0.5 / math::sqrt(r * r + a * a);
        }
    }
    pattern
}

/// Largest arm count tried when matching the target acceleration.
pub const MAX_SPIRAL_ARMS: usize = 32;

/// Pseudo-spiral mask: interleaved Archimedean arms from the center out to
/// the inscribed circle.
///
/// Neighbouring passes are `R` pixels apart radially; the arm count in
/// `1..=32` whose unrotated rasterization lands closest to `R` is used,
/// then the seed rotates every arm by a common phase.
pub fn pseudo_spiral_mask(height: usize, width: usize, accel: f64, seed: u64) -> Result<SamplingMask> {
    check_dims(height, width)?;
    check_accel(accel)?;
    let n = (height * width) as f64;
    let achieved = |p: &[bool]| n / p.iter().filter(|&&s| s).count() as f64;
    let mut best = (f64::INFINITY, 1);
    for arms in 1..=MAX_SPIRAL_ARMS {
        let err = (achieved(&rasterize_spiral(height, width, arms, accel, 0.0)) / accel - 1.0).abs();
        if err < best.0 {
            best = (err, arms);
        }
    }
    let phase = SplitMix64::new(seed).next_f64() * 2.0 * PI;
    let pattern = rasterize_spiral(height, width, best.1, accel, phase);
    SamplingMask::new(height, width, pattern, AcsRegion::None, MaskScheme::PseudoSpiral, accel)
}

/// Dispatch by scheme. `acs` is the ACS line count for rectilinear schemes
/// and the disc radius for Gaussian 2D; radial and spiral ignore it.
pub fn generate(
    scheme: MaskScheme,
    height: usize,
    width: usize,
    accel: f64,
    acs: usize,
    seed: u64,
) -> Result<SamplingMask> {
    match scheme {
        MaskScheme::Equispaced => equispaced_mask(height, width, accel, acs, seed),
        MaskScheme::RandomRectilinear => random_rectilinear_mask(height, width, accel, acs, seed),
        MaskScheme::Gaussian2d => gaussian2d_mask(height, width, accel, acs, seed),
        MaskScheme::PseudoRadial => pseudo_radial_mask(height, width, accel, seed),
        MaskScheme::PseudoSpiral => pseudo_spiral_mask(height, width, accel, seed),
        MaskScheme::Full => SamplingMask::full(height, width),
        MaskScheme::Custom => invalid!("custom masks have no generator"),
    }
}
