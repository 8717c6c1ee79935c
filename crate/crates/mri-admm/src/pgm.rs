//! Binary 8-bit PGM (P5) export for masks and magnitude images.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mri_admm_core::{RealImage, SamplingMask};

/// Raw 8-bit grey image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Gray8 {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut fields = Vec::with_capacity(4);
        let mut i = 0;
        while fields.len() < 4 {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if start == i {
                bail!("PGM header ends early");
            }
            fields.push(std::str::from_utf8(&bytes[start..i])?.to_owned());
        }
        if fields[0] != "P5" {
            bail!("not a binary PGM (magic {:?})", fields[0]);
        }
        let width: usize = fields[1].parse()?;
        let height: usize = fields[2].parse()?;
        if fields[3] != "255" {
            bail!("unsupported maxval {}", fields[3]);
        }
        let pixels = bytes.get(i + 1..).unwrap_or_default().to_vec();
        if pixels.len() != width * height {
            bail!("PGM payload has {} bytes, expected {}", pixels.len(), width * height);
        }
        Ok(Self { width, height, pixels })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Sampled points map to 255, the rest to 0.
pub fn mask_image(mask: &SamplingMask) -> Gray8 {
    Gray8 {
        width: mask.width(),
        height: mask.height(),
        pixels: mask.pattern().iter().map(|&s| if s { 255 } else { 0 }).collect(),
    }
}

/// Intensity window used for 8-bit quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub min: f64,
    pub max: f64,
}

impl Scaling {
    pub fn to_text(&self) -> String {
        format!("min={}\nmax={}\n", self.min, self.max)
    }
}

/// Min-max scale to 0..=255 with frames stacked top to bottom.
pub fn magnitude_image(img: &RealImage) -> (Gray8, Scaling) {
    let scaling = Scaling { min: img.min(), max: img.max() };
    let span = scaling.max - scaling.min;
    let pixels = img
        .data()
        .iter()
        .map(|&v| if span > 0.0 { ((v - scaling.min) / span * 255.0).round() as u8 } else { 0 })
        .collect();
    (Gray8 { width: img.width(), height: img.height() * img.n_frames(), pixels }, scaling)
}

/// `out.pgm` → `out.pgm.scale.txt`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".scale.txt");
    PathBuf::from(s)
}

/// Write the image and its scaling sidecar.
pub fn write_magnitude(path: impl AsRef<Path>, img: &RealImage) -> Result<Scaling> {
    let path = path.as_ref();
    let (gray, scaling) = magnitude_image(img);
    gray.write(path)?;
    let side = sidecar_path(path);
    fs::write(&side, scaling.to_text()).with_context(|| format!("writing {}", side.display()))?;
    Ok(scaling)
}
