//! The CKS container: a 23-byte header followed by a flat payload.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "CKS1"
//!      4     2  version (u16 LE, currently 1)
//!      6     1  kind (0 kspace, 1 image, 2 mask, 3 sensmaps)
//!      7    16  dims: coils, frames, height, width (u32 LE each)
//!     23     …  payload in (coil, frame, row, col) order
//! ```
//!
//! Complex payloads are interleaved `f32` pairs; masks are one byte per
//! element, 0 or 1. Values are widened to `f64` on load.

use std::fs;
use std::path::Path;

use mri_admm_core::{ComplexImage, KSpaceData, SamplingMask, SensitivityMaps};
use num_complex::Complex64;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"CKS1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CksKind {
    KSpace = 0,
    Image = 1,
    Mask = 2,
    SensMaps = 3,
}

impl CksKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(CksKind::KSpace),
            1 => Some(CksKind::Image),
            2 => Some(CksKind::Mask),
            3 => Some(CksKind::SensMaps),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CksKind::KSpace => "kspace",
            CksKind::Image => "image",
            CksKind::Mask => "mask",
            CksKind::SensMaps => "sensmaps",
        }
    }

    fn element_size(self) -> usize {
        if self == CksKind::Mask {
            1
        } else {
            8
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CksObject {
    KSpace(KSpaceData),
    Image(ComplexImage),
    Mask(SamplingMask),
    SensMaps(SensitivityMaps),
}

impl CksObject {
    pub fn kind(&self) -> CksKind {
        match self {
            CksObject::KSpace(_) => CksKind::KSpace,
            CksObject::Image(_) => CksKind::Image,
            CksObject::Mask(_) => CksKind::Mask,
            CksObject::SensMaps(_) => CksKind::SensMaps,
        }
    }

    /// `[coils, frames, height, width]`, unused axes set to 1.
    pub fn dims(&self) -> [usize; 4] {
        match self {
            CksObject::KSpace(k) => {
                let (c, f, h, w) = k.dims();
                [c, f, h, w]
            }
            CksObject::Image(x) => [1, x.n_frames(), x.height(), x.width()],
            CksObject::Mask(m) => [1, 1, m.height(), m.width()],
            CksObject::SensMaps(s) => [s.n_coils(), 1, s.height(), s.width()],
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("byte 0: bad magic {found:?}, expected \"CKS1\"")]
    BadMagic { found: [u8; 4] },
    #[error("byte 4: unsupported version {found}, expected {VERSION}")]
    BadVersion { found: u16 },
    #[error("byte 6: unknown kind {found}")]
    BadKind { found: u8 },
    #[error("byte {offset}: {message}")]
    BadDims { offset: usize, message: String },
    #[error("truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("trailing data: expected {expected} bytes, found {actual}")]
    Trailing { expected: usize, actual: usize },
    #[error("byte {offset}: mask value {value} is not 0 or 1")]
    BadMaskByte { offset: usize, value: u8 },
    #[error("byte {offset}: {message}")]
    BadPayload { offset: usize, message: String },
}

#[derive(Debug, Error)]
pub enum CksError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
}

fn push_complex(out: &mut Vec<u8>, data: &[Complex64]) {
    for z in data {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
}

pub fn encode(obj: &CksObject) -> Vec<u8> {
    let dims = obj.dims();
    let n: usize = dims.iter().product();
    let mut out = Vec::with_capacity(HEADER_LEN + n * obj.kind().element_size());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(obj.kind() as u8);
    for d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    match obj {
        CksObject::KSpace(k) => push_complex(&mut out, k.data()),
        CksObject::Image(x) => push_complex(&mut out, x.data()),
        CksObject::Mask(m) => out.extend(m.pattern().iter().map(|&b| b as u8)),
        CksObject::SensMaps(s) => push_complex(&mut out, s.maps()),
    }
    out
}

fn read_complex(payload: &[u8]) -> Vec<Complex64> {
    payload
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect()
}

fn first_non_finite(payload: &[u8]) -> Option<usize> {
    payload
        .chunks_exact(4)
        .position(|c| !f32::from_le_bytes([c[0], c[1], c[2], c[3]]).is_finite())
        .map(|i| HEADER_LEN + 4 * i)
}

pub fn decode(bytes: &[u8]) -> Result<CksObject, FormatError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(FormatError::BadMagic { found: [bytes[0], bytes[1], bytes[2], bytes[3]] });
        }
        return Err(FormatError::Truncated { expected: HEADER_LEN, actual: bytes.len() });
    }
    let magic = [bytes[0], bytes[1], bytes[2], bytes[3]];
    if magic != MAGIC {
        return Err(FormatError::BadMagic { found: magic });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(FormatError::BadVersion { found: version });
    }
    let kind = CksKind::from_byte(bytes[6]).ok_or(FormatError::BadKind { found: bytes[6] })?;
    let mut dims = [0usize; 4];
    for (i, d) in dims.iter_mut().enumerate() {
        let o = 7 + 4 * i;
        *d = u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as usize;
        if *d == 0 {
            return Err(FormatError::BadDims { offset: o, message: format!("dimension {i} is zero") });
        }
    }
    let [nc, nf, h, w] = dims;
    let unit_axis = |axis: usize, name: &str| -> Result<(), FormatError> {
        if dims[axis] != 1 {
            return Err(FormatError::BadDims {
                offset: 7 + 4 * axis,
                message: format!("{} files need {name} = 1, found {}", kind.name(), dims[axis]),
            });
        }
        Ok(())
    };
    match kind {
        CksKind::Image => unit_axis(0, "coils")?,
        CksKind::Mask => {
            unit_axis(0, "coils")?;
            unit_axis(1, "frames")?;
        }
        CksKind::SensMaps => unit_axis(1, "frames")?,
        CksKind::KSpace => {}
    }
    let expected = dims
        .iter()
        .try_fold(kind.element_size(), |acc, &d| acc.checked_mul(d))
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or_else(|| FormatError::BadDims { offset: 7, message: "dimensions overflow".into() })?;
    if bytes.len() < expected {
        return Err(FormatError::Truncated { expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(FormatError::Trailing { expected, actual: bytes.len() });
    }
    let payload = &bytes[HEADER_LEN..];
    let bad = |e: mri_admm_core::Error| FormatError::BadPayload { offset: HEADER_LEN, message: e.to_string() };
    if kind != CksKind::Mask {
        if let Some(offset) = first_non_finite(payload) {
            return Err(FormatError::BadPayload { offset, message: "non-finite value".into() });
        }
    }
    Ok(match kind {
        CksKind::KSpace => CksObject::KSpace(KSpaceData::new(nc, nf, h, w, read_complex(payload)).map_err(bad)?),
        CksKind::Image => CksObject::Image(ComplexImage::new(nf, h, w, read_complex(payload)).map_err(bad)?),
        CksKind::Mask => {
            if let Some(i) = payload.iter().position(|&b| b > 1) {
                return Err(FormatError::BadMaskByte { offset: HEADER_LEN + i, value: payload[i] });
            }
            let pattern = payload.iter().map(|&b| b == 1).collect();
            CksObject::Mask(SamplingMask::from_pattern(h, w, pattern).map_err(bad)?)
        }
        CksKind::SensMaps => {
            let maps = read_complex(payload);
            let n = h * w;
            let support = (0..n).map(|p| (0..nc).any(|k| maps[k * n + p].norm_sqr() > 0.0)).collect();
            CksObject::SensMaps(SensitivityMaps::new(nc, h, w, maps, support).map_err(bad)?)
        }
    })
}

pub fn write_cks(path: impl AsRef<Path>, obj: &CksObject) -> Result<(), CksError> {
    let path = path.as_ref();
    fs::write(path, encode(obj)).map_err(|source| CksError::Io { path: path.display().to_string(), source })
}

pub fn read_cks(path: impl AsRef<Path>) -> Result<CksObject, CksError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CksError::Io { path: path.display().to_string(), source })?;
    decode(&bytes).map_err(|source| CksError::Format { path: path.display().to_string(), source })
}

macro_rules! typed_reader {
    ($name:ident, $variant:ident, $ty:ty) => {
        pub fn $name(path: impl AsRef<Path>) -> anyhow::Result<$ty> {
            let path = path.as_ref();
            match read_cks(path)? {
                CksObject::$variant(v) => Ok(v),
                other => anyhow::bail!(
                    "{}: expected a {} file, found {}",
                    path.display(),
                    CksKind::$variant.name(),
                    other.kind().name()
                ),
            }
        }
    };
}

typed_reader!(read_kspace, KSpace, KSpaceData);
typed_reader!(read_image, Image, ComplexImage);
typed_reader!(read_mask, Mask, SamplingMask);
typed_reader!(read_sens, SensMaps, SensitivityMaps);
