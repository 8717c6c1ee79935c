//! Unnormalized 1D and 2D discrete Fourier transforms.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey kernel; every
//! other length goes through Bluestein's chirp-z reformulation on a padded
//! power-of-two grid, so arbitrary (including odd) grid sizes are supported.
//! Forward is `X[k] = Σ x[n] e^{-2πi nk/N}`; inverse uses `+` and is also
//! unscaled. Scaling and centering are applied one level up in
//! [`crate::fourier`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    /// `e^{-2πi k/n}` for `k < n/2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| {
                let (s, c) = math::sincos(-2.0 * PI * k as f64 / n as f64);
                Complex64::new(c, s)
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }).collect();
        Self { n, twiddles, bitrev }
    }

    fn process(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if dir == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    /// `e^{-πi k²/n}` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp filter, zero-padded to `inner.n`.
    filter: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k² mod 2n keeps the phase argument small for large k.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n as u128)) as f64;
                let (s, c) = math::sincos(-PI * k2 / n as f64);
                Complex64::new(c, s)
            })
            .collect();
        let mut filter = vec![Complex64::new(0.0, 0.0); m];
        filter[0] = chirp[0].conj();
        for k in 1..n {
            filter[k] = chirp[k].conj();
            filter[m - k] = chirp[k].conj();
        }
        inner.process(&mut filter, Direction::Forward);
        Self { n, inner, chirp, filter }
    }

    fn process(&self, data: &mut [Complex64], dir: Direction, work: &mut Vec<Complex64>) {
        let n = self.n;
        let m = self.inner.n;
        work.clear();
        work.resize(m, Complex64::new(0.0, 0.0));
        // The inverse transform is the forward transform of the conjugate, conjugated.
        for k in 0..n {
            let x = if dir == Direction::Inverse { data[k].conj() } else { data[k] };
            work[k] = x * self.chirp[k];
        }
        self.inner.process(work, Direction::Forward);
        for (w, f) in work.iter_mut().zip(&self.filter) {
            *w *= f;
        }
        self.inner.process(work, Direction::Inverse);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            let y = work[k] * self.chirp[k] * scale;
            data[k] = if dir == Direction::Inverse { y.conj() } else { y };
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// A reusable 1D transform plan for a fixed length.
#[derive(Debug, Clone)]
pub struct Fft1d {
    n: usize,
    kernel: Kernel,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        let kernel = match n {
            0 | 1 => Kernel::Trivial,
            n if n.is_power_of_two() => Kernel::Radix2(Radix2::new(n)),
            n => Kernel::Bluestein(Bluestein::new(n)),
        };
        Self { n, kernel }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unscaled transform. `work` is scratch space for the Bluestein path.
    pub fn process(&self, data: &mut [Complex64], dir: Direction, work: &mut Vec<Complex64>) {
        assert_eq!(data.len(), self.n, "buffer length does not match plan");
        match &self.kernel {
            Kernel::Trivial => {}
            Kernel::Radix2(k) => k.process(data, dir),
            Kernel::Bluestein(k) => k.process(data, dir, work),
        }
    }
}

/// Unscaled, unshifted 2D transform over a row-major `height × width` grid.
#[derive(Debug, Clone)]
pub struct Fft2d {
    height: usize,
    width: usize,
    rows: Fft1d,
    cols: Fft1d,
}

impl Fft2d {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width, rows: Fft1d::new(width), cols: Fft1d::new(height) }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn process(&self, data: &mut [Complex64], dir: Direction) {
        let (h, w) = (self.height, self.width);
        assert_eq!(data.len(), h * w, "buffer length does not match plan");
        let mut work = Vec::new();
        for row in data.chunks_exact_mut(w) {
            self.rows.process(row, dir, &mut work);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); h];
        for c in 0..w {
            for r in 0..h {
                column[r] = data[r * w + c];
            }
            self.cols.process(&mut column, dir, &mut work);
            for r in 0..h {
                data[r * w + c] = column[r];
            }
        }
    }
}
