//! Mixed-radix complex FFT for arbitrary lengths, plus a 2D wrapper.
//!
//! The 1D transform is a Stockham autosort decomposition over the prime
//! factorization of the length (radix 4 first, then 2, 3, 5 and any remaining
//! primes through a generic DFT butterfly). Forward transforms use the
//! `exp(-2πi jk/n)` kernel; neither direction normalizes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Precomputed plan for a 1D transform of fixed length.
#[derive(Clone, Debug)]
pub struct Fft {
    len: usize,
    factors: Vec<usize>,
    /// `exp(-2πi k/len)` for k in 0..len.
    twiddles: Vec<Complex64>,
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n.is_multiple_of(4) {
        factors.push(4);
        n /= 4;
    }
    let mut p = 2;
    while n > 1 {
        while n.is_multiple_of(p) {
            factors.push(p);
            n /= p;
        }
        p += 1;
        if p * p > n && n > 1 {
            factors.push(n);
            break;
        }
    }
    factors
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let twiddles = (0..len)
            .map(|k| {
                let angle = -2.0 * PI * (k as f64) / (len as f64);
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Self { len, factors: factorize(len), twiddles }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn twiddle(&self, index: usize, dir: Direction) -> Complex64 {
        let w = self.twiddles[index % self.len];
        match dir {
            Direction::Forward => w,
            Direction::Inverse => w.conj(),
        }
    }

    /// In-place transform of `data` using `scratch` (both of length `len`).
    pub fn process(&self, data: &mut [Complex64], scratch: &mut [Complex64], dir: Direction) {
        let n = self.len;
        assert_eq!(data.len(), n);
        assert_eq!(scratch.len(), n);
        if n == 1 {
            return;
        }
        let mut in_data = true;
        let mut current = n;
        let mut stride = 1;
        for &radix in &self.factors {
            let (src, dst): (&[Complex64], &mut [Complex64]) = if in_data {
                (&*data, &mut *scratch)
            } else {
                (&*scratch, &mut *data)
            };
            self.stage(src, dst, current, stride, radix, dir);
            in_data = !in_data;
            current /= radix;
            stride *= radix;
        }
        if !in_data {
            data.copy_from_slice(scratch);
        }
    }

    fn stage(
        &self,
        src: &[Complex64],
        dst: &mut [Complex64],
        current: usize,
        stride: usize,
        radix: usize,
        dir: Direction,
    ) {
        let m = current / radix;
        // step in the global twiddle table that corresponds to exp(-2πi/current)
        let tw_step = self.len / current;
        match radix {
            2 => {
                for p in 0..m {
                    let w = self.twiddle(p * tw_step, dir);
                    for q in 0..stride {
                        let a = src[q + stride * p];
                        let b = src[q + stride * (p + m)];
                        dst[q + stride * (2 * p)] = a + b;
                        dst[q + stride * (2 * p + 1)] = (a - b) * w;
                    }
                }
            }
            3 => {
                let w3 = self.twiddle(self.len / 3, dir);
                let c = w3.re; // cos(2π/3)
                let s = w3.im; // ∓sin(2π/3)
                for p in 0..m {
                    let w1 = self.twiddle(p * tw_step, dir);
                    let w2 = self.twiddle(2 * p * tw_step, dir);
                    for q in 0..stride {
                        let a0 = src[q + stride * p];
                        let a1 = src[q + stride * (p + m)];
                        let a2 = src[q + stride * (p + 2 * m)];
                        let sum = a1 + a2;
                        let diff = a1 - a2;
                        let mid = a0 + sum * c;
                        let rot = Complex64::new(-diff.im * s, diff.re * s);
                        dst[q + stride * (3 * p)] = a0 + sum;
                        dst[q + stride * (3 * p + 1)] = (mid + rot) * w1;
                        dst[q + stride * (3 * p + 2)] = (mid - rot) * w2;
                    }
                }
            }
            4 => {
                for p in 0..m {
                    let w1 = self.twiddle(p * tw_step, dir);
                    let w2 = self.twiddle(2 * p * tw_step, dir);
                    let w3 = self.twiddle(3 * p * tw_step, dir);
                    for q in 0..stride {
                        let a0 = src[q + stride * p];
                        let a1 = src[q + stride * (p + m)];
                        let a2 = src[q + stride * (p + 2 * m)];
                        let a3 = src[q + stride * (p + 3 * m)];
                        let t0 = a0 + a2;
                        let t1 = a0 - a2;
                        let t2 = a1 + a3;
                        let d = a1 - a3;
                        // multiply by -i (forward) or +i (inverse)
                        let t3 = match dir {
                            Direction::Forward => Complex64::new(d.im, -d.re),
                            Direction::Inverse => Complex64::new(-d.im, d.re),
                        };
                        dst[q + stride * (4 * p)] = t0 + t2;
                        dst[q + stride * (4 * p + 1)] = (t1 + t3) * w1;
                        dst[q + stride * (4 * p + 2)] = (t0 - t2) * w2;
                        dst[q + stride * (4 * p + 3)] = (t1 - t3) * w3;
                    }
                }
            }
            _ => {
                let root_step = self.len / radix;
                let mut gathered = vec![Complex64::new(0.0, 0.0); radix];
                for p in 0..m {
                    for q in 0..stride {
                        for (r, g) in gathered.iter_mut().enumerate() {
                            *g = src[q + stride * (p + r * m)];
                        }
                        for t in 0..radix {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (r, g) in gathered.iter().enumerate() {
                                acc += *g * self.twiddle(((r * t) % radix) * root_step, dir);
                            }
                            dst[q + stride * (radix * p + t)] =
                                acc * self.twiddle(p * t * tw_step, dir);
                        }
                    }
                }
            }
        }
    }
}

/// 2D transform over a row-major `height × width` grid.
#[derive(Clone, Debug)]
pub struct Fft2 {
    width: usize,
    height: usize,
    rows: Fft,
    cols: Fft,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(width: usize, height: usize) -> Self {
        let longest = width.max(height);
        Self {
            width,
            height,
            rows: Fft::new(width),
            cols: Fft::new(height),
            line: vec![Complex64::new(0.0, 0.0); longest],
            scratch: vec![Complex64::new(0.0, 0.0); longest],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn process(&mut self, data: &mut [Complex64], dir: Direction) {
        let (w, h) = (self.width, self.height);
        assert_eq!(data.len(), w * h);
        let scratch = &mut self.scratch[..w];
        for row in data.chunks_exact_mut(w) {
            self.rows.process(row, scratch, dir);
        }
        let line = &mut self.line[..h];
        let scratch = &mut self.scratch[..h];
        for x in 0..w {
            for (y, v) in line.iter_mut().enumerate() {
                *v = data[y * w + x];
            }
            self.cols.process(line, scratch, dir);
            for (y, v) in line.iter().enumerate() {
                data[y * w + x] = *v;
            }
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.process(data, Direction::Forward);
    }

    /// Inverse transform including the `1/(width·height)` normalization.
    pub fn inverse_normalized(&mut self, data: &mut [Complex64]) {
        self.process(data, Direction::Inverse);
        let scale = 1.0 / (self.width * self.height) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Signed frequency index for position `k` of an `n`-point transform.
pub fn signed_frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
