//! Exact-length discrete Fourier transforms.
//!
//! Frame lengths come straight from millisecond durations (662 samples for
//! 30 ms at 22050 Hz), so the transform must handle arbitrary sizes without
//! zero-padding: padding would move spectral peaks to different bins.
//! Power-of-two sizes use an iterative radix-2 kernel, sizes whose prime
//! factors are all small use recursive mixed-radix decimation in time, and
//! everything else goes through Bluestein's chirp-z reformulation on top of
//! a power-of-two transform.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use num_complex::Complex64;

/// Largest prime factor handled by the generic mixed-radix butterfly.
const MAX_RADIX: usize = 13;

/// A planned forward transform of a fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    plan: Plan,
}

#[derive(Debug, Clone)]
enum Plan {
    Trivial,
    Radix2 { twiddles: Vec<Complex64>, bitrev: Vec<u32> },
    MixedRadix { factors: Vec<usize>, twiddles: Vec<Complex64> },
    Bluestein { inner: Box<Fft>, chirp: Vec<Complex64>, kernel: Vec<Complex64> },
}

fn unit(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// `e^{-2πi j/n}` for `j < count`.
fn twiddle_table(n: usize, count: usize) -> Vec<Complex64> {
    (0..count).map(|j| unit(-2.0 * PI * j as f64 / n as f64)).collect()
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n.is_multiple_of(4) {
        factors.push(4);
        n /= 4;
    }
    let mut f = 2;
    while n > 1 {
        while n.is_multiple_of(f) {
            factors.push(f);
            n /= f;
        }
        f += 1;
        if f * f > n && n > 1 {
            factors.push(n);
            break;
        }
    }
    factors
}

impl Fft {
    pub fn new(len: usize) -> Self {
        let plan = if len <= 1 {
            Plan::Trivial
        } else if len.is_power_of_two() {
            let bits = len.trailing_zeros();
            let bitrev = (0..len as u32).map(|i| i.reverse_bits() >> (32 - bits)).collect();
            Plan::Radix2 { twiddles: twiddle_table(len, len / 2), bitrev }
        } else {
            let factors = factorize(len);
            if factors.iter().all(|&f| f <= MAX_RADIX) {
                Plan::MixedRadix { factors, twiddles: twiddle_table(len, len) }
            } else {
                Self::bluestein(len)
            }
        };
        Fft { len, plan }
    }

    fn bluestein(n: usize) -> Plan {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Box::new(Fft::new(m));
        // j² mod 2n keeps the chirp angle small and accurate for large j.
        let two_n = 2 * n as u64;
        let chirp: Vec<Complex64> = (0..n as u64).map(|j| unit(-PI * ((j * j) % two_n) as f64 / n as f64)).collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for j in 1..n {
            kernel[j] = chirp[j].conj();
            kernel[m - j] = chirp[j].conj();
        }
        inner.process(&mut kernel);
        let scale = 1.0 / m as f64;
        for k in &mut kernel {
            *k *= scale;
        }
        Plan::Bluestein { inner, chirp, kernel }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Scratch length needed by [`Fft::process_with_scratch`].
    pub fn scratch_len(&self) -> usize {
        match &self.plan {
            Plan::Trivial | Plan::Radix2 { .. } => 0,
            Plan::MixedRadix { .. } => self.len,
            Plan::Bluestein { inner, .. } => inner.len(),
        }
    }

    /// In-place forward transform `X[k] = Σ x[m] e^{-2πi km/N}`.
    pub fn process(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.process_with_scratch(buf, &mut scratch);
    }

    pub fn process_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length must match the planned length");
        match &self.plan {
            Plan::Trivial => {}
            Plan::Radix2 { twiddles, bitrev } => radix2(buf, twiddles, bitrev),
            Plan::MixedRadix { factors, twiddles } => {
                let scratch = &mut scratch[..self.len];
                scratch.copy_from_slice(buf);
                mixed_radix(buf, scratch, 1, factors, twiddles, 1);
            }
            Plan::Bluestein { inner, chirp, kernel } => {
                let work = &mut scratch[..inner.len()];
                for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(chirp)) {
                    *w = x * c;
                }
                work[self.len..].fill(Complex64::new(0.0, 0.0));
                inner.process_with_scratch(work, &mut []);
                // Pointwise product with the conjugated kernel spectrum, then an
                // inverse transform via conj ∘ FFT ∘ conj (1/m is folded in).
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w = (*w * k).conj();
                }
                inner.process_with_scratch(work, &mut []);
                for (x, (w, c)) in buf.iter_mut().zip(work.iter().zip(chirp)) {
                    *x = w.conj() * c;
                }
            }
        }
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[u32]) {
    let n = buf.len();
    for (i, &j) in bitrev.iter().enumerate() {
        let j = j as usize;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = n / size;
        for chunk in buf.chunks_exact_mut(size) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[j * step];
                *b = *a - t;
                *a += t;
            }
        }
        size *= 2;
    }
}

/// Decimation in time: `input[0], input[stride], …` (p·m values) become
/// `out`, where `fstride` maps the current size onto the full twiddle table.
fn mixed_radix(
    out: &mut [Complex64],
    input: &[Complex64],
    stride: usize,
    factors: &[usize],
    twiddles: &[Complex64],
    fstride: usize,
) {
    let n = out.len();
    let p = factors[0];
    let m = n / p;
    if m == 1 {
        for (q, o) in out.iter_mut().enumerate() {
            *o = input[q * stride];
        }
    } else {
        for q in 0..p {
            mixed_radix(
                &mut out[q * m..(q + 1) * m],
                &input[q * stride..],
                stride * p,
                &factors[1..],
                twiddles,
                fstride * p,
            );
        }
    }

    let full = twiddles.len();
    let mut tmp = [Complex64::new(0.0, 0.0); MAX_RADIX + 3];
    for u in 0..m {
        for q in 0..p {
            tmp[q] = out[q * m + u];
        }
        for k in 0..p {
            let freq = u + k * m;
            let mut acc = tmp[0];
            for (q, t) in tmp.iter().enumerate().take(p).skip(1) {
                let idx = ((q * freq) % n) * fstride % full;
                acc += t * twiddles[idx];
            }
            out[freq] = acc;
        }
    }
}

/// Forward transform of real input returning bins `0..=n/2`.
///
/// Even lengths pack the signal into a half-length complex transform and
/// untangle the even/odd spectra afterwards.
#[derive(Debug, Clone)]
pub struct RealFft {
    len: usize,
    inner: Fft,
    twiddles: Vec<Complex64>,
}

impl RealFft {
    pub fn new(len: usize) -> Self {
        assert!(len >= 2, "real transform needs at least two samples");
        if len.is_multiple_of(2) {
            RealFft { len, inner: Fft::new(len / 2), twiddles: twiddle_table(len, len / 2 + 1) }
        } else {
            RealFft { len, inner: Fft::new(len), twiddles: Vec::new() }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn output_len(&self) -> usize {
        self.len / 2 + 1
    }

    /// Buffer length needed by [`RealFft::process`] for its work area.
    pub fn scratch_len(&self) -> usize {
        self.inner.len() + self.inner.scratch_len()
    }

    pub fn process(&self, input: &[f64], output: &mut [Complex64], scratch: &mut [Complex64]) {
        assert_eq!(input.len(), self.len);
        assert_eq!(output.len(), self.output_len());
        let (work, inner_scratch) = scratch.split_at_mut(self.inner.len());
        if self.len % 2 == 1 {
            for (w, &x) in work.iter_mut().zip(input) {
                *w = Complex64::new(x, 0.0);
            }
            self.inner.process_with_scratch(work, inner_scratch);
            output.copy_from_slice(&work[..output.len()]);
            return;
        }
        let half = self.len / 2;
        for (w, pair) in work.iter_mut().zip(input.chunks_exact(2)) {
            *w = Complex64::new(pair[0], pair[1]);
        }
        self.inner.process_with_scratch(work, inner_scratch);
        for (k, out) in output.iter_mut().enumerate() {
            let zk = work[k % half];
            let zc = work[(half - k % half) % half].conj();
            let even = (zk + zc) * 0.5;
            let diff = (zk - zc) * 0.5;
            // (zk - zc) / 2i
            let odd = Complex64::new(diff.im, -diff.re);
            *out = even + self.twiddles[k] * odd;
        }
    }
}
