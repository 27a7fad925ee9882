//! Integer cross-correlation of lattice sets, by direct accumulation or FFT.
//!
//! `correlate_sets(a, b)` returns `c[τ] = |a ∩ (b + τ)| = Σ_x a[x] b[x − τ]`
//! over the full support `τ ∈ [a.min − b.max, a.max − b.min]`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::lattice::{CountBox, LatticeSet};
use crate::error::{Error, Result};

/// Correlation back end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Direct,
    Fft,
    /// Direct when the pair count is small relative to the transform size.
    #[default]
    Auto,
}

/// Largest padded transform (complex elements) we are willing to allocate.
pub const MAX_FFT_ELEMENTS: usize = 1 << 26;

fn support(a: &LatticeSet, b: &LatticeSet) -> Option<([i64; 3], [usize; 3])> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (amin, bmax) = (a.min(), b.max());
    let (da, db) = (a.dims(), b.dims());
    Some(([0, 1, 2].map(|i| amin[i] - bmax[i]), [0, 1, 2].map(|i| da[i] + db[i] - 1)))
}

pub fn correlate_sets(a: &LatticeSet, b: &LatticeSet, method: Method) -> Result<CountBox> {
    let method = match method {
        Method::Auto => {
            let Some((_, dims)) = support(a, b) else {
                return Ok(CountBox::empty());
            };
            let pairs = a.count() as f64 * b.count() as f64;
            let n: f64 = dims.iter().map(|&d| fft_len(d) as f64).product();
            // Rough operation counts; the FFT does three passes of n log n.
            if pairs <= 12.0 * n * n.log2().max(1.0) {
                Method::Direct
            } else {
                Method::Fft
            }
        }
        m => m,
    };
    match method {
        Method::Fft => correlate_fft(a, b),
        _ => Ok(correlate_direct(a, b)),
    }
}

/// Accumulates every member pair. Cost is `|a|·|b|`.
pub fn correlate_direct(a: &LatticeSet, b: &LatticeSet) -> CountBox {
    let Some((min, dims)) = support(a, b) else {
        return CountBox::empty();
    };
    let stride = [1, dims[0], dims[0] * dims[1]];
    let (amin, bmax) = (a.min(), b.max());
    // Output index of τ = x − y splits into a part from x and a part from y.
    let offs = |p: [i64; 3], base: [i64; 3], sign: i64| -> usize {
        (0..3).map(|i| (sign * (p[i] - base[i])) as usize * stride[i]).sum()
    };
    let pa: Vec<usize> = a.points().map(|x| offs(x, amin, 1)).collect();
    let pb: Vec<usize> = b.points().map(|y| offs(y, bmax, -1)).collect();
    let mut counts = vec![0u32; dims[0] * dims[1] * dims[2]];
    for &i in &pa {
        for &j in &pb {
            counts[i + j] += 1;
        }
    }
    CountBox { min, dims, counts }
}

/// Smallest 2^a·3^b·5^c that is at least `n`.
pub(crate) fn fft_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// In-place 3D transform of an x-fastest array with extents `len`.
fn fft3(data: &mut [Complex<f64>], len: [usize; 3], planner: &mut FftPlanner<f64>, inverse: bool) {
    let mut scratch = vec![Complex::new(0.0, 0.0); data.len()];
    for axis in 0..3 {
        let n = len[axis];
        if n == 1 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        if axis == 0 {
            fft.process(data);
            continue;
        }
        // Gather lines along `axis` contiguously, transform, scatter back.
        let stride = if axis == 1 { len[0] } else { len[0] * len[1] };
        let outer = data.len() / n;
        let mut line = 0;
        for base in 0..data.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for k in 0..n {
                scratch[line * n + k] = data[base + k * stride];
            }
            line += 1;
        }
        debug_assert_eq!(line, outer);
        fft.process(&mut scratch);
        line = 0;
        for base in 0..data.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for k in 0..n {
                data[base + k * stride] = scratch[line * n + k];
            }
            line += 1;
        }
    }
}

/// Same result as [`correlate_direct`], computed with one forward and one
/// inverse complex transform over the zero-padded support.
pub fn correlate_fft(a: &LatticeSet, b: &LatticeSet) -> Result<CountBox> {
    let Some((min, dims)) = support(a, b) else {
        return Ok(CountBox::empty());
    };
    let len = dims.map(fft_len);
    let total = len
        .iter()
        .try_fold(1usize, |acc, &l| acc.checked_mul(l))
        .filter(|&t| t <= MAX_FFT_ELEMENTS)
        .ok_or(Error::FftTooLarge(len.iter().product()))?;
    let idx = |p: [usize; 3]| p[0] + len[0] * (p[1] + len[1] * p[2]);

    // Pack a in the real part and b in the imaginary part.
    let mut z = vec![Complex::new(0.0, 0.0); total];
    let (da, db) = (a.dims(), b.dims());
    for (k, &v) in a.data().iter().enumerate() {
        if v {
            z[idx([k % da[0], (k / da[0]) % da[1], k / (da[0] * da[1])])].re = 1.0;
        }
    }
    for (k, &v) in b.data().iter().enumerate() {
        if v {
            z[idx([k % db[0], (k / db[0]) % db[1], k / (db[0] * db[1])])].im = 1.0;
        }
    }
    let mut planner = FftPlanner::new();
    fft3(&mut z, len, &mut planner, false);

    // Split the spectra using Hermitian symmetry, then form A·conj(B).
    let neg = |k: usize| -> usize {
        let p = [k % len[0], (k / len[0]) % len[1], k / (len[0] * len[1])];
        idx([0, 1, 2].map(|i| (len[i] - p[i]) % len[i]))
    };
    let mut prod = vec![Complex::new(0.0, 0.0); total];
    for k in 0..total {
        let zk = z[k];
        let zn = z[neg(k)].conj();
        let fa = (zk + zn) * 0.5;
        let fb = (zk - zn) * Complex::new(0.0, -0.5);
        prod[k] = fa * fb.conj();
    }
    fft3(&mut prod, len, &mut planner, true);

    // prod[m] (circular) = Σ_q a[q + m] b[q] with box-relative indices; the
    // lattice offset is τ = m + a.min − b.min, and output index m + db − 1.
    let scale = 1.0 / total as f64;
    let mut counts = vec![0u32; dims[0] * dims[1] * dims[2]];
    for oz in 0..dims[2] {
        for oy in 0..dims[1] {
            for ox in 0..dims[0] {
                let o = [ox, oy, oz];
                let src = [0, 1, 2].map(|i| {
                    let m = o[i] as i64 - (db[i] as i64 - 1);
                    m.rem_euclid(len[i] as i64) as usize
                });
                let v = (prod[idx(src)].re * scale).round();
                counts[ox + dims[0] * (oy + dims[1] * oz)] = if v > 0.0 { v as u32 } else { 0 };
            }
        }
    }
    Ok(CountBox { min, dims, counts })
}
