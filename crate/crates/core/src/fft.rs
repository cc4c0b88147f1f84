//! In-place radix-2 complex FFT for the periodic angular direction.

use core::f64::consts::PI;

use libm::{cos, sin};

/// Transforms `(re, im)` in place. The forward transform is unnormalised;
/// the inverse divides by the length, so `inverse(forward(x)) = x`.
pub(crate) fn transform(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    debug_assert_eq!(n, im.len());
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        for k in 0..half {
            // twiddles from the angle directly keep round-off independent of len
            let (wr, wi) = (cos(ang * k as f64), sin(ang * k as f64));
            let mut start = 0;
            while start < n {
                let a = start + k;
                let b = a + half;
                let tr = re[b] * wr - im[b] * wi;
                let ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                start += len;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v *= scale;
        }
    }
}

/// Signed wave number of FFT bin `k` on `n` points.
pub(crate) fn wave_number(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// First and second angular derivatives of a real periodic row sampled at
/// `n` equispaced points. The Nyquist bin is dropped from the first derivative.
pub(crate) fn derivatives(row: &[f64], d1: &mut [f64], d2: &mut [f64]) {
    let n = row.len();
    if n == 1 {
        d1[0] = 0.0;
        d2[0] = 0.0;
        return;
    }
    let mut re = row.to_vec();
    let mut im = alloc::vec![0.0; n];
    transform(&mut re, &mut im, false);
    let mut re1 = alloc::vec![0.0; n];
    let mut im1 = alloc::vec![0.0; n];
    for k in 0..n {
        let w = wave_number(k, n);
        let nyquist = 2 * k == n;
        if !nyquist {
            re1[k] = -w * im[k];
            im1[k] = w * re[k];
        }
        re[k] *= -w * w;
        im[k] *= -w * w;
    }
    transform(&mut re1, &mut im1, true);
    transform(&mut re, &mut im, true);
    d1.copy_from_slice(&re1);
    d2.copy_from_slice(&re);
}
