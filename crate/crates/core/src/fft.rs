//! Radix-2 FFT on power-of-two grids.
//!
//! Conventions: `forward` computes `X_m = sum_a x_a e^{-2 pi i a m / n}` with
//! no scaling; `inverse` computes `x_a = sum_m X_m e^{+2 pi i a m / n}` with
//! no scaling. A forward-then-inverse round trip therefore multiplies by `n`.

use crate::C64;

fn transform(data: &mut [C64], sign: f64) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            data.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }

    let mut len = 2;
    while len <= n {
        let ang = sign * std::f64::consts::TAU / len as f64;
        let w_len = C64::from_polar(1.0, ang);
        for start in (0..n).step_by(len) {
            let mut w = C64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
                w *= w_len;
            }
        }
        len <<= 1;
    }
}

/// In-place unscaled forward transform; length must be a power of two.
pub fn forward(data: &mut [C64]) {
    transform(data, -1.0);
}

/// In-place unscaled inverse transform; length must be a power of two.
pub fn inverse(data: &mut [C64]) {
    transform(data, 1.0);
}

/// Unscaled forward transform of a `g x g` row-major grid, rows then columns.
pub fn forward2(data: &mut [C64], g: usize) {
    transform2(data, g, -1.0);
}

/// Unscaled inverse transform of a `g x g` row-major grid.
pub fn inverse2(data: &mut [C64], g: usize) {
    transform2(data, g, 1.0);
}

fn transform2(data: &mut [C64], g: usize, sign: f64) {
    debug_assert_eq!(data.len(), g * g);
    for row in data.chunks_exact_mut(g) {
        transform(row, sign);
    }
    let mut col = vec![C64::new(0.0, 0.0); g];
    for c in 0..g {
        for r in 0..g {
            col[r] = data[r * g + c];
        }
        transform(&mut col, sign);
        for r in 0..g {
            data[r * g + c] = col[r];
        }
    }
}
