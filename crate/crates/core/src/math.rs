//! Scalar helpers that `no_std` does not provide out of the box.

use alloc::vec::Vec;

use nalgebra::linalg::SymmetricEigen;

use crate::{CMatrix, C64};

/// ln(n!) via `lgamma`; exact products below 20 keep small-n values tight.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n < 20 {
        let mut acc = 1.0f64;
        for k in 2..=n {
            acc *= k as f64;
        }
        libm::log(acc)
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Poisson probability mass `mean^n e^{-mean} / n!`.
pub fn poisson_pmf(mean: f64, n: usize) -> f64 {
    if mean <= 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(n as f64 * libm::log(mean) - mean - ln_factorial(n))
}

/// Poisson mass at or above `from`, summed term by term (no `1 - cdf`
/// cancellation).
pub fn poisson_tail(mean: f64, from: usize) -> f64 {
    if mean <= 0.0 {
        return if from == 0 { 1.0 } else { 0.0 };
    }
    let mut sum = 0.0;
    let mut n = from;
    let mut term = poisson_pmf(mean, n);
    loop {
        sum += term;
        n += 1;
        term *= mean / n as f64;
        if (n as f64 > mean && term <= sum * 1e-18) || term == 0.0 || n > from + 100_000 {
            break;
        }
    }
    sum
}

/// `-x log2 x`, zero at (and numerically below) zero.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * libm::log2(x)
    }
}

/// Entropy in bits of the two-outcome distribution `(p, 1-p)`.
pub fn binary_entropy_bits(p: f64) -> f64 {
    xlog2x(p) + xlog2x(1.0 - p)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Von Neumann entropy in bits from a spectrum.
pub(crate) fn entropy_bits_of(spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|&l| xlog2x(l)).sum()
}

/// Largest absolute entry.
pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor series that is
/// truncated once a term's 1-norm drops below `tol`.
pub(crate) fn expm(generator: &CMatrix, tol: f64) -> CMatrix {
    let dim = generator.nrows();
    let norm = one_norm(generator);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = generator * C64::new(scale, 0.0);
    let mut sum = CMatrix::identity(dim, dim);
    let mut term = CMatrix::identity(dim, dim);
    for k in 1..=64 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if one_norm(&term) < tol {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{-x} - 1 + x` without cancellation for small `x`.
pub(crate) fn exp_neg_minus_one_plus(x: f64) -> f64 {
    if libm::fabs(x) < 1e-3 {
        // x²/2 - x³/6 + x⁴/24 - x⁵/120
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0)
    } else {
        libm::expm1(-x) + x
    }
}

/// `2(x - y) - y²` with `y = 1 - e^{-x}`, which is `O(x³)` near zero.
pub(crate) fn coherence_excess(x: f64) -> f64 {
    if libm::fabs(x) < 1e-2 {
        let x3 = x * x * x;
        x3 * (2.0 / 3.0
            + x * (-0.5 + x * (7.0 / 30.0 + x * (-1.0 / 12.0 + x * (31.0 / 1260.0 - x / 160.0)))))
    } else {
        let y = one_minus_exp_neg(x);
        2.0 * (x - y) - y * y
    }
}

/// `1 - e^{-x}` without cancellation.
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    -libm::expm1(-x)
}
