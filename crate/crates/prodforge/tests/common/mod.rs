//! Shared test oracles, independent of the library computation paths.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::Zero;
use prodforge::Rational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formal log of a power series with constant term 1: given
/// `f = 1 + f_1 x + f_2 x^2 + ...` (index = degree), returns
/// `g = log f` to the same length via `m g_m = m f_m - sum_{j<m} j g_j f_{m-j}`.
pub fn log_series(f: &[Rational]) -> Vec<Rational> {
    let n = f.len();
    let mut g = vec![Rational::zero(); n];
    for m in 1..n {
        let mut acc = rat_int(m as i64) * &f[m];
        for j in 1..m {
            if !g[j].is_zero() && !f[m - j].is_zero() {
                acc -= rat_int(j as i64) * &g[j] * &f[m - j];
            }
        }
        g[m] = acc / rat_int(m as i64);
    }
    g
}

/// Taylor series of `sin x / x` in the squared variable `y = x^2`:
/// coefficient of `y^m` is `(-1)^m / (2m+1)!`.
pub fn sinx_over_x_series(len: usize) -> Vec<Rational> {
    let mut f = Vec::with_capacity(len);
    let mut fact = BigInt::from(1); // (2m+1)! running value
    for m in 0..len {
        if m > 0 {
            fact *= BigInt::from(2 * m) * BigInt::from(2 * m + 1);
        }
        let sign = if m % 2 == 0 { 1 } else { -1 };
        f.push(Rational::new(BigInt::from(sign), fact.clone()));
    }
    f
}

/// Taylor series of `cos x` in the squared variable `y = x^2`:
/// coefficient of `y^m` is `(-1)^m / (2m)!`.
pub fn cos_series(len: usize) -> Vec<Rational> {
    let mut f = Vec::with_capacity(len);
    let mut fact = BigInt::from(1); // (2m)! running value
    for m in 0..len {
        if m > 0 {
            fact *= BigInt::from(2 * m - 1) * BigInt::from(2 * m);
        }
        let sign = if m % 2 == 0 { 1 } else { -1 };
        f.push(Rational::new(BigInt::from(sign), fact.clone()));
    }
    f
}

/// Trial-division Möbius, independent of the sieve.
pub fn naive_mobius(n: u64) -> i32 {
    let mut m = n;
    let mut k = 0;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return 0;
            }
            k += 1;
        }
        p += 1;
    }
    if m > 1 {
        k += 1;
    }
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Brute-force divisor list.
pub fn naive_divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}
