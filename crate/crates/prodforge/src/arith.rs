//! Exact integer and rational arithmetic substrate: smallest-prime-factor
//! sieve, factorization, Möbius and square-free predicates, divisor lists,
//! and Bernoulli numbers.
//!
//! Everything here is exact. All types are immutable after construction and
//! safe to share across threads.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision signed rational.
///
/// Stored in lowest terms with a positive denominator; zero is `0/1`. Both
/// invariants are maintained eagerly by every arithmetic operation.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from small integers. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"num/den"` or a bare integer string into a [`Rational`].
///
/// The denominator must be positive; the value is reduced to lowest terms.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |_| Error::InvalidArgument(format!("malformed rational {s:?}"));
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(bad)?;
            Ok(Rational::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num.parse().map_err(bad)?;
            let d: BigInt = den.parse().map_err(bad)?;
            if d.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "zero denominator in rational {s:?}"
                )));
            }
            if d.is_negative() {
                return Err(Error::InvalidArgument(format!(
                    "negative denominator in rational {s:?}"
                )));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Renders a rational as `"num/den"`, or just `"num"` when the denominator
/// is one. This is the exact text form used by all table output.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Converts a rational to the nearest `f64`, correct even when numerator or
/// denominator individually overflow the double range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    if num.is_zero() {
        return 0.0;
    }
    // Shift the quotient into a ~80-bit integer window, convert, then undo
    // the shift in the exponent.
    let nbits = num.bits() as i64;
    let dbits = den.bits() as i64;
    let shift = 80 - (nbits - dbits);
    let q: BigInt = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let q = q.to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(-shift as i32)
}

/// Default sieve bound used by front-end tooling (overridable).
pub const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

/// Absolute cap on the sieve size: 10^8 entries at four bytes each is the
/// documented memory limit for this implementation.
pub const SIEVE_LIMIT_CAP: u64 = 100_000_000;

/// Smallest-prime-factor table for `2 ..= limit`.
///
/// `spf(p) == p` exactly when `p` is prime; otherwise `spf(n)` is the least
/// prime dividing `n` (and therefore at most `sqrt(n)`).
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

/// Builds the smallest-prime-factor sieve for `2 ..= limit`.
///
/// Errors with `InvalidArgument` for `limit < 2` and `ResourceLimit` above
/// [`SIEVE_LIMIT_CAP`]. Construction is deterministic.
pub fn build_spf_sieve(limit: u64) -> Result<SpfTable> {
    if limit < 2 {
        return Err(Error::InvalidArgument(format!(
            "sieve limit must be at least 2, got {limit}"
        )));
    }
    if limit > SIEVE_LIMIT_CAP {
        return Err(Error::ResourceLimit(format!(
            "sieve limit {limit} exceeds the cap {SIEVE_LIMIT_CAP}"
        )));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut i = 2usize;
    while i <= n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            let mut j = i * i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    Ok(SpfTable { limit, spf })
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n` for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Result<u64> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "smallest prime factor is defined for n >= 2, got {n}"
            )));
        }
        self.check_range(n)?;
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        Ok(self.spf(n)? == n)
    }

    fn check_range(&self, n: u64) -> Result<()> {
        if n > self.limit {
            return Err(Error::OutOfRange(format!(
                "{n} exceeds the sieve limit {}",
                self.limit
            )));
        }
        Ok(())
    }
}

/// Prime factorization as an ordered list of `(prime, multiplicity)` pairs
/// with strictly increasing primes. The factorization of 1 is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeFactorization {
    factors: Vec<(u64, u32)>,
}

impl PrimeFactorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Multiplies the factorization back out.
    pub fn value(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Number of distinct prime factors.
    pub fn distinct_primes(&self) -> u32 {
        self.factors.len() as u32
    }
}

/// Factorizes `1 <= n <= sieve.limit()` by repeated smallest-prime lookup.
pub fn factorize(n: u64, sieve: &SpfTable) -> Result<PrimeFactorization> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factorize zero".to_string()));
    }
    sieve.check_range(n)?;
    let mut factors = Vec::new();
    let mut m = n;
    while m > 1 {
        let p = sieve.spf[m as usize] as u64;
        let mut e = 0u32;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        factors.push((p, e));
    }
    Ok(PrimeFactorization { factors })
}

/// Möbius function: 0 when a square divides `n`, otherwise `(-1)^k` for `k`
/// distinct prime factors.
pub fn mobius(n: u64, sieve: &SpfTable) -> Result<i32> {
    let f = factorize(n, sieve)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.distinct_primes() % 2 == 0 { 1 } else { -1 })
}

/// Order of a square-free integer: the count of its distinct prime factors.
///
/// Returns `None` when `n` is not square-free; `squarefree_order(1) == Some(0)`.
pub fn squarefree_order(n: u64, sieve: &SpfTable) -> Result<Option<u32>> {
    let f = factorize(n, sieve)?;
    if f.is_squarefree() {
        Ok(Some(f.distinct_primes()))
    } else {
        Ok(None)
    }
}

/// All divisors of `n`, sorted ascending.
pub fn divisors(n: u64, sieve: &SpfTable) -> Result<Vec<u64>> {
    let f = factorize(n, sieve)?;
    let mut divs = vec![1u64];
    for &(p, e) in f.factors() {
        let prev = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..prev {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    Ok(divs)
}

/// Exact Bernoulli numbers `B_0 ..= B_{2J}` under the `B_1 = -1/2` convention.
///
/// Only even-index values are consumed downstream; the convention is fixed
/// here so the defining recurrence `sum_{i=0}^{m} C(m+1, i) B_i = 0` (m >= 1)
/// holds without sign adjustments.
#[derive(Debug, Clone)]
pub struct BernoulliTable {
    values: Vec<Rational>,
}

/// Computes exact Bernoulli numbers through `B_{2J}` by the binomial
/// recurrence, `J >= 1`.
pub fn bernoulli_table(j_max: u32) -> Result<BernoulliTable> {
    if j_max == 0 {
        return Err(Error::InvalidArgument(
            "Bernoulli table needs J >= 1".to_string(),
        ));
    }
    let max_index = 2 * j_max as usize;
    let mut values: Vec<Rational> = Vec::with_capacity(max_index + 1);
    values.push(Rational::one()); // B_0
    for m in 1..=max_index {
        // sum_{i=0}^{m-1} C(m+1, i) B_i, with C(m+1, i) built incrementally.
        let mut sum = Rational::zero();
        let mut binom = BigInt::one();
        for (i, b) in values.iter().enumerate().take(m) {
            if !b.is_zero() {
                sum += b * Rational::from_integer(binom.clone());
            }
            // C(m+1, i+1) = C(m+1, i) * (m+1-i) / (i+1)
            binom = binom * BigInt::from(m + 1 - i) / BigInt::from(i + 1);
        }
        // C(m+1, m) = m+1, so B_m = -sum / (m+1).
        values.push(-sum / rat_int((m + 1) as i64));
    }
    Ok(BernoulliTable { values })
}

impl BernoulliTable {
    /// Largest tabulated index, `2J`.
    pub fn max_index(&self) -> u32 {
        (self.values.len() - 1) as u32
    }

    /// `B_i` for `i <= 2J`.
    pub fn get(&self, i: u32) -> Result<&Rational> {
        self.values.get(i as usize).ok_or_else(|| {
            Error::OutOfRange(format!(
                "B_{i} not tabulated (max index {})",
                self.max_index()
            ))
        })
    }

    /// `B_{2j}`.
    pub fn even(&self, j: u32) -> Result<&Rational> {
        self.get(2 * j)
    }
}

/// `|B_{2j}| = (-1)^{j-1} B_{2j}` for `j >= 1`.
pub fn bernoulli_abs_even(table: &BernoulliTable, j: u32) -> Result<Rational> {
    Ok(table.even(j)?.abs())
}

/// Exact factorial as a big integer.
pub fn factorial_big(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// `2^e` as a positive big integer.
pub fn big_pow2(e: u64) -> BigInt {
    BigInt::from_biguint(Sign::Plus, num_bigint::BigUint::one() << e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small_values() {
        let s = build_spf_sieve(10).unwrap();
        assert_eq!(s.spf(4).unwrap(), 2);
        assert_eq!(s.spf(9).unwrap(), 3);
        assert_eq!(s.spf(7).unwrap(), 7);
        assert!(s.is_prime(7).unwrap());
        assert!(!s.is_prime(9).unwrap());
    }

    #[test]
    fn sieve_trial_division_spot_check() {
        let s = build_spf_sieve(100).unwrap();
        // 91 = 7 * 13
        assert_eq!(s.spf(91).unwrap(), 7);
    }

    #[test]
    fn sieve_bad_arguments() {
        assert!(matches!(build_spf_sieve(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            build_spf_sieve(SIEVE_LIMIT_CAP + 1),
            Err(Error::ResourceLimit(_))
        ));
        let s = build_spf_sieve(10).unwrap();
        assert!(matches!(s.spf(11), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn factorize_examples() {
        let s = build_spf_sieve(100).unwrap();
        let f36 = factorize(36, &s).unwrap();
        assert_eq!(f36.factors(), &[(2, 2), (3, 2)]);
        let f30 = factorize(30, &s).unwrap();
        assert_eq!(f30.factors(), &[(2, 1), (3, 1), (5, 1)]);
        assert!(factorize(1, &s).unwrap().factors().is_empty());
        assert!(matches!(factorize(0, &s), Err(Error::InvalidArgument(_))));
        assert!(matches!(factorize(101, &s), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn mobius_and_squarefree_order() {
        let s = build_spf_sieve(100).unwrap();
        assert_eq!(mobius(1, &s).unwrap(), 1);
        assert_eq!(mobius(12, &s).unwrap(), 0);
        assert_eq!(mobius(6, &s).unwrap(), 1);
        assert_eq!(squarefree_order(30, &s).unwrap(), Some(3));
        assert_eq!(squarefree_order(1, &s).unwrap(), Some(0));
        assert_eq!(squarefree_order(18, &s).unwrap(), None);
        assert!(matches!(mobius(0, &s), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn divisors_examples() {
        let s = build_spf_sieve(100).unwrap();
        assert_eq!(
            divisors(36, &s).unwrap(),
            vec![1, 2, 3, 4, 6, 9, 12, 18, 36]
        );
        assert_eq!(divisors(30, &s).unwrap(), vec![1, 2, 3, 5, 6, 10, 15, 30]);
        assert_eq!(divisors(1, &s).unwrap(), vec![1]);
    }

    #[test]
    fn bernoulli_base_values() {
        let t = bernoulli_table(6).unwrap();
        assert_eq!(*t.get(0).unwrap(), rat_int(1));
        assert_eq!(*t.get(1).unwrap(), rat(-1, 2));
        assert_eq!(*t.even(1).unwrap(), rat(1, 6));
        assert_eq!(*t.even(2).unwrap(), rat(-1, 30));
        assert_eq!(*t.even(3).unwrap(), rat(1, 42));
        assert_eq!(*t.even(4).unwrap(), rat(-1, 30));
        assert_eq!(*t.even(5).unwrap(), rat(5, 66));
        assert_eq!(*t.even(6).unwrap(), rat(-691, 2730));
        for j in 1..=5 {
            assert!(t.get(2 * j + 1).unwrap().is_zero());
        }
    }

    #[test]
    fn bernoulli_recurrence_holds_exactly() {
        // sum_{i=0}^{m} C(m+1, i) B_i = 0 for every m >= 1, as rationals
        let t = bernoulli_table(20).unwrap();
        for m in 1..=40usize {
            let mut sum = Rational::zero();
            let mut binom = BigInt::one();
            for i in 0..=m {
                sum += t.get(i as u32).unwrap() * Rational::from_integer(binom.clone());
                binom = binom * BigInt::from(m + 1 - i) / BigInt::from(i + 1);
            }
            assert!(sum.is_zero(), "m={m}");
        }
    }

    #[test]
    fn spf_at_most_sqrt_or_prime() {
        let s = build_spf_sieve(2_000).unwrap();
        for n in 2..=2_000u64 {
            let p = s.spf(n).unwrap();
            assert_eq!(n % p, 0, "n={n}");
            assert!(p * p <= n || p == n, "n={n} p={p}");
        }
    }

    #[test]
    fn shared_types_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<SpfTable>();
        check::<PrimeFactorization>();
        check::<BernoulliTable>();
        check::<Rational>();
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(format_rational(&rat(-1, 6)), "-1/6");
        assert_eq!(format_rational(&rat_int(0)), "0");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(parse_rational("-1/6").unwrap(), rat(-1, 6));
        assert_eq!(parse_rational("7").unwrap(), rat_int(7));
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-3").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rational_to_f64_handles_huge_components() {
        let big = BigInt::from(10).pow(400u32);
        let r = Rational::new(big.clone() * 3, big);
        assert_eq!(rational_to_f64(&r), 3.0);
        assert_eq!(rational_to_f64(&rat(1, 3)), 1.0 / 3.0);
        assert_eq!(rational_to_f64(&rat_int(0)), 0.0);
        assert_eq!(rational_to_f64(&rat(-7, 90)), -7.0 / 90.0);
    }
}
