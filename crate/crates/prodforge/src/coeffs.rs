//! Square-free-indexed exponent sequences.
//!
//! Four families are produced, each both by a multiplicative closed form and,
//! independently, by exact forward substitution of the lower-triangular
//! comparison-of-coefficients system it solves:
//!
//! * `a_n`   — exponents of `exp(x) = prod (1 - x^k)^{a_k}`; `a_n = -mu(n)/n`.
//! * `b_n`   — exponents of `exp(x) = prod (1 + x^k)^{b_k}`.
//! * `a_n(s)` — the `s`-weighted variant, `a_n(s) = mu(n)/n^s` (`s >= 2`).
//! * `b_n(s)` — the alternating `s`-weighted variant (`s >= 2`).
//!
//! The two construction routes are tied together by [`certify_tables`], which
//! demands exact rational equality index by index.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use crate::arith::{factorize, rat_int, Rational, SpfTable};
use crate::error::{Error, Result};

/// Which exponent family a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoeffKind {
    /// `a_n`: weights `1/m`, first value `-1`.
    ALog,
    /// `b_n`: weights `(-1)^{m+1}/m`, first value `1`.
    BLog,
    /// `a_n(s)`: weights `1/m^s`, first value `1`.
    AS,
    /// `b_n(s)`: weights `(-1)^{m+1}/m^s`, first value `1`.
    BS,
}

impl CoeffKind {
    pub fn needs_s(self) -> bool {
        matches!(self, CoeffKind::AS | CoeffKind::BS)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CoeffKind::ALog => "a",
            CoeffKind::BLog => "b",
            CoeffKind::AS => "a_s",
            CoeffKind::BS => "b_s",
        }
    }
}

/// How a table's values were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Solver,
}

/// Dense table of exact exponent values indexed `1 ..= limit`.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    kind: CoeffKind,
    s: Option<u32>,
    provenance: Provenance,
    /// `values[n]` for `n` in `1..=limit`; index 0 is an unused zero.
    values: Vec<Rational>,
}

impl CoeffTable {
    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn s(&self) -> Option<u32> {
        self.s
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// Value at index `n`, `1 <= n <= limit`.
    pub fn get(&self, n: u64) -> Result<&Rational> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "coefficient index starts at 1".to_string(),
            ));
        }
        self.values.get(n as usize).ok_or_else(|| {
            Error::OutOfRange(format!("index {n} exceeds table limit {}", self.limit()))
        })
    }

    /// All values as a slice; entry 0 is a placeholder zero.
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Builds the table from the closed forms, `1 ..= limit`.
    pub fn closed_form(
        kind: CoeffKind,
        limit: u64,
        s: Option<u32>,
        sieve: &SpfTable,
    ) -> Result<CoeffTable> {
        check_kind_s(kind, s)?;
        check_limit(limit, sieve)?;
        let mut values = Vec::with_capacity(limit as usize + 1);
        values.push(Rational::zero());
        for n in 1..=limit {
            values.push(closed_value(kind, n, s, sieve)?);
        }
        Ok(CoeffTable {
            kind,
            s,
            provenance: Provenance::ClosedForm,
            values,
        })
    }
}

fn check_kind_s(kind: CoeffKind, s: Option<u32>) -> Result<()> {
    match (kind.needs_s(), s) {
        (true, None) => Err(Error::InvalidArgument(format!(
            "kind {} requires an s parameter",
            kind.as_str()
        ))),
        (false, Some(_)) => Err(Error::InvalidArgument(format!(
            "kind {} does not take an s parameter",
            kind.as_str()
        ))),
        (true, Some(s)) if s < 2 => Err(Error::UnsupportedParameter(format!(
            "exact tables require integer s >= 2, got {s}"
        ))),
        _ => Ok(()),
    }
}

fn check_limit(limit: u64, sieve: &SpfTable) -> Result<()> {
    if limit == 0 {
        return Err(Error::InvalidArgument(
            "table limit must be at least 1".to_string(),
        ));
    }
    if limit > sieve.limit() {
        return Err(Error::OutOfRange(format!(
            "table limit {limit} exceeds the sieve limit {}",
            sieve.limit()
        )));
    }
    Ok(())
}

fn closed_value(kind: CoeffKind, n: u64, s: Option<u32>, sieve: &SpfTable) -> Result<Rational> {
    match kind {
        CoeffKind::ALog => a_closed(n, sieve),
        CoeffKind::BLog => b_closed(n, sieve),
        CoeffKind::AS => a_s_closed(n, s.unwrap(), sieve),
        CoeffKind::BS => b_s_closed(n, s.unwrap(), sieve),
    }
}

/// Closed form for `a_n`: `(-1)^{k+1}/n` when `n` is square-free of order
/// `k`, zero otherwise. Equals `-mu(n)/n`.
pub fn a_closed(n: u64, sieve: &SpfTable) -> Result<Rational> {
    let f = factorize(n, sieve)?;
    if !f.is_squarefree() {
        return Ok(Rational::zero());
    }
    let num = if f.distinct_primes() % 2 == 0 { -1 } else { 1 };
    Ok(Rational::new(BigInt::from(num), BigInt::from(n)))
}

/// Closed form for `b_n`.
///
/// `b_1 = 1`, `b_{2^k} = 1/2` for every `k >= 1`, `b_p = -1/p` for odd
/// primes, multiplicative across coprime parts, and zero whenever the odd
/// part of `n` is not square-free.
pub fn b_closed(n: u64, sieve: &SpfTable) -> Result<Rational> {
    let f = factorize(n, sieve)?;
    let mut value = Rational::one();
    for &(p, e) in f.factors() {
        if p == 2 {
            value /= rat_int(2);
        } else if e == 1 {
            value *= Rational::new(BigInt::from(-1), BigInt::from(p));
        } else {
            return Ok(Rational::zero());
        }
    }
    Ok(value)
}

/// Closed form for `a_n(s) = mu(n)/n^s`, `s >= 2`.
///
/// The first value is `+1`: the defining series identity forces the leading
/// coefficient to be positive, so the sign alternates as `(-1)^k/n^s` for
/// square-free `n` of order `k`.
pub fn a_s_closed(n: u64, s: u32, sieve: &SpfTable) -> Result<Rational> {
    if s < 2 {
        return Err(Error::UnsupportedParameter(format!(
            "exact a_n(s) requires integer s >= 2, got {s}"
        )));
    }
    let f = factorize(n, sieve)?;
    if !f.is_squarefree() {
        return Ok(Rational::zero());
    }
    let num = if f.distinct_primes() % 2 == 0 { 1 } else { -1 };
    Ok(Rational::new(BigInt::from(num), BigInt::from(n).pow(s)))
}

/// Closed form for `b_n(s)`, `s >= 2`.
///
/// Multiplicative: the factor for `2^k` (`k >= 1`) is `2^{k-1}/2^{ks}`, the
/// factor for an odd prime is `-1/p^s`, and any odd prime square kills the
/// value. At `s = 1` this expression reduces to [`b_closed`].
pub fn b_s_closed(n: u64, s: u32, sieve: &SpfTable) -> Result<Rational> {
    if s < 2 {
        return Err(Error::UnsupportedParameter(format!(
            "exact b_n(s) requires integer s >= 2, got {s}"
        )));
    }
    let f = factorize(n, sieve)?;
    let mut value = Rational::one();
    for &(p, e) in f.factors() {
        if p == 2 {
            let num = BigInt::from(2).pow(e - 1);
            let den = BigInt::from(2).pow(e * s);
            value *= Rational::new(num, den);
        } else if e == 1 {
            value *= Rational::new(BigInt::from(-1), BigInt::from(p).pow(s));
        } else {
            return Ok(Rational::zero());
        }
    }
    Ok(value)
}

/// Row weight `w(m)` of the triangular system for a given kind.
pub fn row_weight(kind: CoeffKind, m: u64, s: Option<u32>) -> Rational {
    let den = match kind {
        CoeffKind::ALog | CoeffKind::BLog => BigInt::from(m),
        CoeffKind::AS | CoeffKind::BS => BigInt::from(m).pow(s.unwrap()),
    };
    let num = match kind {
        CoeffKind::ALog | CoeffKind::AS => BigInt::one(),
        CoeffKind::BLog | CoeffKind::BS => {
            if m.is_multiple_of(2) {
                BigInt::from(-1)
            } else {
                BigInt::one()
            }
        }
    };
    Rational::new(num, den)
}

/// First value fixed by row 1 of each system.
pub fn first_value(kind: CoeffKind) -> Rational {
    match kind {
        CoeffKind::ALog => rat_int(-1),
        _ => rat_int(1),
    }
}

/// Solves the lower-triangular comparison-of-coefficients system exactly by
/// forward substitution.
///
/// Row 1 fixes `values[1]` to [`first_value`]; for `n >= 2` the row reads
/// `sum_{d | n} values[d] * w(n/d) = 0` with `w` from [`row_weight`], so
/// `values[n] = -sum_{d | n, d < n} values[d] * w(n/d)`.
///
/// This is the solver oracle: it never consults the closed forms.
pub fn solve_triangular(kind: CoeffKind, limit: u64, s: Option<u32>) -> Result<CoeffTable> {
    check_kind_s(kind, s)?;
    if limit == 0 {
        return Err(Error::InvalidArgument(
            "solver limit must be at least 1".to_string(),
        ));
    }
    let n = limit as usize;
    let mut values = vec![Rational::zero(); n + 1];
    let mut pending = vec![Rational::zero(); n + 1];
    values[1] = first_value(kind);
    for d in 1..=n {
        if d >= 2 {
            values[d] = -std::mem::take(&mut pending[d]);
        }
        if values[d].is_zero() {
            continue;
        }
        let mut m = 2 * d;
        while m <= n {
            let w = row_weight(kind, (m / d) as u64, s);
            pending[m] += &values[d] * w;
            m += d;
        }
    }
    Ok(CoeffTable {
        kind,
        s,
        provenance: Provenance::Solver,
        values,
    })
}

/// Outcome of one closed-form-vs-solver comparison.
#[derive(Debug, Clone)]
pub struct CertCheck {
    pub kind: CoeffKind,
    pub s: Option<u32>,
    pub limit: u64,
    /// First index where the two tables disagree, if any.
    pub first_mismatch: Option<u64>,
}

impl CertCheck {
    pub fn is_ok(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Certification report over all four kinds.
#[derive(Debug, Clone)]
pub struct Certification {
    pub checks: Vec<CertCheck>,
}

impl Certification {
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(CertCheck::is_ok)
    }
}

/// Compares closed-form and solver tables index by index.
pub fn certify_one(
    kind: CoeffKind,
    limit: u64,
    s: Option<u32>,
    sieve: &SpfTable,
) -> Result<CertCheck> {
    let closed = CoeffTable::closed_form(kind, limit, s, sieve)?;
    let solved = solve_triangular(kind, limit, s)?;
    let first_mismatch =
        (1..=limit).find(|&n| closed.values[n as usize] != solved.values[n as usize]);
    Ok(CertCheck {
        kind,
        s,
        limit,
        first_mismatch,
    })
}

/// Certifies `a` and `b` through `limit` and, for each `s` in `s_list`, the
/// `s`-weighted variants. A mismatch is reported, not raised.
pub fn certify_tables(limit: u64, s_list: &[u32], sieve: &SpfTable) -> Result<Certification> {
    let mut checks = Vec::new();
    checks.push(certify_one(CoeffKind::ALog, limit, None, sieve)?);
    checks.push(certify_one(CoeffKind::BLog, limit, None, sieve)?);
    for &s in s_list {
        checks.push(certify_one(CoeffKind::AS, limit, Some(s), sieve)?);
        checks.push(certify_one(CoeffKind::BS, limit, Some(s), sieve)?);
    }
    Ok(Certification { checks })
}
