//! Exact square-free-indexed exponent sequences and the infinite products
//! they generate.
//!
//! The crate turns power series into infinite-product truncations through
//! Dirichlet convolution with four exactly-computed coefficient families,
//! verifies each conversion formally in exact rational arithmetic, and
//! evaluates the resulting products numerically with compensated summation
//! and analytic tail bounds. A registry of named identities (exponential
//! products, cosine-quadratic products, `x/sin x`, `1/cos x`, the squared
//! Stirling ratio, and the zeta-reciprocal sums) ties every product to an
//! independent reference evaluation.
//!
//! Modules:
//!
//! * [`arith`]   — sieve, factorization, Möbius, divisors, Bernoulli numbers.
//! * [`coeffs`]  — the `a`/`b` exponent families, closed form and solver.
//! * [`series`]  — series specs, product forms, and the transforms.
//! * [`eval`]    — numeric evaluation, tail bounds, partial sums.
//! * [`catalog`] — the identity registry and its reference evaluators.
//!
//! ```
//! use prodforge::{
//!     build_spf_sieve, eval_product, formal_log_check, to_product, CoeffKind, CoeffTable,
//!     EvalPoint, FactorKind, Parity, Rational, SeriesSpec,
//! };
//!
//! // the exponents of exp(x) = prod (1 - x^k)^{a_k}
//! let sieve = build_spf_sieve(64)?;
//! let a = CoeffTable::closed_form(CoeffKind::ALog, 64, None, &sieve)?;
//!
//! // turn p(x) = x into its product form and prove the conversion formally
//! let series = SeriesSpec::new(
//!     "x",
//!     Parity::All,
//!     vec![(1, Rational::from_integer(1.into()))],
//!     "",
//! )?;
//! let form = to_product(&series, FactorKind::Minus, 64, &a)?;
//! assert!(formal_log_check(&form, &series, 64)?.ok);
//!
//! // evaluated at x = 1/2 the truncated product reproduces sqrt(e)
//! let report = eval_product(&form, &EvalPoint::interior(0.5), 64)?;
//! assert!((report.value - 0.5f64.exp()).abs() < 1e-11);
//! assert!(report.tail_bound < 1e-18);
//! # Ok::<(), prodforge::Error>(())
//! ```

pub mod arith;
pub mod catalog;
pub mod coeffs;
pub mod error;
pub mod eval;
pub mod series;

pub use arith::{
    bernoulli_table, build_spf_sieve, divisors, factorize, mobius, squarefree_order,
    BernoulliTable, PrimeFactorization, Rational, SpfTable, DEFAULT_SIEVE_LIMIT,
};
pub use catalog::{
    identity_entry, list_identities, zeta_reference, Catalog, IdentityEntry, IdentityId, Params,
};
pub use coeffs::{
    a_closed, a_s_closed, b_closed, b_s_closed, certify_tables, solve_triangular, CoeffKind,
    CoeffTable,
};
pub use error::{Error, Result};
pub use eval::{eval_product, partial_sum, tail_bound, EvalPoint, EvalReport, EvalStatus};
pub use series::{
    dirichlet_mix, formal_log_check, to_cos_product, to_product, trig_to_product, DivisorFilter,
    FactorKind, Parity, ProductForm, SeriesSpec, TransformOptions,
};
