//! Numeric evaluation of truncated product forms.
//!
//! Evaluation happens in the log domain: factor logs are computed through
//! `ln_1p` and accumulated in ascending index order with Kahan compensation,
//! so repeated runs are bit-identical. Truncation tails are bounded
//! analytically from `|log(1 +- u)| <= 2|u|`.

use serde::Serialize;

use crate::arith::{factorize, mobius, Rational, SpfTable};
use crate::error::{Error, Result};
use crate::series::{FactorKind, ProductForm};
use num_traits::Zero;

/// Compensated floating-point accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Where a product is evaluated. `|x| < 1` is the interior; `|x| = 1` is
/// tolerated only as a boundary experiment and is flagged as such.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub x: f64,
    pub theta: Option<f64>,
}

impl EvalPoint {
    pub fn interior(x: f64) -> Self {
        EvalPoint { x, theta: None }
    }

    pub fn with_theta(x: f64, theta: f64) -> Self {
        EvalPoint {
            x,
            theta: Some(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvalStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "boundary-experimental")]
    BoundaryExperimental,
    #[serde(rename = "tail-dominated")]
    TailDominated,
}

/// Result of one numeric evaluation.
///
/// Serialized as `{"value":…, "log_value":…, "K":…, "tail_bound":…,
/// "reference":…, "residual":…, "residual_kind":…, "status":…}`; an infinite
/// tail bound (boundary mode) serializes as `null`.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub value: f64,
    pub log_value: f64,
    #[serde(rename = "K")]
    pub k_used: u64,
    pub tail_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_kind: Option<ResidualKind>,
    pub status: EvalStatus,
}

/// Residuals are absolute for references of modest size and relative for
/// large ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResidualKind {
    #[serde(rename = "abs")]
    Absolute,
    #[serde(rename = "rel")]
    Relative,
}

/// References with `|r|` at or below this use absolute residuals.
pub const ABSOLUTE_RESIDUAL_CUTOFF: f64 = 10.0;

impl EvalReport {
    /// Attaches a reference value and the matching residual.
    pub fn with_reference(mut self, reference: f64) -> Self {
        let diff = (self.value - reference).abs();
        let (residual, kind) = if reference.abs() <= ABSOLUTE_RESIDUAL_CUTOFF {
            (diff, ResidualKind::Absolute)
        } else {
            (diff / reference.abs(), ResidualKind::Relative)
        };
        self.reference = Some(reference);
        self.residual = Some(residual);
        self.residual_kind = Some(kind);
        self
    }

    /// Downgrades `Converged` to `TailDominated` when the truncation bound
    /// alone exceeds the tolerance the report is judged against.
    pub fn judged_at(mut self, tol: f64) -> Self {
        let tail_known = !self.tail_bound.is_nan();
        if self.status == EvalStatus::Converged && (!tail_known || self.tail_bound > tol) {
            self.status = EvalStatus::TailDominated;
        }
        self
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.status == EvalStatus::Converged && self.residual.map(|r| r <= tol).unwrap_or(false)
    }
}

fn log_factor(kind: FactorKind, x: f64, theta: Option<f64>, k: u64) -> Result<f64> {
    let u = x
        .powi(i32::try_from(k).map_err(|_| {
            Error::OutOfRange(format!("factor index {k} too large for evaluation"))
        })?);
    let ln_arg = |arg: f64, k: u64| -> Result<f64> {
        if 1.0 + arg <= 0.0 {
            return Err(Error::Domain {
                k,
                factor: 1.0 + arg,
            });
        }
        Ok(arg.ln_1p())
    };
    match kind {
        FactorKind::Minus => ln_arg(-u, k),
        FactorKind::Plus => ln_arg(u, k),
        FactorKind::RatioOdd => Ok(ln_arg(-u, k)? - ln_arg(u, k)?),
        FactorKind::CosMinus | FactorKind::CosPlus | FactorKind::CosRatio => {
            let theta = theta.ok_or_else(|| {
                Error::InvalidArgument(
                    "cosine factor kinds need an angle (point or form theta)".to_string(),
                )
            })?;
            let c = (k as f64 * theta).cos();
            match kind {
                FactorKind::CosMinus => ln_arg(u * (u - 2.0 * c), k),
                FactorKind::CosPlus => ln_arg(u * (u + 2.0 * c), k),
                FactorKind::CosRatio => {
                    Ok(ln_arg(u * (u - 2.0 * c), k)? - ln_arg(u * (u + 2.0 * c), k)?)
                }
                _ => unreachable!(),
            }
        }
    }
}

/// Evaluates the truncated product at a point, accumulating
/// `sum_{k <= K} e_k * log(factor_k)` in ascending `k` with compensation.
///
/// `k_max` may not exceed the truncation the form was built to. `|x| = 1`
/// produces a boundary-experimental report with an infinite tail marker;
/// `|x| > 1` is rejected.
pub fn eval_product(form: &ProductForm, point: &EvalPoint, k_max: u64) -> Result<EvalReport> {
    eval_products(std::slice::from_ref(form), point, k_max)
}

/// Evaluates a log-additive bundle of forms (their logs are summed). Used
/// for identities whose two sides combine several products.
pub fn eval_products(
    forms: &[impl std::borrow::Borrow<ProductForm>],
    point: &EvalPoint,
    k_max: u64,
) -> Result<EvalReport> {
    if point.x.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "evaluation point |x| = {} lies outside the closed unit interval",
            point.x.abs()
        )));
    }
    let boundary = point.x.abs() == 1.0;
    let mut acc = KahanSum::new();
    let mut tail = 0.0f64;
    for form in forms {
        let form = form.borrow();
        if k_max > form.limit() {
            return Err(Error::OutOfRange(format!(
                "requested K = {k_max} but the form was built to K = {}",
                form.limit()
            )));
        }
        let theta = point.theta.or(form.theta());
        for (k, exponent) in form.entries() {
            if *k > k_max {
                break;
            }
            let e = exponent.to_f64();
            if e == 0.0 {
                continue;
            }
            acc.add(e * log_factor(form.factor_kind(), point.x, theta, *k)?);
        }
        tail += tail_bound(form, point, k_max);
    }
    let log_value = acc.value();
    Ok(EvalReport {
        value: log_value.exp(),
        log_value,
        k_used: k_max,
        tail_bound: tail,
        reference: None,
        residual: None,
        residual_kind: None,
        status: if boundary {
            EvalStatus::BoundaryExperimental
        } else {
            EvalStatus::Converged
        },
    })
}

/// Analytic bound on the discarded log-factors beyond index `k_used`:
/// `2 E |x|^{K+1} / (1 - |x|)` with `E` the largest stored `|e_k|`, doubled
/// for ratio and cosine kinds. Infinite at the boundary.
pub fn tail_bound(form: &ProductForm, point: &EvalPoint, k_used: u64) -> f64 {
    let x = point.x.abs();
    if x == 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return f64::INFINITY;
    }
    let e_bound = form.max_abs_exponent();
    let mult = match form.factor_kind() {
        FactorKind::Minus | FactorKind::Plus => 1.0,
        _ => 2.0,
    };
    2.0 * e_bound * mult * x.powi((k_used + 1).min(i32::MAX as u64) as i32) / (1.0 - x)
}

/// Smallest `K` whose [`tail_bound`] with exponent bound `e_bound` meets
/// `target` at radius `x` (multiplier 2 for ratio and cosine kinds).
pub fn k_for_tail_target(x: f64, e_bound: f64, doubled: bool, target: f64) -> u64 {
    let x = x.abs();
    if x == 0.0 {
        return 1;
    }
    let mult = if doubled { 2.0 } else { 1.0 };
    let mut k = (target * (1.0 - x) / (2.0 * e_bound * mult)).ln() / x.ln();
    if !k.is_finite() {
        return 1;
    }
    k = k.ceil();
    (k.max(1.0) as u64).max(1)
}

/// Which coefficient stream a partial sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumKind {
    /// `a_n(s) = mu(n)/n^s`, real `s > 1`.
    AS,
    /// `b_n(s)`, real `s > 1`.
    BS,
    /// The raw `b_n` values; their ordinary sum diverges (it jumps by `1/2`
    /// at every power of two), so no target is attached.
    BLogRaw,
}

/// Running partial sum with compensation.
#[derive(Debug, Clone)]
pub struct PartialSumReport {
    pub kind: SumKind,
    pub s: Option<f64>,
    pub n_terms: u64,
    pub sum: f64,
    /// Exact running sum, kept for the raw `b` stream up to
    /// [`EXACT_BSUM_CAP`] terms.
    pub exact_sum: Option<Rational>,
    /// Analytic bound on the dropped tail, where one exists
    /// (`sum_{n>N} n^{-s} <= N^{1-s}/(s-1)` for the `a_n(s)` stream).
    pub tail_bound: Option<f64>,
}

/// Largest `N` for which the raw `b` partial sum also carries an exact
/// rational value; beyond this the common denominator (lcm of 1..N) becomes
/// impractically large.
pub const EXACT_BSUM_CAP: u64 = 10_000;

/// `b_n(s)` as a double (with `s = 1` giving the plain `b_n`), for long
/// summation loops where exact rationals would be wasteful.
pub fn b_value_f64(n: u64, sieve: &SpfTable, s: f64) -> Result<f64> {
    let f = factorize(n, sieve)?;
    let mut value = 1.0f64;
    for &(p, e) in f.factors() {
        if p == 2 {
            value *= 2f64.powf((e - 1) as f64 - e as f64 * s);
        } else if e == 1 {
            value *= -(p as f64).powf(-s);
        } else {
            return Ok(0.0);
        }
    }
    Ok(value)
}

/// Compensated partial sum of a coefficient stream through `n_max`.
pub fn partial_sum(
    kind: SumKind,
    s: Option<f64>,
    n_max: u64,
    sieve: &SpfTable,
) -> Result<PartialSumReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument(
            "partial sums need at least one term".to_string(),
        ));
    }
    let s_val = match kind {
        SumKind::AS | SumKind::BS => {
            let s = s.ok_or_else(|| {
                Error::InvalidArgument("this sum kind requires an s parameter".to_string())
            })?;
            if s.is_nan() || s <= 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "partial sums need s > 1, got {s}"
                )));
            }
            Some(s)
        }
        SumKind::BLogRaw => None,
    };
    let mut acc = KahanSum::new();
    let mut exact = (kind == SumKind::BLogRaw && n_max <= EXACT_BSUM_CAP).then(Rational::zero);
    for n in 1..=n_max {
        let term = match kind {
            SumKind::AS => {
                let mu = mobius(n, sieve)?;
                if mu == 0 {
                    continue;
                }
                mu as f64 * (n as f64).powf(-s_val.unwrap())
            }
            SumKind::BS => b_value_f64(n, sieve, s_val.unwrap())?,
            SumKind::BLogRaw => {
                let b = crate::coeffs::b_closed(n, sieve)?;
                if let Some(e) = exact.as_mut() {
                    *e += &b;
                }
                crate::arith::rational_to_f64(&b)
            }
        };
        acc.add(term);
    }
    let tail = match kind {
        SumKind::AS => {
            let s = s_val.unwrap();
            Some((n_max as f64).powf(1.0 - s) / (s - 1.0))
        }
        _ => None,
    };
    Ok(PartialSumReport {
        kind,
        s: s_val,
        n_terms: n_max,
        sum: acc.value(),
        exact_sum: exact,
        tail_bound: tail,
    })
}

/// Truncation policy for the boundary probes: the smallest `K` with
/// `x^K < 10^{-18}`.
pub fn abel_truncation(x: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "boundary probes need 0 <= x < 1, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1);
    }
    Ok(((-18.0 * std::f64::consts::LN_10) / x.ln()).ceil().max(1.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{build_spf_sieve, rat, rat_int};
    use crate::coeffs::{CoeffKind, CoeffTable};
    use crate::series::{Parity, SeriesSpec};

    fn eq2_form(k: u64) -> ProductForm {
        let sieve = build_spf_sieve(k.max(2)).unwrap();
        let a = CoeffTable::closed_form(CoeffKind::ALog, k, None, &sieve).unwrap();
        let series = SeriesSpec::new("x", Parity::All, vec![(1, rat_int(1))], "").unwrap();
        crate::series::to_product(&series, FactorKind::Minus, k, &a).unwrap()
    }

    fn eq11_form(k: u64) -> ProductForm {
        let sieve = build_spf_sieve(k.max(2)).unwrap();
        let a = CoeffTable::closed_form(CoeffKind::ALog, k, None, &sieve).unwrap();
        let series = SeriesSpec::new("q", Parity::OddOnly, vec![(1, rat_int(1))], "").unwrap();
        crate::series::to_product(&series, FactorKind::RatioOdd, k, &a).unwrap()
    }

    #[test]
    fn single_factor_at_half() {
        // (1 - 1/2)^{-1} = 2
        let form = eq11_form(1);
        let report = eval_product(&form, &EvalPoint::interior(0.5), 1).unwrap();
        // first ratio factor is ((1-x)/(1+x))^{a_1} = (1/3)^{-1} = 3
        assert!((report.value - 3.0).abs() < 1e-15);
        let minus = eq2_form(1);
        let report = eval_product(&minus, &EvalPoint::interior(0.5), 1).unwrap();
        assert!((report.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eq12_sqrt_e() {
        let form = eq2_form(64);
        let report = eval_product(&form, &EvalPoint::interior(0.5), 64).unwrap();
        assert!((report.value - 0.5f64.exp()).abs() < 1e-11);
        assert_eq!(report.status, EvalStatus::Converged);
    }

    #[test]
    fn value_at_zero_is_one() {
        let form = eq2_form(16);
        let report = eval_product(&form, &EvalPoint::interior(0.0), 16).unwrap();
        assert_eq!(report.value, 1.0);
        assert_eq!(report.tail_bound, 0.0);
    }

    #[test]
    fn repeated_runs_bit_identical() {
        let form = eq2_form(40);
        let p = EvalPoint::interior(0.7);
        let r1 = eval_product(&form, &p, 40).unwrap();
        let r2 = eval_product(&form, &p, 40).unwrap();
        assert_eq!(r1.value.to_bits(), r2.value.to_bits());
        assert_eq!(r1.log_value.to_bits(), r2.log_value.to_bits());
    }

    #[test]
    fn k_beyond_built_limit_rejected() {
        let form = eq2_form(10);
        assert!(matches!(
            eval_product(&form, &EvalPoint::interior(0.5), 11),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn x_outside_closed_interval_rejected() {
        let form = eq2_form(10);
        assert!(matches!(
            eval_product(&form, &EvalPoint::interior(1.5), 10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn boundary_is_flagged_and_domain_checked() {
        let form = eq2_form(10);
        // 1 - 1^k = 0: the first factor already fails.
        let err = eval_product(&form, &EvalPoint::interior(1.0), 10).unwrap_err();
        match err {
            Error::Domain { k, .. } => assert_eq!(k, 1),
            other => panic!("expected domain error, got {other}"),
        }
        // Plus factors survive at the boundary and get flagged.
        let sieve = build_spf_sieve(10).unwrap();
        let b = CoeffTable::closed_form(CoeffKind::BLog, 10, None, &sieve).unwrap();
        let series = SeriesSpec::new("x", Parity::All, vec![(1, rat_int(1))], "").unwrap();
        let plus = crate::series::to_product(&series, FactorKind::Plus, 10, &b).unwrap();
        let report = eval_product(&plus, &EvalPoint::interior(1.0), 10).unwrap();
        assert_eq!(report.status, EvalStatus::BoundaryExperimental);
        assert!(report.tail_bound.is_infinite());
    }

    #[test]
    fn tail_bound_formula() {
        let form = eq2_form(10);
        // E = 1, x = 1/2, K = 10: 2 * (1/2)^11 * 2 = 2^{-9}
        let bound = tail_bound(&form, &EvalPoint::interior(0.5), 10);
        assert_eq!(bound, 2f64.powi(-9));
        assert_eq!(tail_bound(&form, &EvalPoint::interior(0.0), 10), 0.0);
        assert!(tail_bound(&form, &EvalPoint::interior(1.0), 10).is_infinite());
        // ratio kinds double the bound
        let ratio = eq11_form(9);
        let b = tail_bound(&ratio, &EvalPoint::interior(0.5), 9);
        assert_eq!(b, 2.0 * 2.0 * 0.5f64.powi(10) / 0.5);
    }

    #[test]
    fn k_for_tail_target_meets_target() {
        for &x in &[0.3, 0.5, 0.7, 0.9] {
            let k = k_for_tail_target(x, 1.0, false, 1e-12);
            let bound = 2.0 * x.powi(k as i32 + 1) / (1.0 - x);
            assert!(bound <= 1e-12, "x={x} k={k} bound={bound}");
        }
    }

    #[test]
    fn partial_sum_a_s_first_terms() {
        let sieve = build_spf_sieve(10).unwrap();
        // 1 - 1/4 - 1/9 = 23/36
        let report = partial_sum(SumKind::AS, Some(2.0), 3, &sieve).unwrap();
        assert!((report.sum - 23.0 / 36.0).abs() < 1e-15);
        assert!(report.tail_bound.unwrap() > 0.0);
    }

    #[test]
    fn partial_sum_b_raw_exact() {
        let sieve = build_spf_sieve(10).unwrap();
        // 1 + 1/2 - 1/3 + 1/2 = 5/3
        let report = partial_sum(SumKind::BLogRaw, None, 4, &sieve).unwrap();
        assert_eq!(report.exact_sum.unwrap(), rat(5, 3));
    }

    #[test]
    fn partial_sum_rejects_bad_s() {
        let sieve = build_spf_sieve(10).unwrap();
        assert!(partial_sum(SumKind::AS, Some(1.0), 5, &sieve).is_err());
        assert!(partial_sum(SumKind::BS, None, 5, &sieve).is_err());
    }

    #[test]
    fn abel_truncation_policy() {
        assert_eq!(abel_truncation(0.0).unwrap(), 1);
        let k = abel_truncation(0.999).unwrap();
        assert!(0.999f64.powi(k as i32) < 1e-18);
        assert!((41_000..42_000).contains(&k));
        assert!(abel_truncation(1.0).is_err());
    }

    #[test]
    fn report_reference_and_judgement() {
        let form = eq2_form(64);
        let report = eval_product(&form, &EvalPoint::interior(0.5), 64)
            .unwrap()
            .with_reference(0.5f64.exp());
        assert_eq!(report.residual_kind, Some(ResidualKind::Absolute));
        assert!(report.passes(1e-11));
        let judged = report.judged_at(1e-30);
        assert_eq!(judged.status, EvalStatus::TailDominated);
        assert!(!judged.passes(1e-11));
    }

    #[test]
    fn report_serialization_shape() {
        let form = eq2_form(8);
        let report = eval_product(&form, &EvalPoint::interior(0.5), 8)
            .unwrap()
            .with_reference(0.5f64.exp());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with("{\"value\":"));
        for key in [
            "log_value",
            "\"K\"",
            "tail_bound",
            "reference",
            "residual",
            "status",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }
}
