//! Series-to-product transforms.
//!
//! A finite exact power series is converted into an infinite-product
//! truncation by Dirichlet convolution of its coefficients with one of the
//! exponent tables: each product exponent is
//! `e_k = sum_{l | k} c_l * t_{k/l}` over the degrees `l` present in the
//! series (odd `l` only for the ratio forms). The conversion is verified
//! formally by re-expanding the log of the product and comparing coefficient
//! by coefficient in exact rationals.

use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational, rational_to_f64, Rational};
use crate::coeffs::{CoeffKind, CoeffTable};
use crate::error::{Error, Result};
use num_traits::{One, Zero};

/// Degree convention of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Arbitrary degrees `l >= 1`.
    All,
    /// Odd degrees only; required by the ratio targets.
    OddOnly,
    /// Even series written in the squared variable: degree `l` stands for
    /// the original variable raised to `2l`. Factors of the resulting form
    /// follow the same convention.
    EvenAsSquaredVariable,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::All => "all",
            Parity::OddOnly => "odd",
            Parity::EvenAsSquaredVariable => "even-squared",
        }
    }
}

/// Finite list of exact series coefficients with a degree convention.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    name: String,
    parity: Parity,
    /// `(degree, coefficient)` with strictly increasing degrees `>= 1`.
    coefficients: Vec<(u64, Rational)>,
    description: String,
}

impl SeriesSpec {
    pub fn new(
        name: impl Into<String>,
        parity: Parity,
        coefficients: Vec<(u64, Rational)>,
        description: impl Into<String>,
    ) -> Result<Self> {
        let mut last = 0u64;
        for &(degree, _) in &coefficients {
            if degree == 0 {
                return Err(Error::InvalidArgument(
                    "series degrees start at 1".to_string(),
                ));
            }
            if degree <= last {
                return Err(Error::InvalidArgument(format!(
                    "series degrees must be strictly increasing (saw {degree} after {last})"
                )));
            }
            if parity == Parity::OddOnly && degree % 2 == 0 {
                return Err(Error::InvalidArgument(format!(
                    "odd-only series contains even degree {degree}"
                )));
            }
            last = degree;
        }
        Ok(SeriesSpec {
            name: name.into(),
            parity,
            coefficients,
            description: description.into(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn coefficients(&self) -> &[(u64, Rational)] {
        &self.coefficients
    }

    pub fn coeff_at(&self, degree: u64) -> Option<&Rational> {
        self.coefficients
            .iter()
            .find(|&&(d, _)| d == degree)
            .map(|(_, c)| c)
    }

    pub fn max_degree(&self) -> u64 {
        self.coefficients.last().map_or(0, |&(d, _)| d)
    }

    /// Parses the JSON file format:
    /// `{"name": str, "parity": "all"|"odd", "coefficients":
    ///   [{"degree": int, "num": str, "den": str}, ...]}`.
    ///
    /// Integer fields travel as strings so arbitrary precision survives.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: SeriesSpecJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed series file: {e}")))?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> String {
        let raw = SeriesSpecJson::from(self);
        serde_json::to_string(&raw).expect("series serialization cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesSpecJson {
    name: String,
    parity: String,
    coefficients: Vec<CoefficientJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientJson {
    degree: u64,
    num: String,
    den: String,
}

impl TryFrom<SeriesSpecJson> for SeriesSpec {
    type Error = Error;

    fn try_from(raw: SeriesSpecJson) -> Result<SeriesSpec> {
        let parity = match raw.parity.as_str() {
            "all" => Parity::All,
            "odd" => Parity::OddOnly,
            "even-squared" => Parity::EvenAsSquaredVariable,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown parity {other:?} (expected \"all\" or \"odd\")"
                )))
            }
        };
        let mut coefficients = Vec::with_capacity(raw.coefficients.len());
        for c in raw.coefficients {
            let value = parse_rational(&format!("{}/{}", c.num, c.den))?;
            coefficients.push((c.degree, value));
        }
        SeriesSpec::new(
            raw.name,
            parity,
            coefficients,
            raw.description.unwrap_or_default(),
        )
    }
}

impl From<&SeriesSpec> for SeriesSpecJson {
    fn from(spec: &SeriesSpec) -> SeriesSpecJson {
        SeriesSpecJson {
            name: spec.name.clone(),
            parity: spec.parity.as_str().to_string(),
            coefficients: spec
                .coefficients
                .iter()
                .map(|(degree, value)| CoefficientJson {
                    degree: *degree,
                    num: value.numer().to_string(),
                    den: value.denom().to_string(),
                })
                .collect(),
            description: if spec.description.is_empty() {
                None
            } else {
                Some(spec.description.clone())
            },
        }
    }
}

/// Shape of one product factor at index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// `1 - x^k`
    Minus,
    /// `1 + x^k`
    Plus,
    /// `(1 - x^k)/(1 + x^k)`, odd `k` only.
    RatioOdd,
    /// `1 - 2 x^k cos(k t) + x^{2k}`
    CosMinus,
    /// `1 + 2 x^k cos(k t) + x^{2k}`
    CosPlus,
    /// `(1 - 2 x^k cos(k t) + x^{2k}) / (1 + 2 x^k cos(k t) + x^{2k})`,
    /// odd `k` only.
    CosRatio,
}

impl FactorKind {
    pub fn is_cos(self) -> bool {
        matches!(
            self,
            FactorKind::CosMinus | FactorKind::CosPlus | FactorKind::CosRatio
        )
    }

    pub fn is_ratio(self) -> bool {
        matches!(self, FactorKind::RatioOdd | FactorKind::CosRatio)
    }

    pub fn odd_indices_only(self) -> bool {
        self.is_ratio()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::Minus => "minus",
            FactorKind::Plus => "plus",
            FactorKind::RatioOdd => "ratio",
            FactorKind::CosMinus => "cos-minus",
            FactorKind::CosPlus => "cos-plus",
            FactorKind::CosRatio => "cos-ratio",
        }
    }
}

/// A product exponent: exact for the x-only forms, floating for the
/// cosine-weighted and trigonometric transforms.
#[derive(Debug, Clone, PartialEq)]
pub enum Exponent {
    Exact(Rational),
    Approx(f64),
}

impl Exponent {
    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Exact(r) => rational_to_f64(r),
            Exponent::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Exponent::Exact(r) => Some(r),
            Exponent::Approx(_) => None,
        }
    }
}

/// Truncated product form `prod_{k} factor_k(x, theta)^{e_k}`.
///
/// Entries are dense over the kind's index set (`1..=limit`, or the odd
/// indices for ratio kinds); indices beyond `limit` are absent, never
/// zero-padded. `scale` records which multiple of the source series the
/// log of the form represents.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductForm {
    factor_kind: FactorKind,
    entries: Vec<(u64, Exponent)>,
    theta: Option<f64>,
    scale: Rational,
    limit: u64,
}

impl ProductForm {
    pub fn new(
        factor_kind: FactorKind,
        entries: Vec<(u64, Exponent)>,
        theta: Option<f64>,
        scale: Rational,
        limit: u64,
    ) -> Result<Self> {
        let mut last = 0u64;
        for &(k, _) in &entries {
            if k == 0 || k <= last && last != 0 {
                return Err(Error::InvalidArgument(
                    "product entries must have strictly increasing indices >= 1".to_string(),
                ));
            }
            if factor_kind.odd_indices_only() && k % 2 == 0 {
                return Err(Error::InvalidArgument(format!(
                    "ratio forms take odd indices only, saw {k}"
                )));
            }
            last = k;
        }
        if limit < last {
            return Err(Error::InvalidArgument(format!(
                "form limit {limit} below largest entry index {last}"
            )));
        }
        if scale.is_zero() {
            return Err(Error::InvalidArgument(
                "a form cannot represent zero times its series".to_string(),
            ));
        }
        Ok(ProductForm {
            factor_kind,
            entries,
            theta,
            scale,
            limit,
        })
    }

    pub fn factor_kind(&self) -> FactorKind {
        self.factor_kind
    }

    pub fn entries(&self) -> &[(u64, Exponent)] {
        &self.entries
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// Truncation index the form was built to.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn exponent_at(&self, k: u64) -> Option<&Exponent> {
        self.entries.iter().find(|&&(i, _)| i == k).map(|(_, e)| e)
    }

    /// Largest `|e_k|` over the stored entries, as f64.
    pub fn max_abs_exponent(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, e)| e.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// Restriction on which series degrees participate in the convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisorFilter {
    All,
    Odd,
}

/// Thresholds guarding the floating-weight transforms.
#[derive(Debug, Clone, Copy)]
pub struct TransformOptions {
    /// Minimum `|cos(l*theta)|` tolerated in a cosine weight.
    pub eps_cos: f64,
    /// Maximum `|c_l|/x^l` tolerated in a trigonometric weight.
    pub growth_max: f64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            eps_cos: 1e-6,
            growth_max: 1e12,
        }
    }
}

/// Dirichlet convolution of series coefficients with a table:
/// `e_k = sum_{l | k, l in degrees, filter(l)} c_l * t_{k/l}`, exactly.
///
/// Returns the dense exponent list `e_1 ..= e_K` (index 0 unused).
pub fn dirichlet_mix(
    series: &SeriesSpec,
    table: &CoeffTable,
    k_max: u64,
    filter: DivisorFilter,
) -> Result<Vec<Rational>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument(
            "truncation index must be at least 1".to_string(),
        ));
    }
    if k_max > table.limit() {
        return Err(Error::OutOfRange(format!(
            "truncation {k_max} exceeds the coefficient table limit {}",
            table.limit()
        )));
    }
    let mut exponents = vec![Rational::zero(); k_max as usize + 1];
    for (degree, coeff) in series.coefficients() {
        if *degree > k_max {
            break;
        }
        if filter == DivisorFilter::Odd && degree % 2 == 0 {
            continue;
        }
        let mut k = *degree;
        let mut j = 1u64;
        while k <= k_max {
            exponents[k as usize] += coeff * table.get(j)?;
            k += degree;
            j += 1;
        }
    }
    Ok(exponents)
}

fn expected_table_kind(target: FactorKind) -> CoeffKind {
    match target {
        FactorKind::Minus | FactorKind::RatioOdd | FactorKind::CosMinus | FactorKind::CosRatio => {
            CoeffKind::ALog
        }
        FactorKind::Plus | FactorKind::CosPlus => CoeffKind::BLog,
    }
}

fn check_table(target: FactorKind, table: &CoeffTable) -> Result<()> {
    let want = expected_table_kind(target);
    if table.kind() != want {
        return Err(Error::InvalidArgument(format!(
            "target {} requires the {} table, got {}",
            target.as_str(),
            want.as_str(),
            table.kind().as_str()
        )));
    }
    Ok(())
}

fn indices_for(kind: FactorKind, k_max: u64) -> impl Iterator<Item = u64> {
    let step = if kind.odd_indices_only() { 2 } else { 1 };
    (1..=k_max).step_by(step)
}

/// Converts an exact power series into an x-only product form.
///
/// `Minus` pairs with the `a` table and scale 1, `Plus` with the `b` table
/// and scale 1, and `RatioOdd` (odd-degree series only) with the `a` table
/// over odd divisors and scale 2: the ratio form represents twice the
/// series.
pub fn to_product(
    series: &SeriesSpec,
    target: FactorKind,
    k_max: u64,
    table: &CoeffTable,
) -> Result<ProductForm> {
    if target.is_cos() {
        return Err(Error::InvalidArgument(format!(
            "target {} needs to_cos_product or trig_to_product",
            target.as_str()
        )));
    }
    check_table(target, table)?;
    if target == FactorKind::RatioOdd && series.parity() != Parity::OddOnly {
        return Err(Error::InvalidArgument(
            "ratio target requires an odd-only series".to_string(),
        ));
    }
    let filter = if target == FactorKind::RatioOdd {
        DivisorFilter::Odd
    } else {
        DivisorFilter::All
    };
    let mixed = dirichlet_mix(series, table, k_max, filter)?;
    let entries = indices_for(target, k_max)
        .map(|k| (k, Exponent::Exact(mixed[k as usize].clone())))
        .collect();
    let scale = if target == FactorKind::RatioOdd {
        Rational::from_integer(2.into())
    } else {
        Rational::one()
    };
    ProductForm::new(target, entries, None, scale, k_max)
}

/// Converts an exact power series into a cosine-quadratic product at a fixed
/// angle, using floating weights `c_l / cos(l*theta)`.
///
/// The form represents `2 p(x)` (`CosMinus`/`CosPlus`) or `4 q(x)`
/// (`CosRatio`, odd-degree series only).
pub fn to_cos_product(
    series: &SeriesSpec,
    theta: f64,
    target: FactorKind,
    k_max: u64,
    table: &CoeffTable,
    opts: &TransformOptions,
) -> Result<ProductForm> {
    if !target.is_cos() {
        return Err(Error::InvalidArgument(format!(
            "target {} is not a cosine form",
            target.as_str()
        )));
    }
    check_table(target, table)?;
    if target == FactorKind::CosRatio && series.parity() != Parity::OddOnly {
        return Err(Error::InvalidArgument(
            "cos-ratio target requires an odd-only series".to_string(),
        ));
    }
    let mut weights = Vec::with_capacity(series.coefficients().len());
    for (degree, coeff) in series.coefficients() {
        let c = (*degree as f64 * theta).cos();
        if c.abs() < opts.eps_cos {
            return Err(Error::SingularWeight {
                degree: *degree,
                cos_value: c,
            });
        }
        weights.push((*degree, rational_to_f64(coeff) / c));
    }
    float_mix(target, &weights, theta, k_max, table)
}

/// Converts a cosine series `p(t) = sum_l c_l cos(l t)` into a product form
/// in a fixed radius `x`, using floating weights `c_l / x^l`.
///
/// The resulting form must be evaluated at the same `x`; its angle is free.
/// The weights grow like `x^{-l}`, so factor logs no longer decay
/// geometrically and the truncation tail bound stays large.
pub fn trig_to_product(
    series: &SeriesSpec,
    x: f64,
    target: FactorKind,
    k_max: u64,
    table: &CoeffTable,
    opts: &TransformOptions,
) -> Result<ProductForm> {
    if !target.is_cos() {
        return Err(Error::InvalidArgument(format!(
            "target {} is not a cosine form",
            target.as_str()
        )));
    }
    check_table(target, table)?;
    if !(0.0 < x && x < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "trigonometric transforms need 0 < x < 1, got {x}"
        )));
    }
    if target == FactorKind::CosRatio && series.parity() != Parity::OddOnly {
        return Err(Error::InvalidArgument(
            "cos-ratio target requires an odd-only series".to_string(),
        ));
    }
    let mut weights = Vec::with_capacity(series.coefficients().len());
    for (degree, coeff) in series.coefficients() {
        let w = rational_to_f64(coeff) / x.powi(*degree as i32);
        if w.abs() > opts.growth_max {
            return Err(Error::IllConditioned {
                degree: *degree,
                magnitude: w.abs(),
            });
        }
        weights.push((*degree, w));
    }
    // the angle stays free: NAN marks "no fixed theta" and float_mix drops it
    float_mix(target, &weights, f64::NAN, k_max, table)
}

fn float_mix(
    target: FactorKind,
    weights: &[(u64, f64)],
    theta: f64,
    k_max: u64,
    table: &CoeffTable,
) -> Result<ProductForm> {
    if k_max == 0 {
        return Err(Error::InvalidArgument(
            "truncation index must be at least 1".to_string(),
        ));
    }
    if k_max > table.limit() {
        return Err(Error::OutOfRange(format!(
            "truncation {k_max} exceeds the coefficient table limit {}",
            table.limit()
        )));
    }
    let mut exponents = vec![0.0f64; k_max as usize + 1];
    for &(degree, weight) in weights {
        let mut k = degree;
        let mut j = 1u64;
        while k <= k_max {
            exponents[k as usize] += weight * rational_to_f64(table.get(j)?);
            k += degree;
            j += 1;
        }
    }
    let entries = indices_for(target, k_max)
        .map(|k| (k, Exponent::Approx(exponents[k as usize])))
        .collect();
    let scale = if target == FactorKind::CosRatio {
        Rational::from_integer(4.into())
    } else {
        Rational::from_integer(2.into())
    };
    ProductForm::new(
        target,
        entries,
        theta.is_finite().then_some(theta),
        scale,
        k_max,
    )
}

/// Outcome of a formal re-expansion check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormalCheck {
    pub ok: bool,
    pub first_mismatch: Option<u64>,
}

/// Re-expands `scale^{-1} * sum_k e_k * log(factor_k)` to degree `k_max` in
/// exact rationals and compares coefficient-wise against the series.
///
/// Only the x-only factor kinds with exact exponents are checkable; the
/// cosine forms carry irrational weights and are validated numerically.
pub fn formal_log_check(
    form: &ProductForm,
    series: &SeriesSpec,
    k_max: u64,
) -> Result<FormalCheck> {
    if form.factor_kind().is_cos() {
        return Err(Error::Unsupported(
            "formal check applies to x-only factor kinds".to_string(),
        ));
    }
    let k = k_max as usize;
    let mut acc = vec![Rational::zero(); k + 1];
    for (index, exponent) in form.entries() {
        let e = exponent.exact().ok_or_else(|| {
            Error::Unsupported("formal check requires exact exponents".to_string())
        })?;
        if *index > k_max || e.is_zero() {
            continue;
        }
        let idx = *index as usize;
        // log(1 - u) = -sum u^i / i; log(1 + u) = sum (-1)^{i+1} u^i / i;
        // log((1-u)/(1+u)) = -2 sum_{odd i} u^i / i.
        let mut i = 1usize;
        while idx * i <= k {
            let term = match form.factor_kind() {
                FactorKind::Minus => Some(-Rational::new(1.into(), i.into())),
                FactorKind::Plus => {
                    let sign = if i.is_multiple_of(2) { -1 } else { 1 };
                    Some(Rational::new(sign.into(), i.into()))
                }
                FactorKind::RatioOdd => (i % 2 == 1).then(|| -Rational::new(2.into(), i.into())),
                _ => unreachable!(),
            };
            if let Some(t) = term {
                acc[idx * i] += e * t;
            }
            i += 1;
        }
    }
    let inv_scale = Rational::one() / form.scale().clone();
    for acc_d in acc.iter_mut().skip(1) {
        *acc_d *= &inv_scale;
    }
    let first_mismatch = (1..=k_max).find(|&d| {
        let want = series.coeff_at(d).cloned().unwrap_or_else(Rational::zero);
        acc[d as usize] != want
    });
    Ok(FormalCheck {
        ok: first_mismatch.is_none(),
        first_mismatch,
    })
}

/// JSON model of a product form, used by the command-line `transform` output.
#[derive(Debug, Serialize)]
pub struct ProductFormJson {
    pub factor_kind: &'static str,
    pub scale: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub limit: u64,
    pub entries: Vec<ProductEntryJson>,
}

#[derive(Debug, Serialize)]
pub struct ProductEntryJson {
    pub k: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl From<&ProductForm> for ProductFormJson {
    fn from(form: &ProductForm) -> Self {
        ProductFormJson {
            factor_kind: form.factor_kind().as_str(),
            scale: format_rational(form.scale()),
            theta: form.theta(),
            limit: form.limit(),
            entries: form
                .entries()
                .iter()
                .map(|(k, e)| match e {
                    Exponent::Exact(r) => ProductEntryJson {
                        k: *k,
                        exact: Some(format_rational(r)),
                        value: None,
                    },
                    Exponent::Approx(v) => ProductEntryJson {
                        k: *k,
                        exact: None,
                        value: Some(*v),
                    },
                })
                .collect(),
        }
    }
}
