//! RMF labels and `ℓ^q` distances.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::rng::LabelField;

/// The exponent of an `ℓ^q` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    /// Integer `q`; `d^q` of an integer site is an exact integer.
    Integer(u32),
    Real(f64),
    Infinity,
}

/// An `ℓ^q` metric with `q ∈ [1, ∞]`. Serialized as its `q`: `"2"`, `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Metric {
    exponent: Exponent,
}

/// Largest integer exponent handled exactly; beyond this `|c|^q` overflows
/// `u128` for any interesting box and the float path is used instead.
const MAX_EXACT_Q: u32 = 32;

impl Metric {
    pub fn new(q: f64) -> Result<Self> {
        if q == f64::INFINITY {
            return Ok(Metric::infinity());
        }
        check_range("q", q, 1.0, f64::MAX)?;
        let exponent = if q.fract() == 0.0 && q <= MAX_EXACT_Q as f64 {
            Exponent::Integer(q as u32)
        } else {
            Exponent::Real(q)
        };
        Ok(Metric { exponent })
    }

    pub fn l1() -> Self {
        Metric {
            exponent: Exponent::Integer(1),
        }
    }

    pub fn l2() -> Self {
        Metric {
            exponent: Exponent::Integer(2),
        }
    }

    pub fn infinity() -> Self {
        Metric {
            exponent: Exponent::Infinity,
        }
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    /// `q` as a float, `f64::INFINITY` for the sup norm.
    pub fn q(&self) -> f64 {
        match self.exponent {
            Exponent::Integer(k) => k as f64,
            Exponent::Real(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.exponent, Exponent::Infinity)
    }

    /// `‖coords‖_q`.
    pub fn norm(&self, coords: &[i64]) -> f64 {
        match self.exponent {
            Exponent::Integer(1) => coords.iter().map(|c| c.unsigned_abs() as f64).sum(),
            Exponent::Integer(2) => match self.exact_power(coords) {
                Some(p) => (p as f64).sqrt(),
                None => float_norm(coords, 2.0),
            },
            Exponent::Integer(k) => match self.exact_power(coords) {
                Some(p) => (p as f64).powf(1.0 / k as f64),
                None => float_norm(coords, k as f64),
            },
            Exponent::Real(q) => float_norm(coords, q),
            Exponent::Infinity => coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64,
        }
    }

    /// An exact integer that orders sites the same way as the norm:
    /// `Σ|c|^q` for integer `q`, `max|c|` for `q = ∞`. `None` for real `q`
    /// or on overflow.
    pub fn exact_power(&self, coords: &[i64]) -> Option<u128> {
        match self.exponent {
            Exponent::Integer(k) => coords.iter().try_fold(0u128, |acc, &c| {
                (c.unsigned_abs() as u128)
                    .checked_pow(k)
                    .and_then(|p| acc.checked_add(p))
            }),
            Exponent::Infinity => Some(coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as u128),
            Exponent::Real(_) => None,
        }
    }

    /// Compares `‖a‖_q` with `‖b‖_q`, exactly whenever possible.
    pub fn compare(&self, a: &[i64], b: &[i64]) -> Ordering {
        match (self.exact_power(a), self.exact_power(b)) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => self
                .norm(a)
                .partial_cmp(&self.norm(b))
                .unwrap_or(Ordering::Equal),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exponent {
            Exponent::Integer(k) => write!(f, "{k}"),
            Exponent::Real(q) => write!(f, "{q}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Metric::infinity()),
            t => {
                let q: f64 = t.parse().map_err(|_| Error::invalid("q", format!("cannot parse '{s}'")))?;
                Metric::new(q)
            }
        }
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Metric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn float_norm(coords: &[i64], q: f64) -> f64 {
    // Scale by the largest coordinate so |c|^q cannot overflow.
    let m = coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64;
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = coords
        .iter()
        .map(|&c| (c.unsigned_abs() as f64 / m).powf(q))
        .sum();
    m * s.powf(1.0 / q)
}

/// A point of `ℤⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("site", "dimension must be at least 1"));
        }
        Ok(Site(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim.max(1)])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<&[i64]> for Site {
    fn from(c: &[i64]) -> Self {
        Site(c.to_vec())
    }
}

/// Drift `θ ∈ [0,1]` and the metric used for `d(ρ, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmfParams {
    pub theta: f64,
    pub metric: Metric,
}

impl RmfParams {
    pub fn new(theta: f64, metric: Metric) -> Result<Self> {
        check_range("theta", theta, 0.0, 1.0)?;
        Ok(RmfParams { theta, metric })
    }
}

pub fn lp_distance(metric: &Metric, site: &Site) -> f64 {
    metric.norm(site.coords())
}

/// `X_v = U_v + θ·d(0, v)`.
pub fn rmf_label(field: &LabelField, params: &RmfParams, site: &Site) -> f64 {
    field.uniform(site.coords()) + params.theta * lp_distance(&params.metric, site)
}

/// Strictly increasing; equal neighbours count as a failure.
pub fn is_increasing(labels: &[f64]) -> bool {
    labels.windows(2).all(|w| w[0] < w[1])
}

/// Same as [`Metric::compare`] on sites.
pub fn compare_norms(metric: &Metric, a: &Site, b: &Site) -> Ordering {
    metric.compare(a.coords(), b.coords())
}
