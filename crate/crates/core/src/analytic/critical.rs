use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::poly::{check_theta, q_theta_sign_ln};
use crate::error::{Error, Result};

/// Smallest θ accepted by the float root finders. The stepped evaluator is
/// accurate well below this; the bound only keeps scans cheap.
pub const THETA_FLOOR: f64 = 1e-3;

const SCAN_STEP: f64 = 0.01;
const MAX_SCAN_STEPS: usize = 4000;

fn q_sign(theta: f64, x: f64) -> f64 {
    q_theta_sign_ln(theta, x).map(|(s, _)| s).unwrap_or(f64::NAN)
}

/// `1 - sqrt(1 - 1/m)`, written to avoid cancellation near `m = 1`.
fn upper_bracket(m: f64) -> f64 {
    let a = 1.0 / m;
    a / (1.0 + (1.0 - a).sqrt())
}

/// Minimal root `m_c(θ)` of `Q_θ(m) = 0`.
///
/// The root lies in `[1/(eθ), 1/(θ(2-θ))]` (inverting the two first-moment
/// bounds on `θ_c`), so the sign-change scan starts at `max(1, 1/(eθ))` and
/// the result is refined by bisection to a relative width of `1e-13`.
pub fn m_critical(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if theta < THETA_FLOOR {
        return Err(Error::PrecisionFloor {
            theta,
            floor: THETA_FLOOR,
        });
    }
    let lo = (1.0 / (E * theta)).max(1.0);
    let hi = 1.0 / (theta * (2.0 - theta));
    let steps = (((hi - lo) / SCAN_STEP).ceil() as usize).clamp(1, MAX_SCAN_STEPS);
    let h = ((hi - lo) / steps as f64).max(SCAN_STEP * 1e-3);

    let mut a = lo;
    let sa = q_sign(theta, a);
    if sa == 0.0 {
        return Ok(a);
    }
    if sa.is_nan() || sa < 0.0 {
        return Err(Error::NoRoot(format!("Q_theta not positive at scan start {a} (theta={theta})")));
    }
    // A few extra steps past the analytic bracket absorb rounding in `hi`.
    for i in 1..=steps + 4 {
        let b = lo + i as f64 * h;
        let sb = q_sign(theta, b);
        if sb == 0.0 {
            return Ok(b);
        }
        if sb < 0.0 {
            return Ok(bisect(|x| q_sign(theta, x) > 0.0, a, b, 1e-13));
        }
        a = b;
    }
    Err(Error::NoRoot(format!(
        "no sign change of Q_theta in [{lo}, {hi}] (theta={theta})"
    )))
}

/// Bisection on a predicate that is true at `a` and false at `b`.
fn bisect(below: impl Fn(f64) -> bool, mut a: f64, mut b: f64, rel: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b || (b - a).abs() <= rel * mid.abs() {
            break;
        }
        if below(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// The θ with `m_c(θ) = m`, by bisection inside `[1/(em), 1-√(1-1/m)]`.
///
/// Bisection runs on the sign of `Q_θ(m)`, which is positive exactly when
/// `m < m_c(θ)` as long as `m` stays below the second root. The answer is
/// confirmed with [`m_critical`]; if it does not round-trip, the slower
/// bisection on `m_c` itself is used.
pub fn theta_critical(m: f64) -> Result<f64> {
    if !(m.is_finite() && m >= 1.0) {
        return Err(Error::invalid("m", format!("{m} must be a finite number >= 1")));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let hi = upper_bracket(m).min(1.0);
    let lo = (1.0 / (E * m)).max(THETA_FLOOR);
    if hi < THETA_FLOOR || q_sign(lo, m) < 0.0 {
        return Err(Error::PrecisionFloor {
            theta: hi.min(lo),
            floor: THETA_FLOOR,
        });
    }
    if q_sign(hi, m) <= 0.0 {
        let t = bisect(|t| q_sign(t, m) > 0.0, lo, hi, 1e-15);
        if let Ok(mc) = m_critical(t) {
            if (mc - m).abs() <= 1e-10 * m {
                return Ok(t);
            }
        }
    }
    log::debug!("theta_critical({m}): falling back to bisection on m_c");
    Ok(bisect(
        |t| m_critical(t).map(|mc| mc > m).unwrap_or(true),
        lo,
        hi,
        1e-15,
    ))
}

/// Bracket on `θ_c` for a tree with mean offspring `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub m: f64,
    /// `1/(em)`: no percolation at or below it.
    pub lower: f64,
    /// `1 - sqrt(1 - 1/m)`: percolation above it.
    pub upper: f64,
    /// `θ_c(m)` from [`theta_critical`]; `None` below the precision floor.
    pub exact: Option<f64>,
    /// Branching number the general-tree bound was requested for.
    pub br: Option<f64>,
    /// `1/(e·br)`, a lower bound on `θ_c` of any tree with that branching number.
    pub branching_lower: Option<f64>,
}

pub fn theta_bounds(m: f64, br: Option<f64>) -> Result<BoundsReport> {
    if !(m.is_finite() && m > 1.0) {
        return Err(Error::invalid("m", format!("{m} must be > 1")));
    }
    if let Some(b) = br {
        if !(b.is_finite() && b >= 1.0) {
            return Err(Error::invalid("br", format!("{b} must be >= 1")));
        }
    }
    let exact = match theta_critical(m) {
        Ok(t) => Some(t),
        Err(Error::PrecisionFloor { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundsReport {
        m,
        lower: 1.0 / (E * m),
        upper: upper_bracket(m),
        exact,
        br,
        branching_lower: br.map(|b| 1.0 / (E * b)),
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // 60-digit reference roots of Q_θ computed independently with mpmath.
    const REFERENCE: &[(f64, f64)] = &[
        (0.75, 1.0333704529042345),
        (0.6, 1.0961179679779243),
        (0.5, 1.1715728752538099),
        (0.3, 1.5465885692951026),
        (0.25, 1.7559306670400310),
        (0.2, 2.0835800452203406),
        (0.1, 3.8234943767805689),
        (0.05, 7.4378975023452583),
        (0.02, 18.428458064907585),
    ];

    #[test]
    fn reference_roots() {
        for &(t, mc) in REFERENCE {
            let got = m_critical(t).unwrap();
            assert!((got - mc).abs() <= 1e-11 * mc, "θ={t}: {got} vs {mc}");
        }
    }

    #[test]
    fn endpoint() {
        assert_eq!(m_critical(1.0).unwrap(), 1.0);
        assert_eq!(theta_critical(1.0).unwrap(), 1.0);
        assert!(theta_critical(0.9).is_err());
        assert!(matches!(m_critical(1e-4), Err(Error::PrecisionFloor { .. })));
    }

    #[test]
    fn inverse_references() {
        for &(m, t) in &[(2.0, 0.210592996505151), (3.0, 0.130375538258113), (1.3, 0.401371971893076)] {
            let got = theta_critical(m).unwrap();
            assert!((got - t).abs() < 1e-12, "m={m}: {got} vs {t}");
        }
    }

    #[test]
    fn bounds_for_two() {
        let b = theta_bounds(2.0, Some(2.0)).unwrap();
        assert!((b.lower - 0.18394).abs() < 1e-5);
        assert!((b.upper - 0.29289).abs() < 1e-5);
        assert!((b.branching_lower.unwrap() - 0.18394).abs() < 1e-5);
        let e = b.exact.unwrap();
        assert!(b.lower <= e && e <= b.upper);
        assert!(theta_bounds(1.0, None).is_err());
        assert!(theta_bounds(1.0 + 1e-12, None).unwrap().upper > 0.999);
    }
}
