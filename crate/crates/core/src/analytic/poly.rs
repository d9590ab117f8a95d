use crate::error::{check_range, Error, Result};
use statrs::function::factorial::ln_factorial;

/// Relative band inside which `1/θ` is treated as an exact integer.
pub(crate) const FLOOR_GUARD: f64 = 1e-14;

/// Coefficients below this fraction of the largest one are dropped while
/// stepping; on `s ∈ [0,1]` they cannot move the result.
const TRUNCATE_REL: f64 = 1e-20;

/// Neumaier's compensated sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `⌊1/θ⌋`, snapping to the nearest integer when `1/θ` is within a relative
/// `1e-14` of it so that e.g. θ = 0.1 gives 10 regardless of rounding.
pub fn floor_inv(theta: f64) -> usize {
    guarded_floor(1.0 / theta)
}

pub(crate) fn guarded_floor(r: f64) -> usize {
    let k = r.round();
    if (r - k).abs() <= FLOOR_GUARD * r.abs().max(1.0) {
        k.max(0.0) as usize
    } else {
        r.floor().max(0.0) as usize
    }
}

/// Whether `1/θ` is (within the guard band) an integer.
pub(crate) fn inv_is_integer(theta: f64) -> bool {
    let r = 1.0 / theta;
    (r - r.round()).abs() <= FLOOR_GUARD * r.max(1.0)
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid("theta", format!("{theta} not in (0, 1]")));
    }
    Ok(())
}

/// `Q_θ(x) = Σ_{j=0}^{⌊1/θ⌋+1} (-x)^j (1-(j-1)θ)^j / j!`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPolynomial {
    pub theta: f64,
    pub degree: usize,
    /// Coefficient of `x^j` at index `j`.
    pub coefficients: Vec<f64>,
}

impl CriticalPolynomial {
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let degree = floor_inv(theta) + 1;
        let coefficients = (0..=degree)
            .map(|j| {
                let base = 1.0 - (j as f64 - 1.0) * theta;
                let mag = if j == 0 {
                    1.0
                } else if base <= 0.0 {
                    0.0
                } else {
                    (j as f64 * base.ln() - ln_factorial(j as u64)).exp()
                };
                if j % 2 == 1 {
                    -mag
                } else {
                    mag
                }
            })
            .collect();
        Ok(CriticalPolynomial {
            theta,
            degree,
            coefficients,
        })
    }

    /// Direct compensated evaluation. Accurate for θ ≳ 0.1; see the module
    /// docs for smaller θ.
    pub fn eval(&self, x: f64) -> f64 {
        let mut p = 1.0;
        neumaier_sum(self.coefficients.iter().map(|&c| {
            let t = c * p;
            p *= x;
            t
        }))
    }
}

/// `Q_θ(x)` by direct compensated summation.
pub fn q_theta_eval(theta: f64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid("x", "must be finite"));
    }
    Ok(CriticalPolynomial::new(theta)?.eval(x))
}

/// `Q_θ(x)` for `x ≥ 0` as `(sign, ln|Q|)`, accurate to a few ulps in
/// relative terms at any θ. The sign is `0.0` at an exact zero.
pub fn q_theta_sign_ln(theta: f64, x: f64) -> Result<(f64, f64)> {
    check_theta(theta)?;
    check_range("x", x, 0.0, f64::MAX)?;
    let k = floor_inv(theta);
    let s_end = ((1.0 - k as f64 * theta) / theta).clamp(0.0, 1.0);
    Ok(step_delay(x * theta, k + 1, s_end))
}

/// `Q_θ(x)` through the stepped evaluator. Underflows to ±0 only when
/// `|Q| < 1e-308`; use [`q_theta_sign_ln`] when the sign matters.
pub fn q_theta_stable(theta: f64, x: f64) -> Result<f64> {
    let (s, l) = q_theta_sign_ln(theta, x)?;
    Ok(s * l.exp())
}

/// Evaluates `f(jθ + sθ)` for the solution of `f' (u) = -c f(u-θ)`, `f = 1`
/// on `[0, θ)`, where `c_theta = c·θ`, `j = piece` and `s = s_end`.
///
/// Piece `j` is held as a polynomial in the local coordinate `s ∈ [0,1]`;
/// the next piece is `p_{j+1}(s) = p_j(1) - cθ ∫_0^s p_j`. Coefficients are
/// rescaled after each step and the scale is carried as a logarithm.
pub(crate) fn step_delay(c_theta: f64, piece: usize, s_end: f64) -> (f64, f64) {
    let mut a: Vec<f64> = vec![1.0];
    let mut next: Vec<f64> = Vec::with_capacity(64);
    let mut ln_scale = 0.0;
    for _ in 0..piece {
        next.clear();
        next.push(neumaier_sum(a.iter().copied()));
        for (k, &ak) in a.iter().enumerate() {
            next.push(-c_theta * ak / (k as f64 + 1.0));
        }
        let big = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if big == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        let cut = big * TRUNCATE_REL;
        while next.len() > 1 && next.last().is_some_and(|v| v.abs() < cut) {
            next.pop();
        }
        ln_scale += big.ln();
        a.clear();
        a.extend(next.iter().map(|v| v / big));
    }
    let mut p = 1.0;
    let v = neumaier_sum(a.iter().map(|&ak| {
        let t = ak * p;
        p *= s_end;
        t
    }));
    if v == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (v.signum(), v.abs().ln() + ln_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(q_theta_eval(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(q_theta_eval(0.6, 0.0).unwrap(), 1.0);
        assert!(q_theta_eval(0.0, 1.0).is_err());
        assert!(q_theta_eval(1.2, 1.0).is_err());
    }

    #[test]
    fn degree_uses_floor() {
        assert_eq!(CriticalPolynomial::new(0.1).unwrap().degree, 11);
        assert_eq!(CriticalPolynomial::new(0.3).unwrap().degree, 4);
        assert_eq!(CriticalPolynomial::new(1.0 / 3.0).unwrap().degree, 4);
        assert_eq!(CriticalPolynomial::new(0.75).unwrap().degree, 2);
    }

    #[test]
    fn quadratic_case() {
        for &t in &[0.55, 0.6, 0.75, 0.9] {
            for &x in &[0.0, 0.5, 1.0, 1.7, 3.0] {
                let q = q_theta_eval(t, x).unwrap();
                let closed = 1.0 - x + x * x * (1.0 - t) * (1.0 - t) / 2.0;
                assert!((q - closed).abs() < 1e-14);
            }
        }
        assert!(q_theta_eval(0.75, 1.03337).unwrap().abs() < 1e-4);
    }

    #[test]
    fn stepped_agrees_with_direct_where_direct_is_good() {
        for &t in &[0.2, 0.3, 0.45, 0.7, 1.0] {
            for &x in &[0.3, 1.0, 1.4, 2.5] {
                let d = q_theta_eval(t, x).unwrap();
                let s = q_theta_stable(t, x).unwrap();
                assert!((d - s).abs() < 1e-12, "θ={t} x={x}: {d} vs {s}");
            }
        }
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        assert_eq!(neumaier_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn floor_guard() {
        assert_eq!(floor_inv(0.1), 10);
        assert_eq!(floor_inv(1.0 / 3.0), 3);
        assert_eq!(floor_inv(0.3), 3);
        assert!(inv_is_integer(0.2));
        assert!(!inv_is_integer(0.21));
    }
}
