//! Exact rational versions of the analytic formulas, for cross-checking
//! the float routes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// The exact value of an `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn check_theta(theta: &Rational) -> Result<()> {
    if theta.is_negative() || *theta > Rational::one() {
        return Err(Error::invalid("theta", format!("{theta} not in [0, 1]")));
    }
    Ok(())
}

/// `⌊1/θ⌋` for rational θ > 0.
pub fn floor_inv(theta: &Rational) -> u64 {
    theta.recip().floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// `Q_θ(x)` with rational θ and x.
pub fn q_theta(theta: &Rational, x: &Rational) -> Result<Rational> {
    if !theta.is_positive() || *theta > Rational::one() {
        return Err(Error::invalid("theta", format!("{theta} not in (0, 1]")));
    }
    let degree = floor_inv(theta) + 1;
    let one = Rational::one();
    let mut total = Rational::zero();
    for j in 0..=degree {
        let jm1 = Rational::from_integer(BigInt::from(j as i64 - 1));
        let base = &one - &jm1 * theta;
        let term = Pow::pow(&(-x * base), j as u32) / Rational::from_integer(factorial(j));
        total += term;
    }
    Ok(total)
}

/// `(1+θh)^{h+1}/(h+1)!`.
pub fn path_bound(h: u64, theta: &Rational) -> Result<Rational> {
    check_theta(theta)?;
    let base = Rational::one() + theta * Rational::from_integer(BigInt::from(h));
    Ok(Pow::pow(&base, (h + 1) as u32) / Rational::from_integer(factorial(h + 1)))
}

/// The defining alternating sum `Σ_j C(n,j)(-1)^{n-j}(1+jθ)^{h+1}/(h+1)!`,
/// for any `n ≤ h+1`.
pub fn out_of_order_sum(n: u64, h: u64, theta: &Rational) -> Result<Rational> {
    check_theta(theta)?;
    let mut total = Rational::zero();
    for j in 0..=n {
        let base = Rational::one() + theta * Rational::from_integer(BigInt::from(j));
        let term = Rational::from_integer(binomial(n, j)) * Pow::pow(&base, (h + 1) as u32);
        if (n - j) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total / Rational::from_integer(factorial(h + 1)))
}

/// Same contract as the float [`super::out_of_order_bound`]: `n ≤ h - 1`.
pub fn out_of_order_bound(n: u64, h: u64, theta: &Rational) -> Result<Rational> {
    if h == 0 || n > h - 1 {
        return Err(Error::invalid("n", format!("need n <= h - 1 (n = {n}, h = {h})")));
    }
    out_of_order_sum(n, h, theta)
}

/// `Σ_{n=0}^{h} C(h,n) · out_of_order_sum(n, h, θ)`. The binomial sums
/// telescope so this equals [`path_bound`] exactly.
pub fn out_of_order_collapse(h: u64, theta: &Rational) -> Result<Rational> {
    let mut total = Rational::zero();
    for n in 0..=h {
        total += Rational::from_integer(binomial(h, n)) * out_of_order_sum(n, h, theta)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_at_one() {
        assert_eq!(q_theta(&rational(1, 1), &rational(1, 1)).unwrap(), Rational::zero());
        assert_eq!(q_theta(&rational(3, 5), &Rational::zero()).unwrap(), Rational::one());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn collapse_small() {
        let t = rational(1, 3);
        for h in 0..=6 {
            assert_eq!(out_of_order_collapse(h, &t).unwrap(), path_bound(h, &t).unwrap());
        }
    }
}
