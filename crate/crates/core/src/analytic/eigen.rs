use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use super::critical::m_critical;
use super::poly::{check_theta, floor_inv, guarded_floor, inv_is_integer, neumaier_sum};
use crate::error::{Error, Result};

fn check_m(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("m", format!("{m} must be finite and > 0")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda != 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("lambda", format!("{lambda} must be finite and non-zero")))
    }
}

/// The piecewise polynomial `f_{m,θ,λ}` on `[0,1]`, breakpoints at `jθ`.
///
/// Piece `j` is stored in the local coordinate `s = (u - jθ)/θ`, built by
/// integrating `f'(u) = -(m/λ) f(u-θ)` forward from `f = 1` on `[0,θ)`.
/// This is the same function as [`eigenfunction_eval`] but avoids its
/// alternating sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenFunction {
    pub m: f64,
    pub theta: f64,
    pub lambda: f64,
    pieces: Vec<Vec<f64>>,
}

impl EigenFunction {
    pub fn new(m: f64, theta: f64, lambda: f64) -> Result<Self> {
        check_m(m)?;
        check_theta(theta)?;
        check_lambda(lambda)?;
        let k = floor_inv(theta);
        let c = m * theta / lambda;
        let mut pieces: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
        pieces.push(vec![1.0]);
        for j in 0..k {
            let prev = &pieces[j];
            let mut next = Vec::with_capacity(prev.len() + 1);
            next.push(neumaier_sum(prev.iter().copied()));
            next.extend(prev.iter().enumerate().map(|(i, &a)| -c * a / (i as f64 + 1.0)));
            pieces.push(next);
        }
        Ok(EigenFunction {
            m,
            theta,
            lambda,
            pieces,
        })
    }

    /// The eigenfunction for the lead eigenvalue `m / m_c(θ)`.
    pub fn lead(m: f64, theta: f64) -> Result<Self> {
        let lambda = lead_eigenvalue(m, theta)?;
        EigenFunction::new(m, theta, lambda)
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    fn locate(&self, u: f64) -> (usize, f64) {
        let j = guarded_floor(u / self.theta).min(self.pieces.len() - 1);
        (j, (u - j as f64 * self.theta) / self.theta)
    }

    /// `f(u)` for `u ∈ [0,1]`.
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let (j, s) = self.locate(u);
        self.pieces[j].iter().rev().fold(0.0, |acc, &a| acc * s + a)
    }

    /// `∫_a^b f` for `0 ≤ a ≤ b ≤ 1`, exact up to rounding.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(0.0, 1.0);
        let b = b.clamp(0.0, 1.0);
        if b <= a {
            return 0.0;
        }
        let (ja, sa) = self.locate(a);
        let (jb, sb) = self.locate(b);
        let antideriv = |p: &[f64], s: f64| -> f64 {
            p.iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, &c)| acc * s + c / (k as f64 + 1.0))
                * s
        };
        let parts = (ja..=jb).map(|j| {
            let lo = if j == ja { sa } else { 0.0 };
            let hi = if j == jb { sb } else { 1.0 };
            let p = &self.pieces[j];
            self.theta * (antideriv(p, hi) - antideriv(p, lo))
        });
        neumaier_sum(parts)
    }

    /// `(m/λ)∫_0^1 f`; equals 1 exactly when λ is an eigenvalue.
    pub fn normalisation(&self) -> f64 {
        self.m / self.lambda * self.integral(0.0, 1.0)
    }

    /// Interior breakpoints `jθ < 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        (1..self.pieces.len())
            .map(|j| j as f64 * self.theta)
            .filter(|&b| b < 1.0)
            .collect()
    }
}

/// `f_{m,θ,λ}(u) = Σ_{i=0}^{j} (-1)^i m^i (u-iθ)^i / (λ^i i!)` for
/// `u ∈ [jθ, (j+1)θ)`, by compensated summation of the closed form.
pub fn eigenfunction_eval(m: f64, theta: f64, lambda: f64, u: f64) -> Result<f64> {
    check_m(m)?;
    check_theta(theta)?;
    check_lambda(lambda)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::invalid("u", format!("{u} not in [0, 1]")));
    }
    let j = (u / theta).floor() as usize;
    let c = m / lambda;
    Ok(neumaier_sum((0..=j).map(|i| {
        if i == 0 {
            return 1.0;
        }
        let x = -c * (u - i as f64 * theta);
        if x == 0.0 {
            return 0.0;
        }
        let mag = (i as f64 * x.abs().ln() - ln_factorial(i as u64)).exp();
        if x < 0.0 && i % 2 == 1 {
            -mag
        } else {
            mag
        }
    })))
}

/// Largest eigenvalue `λ_{m,θ} = m / m_c(θ)`.
pub fn lead_eigenvalue(m: f64, theta: f64) -> Result<f64> {
    check_m(m)?;
    Ok(m / m_critical(theta)?)
}

/// The characteristic polynomial in λ of the normalisation constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    pub m: f64,
    /// θ actually used; differs from the request when `1/θ ∈ ℕ`.
    pub theta: f64,
    pub perturbed: bool,
    /// Coefficients from `λ^{K+1}` (always 1) down to `λ^0`.
    pub coefficients: Vec<f64>,
    /// Real roots, largest first, each polished by Newton's method.
    pub real_roots: Vec<f64>,
}

impl CharPoly {
    pub fn eval(&self, lambda: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, &c| acc * lambda + c)
    }

    pub fn largest_real_root(&self) -> Option<f64> {
        self.real_roots.first().copied()
    }
}

/// `λ^{K+1} - Σ_{i=0}^{K} (-1)^i m^{i+1} (1-iθ)^{i+1} λ^{K-i} / (i+1)!`,
/// `K = ⌊1/θ⌋`, with its real roots from the companion matrix.
///
/// At `1/θ ∈ ℕ` the constant coefficient vanishes; θ is moved down by
/// `1e-12` and a warning is logged.
pub fn eigen_char_poly(m: f64, theta: f64) -> Result<CharPoly> {
    check_m(m)?;
    check_theta(theta)?;
    let (theta, perturbed) = if inv_is_integer(theta) {
        log::warn!("1/theta = {} is an integer; evaluating at theta - 1e-12", 1.0 / theta);
        (theta - 1e-12, true)
    } else {
        (theta, false)
    };
    let k = floor_inv(theta);
    let mut coefficients = Vec::with_capacity(k + 2);
    coefficients.push(1.0);
    for i in 0..=k {
        let base = m * (1.0 - i as f64 * theta);
        let mag = if base <= 0.0 {
            0.0
        } else {
            ((i as f64 + 1.0) * base.ln() - ln_factorial(i as u64 + 1)).exp()
        };
        // Subtracting (-1)^i · mag.
        coefficients.push(if i % 2 == 0 { -mag } else { mag });
    }

    let d = k + 1;
    let companion = DMatrix::from_fn(d, d, |r, c| {
        if r == 0 {
            -coefficients[c + 1]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut poly = CharPoly {
        m,
        theta,
        perturbed,
        coefficients,
        real_roots: Vec::new(),
    };
    let eig = companion.complex_eigenvalues();
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * z.re.abs().max(1.0))
        .map(|z| newton_polish(&poly, z.re))
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    poly.real_roots = roots;
    Ok(poly)
}

fn newton_polish(p: &CharPoly, mut x: f64) -> f64 {
    for _ in 0..60 {
        let (mut v, mut dv) = (0.0, 0.0);
        for &c in &p.coefficients {
            dv = dv * x + v;
            v = v * x + c;
        }
        if dv == 0.0 {
            break;
        }
        let step = v / dv;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_before_theta() {
        for &u in &[0.0, 0.1, 0.29] {
            assert_eq!(eigenfunction_eval(2.0, 0.3, 1.7, u).unwrap(), 1.0);
            assert_eq!(EigenFunction::new(2.0, 0.3, 1.7).unwrap().eval(u), 1.0);
        }
    }

    #[test]
    fn quadratic_regime() {
        let (m, t) = (2.0f64, 0.75f64);
        let lp = m / 2.0 * (1.0 + (1.0 - 2.0 * (1.0 - t) * (1.0 - t)).sqrt());
        assert!((lp - 1.93541).abs() < 1e-5);
        assert!((lead_eigenvalue(m, t).unwrap() - lp).abs() < 1e-10);
        let f = eigenfunction_eval(m, t, lp, 0.9).unwrap();
        assert!((f - (1.0 - m / lp * 0.15)).abs() < 1e-14);
        assert!((f - 0.844994).abs() < 1e-6);
        let cp = eigen_char_poly(m, t).unwrap();
        assert_eq!(cp.coefficients.len(), 3);
        assert!((cp.coefficients[1] + m).abs() < 1e-15);
        assert!((cp.coefficients[2] - m * m * 0.0625 / 2.0).abs() < 1e-15);
        assert!((cp.real_roots[0] - 1.93541).abs() < 1e-5);
        assert!((cp.real_roots[1] - 0.06459).abs() < 1e-5);
        assert!((cp.real_roots.iter().sum::<f64>() - m).abs() < 1e-12);
    }

    #[test]
    fn two_representations_agree() {
        for &(m, t, l) in &[(2.0, 0.3, 1.3), (3.0, 0.13, 1.0), (1.5, 0.55, 2.0)] {
            let f = EigenFunction::new(m, t, l).unwrap();
            for i in 0..=200 {
                let u = i as f64 / 200.0;
                let a = f.eval(u);
                let b = eigenfunction_eval(m, t, l, u).unwrap();
                assert!((a - b).abs() < 1e-11, "u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn integer_inverse_is_perturbed() {
        let cp = eigen_char_poly(1.0, 0.5).unwrap();
        assert!(cp.perturbed);
        assert!(cp.theta < 0.5);
        assert!(!eigen_char_poly(1.0, 0.3).unwrap().perturbed);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eigenfunction_eval(1.0, 0.3, 0.0, 0.5).is_err());
        assert!(EigenFunction::new(-1.0, 0.3, 1.0).is_err());
        assert!(eigenfunction_eval(1.0, 0.3, 1.0, 1.5).is_err());
    }
}
