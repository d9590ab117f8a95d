use statrs::function::factorial::ln_factorial;

use crate::error::{check_range, Error, Result};

fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln[(1+θh)^{h+1} / (h+1)!]`.
pub fn ln_path_increase_upper_bound(h: u64, theta: f64) -> f64 {
    (h as f64 + 1.0) * (theta * h as f64).ln_1p() - ln_factorial(h + 1)
}

/// `(1+θh)^{h+1} / (h+1)!`, an upper bound on the probability that a fixed
/// path of length `h` is increasing.
pub fn path_increase_upper_bound(h: u64, theta: f64) -> f64 {
    let n = h + 1;
    if n <= 30 {
        // Exact factorial and a short product keep small cases at full precision.
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        (1.0 + theta * h as f64).powi(n as i32) / fact
    } else {
        ln_path_increase_upper_bound(h, theta).exp()
    }
}

/// `Σ_{j=0}^{n} C(n,j) (-1)^{n-j} (1+jθ)^{h+1} / (h+1)!` for `n ≤ h+1`.
///
/// This is the `n`-th forward difference of `j ↦ (1+jθ)^{h+1}/(h+1)!`.
/// Expanding the binomial and using `Δ^n j^k |_0 = n! S(k,n)` gives
/// `Σ_{k=n}^{h+1} θ^k T(k,n) / (h+1-k)!` with `T(k,n) = n! S(k,n) / k!`,
/// a sum of non-negative terms that is evaluated in log space. `T` obeys
/// `T(k,n) = (n/k)(T(k-1,n) + T(k-1,n-1))`.
pub fn out_of_order_sum(n: u64, h: u64, theta: f64) -> Result<f64> {
    check_range("theta", theta, 0.0, 1.0)?;
    let big_h = h + 1;
    if n > big_h {
        return Ok(0.0);
    }
    if theta == 0.0 {
        return Ok(if n == 0 {
            (-ln_factorial(big_h)).exp()
        } else {
            0.0
        });
    }
    let hs = big_h as usize;
    let ns = n as usize;
    // ln T(k, c) for the current column c, k = 0..=H.
    let mut col = vec![f64::NEG_INFINITY; hs + 1];
    col[0] = 0.0;
    for c in 1..=ns {
        let mut next = vec![f64::NEG_INFINITY; hs + 1];
        for k in c..=hs {
            let r = (c as f64 / k as f64).ln();
            next[k] = r + ln_add_exp(next[k - 1], col[k - 1]);
        }
        col = next;
    }
    let lt = theta.ln();
    let ln_total = (ns..=hs).fold(f64::NEG_INFINITY, |acc, k| {
        ln_add_exp(acc, k as f64 * lt + col[k] - ln_factorial((hs - k) as u64))
    });
    Ok(ln_total.exp())
}

/// Bound on the probability that `n` specified uniforms along a path of
/// length `h` are out of order. Defined for `n ≤ h - 1`.
pub fn out_of_order_bound(n: u64, h: u64, theta: f64) -> Result<f64> {
    if h == 0 || n > h - 1 {
        return Err(Error::invalid("n", format!("need n <= h - 1 (n = {n}, h = {h})")));
    }
    out_of_order_sum(n, h, theta)
}

/// `Σ_d count(d)·(1+θd)^{d+1}/(d+1)!` over a cutset given as `(depth, count)`.
pub fn cutset_first_moment_bound(depth_counts: &[(u64, f64)], theta: f64) -> Result<f64> {
    check_range("theta", theta, 0.0, 1.0)?;
    let mut total = 0.0;
    for &(d, c) in depth_counts {
        if d == 0 {
            return Err(Error::invalid("depth", "cutset depths must be >= 1"));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid("count", format!("{c} must be >= 0")));
        }
        if c > 0.0 {
            total += (c.ln() + ln_path_increase_upper_bound(d, theta)).exp();
        }
    }
    Ok(total)
}

/// `m^h (1+θh)^{h+1}/(h+1)!`: expected number of increasing paths to level
/// `h` of a tree with mean offspring `m`.
pub fn regular_tree_first_moment_bound(m: f64, h: u64, theta: f64) -> Result<f64> {
    check_range("theta", theta, 0.0, 1.0)?;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::invalid("m", format!("{m} must be > 0")));
    }
    Ok((h as f64 * m.ln() + ln_path_increase_upper_bound(h, theta)).exp())
}

/// `Δ(Δ-1)^{h-1} (1+θh)^{h+1}/(h+1)!`, counting self-avoiding paths of
/// length `h` in a graph of maximum degree `Δ`.
pub fn lattice_first_moment_bound(max_degree: u64, h: u64, theta: f64) -> Result<f64> {
    check_range("theta", theta, 0.0, 1.0)?;
    if max_degree < 2 {
        return Err(Error::invalid("max_degree", "must be >= 2"));
    }
    if h == 0 {
        return Ok(1.0);
    }
    let d = max_degree as f64;
    let ln_paths = d.ln() + (h - 1) as f64 * (d - 1.0).ln();
    Ok((ln_paths + ln_path_increase_upper_bound(h, theta)).exp())
}

/// `n^h (1+θh)^{h+1}/(h+1)!` for non-backtracking paths in one closed
/// orthant of `ℤⁿ`, where every site has `n` outward neighbours.
pub fn lattice_nb_first_moment_bound(dim: u64, h: u64, theta: f64) -> Result<f64> {
    check_range("theta", theta, 0.0, 1.0)?;
    if dim < 1 {
        return Err(Error::invalid("dim", "must be >= 1"));
    }
    Ok((h as f64 * (dim as f64).ln() + ln_path_increase_upper_bound(h, theta)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_bound_values() {
        assert!((path_increase_upper_bound(4, 0.0) - 1.0 / 120.0).abs() < 1e-18);
        assert_eq!(path_increase_upper_bound(0, 0.7), 1.0);
        assert!((path_increase_upper_bound(5, 0.2) - 64.0 / 720.0).abs() < 1e-16);
        // Log route and direct route meet at the switch.
        let a = path_increase_upper_bound(29, 0.3);
        let b = ln_path_increase_upper_bound(29, 0.3).exp();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(path_increase_upper_bound(400, 0.1).is_finite());
    }

    #[test]
    fn out_of_order_small_cases() {
        assert!((out_of_order_bound(0, 4, 0.37).unwrap() - 1.0 / 120.0).abs() < 1e-17);
        assert_eq!(out_of_order_bound(3, 6, 0.0).unwrap(), 0.0);
        assert!(out_of_order_bound(4, 4, 0.3).is_err());
        assert!(out_of_order_bound(0, 0, 0.3).is_err());
        // n = 1: ((1+θ)^{h+1} - 1)/(h+1)!.
        let (h, t) = (5u64, 0.3f64);
        let direct = ((1.0 + t).powi(6) - 1.0) / 720.0;
        assert!((out_of_order_bound(1, h, t).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn out_of_order_matches_exact_alternating_sum() {
        use crate::analytic::exact;
        for h in 1..=14u64 {
            for n in 0..=h + 1 {
                for &t in &[0.1, 0.5, 1.0] {
                    let r = exact::from_f64(t).unwrap();
                    let want = exact::to_f64(&exact::out_of_order_sum(n, h, &r).unwrap());
                    let got = out_of_order_sum(n, h, t).unwrap();
                    assert!((got - want).abs() <= 1e-12 * want, "n={n} h={h} θ={t}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn cutset_examples() {
        assert_eq!(cutset_first_moment_bound(&[(1, 1.0)], 0.0).unwrap(), 0.5);
        assert_eq!(cutset_first_moment_bound(&[], 0.3).unwrap(), 0.0);
        let v = cutset_first_moment_bound(&[(10, 1024.0)], 0.1).unwrap();
        let direct = 1024.0 * 2f64.powi(11) / 39_916_800.0;
        assert!((v - direct).abs() < 1e-14);
        assert!((v - 5.254e-2).abs() < 1e-4);
        assert!((regular_tree_first_moment_bound(2.0, 10, 0.1).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(lattice_first_moment_bound(4, 1, 0.0).unwrap(), 2.0);
        assert!(lattice_first_moment_bound(1, 3, 0.1).is_err());
    }
}
