//! Dimensional constants: ball volumes, `c_{n,k}`, Blaschke–Petkantschin
//! constants and the asymptotic ratio.
//!
//! Every quantity is accumulated in log space and exponentiated once.
//! `ln ω_n` uses the recursion `ω_n = (2π/n) ω_{n-2}` from `ω_0 = 1`,
//! `ω_1 = 2`, which involves no special functions for integer `n`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// `ln ω_n` for `n >= 0` (`ω_0 = 1`).
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    let mut j = if n % 2 == 0 { 2 } else { 3 };
    let mut acc = if n % 2 == 0 { 0.0 } else { 2f64.ln() };
    while j <= n {
        acc += (2.0 * PI / j as f64).ln();
        j += 2;
    }
    acc
}

/// `ω_n`, the volume of the unit Euclidean ball in `R^n`. Underflows to 0
/// for `n` beyond roughly 340; use [`ln_unit_ball_volume`] there.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("unit_ball_volume requires n >= 1".into()));
    }
    Ok(omega(n))
}

/// `ω_n` without argument checking (`ω_0 = 1`).
pub fn omega(n: usize) -> f64 {
    if n <= 20 {
        // Direct product: a handful of correctly rounded factors.
        let (mut v, mut j) = if n % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
        while j <= n {
            v *= 2.0 * PI / j as f64;
            j += 2;
        }
        v
    } else {
        ln_unit_ball_volume(n).exp()
    }
}

/// `|S^{n-1}| = n ω_n`, the unnormalized surface area of the unit sphere.
pub fn sphere_area(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * omega(n)
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    Ok(())
}

/// `ln c_{n,k}^k = ((n-k)/n) ln ω_n - ln ω_{n-k}`.
pub fn ln_c_nk_pow_k(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    Ok((n - k) as f64 / n as f64 * ln_unit_ball_volume(n) - ln_unit_ball_volume(n - k))
}

/// `c_{n,k} = (ω_n^{(n-k)/n} / ω_{n-k})^{1/k}`.
pub fn c_nk(n: usize, k: usize) -> Result<f64> {
    Ok((ln_c_nk_pow_k(n, k)? / k as f64).exp())
}

/// `c_{n,k}^k`.
pub fn c_nk_pow_k(n: usize, k: usize) -> Result<f64> {
    Ok(ln_c_nk_pow_k(n, k)?.exp())
}

fn ln_factorial(q: usize) -> f64 {
    (2..=q).map(|i| (i as f64).ln()).sum()
}

/// `ln p(n, s, q)`.
pub fn ln_bp_constant(n: usize, s: usize, q: usize) -> Result<f64> {
    if !(1 <= q && q <= s && s <= n) {
        return Err(Error::InvalidParameter(format!("need 1 <= q <= s <= n, got n={n}, s={s}, q={q}")));
    }
    let mut acc = (n - s) as f64 * ln_factorial(q);
    for i in 0..q {
        acc += ((n - i) as f64).ln() + ln_unit_ball_volume(n - i);
        acc -= ((s - i) as f64).ln() + ln_unit_ball_volume(s - i);
    }
    Ok(acc)
}

/// Blaschke–Petkantschin constant
/// `p(n,s,q) = (q!)^{n-s} ∏_{i<q} (n-i)ω_{n-i} / ∏_{i<q} (s-i)ω_{s-i}`.
pub fn bp_constant(n: usize, s: usize, q: usize) -> Result<f64> {
    Ok(ln_bp_constant(n, s, q)?.exp())
}

/// `ln` of `p(n, n-k, n-k) · c_{n,k}^{-kn}`, the explicit constant of the
/// power-type measure inequality.
pub fn ln_power_constant(n: usize, k: usize) -> Result<f64> {
    let m = n - k;
    Ok(ln_bp_constant(n, m, m)? - n as f64 * ln_c_nk_pow_k(n, k)?)
}

/// `[c_{n,k}^{-n} p(n,n-k)]^{1/(k(n-k))} / sqrt(n-k)` with `p(n,s) = p(n,s,s)`.
pub fn asymptotic_ratio(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let m = n - k;
    let ln_c = ln_c_nk_pow_k(n, k)? / k as f64;
    let ln = (-(n as f64) * ln_c + ln_bp_constant(n, m, m)?) / (k * m) as f64;
    Ok(ln.exp() / (m as f64).sqrt())
}
