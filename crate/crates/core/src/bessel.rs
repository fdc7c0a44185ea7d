//! Modified Bessel functions K_ν for the fractional orders used by the
//! synchrotron kernel, and the tail integral ∫_x^∞ K_{5/3}(t) dt.
//!
//! Each function is split in three bands: a power series for small x, the
//! integral representation
//!
//! ```text
//! K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(ν t) dt
//! ```
//!
//! under adaptive quadrature in the middle, and the Hankel asymptotic series
//! for large x.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};

/// Upper edge of the power-series band for K_ν.
pub const SERIES_MAX: f64 = 2.0;
/// Upper edge of the series band for the K_{5/3} tail.
pub const TAIL_SERIES_MAX: f64 = 1.0;
/// Lower edge of the asymptotic band (both functions).
pub const ASYMPTOTIC_MIN: f64 = 30.0;
/// exp(-x) is subnormal beyond this point; results flush to zero.
pub const UNDERFLOW: f64 = 745.0;

const QUAD_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 400 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    OneThird,
    Half,
    TwoThirds,
    FiveThirds,
}

impl BesselOrder {
    pub fn value(self) -> f64 {
        match self {
            BesselOrder::OneThird => 1.0 / 3.0,
            BesselOrder::Half => 0.5,
            BesselOrder::TwoThirds => 2.0 / 3.0,
            BesselOrder::FiveThirds => 5.0 / 3.0,
        }
    }
}

fn check_argument(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("Bessel argument must be positive, got {x}")));
    }
    Ok(())
}

/// K_ν(x) for x > 0.
pub fn bessel_k(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    if x > UNDERFLOW {
        return Ok(0.0);
    }
    if x <= SERIES_MAX && order != BesselOrder::Half {
        return Ok(k_series(order.value(), x));
    }
    Ok(bessel_k_scaled(order, x)? * (-x).exp())
}

/// e^x K_ν(x), finite for all x > 0.
pub fn bessel_k_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    let nu = order.value();
    if order == BesselOrder::Half {
        return Ok((FRAC_PI_2 / x).sqrt());
    }
    if x <= SERIES_MAX {
        return Ok(k_series(nu, x) * x.exp());
    }
    if x >= ASYMPTOTIC_MIN {
        return Ok((FRAC_PI_2 / x).sqrt() * hankel_sum(nu, x));
    }
    k_integral_scaled(nu, x)
}

/// Power series of I_μ(x) = Σ (x/2)^{2k+μ} / (k! Γ(k+μ+1)).
fn i_series(mu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = h.powf(mu) / gamma(mu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= h2 / (kf * (kf + mu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn k_series(nu: f64, x: f64) -> f64 {
    PI / (2.0 * (nu * PI).sin()) * (i_series(-nu, x) - i_series(nu, x))
}

/// Σ a_k(ν) x^{-k} with a_k = Π_{j=1..k} (4ν² − (2j−1)²) / (k! 8^k).
fn hankel_coefficients(nu: f64, n: usize) -> Vec<f64> {
    let mu = 4.0 * nu * nu;
    let mut a = Vec::with_capacity(n);
    a.push(1.0);
    for k in 1..n {
        let j = (2 * k - 1) as f64;
        let prev = a[k - 1];
        a.push(prev * (mu - j * j) / (8.0 * k as f64));
    }
    a
}

fn hankel_sum(nu: f64, x: f64) -> f64 {
    let a = hankel_coefficients(nu, 40);
    let mut sum = 0.0;
    let mut xp = 1.0;
    let mut last = f64::INFINITY;
    for (k, ak) in a.into_iter().enumerate() {
        let t = ak * xp;
        // the series is asymptotic: stop once terms start growing again
        if k as f64 > 0.5 * x && t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last <= 1e-17 * sum.abs() {
            break;
        }
        xp /= x;
    }
    sum
}

/// Upper cutoff in t beyond which exp(-x (cosh t - 1)) < e^{-745}.
fn cutoff(x: f64) -> f64 {
    (1.0 + UNDERFLOW / x).acosh()
}

fn k_integral_scaled(nu: f64, x: f64) -> Result<f64> {
    let f = |t: f64| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    Ok(integrate(f, 0.0, cutoff(x), QUAD_TOL)?.value)
}

/// T(x) = ∫_x^∞ K_{5/3}(t) dt for x > 0.
pub fn bessel_k53_tail(x: f64) -> Result<f64> {
    check_argument(x)?;
    if x > UNDERFLOW {
        return Ok(0.0);
    }
    if x <= TAIL_SERIES_MAX {
        return Ok(tail_series(x));
    }
    Ok(bessel_k53_tail_scaled(x)? * (-x).exp())
}

/// e^x T(x).
pub fn bessel_k53_tail_scaled(x: f64) -> Result<f64> {
    check_argument(x)?;
    if x <= TAIL_SERIES_MAX {
        return Ok(tail_series(x) * x.exp());
    }
    if x >= ASYMPTOTIC_MIN {
        return Ok(tail_asymptotic_scaled(x));
    }
    // ∫_x^∞ K_ν = ∫_0^∞ exp(-x cosh s) cosh(ν s) / cosh s ds
    let nu = 5.0 / 3.0;
    let f = |s: f64| (-x * (s.cosh() - 1.0)).exp() * (nu * s).cosh() / s.cosh();
    Ok(integrate(f, 0.0, cutoff(x), QUAD_TOL)?.value)
}

/// ∫_0^x I_μ(t) dt, term by term.
fn i_series_integral(mu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = h.powf(mu) / gamma(mu + 1.0);
    let mut sum = 2.0 * h * term / (mu + 1.0);
    for k in 1..200 {
        let kf = k as f64;
        term *= h2 / (kf * (kf + mu));
        let add = 2.0 * h * term / (2.0 * kf + mu + 1.0);
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

// Uses K_{5/3} = -2 K'_{2/3} - K_{1/3} and ∫_0^∞ K_{1/3} = π/√3.
fn tail_series(x: f64) -> f64 {
    let nu = 1.0 / 3.0;
    let int_k13 =
        PI / (2.0 * (nu * PI).sin()) * (i_series_integral(-nu, x) - i_series_integral(nu, x));
    2.0 * k_series(2.0 / 3.0, x) - PI / 3f64.sqrt() + int_k13
}

fn tail_asymptotic_scaled(x: f64) -> f64 {
    // T(x) ≈ sqrt(π/2) e^{-x} x^{-1/2} Σ c_n x^{-n},
    // c_n = Σ_{k+m=n} a_k (-1)^m (k+1/2)_m
    const N: usize = 30;
    let a = hankel_coefficients(5.0 / 3.0, N);
    let mut sum = 0.0;
    let mut xp = 1.0;
    let mut last = f64::INFINITY;
    for n in 0..N {
        let mut c = 0.0;
        for (k, ak) in a.iter().enumerate().take(n + 1) {
            let m = n - k;
            let mut poch = 1.0;
            for i in 0..m {
                poch *= k as f64 + 0.5 + i as f64;
            }
            c += ak * if m % 2 == 0 { poch } else { -poch };
        }
        let t = c * xp;
        if n as f64 > 0.5 * x && t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last <= 1e-17 * sum.abs() {
            break;
        }
        xp /= x;
    }
    (FRAC_PI_2 / x).sqrt() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn half_order_closed_form() {
        let v = bessel_k(BesselOrder::Half, 1.0).unwrap();
        assert!(rel(v, FRAC_PI_2.sqrt() * (-1.0f64).exp()) < 1e-15);
        assert!((v - 0.461_068_504_447_895).abs() < 1e-14);
    }

    #[test]
    fn small_argument_leading_term() {
        let x = 1e-6;
        let lead = 0.5 * gamma(5.0 / 3.0) * (2.0_f64 / x).powf(5.0 / 3.0);
        assert!(rel(bessel_k(BesselOrder::FiveThirds, x).unwrap(), lead) < 1e-4);
    }

    #[test]
    fn large_argument_leading_term() {
        let x = 50.0;
        let lead = (PI / 100.0).sqrt() * (-50.0f64).exp();
        assert!(rel(bessel_k(BesselOrder::TwoThirds, x).unwrap(), lead) < 1e-3 * 2.0);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(bessel_k(BesselOrder::TwoThirds, 0.0).is_err());
        assert!(bessel_k(BesselOrder::TwoThirds, -1.0).is_err());
        assert!(bessel_k53_tail(0.0).is_err());
        assert!(bessel_k53_tail(f64::NAN).is_err());
    }

    #[test]
    fn underflow_to_zero() {
        assert_eq!(bessel_k(BesselOrder::FiveThirds, 800.0).unwrap(), 0.0);
        assert!(bessel_k53_tail(700.0).unwrap() < 1e-300);
        assert_eq!(bessel_k53_tail(800.0).unwrap(), 0.0);
    }

    #[test]
    fn tail_power_law_at_small_x() {
        // T(x) ≈ (3/2) Γ(5/3) 2^{2/3} x^{-2/3} as x → 0
        let t1 = bessel_k53_tail(1e-6).unwrap();
        let t2 = bessel_k53_tail(1e-4).unwrap();
        let slope = (t2 / t1).ln() / (100.0f64).ln();
        assert!((slope + 2.0 / 3.0).abs() < 1e-3, "slope {slope}");
    }

    #[test]
    fn tail_bound_at_ten() {
        let x = 10.0;
        let k = bessel_k(BesselOrder::FiveThirds, x).unwrap();
        let t = bessel_k53_tail(x).unwrap();
        assert!(t > 0.0 && t < k * (1.0 + 1.0 / x));
    }

    #[test]
    fn bands_agree_at_crossovers() {
        for order in [BesselOrder::OneThird, BesselOrder::TwoThirds, BesselOrder::FiveThirds] {
            let nu = order.value();
            let below = k_series(nu, SERIES_MAX);
            let above = k_integral_scaled(nu, SERIES_MAX).unwrap() * (-SERIES_MAX).exp();
            assert!(rel(below, above) < 1e-12, "{nu}");
            let quad = k_integral_scaled(nu, ASYMPTOTIC_MIN).unwrap();
            let asym = (FRAC_PI_2 / ASYMPTOTIC_MIN).sqrt() * hankel_sum(nu, ASYMPTOTIC_MIN);
            assert!(rel(quad, asym) < 1e-12, "{nu}");
        }
        let x = TAIL_SERIES_MAX;
        let nu = 5.0 / 3.0;
        let f = |s: f64| (-x * s.cosh()).exp() * (nu * s).cosh() / s.cosh();
        let quad = integrate(f, 0.0, cutoff(x), QUAD_TOL).unwrap().value;
        assert!(rel(tail_series(x), quad) < 1e-12);
        let x = ASYMPTOTIC_MIN;
        let f = |s: f64| (-x * (s.cosh() - 1.0)).exp() * (nu * s).cosh() / s.cosh();
        let quad = integrate(f, 0.0, cutoff(x), QUAD_TOL).unwrap().value;
        assert!(rel(tail_asymptotic_scaled(x), quad) < 1e-12);
    }

    #[test]
    fn tail_derivative_is_minus_k53() {
        for x in [0.05_f64, 0.5, 0.99, 1.5, 3.0, 10.0, 29.0, 40.0] {
            let h = 1e-4 * x.min(1.0);
            let d = (bessel_k53_tail(x + h).unwrap() - bessel_k53_tail(x - h).unwrap()) / (2.0 * h);
            let k = bessel_k(BesselOrder::FiveThirds, x).unwrap();
            assert!(rel(-d, k) < 1e-6, "x = {x}: {} vs {k}", -d);
        }
    }
}
