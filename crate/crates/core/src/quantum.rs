//! The non-linearity parameter χ, the quantum correction factors q(χ) and
//! q_scalar(χ), and the emitted photon spectrum.
//!
//! Both factors are integrals over r ∈ [0, 1/χ] with the synchrotron tail
//! T = ∫ K_{5/3}. With u = r/(1 − χr) the range becomes [0, ∞) and
//!
//! ```text
//! q_scalar = C ∫ u/(1+χu)³ T(u) du
//! q        = q_scalar + C ∫ χ²u³/(1+χu)⁴ K_{2/3}(u) du,     C = 9√3/(8π)
//! ```
//!
//! A further substitution u = w³ removes the u^{1/3} behaviour at the origin.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bessel::{bessel_k53_tail, bessel_k_scaled, bessel_k53_tail_scaled, BesselOrder};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::minkowski::{lorentz_force, FieldTensor, FourVector};
use crate::quad::{integrate, Integral, Tolerance};

/// Below this χ the factors come from their Taylor expansion.
pub const SERIES_CHI: f64 = 1e-4;

/// Integration stops at u = U_MAX where T(u) ~ e^{-60}.
const U_MAX: f64 = 60.0;

const OUTER_TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 500 };

fn prefactor() -> f64 {
    9.0 * 3f64.sqrt() / (8.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QFactorResult {
    pub chi: f64,
    pub q: f64,
    pub q_scalar: f64,
    pub abs_error_estimate: f64,
    pub node_count: usize,
}

/// χ from a four-force: (3/2) ħ/(m0² c³) √(−f·f).
pub fn chi_from_force(f: FourVector, k: &PhysicalConstants) -> Result<f64> {
    let ff = f.norm2();
    let scale = f.0.iter().map(|c| c * c).sum::<f64>();
    if ff > 1e-12 * scale {
        return Err(Error::TimelikeForce(ff));
    }
    let mag = (-ff).max(0.0).sqrt();
    Ok(1.5 * k.hbar / (k.m0 * k.m0 * k.c.powi(3)) * mag)
}

/// χ for an electron with four-velocity `v` in the field `field`.
pub fn chi(field: &FieldTensor, v: FourVector, k: &PhysicalConstants) -> Result<f64> {
    chi_from_force(lorentz_force(field, v, k.e, k.c)?, k)
}

/// −f·f corresponding to a given χ (inverse of `chi_from_force`).
pub fn force_square_from_chi(chi: f64, k: &PhysicalConstants) -> f64 {
    let m = 2.0 * chi * k.m0 * k.m0 * k.c.powi(3) / (3.0 * k.hbar);
    m * m
}

fn check_chi(chi: f64) -> Result<()> {
    if chi.is_nan() || chi < 0.0 || chi.is_infinite() {
        return Err(Error::Domain(format!("chi must be finite and non-negative, got {chi}")));
    }
    Ok(())
}

/// Taylor coefficients (a1, a2, a3) of q_scalar and of the K_{2/3} term in
/// powers of χ. Every coefficient is a product of gamma functions from
/// ∫ t^{μ-1} K_ν(t) dt = 2^{μ-2} Γ((μ-ν)/2) Γ((μ+ν)/2).
fn series_coefficients() -> ([f64; 3], [f64; 3]) {
    let c = prefactor();
    let g = gamma;
    let scalar = [
        -4.0 * c * g(7.0 / 6.0) * g(17.0 / 6.0),
        12.0 * c * g(5.0 / 3.0) * g(10.0 / 3.0),
        -32.0 * c * g(13.0 / 6.0) * g(23.0 / 6.0),
    ];
    let extra = [0.0, 4.0 * c * g(5.0 / 3.0) * g(7.0 / 3.0), -32.0 * c * g(13.0 / 6.0) * g(17.0 / 6.0)];
    (scalar, extra)
}

fn series(chi: f64) -> QFactorResult {
    let (s, e) = series_coefficients();
    let poly = |a: [f64; 3]| chi * (a[0] + chi * (a[1] + chi * a[2]));
    let q_scalar = 1.0 + poly(s);
    let q = q_scalar + poly(e);
    // the first omitted term is well below the χ³ one
    let err = (s[2] + e[2]).abs() * chi.powi(3);
    QFactorResult { chi, q, q_scalar, abs_error_estimate: err, node_count: 0 }
}

fn scalar_integrand(chi: f64, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let u = w * w * w;
    let d = 1.0 + chi * u;
    // T(u) underflows beyond ~745; the scaled form keeps the product finite
    let t = bessel_k53_tail_scaled(u).unwrap_or(0.0) * (-u).exp();
    3.0 * w * w * u / (d * d * d) * t
}

fn extra_integrand(chi: f64, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let u = w * w * w;
    let d = 1.0 + chi * u;
    let kv = bessel_k_scaled(BesselOrder::TwoThirds, u).unwrap_or(0.0) * (-u).exp();
    3.0 * w * w * chi * chi * u * u * u / (d * d * d * d) * kv
}

fn outer(f: impl Fn(f64) -> f64) -> Result<Integral> {
    integrate(f, 0.0, U_MAX.cbrt(), OUTER_TOL)
}

/// q(χ) and q_scalar(χ) together with the quadrature error estimate.
pub fn q_factors(chi: f64) -> Result<QFactorResult> {
    check_chi(chi)?;
    if chi == 0.0 {
        return Ok(QFactorResult { chi, q: 1.0, q_scalar: 1.0, abs_error_estimate: 0.0, node_count: 0 });
    }
    if chi < SERIES_CHI {
        return Ok(series(chi));
    }
    let c = prefactor();
    let s = outer(|w| scalar_integrand(chi, w))?;
    let e = outer(|w| extra_integrand(chi, w))?;
    let q_scalar = c * s.value;
    Ok(QFactorResult {
        chi,
        q: q_scalar + c * e.value,
        q_scalar,
        abs_error_estimate: c * (s.abs_error + e.abs_error),
        node_count: s.evals + e.evals,
    })
}

pub fn q_factor(chi: f64) -> Result<f64> {
    Ok(q_factors(chi)?.q)
}

pub fn q_scalar_factor(chi: f64) -> Result<f64> {
    Ok(q_factors(chi)?.q_scalar)
}

/// ∫_0^∞ r T(r) dr, which equals 8π/(9√3) = Γ(7/3)Γ(2/3); the classical
/// normalization that makes q(0) = 1.
pub fn classical_normalization() -> Result<Integral> {
    let tol = Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 1000 };
    integrate(|w| scalar_integrand(0.0, w), 0.0, U_MAX.cbrt(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// ħω (J).
    pub photon_energy: f64,
    /// d²W/(dt d(ħω)) (W/J).
    pub rate: f64,
    /// ħω / (χ m0 c² γ).
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub chi: f64,
    pub gamma: f64,
    /// Classical radiated power −(τ0/m0) f·f (W).
    pub classical_power: f64,
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    /// Trapezoid integral of the rate over ħω.
    pub fn total_power(&self) -> f64 {
        let x: Vec<f64> = self.points.iter().map(|p| p.photon_energy).collect();
        let y: Vec<f64> = self.points.iter().map(|p| p.rate).collect();
        crate::quad::trapezoid(&x, &y)
    }

    pub fn peak(&self) -> Option<&SpectrumPoint> {
        self.points.iter().max_by(|a, b| a.rate.total_cmp(&b.rate))
    }
}

/// Emission spectrum on `n` points, uniformly spaced in w = u^{1/3} up to
/// u = 200, followed by the hard cutoff ħω = m0c²γ where the rate is zero.
pub fn spectrum(chi: f64, gamma: f64, n: usize, k: &PhysicalConstants) -> Result<Spectrum> {
    if !(chi.is_finite() && chi > 0.0) {
        return Err(Error::Domain(format!("chi must be positive, got {chi}")));
    }
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    if n < 2 {
        return Err(Error::Domain("spectrum needs at least two points".into()));
    }
    let energy = k.mc2() * gamma;
    let classical_power = k.tau0() / k.m0 * force_square_from_chi(chi, k);
    let scale = prefactor() / (chi * chi * energy * energy);
    let w_max = 200f64.cbrt();
    let mut points = Vec::with_capacity(n + 1);
    points.push(SpectrumPoint { photon_energy: 0.0, rate: 0.0, r: 0.0 });
    for i in 1..n {
        let u = (w_max * i as f64 / (n - 1) as f64).powi(3);
        let r = u / (1.0 + chi * u);
        let hw = r * chi * energy;
        let rate = classical_power * scale * hw * bessel_k53_tail(u)?;
        points.push(SpectrumPoint { photon_energy: hw, rate, r });
    }
    points.push(SpectrumPoint { photon_energy: energy, rate: 0.0, r: 1.0 / chi });
    Ok(Spectrum { chi, gamma, classical_power, points })
}

/// Interpolation table of q and q_scalar on a log-spaced χ grid, for
/// evaluating the factors at every sample of a long trajectory.
#[derive(Debug, Clone)]
pub struct QTable {
    ln_min: f64,
    step: f64,
    q: Vec<f64>,
    q_scalar: Vec<f64>,
}

impl QTable {
    pub fn new(chi_min: f64, chi_max: f64, n: usize) -> Result<Self> {
        if !(chi_min > 0.0 && chi_max > chi_min && n >= 2) {
            return Err(Error::Domain("invalid q table range".into()));
        }
        let ln_min = chi_min.ln();
        let step = (chi_max.ln() - ln_min) / (n - 1) as f64;
        let rows: Vec<QFactorResult> = (0..n)
            .into_par_iter()
            .map(|i| q_factors((ln_min + step * i as f64).exp()))
            .collect::<Result<_>>()?;
        Ok(QTable {
            ln_min,
            step,
            q: rows.iter().map(|r| r.q).collect(),
            q_scalar: rows.iter().map(|r| r.q_scalar).collect(),
        })
    }

    /// Table covering 1e-4 ≤ χ ≤ 1e3 at 64 points per decade.
    pub fn standard() -> Result<Self> {
        Self::new(SERIES_CHI, 1e3, 7 * 64 + 1)
    }

    /// (q, q_scalar); exact outside the table range.
    pub fn lookup(&self, chi: f64) -> Result<(f64, f64)> {
        check_chi(chi)?;
        let n = self.q.len();
        let pos = if chi > 0.0 { (chi.ln() - self.ln_min) / self.step } else { -1.0 };
        if pos < 0.0 || pos > (n - 1) as f64 {
            let r = q_factors(chi)?;
            return Ok((r.q, r.q_scalar));
        }
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        let lerp = |v: &[f64]| v[i] + t * (v[i + 1] - v[i]);
        Ok((lerp(&self.q), lerp(&self.q_scalar)))
    }
}
