//! Radiation of a stochastic electron: the drift-corrected jerk of the mean
//! path, the effective radiation-reaction field built from it and the
//! radiated power weighted by the probability at the mean position.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ensemble::EnsembleState;
use super::wavepacket::DriftSource;
use crate::classical::perturbed_power;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::minkowski::{FieldTensor, FourVector};
use crate::quantum::q_scalar_factor;

/// Savitzky-Golay window length and polynomial degree.
pub const SG_WINDOW: usize = 9;
pub const SG_DEGREE: usize = 6;

/// Uniformly sampled mean trajectory E[x̂](τ) with P(τ). Velocity and
/// acceleration series are optional; derivatives are taken of the highest
/// one present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPath {
    pub tau: Vec<f64>,
    pub x: Vec<FourVector>,
    pub v: Option<Vec<FourVector>>,
    pub a: Option<Vec<FourVector>>,
    pub prob: Vec<f64>,
}

impl MeanPath {
    pub fn new(tau: Vec<f64>, x: Vec<FourVector>, prob: Vec<f64>) -> Result<Self> {
        let p = MeanPath { tau, x, v: None, a: None, prob };
        p.check()?;
        Ok(p)
    }

    pub fn with_velocity(mut self, v: Vec<FourVector>) -> Result<Self> {
        self.v = Some(v);
        self.check()?;
        Ok(self)
    }

    pub fn with_acceleration(mut self, a: Vec<FourVector>) -> Result<Self> {
        self.a = Some(a);
        self.check()?;
        Ok(self)
    }

    /// Means, mean velocities and P of an ensemble; mean accelerations are
    /// included when the ensemble carried them.
    pub fn from_state(state: &EnsembleState) -> Result<Self> {
        let s = &state.slices;
        let mut p = MeanPath::new(
            s.iter().map(|s| s.tau).collect(),
            s.iter().map(|s| s.mean).collect(),
            s.iter().map(|s| s.prob).collect(),
        )?
        .with_velocity(s.iter().map(|s| s.mean_velocity).collect())?;
        if s.iter().any(|s| s.mean_acceleration != FourVector::ZERO) {
            p = p.with_acceleration(s.iter().map(|s| s.mean_acceleration).collect())?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    fn step(&self) -> f64 {
        self.tau[1] - self.tau[0]
    }

    fn check(&self) -> Result<()> {
        let n = self.tau.len();
        if n < SG_WINDOW {
            return Err(Error::TooFewSamples { need: SG_WINDOW, got: n });
        }
        let lens_ok = self.x.len() == n
            && self.prob.len() == n
            && self.v.as_ref().is_none_or(|v| v.len() == n)
            && self.a.as_ref().is_none_or(|a| a.len() == n);
        if !lens_ok {
            return Err(Error::Config("mean-path series differ in length".into()));
        }
        let h = self.step();
        if !(h > 0.0) || self.tau.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::Config("mean path must be uniformly sampled in tau".into()));
        }
        if self.prob.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(Error::Domain("P must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Weights w such that Σ_j w_j y(t_{start+j}) is the `order`-th derivative,
/// at sample `at` of the window, of the least-squares polynomial of degree
/// SG_DEGREE, for unit spacing.
fn sg_weights(at: usize, order: usize) -> [f64; SG_WINDOW] {
    // abscissae scaled to [-1, 1] keep the fit well conditioned
    let half = (SG_WINDOW / 2) as f64;
    let design = DMatrix::from_fn(SG_WINDOW, SG_DEGREE + 1, |j, p| ((j as f64 - at as f64) / half).powi(p as i32));
    let pinv = design
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .expect("Savitzky-Golay design matrix has full rank");
    let fact: f64 = (1..=order).map(|i| i as f64).product();
    let scale = fact / half.powi(order as i32);
    std::array::from_fn(|j| scale * pinv[(order, j)])
}

fn window_start(i: usize, n: usize) -> usize {
    let half = SG_WINDOW / 2;
    i.saturating_sub(half).min(n - SG_WINDOW)
}

fn derivative_vec(series: &[FourVector], i: usize, order: usize, h: f64) -> FourVector {
    let s = window_start(i, series.len());
    let w = sg_weights(i - s, order);
    let mut out = FourVector::ZERO;
    for (j, wj) in w.iter().enumerate() {
        out += series[s + j] * *wj;
    }
    out * (1.0 / h.powi(order as i32))
}

fn derivative_scalar(series: &[f64], i: usize, order: usize, h: f64) -> f64 {
    let s = window_start(i, series.len());
    let w = sg_weights(i - s, order);
    w.iter().enumerate().map(|(j, wj)| wj * series[s + j]).sum::<f64>() / h.powi(order as i32)
}

/// d ln P/dτ at sample `i`.
pub fn log_probability_rate(path: &MeanPath, i: usize) -> Result<f64> {
    if i >= path.len() {
        return Err(Error::Domain(format!("sample {i} outside mean path")));
    }
    let lnp: Vec<f64> = path.prob.iter().map(|p| p.ln()).collect();
    Ok(derivative_scalar(&lnp, i, 1, path.step()))
}

/// Drift-corrected jerk d³E[x̂]/dτ³ + (3/2)(d ln P/dτ) d²E[x̂]/dτ² at sample
/// `i`.
pub fn a_dot(path: &MeanPath, i: usize) -> Result<FourVector> {
    path.check()?;
    let rate = log_probability_rate(path, i)?;
    let h = path.step();
    let (acc, jerk) = match (&path.a, &path.v) {
        (Some(a), _) => (a[i], derivative_vec(a, i, 1, h)),
        (None, Some(v)) => (derivative_vec(v, i, 1, h), derivative_vec(v, i, 2, h)),
        (None, None) => (derivative_vec(&path.x, i, 2, h), derivative_vec(&path.x, i, 3, h)),
    };
    let out = jerk + acc * (1.5 * rate);
    if !out.is_finite() {
        return Err(Error::NonFinite("a_dot"));
    }
    Ok(out)
}

/// 𝔉 = −(m0 τ0/(e c²)) (ȧ ⊗ Re𝒱 − Re𝒱 ⊗ ȧ), contravariant.
pub fn effective_radiation_field(re_v: FourVector, adot: FourVector, k: &PhysicalConstants) -> Result<FieldTensor> {
    if !re_v.is_finite() || !adot.is_finite() {
        return Err(Error::NonFinite("effective field input"));
    }
    let s = -k.m0 * k.tau0() / (k.e * k.c * k.c);
    let w = FieldTensor::wedge(adot, re_v);
    Ok(FieldTensor::from_e_over_c_b(w.e_over_c().map(|x| x * s), w.magnetic().map(|x| x * s)))
}

/// dW/dt = P · dW_classical/dt at one point, with the classical rate
/// −(τ0/m0) f·f (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiationRate {
    pub dw_dt: f64,
    pub prob: f64,
    pub dw_classical: f64,
}

impl RadiationRate {
    pub fn new(prob: f64, force: FourVector, k: &PhysicalConstants) -> Result<Self> {
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(Error::Domain(format!("P = {prob} outside (0, 1]")));
        }
        let dw_classical = perturbed_power(force, k);
        Ok(RadiationRate { dw_dt: prob * dw_classical, prob, dw_classical })
    }
}

/// Radiation rate on slice `i` of an ensemble, with f = −e F(E[x̂]) dE[x̂]/dτ.
pub fn radiation_formula(
    state: &EnsembleState,
    field: &FieldModel,
    k: &PhysicalConstants,
    i: usize,
) -> Result<RadiationRate> {
    let s = state
        .slices
        .get(i)
        .ok_or_else(|| Error::Domain(format!("slice {i} outside ensemble")))?;
    let f = field.evaluate(s.mean).contract(s.mean_velocity) * -k.e;
    RadiationRate::new(s.prob, f, k)
}

/// P(Ω_τ^ave) = P(Ω_0^ave)·|φ(E[x̂(τ)])|²/|φ(E[x̂(0)])|².
pub fn prob_ave(model: &dyn DriftSource, p0: f64, mean0: FourVector, mean: FourVector) -> Result<f64> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::Domain(format!("P(0) = {p0} outside (0, 1]")));
    }
    let d0 = model.density(mean0)?;
    let d = model.density(mean)?;
    for v in [d0, d] {
        if !(v > f64::MIN_POSITIVE) {
            return Err(Error::WavefunctionNode(v));
        }
    }
    Ok(p0 * d / d0)
}

/// δP = P − q_scalar(χ).
pub fn delta_p_diagnostic(prob: f64, chi: f64) -> Result<f64> {
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(Error::Domain(format!("P = {prob} outside (0, 1]")));
    }
    Ok(prob - q_scalar_factor(chi)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::lad_field;
    use crate::stochastic::wavepacket::WavepacketSpec;
    use proptest::prelude::*;

    fn k() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    fn taus(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn cubic_path_gives_exact_jerk() {
        let (c, b, h) = (3.0, 2.5, 0.01);
        let t = taus(21, h);
        let x = t.iter().map(|t| FourVector::new(c * t, b * t.powi(3) / 6.0, 0.0, 0.0)).collect();
        let path = MeanPath::new(t, x, vec![1.0; 21]).unwrap();
        for i in [0, 4, 10, 20] {
            let j = a_dot(&path, i).unwrap();
            assert!((j[1] - b).abs() < 1e-6 * b, "{i} {j:?}");
            assert!(j[0].abs() < 1e-6 && j[2] == 0.0);
        }
    }

    #[test]
    fn exponential_probability_adds_scaled_acceleration() {
        let (rate, h) = (0.7, 0.01);
        let a0 = FourVector::new(0.0, 2.0, -1.0, 0.5);
        let t = taus(15, h);
        let x = t.iter().map(|t| a0 * (0.5 * t * t)).collect();
        let p = t.iter().map(|t| 0.2 * (rate * t).exp()).collect();
        let path = MeanPath::new(t, x, p).unwrap();
        let got = a_dot(&path, 7).unwrap();
        let want = a0 * (1.5 * rate);
        assert!((got - want).euclidean_norm() < 1e-6 * want.euclidean_norm(), "{got:?}");
    }

    #[test]
    fn sinusoidal_jerk_converges_at_fourth_order() {
        let err = |h: f64| {
            // centred on τ = 1 for every h
            let t: Vec<f64> = (0..41).map(|i| 1.0 + (i as f64 - 20.0) * h).collect();
            let x = t.iter().map(|t| FourVector::new(*t, t.sin(), 0.0, 0.0)).collect();
            let path = MeanPath::new(t, x, vec![1.0; 41]).unwrap();
            (a_dot(&path, 20).unwrap()[1] + 1f64.cos()).abs()
        };
        let order = (err(0.04) / err(0.02)).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn short_path_is_rejected() {
        let t = taus(8, 1.0);
        let x = vec![FourVector::ZERO; 8];
        assert!(matches!(MeanPath::new(t, x, vec![1.0; 8]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn effective_field_vanishes_for_parallel_jerk() {
        let v = FourVector::velocity_from_gamma(3.0, [0.0, 1.0, 0.0], k().c);
        assert_eq!(effective_radiation_field(v, FourVector::ZERO, &k()).unwrap().max_abs(), 0.0);
        let f = effective_radiation_field(v, v * 2.5e20, &k()).unwrap();
        assert!(f.max_abs() < 1e-15 * effective_radiation_field(v, FourVector::new(0.0, 2.5e20 * v[0], 0.0, 0.0), &k()).unwrap().max_abs());
    }

    #[test]
    fn effective_field_equals_lad_field_for_unit_probability() {
        let k = k();
        let v = FourVector::velocity_from_gamma(40.0, [0.6, 0.0, 0.8], k.c);
        let jerk = FourVector::new(1e30, -3e29, 2e29, 5e29);
        let a = effective_radiation_field(v, jerk, &k).unwrap().matrix();
        let b = lad_field(v, jerk, &k).matrix();
        for mu in 0..4 {
            for nu in 0..4 {
                assert!((a[mu][nu] - b[mu][nu]).abs() <= 1e-12 * b[mu][nu].abs().max(1e-300));
            }
        }
    }

    #[test]
    fn radiation_rate_scales_linearly() {
        let f = FourVector::new(0.0, 1e-12, 0.0, 0.0);
        let one = RadiationRate::new(1.0, f, &k()).unwrap();
        assert_eq!(one.dw_dt, one.dw_classical);
        let r = RadiationRate::new(0.3, f, &k()).unwrap();
        assert_eq!(r.dw_dt, 0.3 * r.dw_classical);
        assert!(RadiationRate::new(0.0, f, &k()).is_err());
    }

    #[test]
    fn delta_p_examples() {
        assert_eq!(delta_p_diagnostic(1.0, 0.0).unwrap(), 0.0);
        let q = q_scalar_factor(0.7).unwrap();
        assert_eq!(delta_p_diagnostic(q, 0.7).unwrap(), 0.0);
        assert!((delta_p_diagnostic(q + 0.05, 0.7).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn prob_ave_stationary_and_spreading() {
        let k = k();
        let spec = WavepacketSpec::Stationary { sigma0: 1e-10, x0: [0.0; 4] };
        let m = spec.build(&FieldModel::Zero, &k).unwrap();
        let x = FourVector::new(1e-15, 0.0, 0.0, 0.0);
        assert_eq!(prob_ave(&m, 0.4, FourVector::ZERO, x).unwrap(), 0.4);
        let g = WavepacketSpec::GaussianFree { sigma0: 1e-10, u0: [0.0; 3], x0: [0.0; 4] }
            .build(&FieldModel::Zero, &k)
            .unwrap();
        let ts = g.spreading_time().unwrap();
        let p = prob_ave(&g, 1.0, FourVector::ZERO, FourVector::new(k.c * ts, 0.0, 0.0, 0.0)).unwrap();
        assert!((p - 2f64.powf(-1.5)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn effective_field_is_antisymmetric_and_projects_out_parallel_jerk(
            g in 1.0f64..1e3, th in 0.0f64..3.1, ph in 0.0f64..6.2,
            j in prop::array::uniform4(-1e25f64..1e25),
        ) {
            let k = k();
            let dir = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let v = FourVector::velocity_from_gamma(g, dir, k.c);
            let jerk = FourVector(j);
            let f = effective_radiation_field(v, jerk, &k).unwrap();
            let m = f.matrix();
            for mu in 0..4 {
                for nu in 0..4 {
                    prop_assert_eq!(m[mu][nu], -m[nu][mu]);
                }
            }
            // 𝔉·v = −(m0τ0/(e c²))(ȧ c² − v (ȧ·v)) = −(m0τ0/e) ȧ_⟂
            let perp = jerk - v * (jerk.dot(&v) / (k.c * k.c));
            let want = perp * (-k.m0 * k.tau0() / k.e);
            let got = f.contract(v);
            let scale = jerk.euclidean_norm() * g * g * k.m0 * k.tau0() / k.e;
            prop_assert!((got - want).euclidean_norm() <= 1e-9 * scale);
        }
    }
}
