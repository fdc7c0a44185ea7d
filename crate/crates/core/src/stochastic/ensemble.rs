//! D-process sample paths advanced in lockstep, with per-slice ensemble
//! statistics.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{chunked_sum, silverman_bandwidth, Kde3, MIN_KDE_PATHS};
use super::noise::{path_rng, wiener_increment, BACKWARD_STREAM};
use super::wavepacket::{DriftSource, Wavepacket, WavepacketSpec};
use crate::classical::ll_acceleration;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::minkowski::{dot, FourVector};
use crate::quantum::{chi_from_force, q_factors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleDynamics {
    /// dx = 𝒱_± dτ + λ dW with drifts from the wavepacket.
    #[default]
    Kinematic,
    /// Each path carries a velocity driven by the P-corrected Landau-Lifshitz
    /// force; dx = (V + osmotic) dτ + λ dW.
    StochasticLl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialProbability {
    /// P(0) = `p0`.
    #[default]
    Fixed,
    /// P(0) = q_scalar(χ) at the initial mean.
    QScalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub paths: usize,
    /// Proper-time step; derived from the field or the spreading time if absent.
    #[serde(default)]
    pub dtau: Option<f64>,
    pub tau_span: f64,
    pub wavepacket: WavepacketSpec,
    #[serde(default)]
    pub dynamics: EnsembleDynamics,
    #[serde(default = "one")]
    pub p0: f64,
    #[serde(default)]
    pub p0_mode: InitialProbability,
    #[serde(default)]
    pub seed: u64,
    /// Output every `stride`-th slice.
    #[serde(default = "one_usize")]
    pub stride: usize,
    /// Multiplier on λ = √(ħ/m0); zero switches the noise off.
    #[serde(default = "one")]
    pub lambda_scale: f64,
    /// Slices whose positions are kept (the last slice always is).
    #[serde(default)]
    pub snapshots: Vec<usize>,
    /// Also integrate the backward process from the terminal slice.
    #[serde(default)]
    pub backward: bool,
    #[serde(default = "default_steps")]
    pub steps_per_cycle: f64,
    /// Multiplier on Silverman's bandwidth for densities at the mean.
    #[serde(default = "default_kde_scale")]
    pub kde_scale: f64,
    /// Paths whose drift exceeds this multiple of c abort the run.
    #[serde(default = "default_drift_bound")]
    pub drift_bound: f64,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_steps() -> f64 {
    200.0
}
fn default_kde_scale() -> f64 {
    2.0
}
fn default_drift_bound() -> f64 {
    1e7
}

impl EnsembleConfig {
    pub fn new(paths: usize, tau_span: f64, wavepacket: WavepacketSpec) -> Self {
        EnsembleConfig {
            paths,
            dtau: None,
            tau_span,
            wavepacket,
            dynamics: EnsembleDynamics::Kinematic,
            p0: 1.0,
            p0_mode: InitialProbability::Fixed,
            seed: 0,
            stride: 1,
            lambda_scale: 1.0,
            snapshots: Vec::new(),
            backward: false,
            steps_per_cycle: default_steps(),
            kde_scale: default_kde_scale(),
            drift_bound: default_drift_bound(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.paths == 0 {
            return bad("paths must be positive");
        }
        if !(self.tau_span.is_finite() && self.tau_span > 0.0) {
            return bad("tau_span must be positive");
        }
        if self.dtau.is_some_and(|d| !(d.is_finite() && d > 0.0)) {
            return bad("dtau must be positive");
        }
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return bad("p0 must lie in (0, 1]");
        }
        if self.stride == 0 || self.steps_per_cycle <= 0.0 || self.kde_scale <= 0.0 || self.drift_bound <= 0.0 {
            return bad("stride, steps_per_cycle, kde_scale and drift_bound must be positive");
        }
        if !(self.lambda_scale.is_finite() && self.lambda_scale >= 0.0) {
            return bad("lambda_scale must be non-negative");
        }
        if self.backward && self.dynamics == EnsembleDynamics::StochasticLl {
            return bad("backward integration is only defined for kinematic ensembles");
        }
        Ok(())
    }

    pub fn step(&self, model: &Wavepacket, field: &FieldModel, k: &PhysicalConstants) -> Result<f64> {
        if let Some(d) = self.dtau {
            return Ok(d);
        }
        if let FieldModel::PlaneWave(w) = field {
            let u = model.mean_velocity(k.c);
            let n = w.direction();
            let kv = w.wavenumber() * (u[0] - n[0] * u[1] - n[1] * u[2] - n[2] * u[3]);
            return Ok(std::f64::consts::TAU / (self.steps_per_cycle * kv));
        }
        model
            .spreading_time()
            .map(|t| t / self.steps_per_cycle)
            .ok_or_else(|| Error::Config("dtau must be given for this wavepacket and field".into()))
    }
}

/// A recorded sample path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DPath {
    pub direction: Direction,
    pub seed: u64,
    pub stream: u64,
    pub tau: Vec<f64>,
    pub x: Vec<FourVector>,
}

impl DPath {
    pub fn new(direction: Direction, seed: u64, stream: u64, tau0: f64, x0: FourVector) -> Self {
        DPath { direction, seed, stream, tau: vec![tau0], x: vec![x0] }
    }

    pub fn last(&self) -> FourVector {
        self.x[self.x.len() - 1]
    }
}

fn drift_of(model: &dyn DriftSource, x: FourVector, dir: Direction, bound: f64) -> Result<FourVector> {
    let v = model.complex_velocity(x)?;
    let d = match dir {
        Direction::Forward => v.forward(),
        Direction::Backward => v.backward(),
    };
    let mag = d.euclidean_norm();
    if !(mag <= bound) {
        return Err(Error::DriftBlowUp { magnitude: mag, bound });
    }
    Ok(d)
}

/// Euler-Maruyama move of one event: forward paths advance in τ with 𝒱_+,
/// backward paths step back in τ with 𝒱_− evaluated at the later point.
fn move_event<R: Rng + ?Sized>(
    x: FourVector,
    drift: FourVector,
    dir: Direction,
    lambda: f64,
    dtau: f64,
    rng: &mut R,
) -> Result<FourVector> {
    let dw = wiener_increment(rng, dtau)?;
    let next = match dir {
        Direction::Forward => x + drift * dtau + dw * lambda,
        Direction::Backward => x - drift * dtau + dw * lambda,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite("path position"));
    }
    Ok(next)
}

/// Appends one Euler-Maruyama step to `path`; `bound` caps |𝒱| (m/s).
pub fn dprocess_step<R: Rng + ?Sized>(
    path: &mut DPath,
    model: &dyn DriftSource,
    lambda: f64,
    dtau: f64,
    rng: &mut R,
    bound: f64,
) -> Result<()> {
    let x = path.last();
    let d = drift_of(model, x, path.direction, bound)?;
    let next = move_event(x, d, path.direction, lambda, dtau, rng)?;
    let t = path.tau[path.tau.len() - 1];
    path.tau.push(match path.direction {
        Direction::Forward => t + dtau,
        Direction::Backward => t - dtau,
    });
    path.x.push(next);
    Ok(())
}

/// State of a path under the stochastic Landau-Lifshitz dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlWalker {
    pub x: FourVector,
    pub v: FourVector,
}

/// P-corrected Landau-Lifshitz acceleration
/// (1/m0)[(1 + (3/2)τ0 dlnP/dτ)(−e F v) − e F_LL v].
pub fn stochastic_ll_acceleration(
    field: &FieldModel,
    x: FourVector,
    v: FourVector,
    dlnp_dtau: f64,
    k: &PhysicalConstants,
) -> FourVector {
    let f = field.evaluate(x).contract(v) * -k.e;
    ll_acceleration(field, x, v, k) + f * (1.5 * k.tau0() * dlnp_dtau / k.m0)
}

/// One Euler-Maruyama step of the stochastic Landau-Lifshitz equation. The
/// velocity is put back on the mass shell afterwards. Returns the
/// acceleration used.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_ll_step<R: Rng + ?Sized>(
    w: &mut LlWalker,
    field: &FieldModel,
    model: Option<&dyn DriftSource>,
    dlnp_dtau: f64,
    lambda: f64,
    dtau: f64,
    rng: &mut R,
    k: &PhysicalConstants,
) -> Result<FourVector> {
    let a = stochastic_ll_acceleration(field, w.x, w.v, dlnp_dtau, k);
    let osmotic = match model {
        Some(m) => m.complex_velocity(w.x)?.osmotic(),
        None => FourVector::ZERO,
    };
    w.x = move_event(w.x, w.v + osmotic, Direction::Forward, lambda, dtau, rng)?;
    let v = w.v + a * dtau;
    if !v.is_finite() || v[0] <= 0.0 {
        return Err(Error::InvalidVelocity);
    }
    let sp = v.spatial();
    w.v = FourVector::from_parts((k.c * k.c + sp.iter().map(|s| s * s).sum::<f64>()).sqrt(), sp);
    Ok(a)
}

/// Ensemble statistics on one proper-time slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub tau: f64,
    /// E[x̂].
    pub mean: FourVector,
    /// dE[x̂]/dτ: ensemble mean of the drift (kinematic) or carried velocity.
    pub mean_velocity: FourVector,
    /// Ensemble mean of the carried acceleration (zero for kinematic runs).
    pub mean_acceleration: FourVector,
    /// Covariance of δx̂ = x̂ − E[x̂].
    pub covariance: [[f64; 4]; 4],
    /// |φ(E[x̂])|² from the wavepacket.
    pub phi_density: f64,
    /// Kernel estimate of the spatial density at E[x̂].
    pub density_at_mean: f64,
    /// P(Ω_τ^ave) by the |φ|² ratio law.
    pub prob: f64,
    /// Density-ratio cross-check of `prob`.
    pub prob_kde: f64,
    pub dlnp_dtau: f64,
    /// P · dW_classical/dt.
    pub dw_dt: f64,
    /// −(τ0/m0) f·f with f = −e F(E[x̂]) dE[x̂]/dτ.
    pub dw_classical: f64,
    /// P times the kernel-weighted mean of each path's classical power near
    /// E[x̂] (the ensemble-integral form).
    pub dw_ensemble: f64,
    pub chi: f64,
    pub q: f64,
    pub q_scalar: f64,
    pub delta_p: f64,
    /// |Re 𝒱(E[x̂]) − dE[x̂]/dτ| (m/s).
    pub drift_gap: f64,
    /// |dE[x̂]/dτ · dE[x̂]/dτ − c²| (m²/s²).
    pub shell_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub direction: Direction,
    pub paths: usize,
    pub dtau: f64,
    pub lambda: f64,
    pub p0: f64,
    pub slices: Vec<SliceStats>,
    /// Positions at selected slice indices.
    #[serde(skip)]
    pub snapshots: BTreeMap<usize, Vec<FourVector>>,
}

impl EnsembleState {
    pub fn taus(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.tau).collect()
    }

    pub fn positions(&self, slice: usize) -> Option<&[FourVector]> {
        self.snapshots.get(&slice).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub forward: EnsembleState,
    pub backward: Option<EnsembleState>,
    pub model: Wavepacket,
}

struct Walker {
    x: FourVector,
    v: FourVector,
    a: FourVector,
    rng: ChaCha8Rng,
}

struct SliceInput<'a> {
    model: &'a Wavepacket,
    field: &'a FieldModel,
    k: &'a PhysicalConstants,
    kde_scale: f64,
}

fn position_moments(walkers: &[Walker]) -> (FourVector, [[f64; 4]; 4]) {
    let n = walkers.len() as f64;
    let m = FourVector(chunked_sum(walkers, |w| w.x.0).map(|s| s / n));
    let c = chunked_sum(walkers, |w| {
        let d = w.x - m;
        let mut out = [0.0; 10];
        let mut i = 0;
        for a in 0..4 {
            for b in a..4 {
                out[i] = d[a] * d[b];
                i += 1;
            }
        }
        out
    });
    let mut cov = [[0.0; 4]; 4];
    let mut i = 0;
    for a in 0..4 {
        for b in a..4 {
            cov[a][b] = c[i] / n;
            cov[b][a] = c[i] / n;
            i += 1;
        }
    }
    (m, cov)
}

/// Velocity-dependent statistics, after the walkers' v and a are set.
fn finish_slice(walkers: &[Walker], inp: &SliceInput, base: &mut SliceStats) -> Result<()> {
    let k = inp.k;
    let n = walkers.len() as f64;
    base.mean_velocity = FourVector(chunked_sum(walkers, |w| w.v.0).map(|s| s / n));
    base.mean_acceleration = FourVector(chunked_sum(walkers, |w| w.a.0).map(|s| s / n));
    let mean = base.mean;
    let std = [1, 2, 3].map(|i| base.covariance[i][i].sqrt());
    let centre = mean.spatial();
    let tau0 = k.tau0();
    let power = |w: &Walker| {
        let f = inp.field.evaluate(w.x).contract(w.v) * -k.e;
        -tau0 / k.m0 * f.norm2()
    };
    if std.iter().all(|s| *s > 0.0) && walkers.len() > 1 {
        let kde = Kde3::new(silverman_bandwidth(std, walkers.len(), inp.kde_scale))?;
        let s = chunked_sum(walkers, |w| {
            let wt = kde.kernel(sub3(centre, w.x.spatial())).0;
            [wt, wt * power(w)]
        });
        base.density_at_mean = s[0] / n;
        base.dw_ensemble = if s[0] > 0.0 { s[1] / s[0] } else { 0.0 };
    } else {
        base.density_at_mean = f64::NAN;
        base.dw_ensemble = chunked_sum(walkers, |w| [power(w)])[0] / n;
    }
    let f = inp.field.evaluate(mean).contract(base.mean_velocity) * -k.e;
    base.dw_classical = -tau0 / k.m0 * f.norm2();
    base.chi = chi_from_force(f, k)?;
    let q = q_factors(base.chi)?;
    base.q = q.q;
    base.q_scalar = q.q_scalar;
    base.drift_gap = (inp.model.complex_velocity(mean)?.re - base.mean_velocity).euclidean_norm();
    base.shell_gap = (dot(base.mean_velocity, base.mean_velocity) - k.c * k.c).abs();
    Ok(())
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn empty_slice(tau: f64, mean: FourVector, covariance: [[f64; 4]; 4], phi_density: f64) -> SliceStats {
    SliceStats {
        tau,
        mean,
        mean_velocity: FourVector::ZERO,
        mean_acceleration: FourVector::ZERO,
        covariance,
        phi_density,
        density_at_mean: f64::NAN,
        prob: 1.0,
        prob_kde: f64::NAN,
        dlnp_dtau: 0.0,
        dw_dt: 0.0,
        dw_classical: 0.0,
        dw_ensemble: 0.0,
        chi: 0.0,
        q: 1.0,
        q_scalar: 1.0,
        delta_p: 0.0,
        drift_gap: 0.0,
        shell_gap: 0.0,
    }
}

/// d ln P/dτ at slice `i` from already known slices (second-order backward
/// difference once two earlier slices exist).
fn backward_log_derivative(lnp: &[f64], i: usize, dtau: f64) -> f64 {
    match i {
        0 => 0.0,
        1 => (lnp[1] - lnp[0]) / dtau,
        _ => (3.0 * lnp[i] - 4.0 * lnp[i - 1] + lnp[i - 2]) / (2.0 * dtau),
    }
}

/// P from the ratio law and the derived per-slice quantities.
fn apply_probability(slices: &mut [SliceStats], p0: f64, dtau: f64) {
    let phi0 = slices[0].phi_density;
    let rho0 = slices[0].density_at_mean;
    for s in slices.iter_mut() {
        s.prob = p0 * s.phi_density / phi0;
        s.prob_kde = p0 * s.density_at_mean / rho0;
    }
    let lnp: Vec<f64> = slices.iter().map(|s| s.prob.ln()).collect();
    for (i, s) in slices.iter_mut().enumerate() {
        s.dlnp_dtau = backward_log_derivative(&lnp, i, dtau);
        s.dw_dt = s.prob * s.dw_classical;
        s.dw_ensemble *= s.prob;
        s.delta_p = s.prob - s.q_scalar;
    }
}

/// Runs the ensemble (and, if configured, its backward counterpart).
pub fn run_ensemble(cfg: &EnsembleConfig, field: &FieldModel, k: &PhysicalConstants) -> Result<EnsembleRun> {
    cfg.validate()?;
    k.validate()?;
    let model = cfg.wavepacket.build(field, k)?;
    let dtau = cfg.step(&model, field, k)?;
    let n = (cfg.tau_span / dtau).round() as usize;
    if n == 0 {
        return Err(Error::Config("tau_span shorter than one step".into()));
    }
    let lambda = cfg.lambda_scale * k.lambda();
    let bound = cfg.drift_bound * k.c;
    let inp = SliceInput { model: &model, field, k, kde_scale: cfg.kde_scale };

    let mut walkers: Vec<Walker> = (0..cfg.paths)
        .into_par_iter()
        .map(|j| {
            let mut rng = path_rng(cfg.seed, j as u64);
            let x = model.sample_initial(&mut rng);
            let v = model.complex_velocity(x)?.re;
            Ok(Walker { x, v, a: FourVector::ZERO, rng })
        })
        .collect::<Result<_>>()?;

    let mut slices: Vec<SliceStats> = Vec::with_capacity(n + 1);
    let mut snapshots = BTreeMap::new();
    let mut lnp: Vec<f64> = Vec::with_capacity(n + 1);
    let mut p0 = cfg.p0;
    for i in 0..=n {
        let tau = i as f64 * dtau;
        let (mean, cov) = position_moments(&walkers);
        let phi = model.density(mean)?;
        let mut s = empty_slice(tau, mean, cov, phi);
        if i == 0 && cfg.p0_mode == InitialProbability::QScalar {
            let v = model.complex_velocity(mean)?.re;
            let f = field.evaluate(mean).contract(v) * -k.e;
            p0 = q_factors(chi_from_force(f, k)?)?.q_scalar;
        }
        let phi0 = slices.first().map_or(phi, |s: &SliceStats| s.phi_density);
        lnp.push((p0 * phi / phi0).ln());
        let dlnp = backward_log_derivative(&lnp, i, dtau);
        match cfg.dynamics {
            EnsembleDynamics::Kinematic => walkers.par_iter_mut().try_for_each(|w| {
                w.v = drift_of(&model, w.x, Direction::Forward, bound)?;
                Ok::<_, Error>(())
            })?,
            EnsembleDynamics::StochasticLl => walkers.par_iter_mut().for_each(|w| {
                w.a = stochastic_ll_acceleration(field, w.x, w.v, dlnp, k);
            }),
        }
        finish_slice(&walkers, &inp, &mut s)?;
        slices.push(s);
        if i == n || cfg.snapshots.contains(&i) {
            snapshots.insert(i, walkers.iter().map(|w| w.x).collect::<Vec<_>>());
        }
        if i == n {
            break;
        }
        match cfg.dynamics {
            EnsembleDynamics::Kinematic => walkers.par_iter_mut().try_for_each(|w| {
                w.x = move_event(w.x, w.v, Direction::Forward, lambda, dtau, &mut w.rng)?;
                Ok::<_, Error>(())
            })?,
            EnsembleDynamics::StochasticLl => walkers.par_iter_mut().try_for_each(|w| {
                let mut lw = LlWalker { x: w.x, v: w.v };
                stochastic_ll_step(&mut lw, field, Some(&model), dlnp, lambda, dtau, &mut w.rng, k)?;
                if lw.v.euclidean_norm() > bound {
                    return Err(Error::DriftBlowUp { magnitude: lw.v.euclidean_norm(), bound });
                }
                w.x = lw.x;
                w.v = lw.v;
                Ok(())
            })?,
        }
    }
    apply_probability(&mut slices, p0, dtau);
    let forward = EnsembleState {
        direction: Direction::Forward,
        paths: cfg.paths,
        dtau,
        lambda,
        p0,
        slices,
        snapshots,
    };

    let backward = if cfg.backward {
        Some(run_backward(cfg, &model, &inp, &forward, n, dtau, lambda, bound)?)
    } else {
        None
    };
    Ok(EnsembleRun { forward, backward, model })
}

#[allow(clippy::too_many_arguments)]
fn run_backward(
    cfg: &EnsembleConfig,
    model: &Wavepacket,
    inp: &SliceInput,
    forward: &EnsembleState,
    n: usize,
    dtau: f64,
    lambda: f64,
    bound: f64,
) -> Result<EnsembleState> {
    let terminal = &forward.snapshots[&n];
    let mut walkers: Vec<Walker> = terminal
        .iter()
        .enumerate()
        .map(|(j, x)| Walker { x: *x, v: FourVector::ZERO, a: FourVector::ZERO, rng: path_rng(cfg.seed, BACKWARD_STREAM + j as u64) })
        .collect();
    let mut slices = Vec::with_capacity(n + 1);
    let mut snapshots = BTreeMap::new();
    for step in 0..=n {
        let i = n - step;
        let (mean, cov) = position_moments(&walkers);
        let mut s = empty_slice(i as f64 * dtau, mean, cov, model.density(mean)?);
        walkers.par_iter_mut().try_for_each(|w| {
            w.v = drift_of(model, w.x, Direction::Backward, bound)?;
            Ok::<_, Error>(())
        })?;
        finish_slice(&walkers, inp, &mut s)?;
        slices.push(s);
        if i == 0 || cfg.snapshots.contains(&i) {
            snapshots.insert(i, walkers.iter().map(|w| w.x).collect::<Vec<_>>());
        }
        if i == 0 {
            break;
        }
        walkers.par_iter_mut().try_for_each(|w| {
            w.x = move_event(w.x, w.v, Direction::Backward, lambda, dtau, &mut w.rng)?;
            Ok::<_, Error>(())
        })?;
    }
    slices.reverse();
    apply_probability(&mut slices, forward.p0, dtau);
    Ok(EnsembleState {
        direction: Direction::Backward,
        paths: cfg.paths,
        dtau,
        lambda,
        p0: forward.p0,
        slices,
        snapshots,
    })
}

/// |E[δx̂]| at a stored slice; zero up to roundoff by construction.
pub fn mean_deviation(points: &[FourVector]) -> FourVector {
    let n = points.len() as f64;
    let m = FourVector(chunked_sum(points, |p| p.0).map(|s| s / n));
    FourVector(chunked_sum(points, |p| (*p - m).0).map(|s| s / n))
}

/// Whether an ensemble is large enough for the density diagnostics.
pub fn supports_density_checks(state: &EnsembleState) -> bool {
    state.paths >= MIN_KDE_PATHS
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{Dynamics, IntegratorConfig, ParticleState, Pusher};
    use crate::fields::{Envelope, PlaneWave, Polarization};

    fn k() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    fn free_cfg(paths: usize) -> EnsembleConfig {
        let mut c = EnsembleConfig::new(paths, 0.0, WavepacketSpec::GaussianFree { sigma0: 1e-10, u0: [0.0; 3], x0: [0.0; 4] });
        let ts = 2.0 * 1e-20 / (k().hbar / k().m0);
        c.tau_span = ts;
        c.dtau = Some(ts / 50.0);
        c
    }

    #[test]
    fn zero_noise_follows_drift_deterministically() {
        let k = k();
        let mut cfg = free_cfg(3);
        cfg.lambda_scale = 0.0;
        let run = run_ensemble(&cfg, &FieldModel::Zero, &k).unwrap();
        let n = run.forward.slices.len() - 1;
        let dtau = run.forward.dtau;
        let end = run.forward.positions(n).unwrap();
        for (j, x_end) in end.iter().enumerate() {
            let mut rng = path_rng(cfg.seed, j as u64);
            let mut path = DPath::new(Direction::Forward, cfg.seed, j as u64, 0.0, run.model.sample_initial(&mut rng));
            for _ in 0..n {
                dprocess_step(&mut path, &run.model, 0.0, dtau, &mut rng, 1e7 * k.c).unwrap();
            }
            assert_eq!(path.last(), *x_end);
        }
    }

    #[test]
    fn fixed_seed_replays_across_thread_counts() {
        let cfg = free_cfg(5000);
        let a = run_ensemble(&cfg, &FieldModel::Zero, &k()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_ensemble(&cfg, &FieldModel::Zero, &k())).unwrap();
        assert_eq!(serde_json::to_string(&a.forward).unwrap(), serde_json::to_string(&b.forward).unwrap());
        assert_eq!(a.forward.snapshots, b.forward.snapshots);
    }

    #[test]
    fn delta_x_has_zero_mean() {
        let mut cfg = free_cfg(4000);
        cfg.snapshots = vec![0, 10, 25];
        let run = run_ensemble(&cfg, &FieldModel::Zero, &k()).unwrap();
        for pts in run.forward.snapshots.values() {
            let d = mean_deviation(pts);
            let scale = pts.iter().map(|p| p.euclidean_norm()).fold(0.0, f64::max);
            assert!(d.euclidean_norm() <= 1e-14 * scale, "{:?}", d);
        }
    }

    #[test]
    fn probability_stays_in_unit_interval_and_follows_width() {
        let run = run_ensemble(&free_cfg(2000), &FieldModel::Zero, &k()).unwrap();
        for s in &run.forward.slices {
            assert!(s.prob > 0.0 && s.prob <= 1.0);
        }
        let last = run.forward.slices.last().unwrap();
        // τ = spreading time: width² doubles, P drops to 2^{-3/2}
        assert!((last.prob / 2f64.powf(-1.5) - 1.0).abs() < 1e-3, "{}", last.prob);
    }

    #[test]
    fn drift_blow_up_is_reported() {
        let mut cfg = free_cfg(10);
        cfg.drift_bound = 1e-6;
        assert!(matches!(run_ensemble(&cfg, &FieldModel::Zero, &k()), Err(Error::DriftBlowUp { .. })));
    }

    #[test]
    fn dprocess_step_without_noise_is_euler() {
        let k = k();
        let model = WavepacketSpec::GaussianFree { sigma0: 1e-10, u0: [0.0; 3], x0: [0.0; 4] }
            .build(&FieldModel::Zero, &k)
            .unwrap();
        let x0 = FourVector::new(0.0, 1e-10, 0.0, 0.0);
        let mut path = DPath::new(Direction::Forward, 1, 0, 0.0, x0);
        let mut rng = path_rng(1, 0);
        dprocess_step(&mut path, &model, 0.0, 1e-18, &mut rng, 1e10 * k.c).unwrap();
        let d = model.complex_velocity(x0).unwrap().forward();
        assert_eq!(path.last(), x0 + d * 1e-18);
        assert_eq!(path.tau, vec![0.0, 1e-18]);
    }

    #[test]
    fn ll_acceleration_rescaled_by_probability_trend() {
        let k = k();
        let field = FieldModel::PlaneWave(
            PlaneWave::from_a0(5.0, 0.8e-6, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], Polarization::Linear, Envelope::None, &k)
                .unwrap(),
        );
        let x = FourVector::new(0.1e-6, 0.0, 0.0, 0.0);
        let v = FourVector::velocity_from_gamma(10.0, [0.0, 0.0, -1.0], k.c);
        let rate = 1e22;
        let a0 = stochastic_ll_acceleration(&field, x, v, 0.0, &k);
        let a1 = stochastic_ll_acceleration(&field, x, v, rate, &k);
        let f = field.evaluate(x).contract(v) * -k.e;
        let expected = f * (1.5 * k.tau0() * rate / k.m0);
        assert!(((a1 - a0) - expected).euclidean_norm() <= 1e-13 * a0.euclidean_norm());
    }

    #[test]
    fn noiseless_stochastic_ll_matches_classical_to_first_order() {
        let k = k();
        let field = FieldModel::PlaneWave(
            PlaneWave::from_a0(5.0, 0.8e-6, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], Polarization::Linear, Envelope::Gaussian { duration: 5e-15 }, &k)
                .unwrap(),
        );
        let v0 = FourVector::velocity_from_gamma(20.0, [0.0, 0.0, -1.0], k.c);
        let x0 = FourVector::new(0.0, 0.0, 0.0, 6e-6);
        let s0 = ParticleState::new(x0, v0, k.c).unwrap();
        let mut p = Pusher::new(field, Dynamics::LandauLifshitz, IntegratorConfig::default(), k, &s0).unwrap();
        let h = p.dtau();
        let steps = 4000;
        let classical = p.run(s0, steps as f64 * h).unwrap().final_state();
        let euler = |h: f64, n: usize| {
            let mut w = LlWalker { x: x0, v: v0 };
            let mut rng = path_rng(0, 0);
            for _ in 0..n {
                stochastic_ll_step(&mut w, &field, None, 0.0, 0.0, h, &mut rng, &k).unwrap();
            }
            w
        };
        let e1 = (euler(h, steps).v - classical.v).euclidean_norm();
        let e2 = (euler(h / 2.0, 2 * steps).v - classical.v).euclidean_norm();
        assert!((e1 / e2 - 2.0).abs() < 0.2, "{e1:e} {e2:e}");
        assert!(e1 < 1e-2 * v0[0]);
    }
}
