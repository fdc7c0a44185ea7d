//! Classical radiation reaction: Lorentz-Abraham-Dirac (forward and
//! reduction-of-order), Landau-Lifshitz, covariant Larmor power and the
//! energy-balance audit.
//!
//! With a = dv/dτ and the external four-force f = −e F v the LAD equation
//! reads
//!
//! ```text
//! m0 a = f + m0 τ0 (ȧ − (ȧ·v) v / c²)
//! ```
//!
//! Substituting a → f/m0 on the right gives the Landau-Lifshitz force.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::minkowski::{check_normalized, dot, FieldTensor, FourVector};
use crate::ode::{dopri_advance, rk4_step, AdaptiveControl, State};
use crate::quad::simpson;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub tau: f64,
    pub x: FourVector,
    pub v: FourVector,
    /// Proper acceleration, carried only by forward LAD integration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<FourVector>,
}

impl ParticleState {
    pub fn new(x: FourVector, v: FourVector, c: f64) -> Result<Self> {
        check_normalized(v, c)?;
        if !x.is_finite() {
            return Err(Error::NonFinite("position"));
        }
        Ok(ParticleState { tau: 0.0, x, v, a: None })
    }

    /// Adds a seed acceleration, projected orthogonal to v.
    pub fn with_acceleration(mut self, a: FourVector, c: f64) -> Self {
        self.a = Some(project(a, self.v, c));
        self
    }

    pub fn gamma(&self, c: f64) -> f64 {
        self.v[0] / c
    }

    /// Total energy γ m0 c² (J).
    pub fn energy(&self, k: &PhysicalConstants) -> f64 {
        k.m0 * k.c * self.v[0]
    }
}

/// Restores v·v = c² by recomputing v⁰ from the spatial part. Unlike a
/// uniform rescale this does not amplify the integrator's norm error by γ².
fn on_shell(v: FourVector, c: f64) -> Result<FourVector> {
    if !v.is_finite() || v[0] <= 0.0 {
        return Err(Error::InvalidVelocity);
    }
    let sp = v.spatial();
    Ok(FourVector::from_parts((c * c + sp.iter().map(|s| s * s).sum::<f64>()).sqrt(), sp))
}

fn project(a: FourVector, v: FourVector, c: f64) -> FourVector {
    a - v * (dot(a, v) / (c * c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    /// No radiation reaction.
    Lorentz,
    #[default]
    LandauLifshitz,
    /// LAD as a second-order system in (v, a); exhibits run-away solutions.
    LadForward,
    /// LAD with the jerk replaced by the derivative of the Landau-Lifshitz
    /// acceleration along the flow (reduction of order carried one step past
    /// Landau-Lifshitz).
    LadReduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Fixed step (RK4) or output spacing (RK45) in proper time; derived from
    /// the field when absent.
    pub dtau: Option<f64>,
    pub steps_per_cycle: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Finite-difference step for the LAD jerk, as a fraction of dτ.
    pub jerk_fraction: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::Rk4,
            dtau: None,
            steps_per_cycle: 200.0,
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
            jerk_fraction: 0.05,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.steps_per_cycle > 0.0
            && self.rtol > 0.0
            && self.atol >= 0.0
            && self.max_steps > 0
            && self.jerk_fraction > 0.0
            && self.dtau.is_none_or(|d| d.is_finite() && d > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config("integrator settings must be positive".into()))
        }
    }
}

/// Covariant Larmor power −m0 τ0 a·a (W); non-negative for a ⟂ v.
pub fn larmor_power(a: FourVector, k: &PhysicalConstants) -> f64 {
    -k.m0 * k.tau0() * a.norm2()
}

/// Homogeneous self-field −e/(6π ε0 c⁵) (jerk ⊗ v − v ⊗ jerk) of a point
/// charge on its own world line. `tau0_scale` is ignored.
pub fn lad_field(v: FourVector, jerk: FourVector, k: &PhysicalConstants) -> FieldTensor {
    let s = -k.e / (6.0 * std::f64::consts::PI * k.eps0 * k.c.powi(5));
    let w = FieldTensor::wedge(jerk, v);
    FieldTensor::from_e_over_c_b(w.e_over_c().map(|c| c * s), w.magnetic().map(|b| b * s))
}

/// Larmor power with the acceleration replaced by f/m0.
pub fn perturbed_power(f: FourVector, k: &PhysicalConstants) -> f64 {
    -k.tau0() / k.m0 * f.norm2()
}

fn force(field: &FieldTensor, v: FourVector, k: &PhysicalConstants) -> FourVector {
    field.contract(v) * -k.e
}

/// Landau-Lifshitz acceleration at (x, v), with v not required to be on shell.
pub fn ll_acceleration(field: &FieldModel, x: FourVector, v: FourVector, k: &PhysicalConstants) -> FourVector {
    let f_ex = field.evaluate(x);
    let f = force(&f_ex, v, k);
    let fv = f_ex.contract(v);
    let tau0 = k.tau0();
    if tau0 == 0.0 {
        return f * (1.0 / k.m0);
    }
    // ḟ = −e (v·∂F) v + (e²/m0) F F v
    let fdot = field.gradient(x).along(v).contract(v) * -k.e + f_ex.contract(fv) * (k.e * k.e / k.m0);
    let c2 = k.c * k.c;
    (f + (fdot + v * (f.norm2() / (k.m0 * c2))) * tau0) * (1.0 / k.m0)
}

/// The Landau-Lifshitz field F_LL = τ0 (v·∂)F − (eτ0/m0c²)(w⊗v − v⊗w) with
/// w = F·F·v; the radiation force is −e F_LL v.
pub fn ll_field(state: &ParticleState, field: &FieldModel, k: &PhysicalConstants) -> Result<FieldTensor> {
    check_normalized(state.v, k.c)?;
    let v = state.v;
    let f_ex = field.evaluate(state.x);
    let w = f_ex.contract(f_ex.contract(v));
    let tau0 = k.tau0();
    Ok(field.gradient(state.x).along(v) * tau0
        - FieldTensor::wedge(w, v) * (k.e * tau0 / (k.m0 * k.c * k.c)))
}

/// Derivatives (dx/dτ, dv/dτ, da/dτ) of forward LAD.
pub fn lad_rhs(state: &ParticleState, field: &FieldModel, k: &PhysicalConstants) -> Result<[FourVector; 3]> {
    let a = state.a.unwrap_or(FourVector::ZERO);
    lad_derivatives(field, state.x, state.v, a, k)
}

fn lad_derivatives(
    field: &FieldModel,
    x: FourVector,
    v: FourVector,
    a: FourVector,
    k: &PhysicalConstants,
) -> Result<[FourVector; 3]> {
    let vv = v.norm2();
    if vv.abs() <= 1e-6 * k.c * k.c {
        return Err(Error::SingularProjection(vv.abs()));
    }
    let f = force(&field.evaluate(x), v, k);
    let tau0 = k.tau0();
    // m0 a = f + m0 τ0 (ȧ − (ȧ·v) v/c²), and ȧ·v = −a·a on the constraint
    let adot = (a - f * (1.0 / k.m0)) * (1.0 / tau0) - v * (a.norm2() / vv);
    Ok([v, a, adot])
}

/// Reduction-of-order LAD acceleration: the jerk is the flow derivative of
/// the Landau-Lifshitz acceleration, taken by a five-point central difference
/// with step `h`.
pub fn lad_reduced_acceleration(
    field: &FieldModel,
    x: FourVector,
    v: FourVector,
    h: f64,
    k: &PhysicalConstants,
) -> FourVector {
    let a_ll = ll_acceleration(field, x, v, k);
    let f = force(&field.evaluate(x), v, k);
    let g = |s: f64| ll_acceleration(field, x + v * s, v + a_ll * s, k);
    let jerk = (g(-2.0 * h) - g(2.0 * h) + (g(h) - g(-h)) * 8.0) * (1.0 / (12.0 * h));
    f * (1.0 / k.m0) + project(jerk, v, k.c) * k.tau0()
}

/// Proper-time step resolving the field: `steps_per_cycle` steps per period
/// of the phase seen by the particle, or per proper gyration time.
pub fn natural_step(field: &FieldModel, v: FourVector, config: &IntegratorConfig, k: &PhysicalConstants) -> Result<f64> {
    if let Some(d) = config.dtau {
        return Ok(d);
    }
    let rate = match field {
        FieldModel::PlaneWave(w) => {
            let n = w.direction();
            w.wavenumber() * (v[0] - n[0] * v[1] - n[1] * v[2] - n[2] * v[3])
        }
        FieldModel::Uniform(f) => {
            let e = crate::minkowski::norm3(f.e_over_c());
            let b = crate::minkowski::norm3(f.magnetic());
            k.e * e.max(b) / k.m0
        }
        FieldModel::Zero => 0.0,
    };
    if rate > 0.0 {
        Ok(std::f64::consts::TAU / (config.steps_per_cycle * rate))
    } else if k.tau0() > 0.0 {
        Ok(k.tau0() / 20.0)
    } else {
        Err(Error::Config("dtau must be given for a field-free run without radiation reaction".into()))
    }
}

/// Advances a particle under one of the dynamics.
#[derive(Debug, Clone)]
pub struct Pusher {
    pub field: FieldModel,
    pub dynamics: Dynamics,
    pub config: IntegratorConfig,
    pub constants: PhysicalConstants,
    dtau: f64,
    h_trial: f64,
}

impl Pusher {
    pub fn new(
        field: FieldModel,
        dynamics: Dynamics,
        config: IntegratorConfig,
        constants: PhysicalConstants,
        initial: &ParticleState,
    ) -> Result<Self> {
        config.validate()?;
        constants.validate()?;
        let dtau = natural_step(&field, initial.v, &config, &constants)?;
        Ok(Pusher { field, dynamics, config, constants, dtau, h_trial: dtau })
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// dv/dτ of the chosen dynamics (for forward LAD the carried a).
    pub fn acceleration(&self, s: &ParticleState) -> FourVector {
        let k = &self.constants;
        match self.dynamics {
            Dynamics::Lorentz => force(&self.field.evaluate(s.x), s.v, k) * (1.0 / k.m0),
            Dynamics::LandauLifshitz => ll_acceleration(&self.field, s.x, s.v, k),
            Dynamics::LadForward => s.a.unwrap_or(FourVector::ZERO),
            Dynamics::LadReduced => {
                lad_reduced_acceleration(&self.field, s.x, s.v, self.config.jerk_fraction * self.dtau, k)
            }
        }
    }

    fn rhs8(&self, _t: f64, y: &State<8>) -> Result<State<8>> {
        let x = FourVector([y[0], y[1], y[2], y[3]]);
        let v = FourVector([y[4], y[5], y[6], y[7]]);
        let s = ParticleState { tau: 0.0, x, v, a: None };
        let a = self.acceleration(&s);
        if !a.is_finite() {
            return Err(Error::NonFinite("acceleration"));
        }
        Ok([v[0], v[1], v[2], v[3], a[0], a[1], a[2], a[3]])
    }

    fn rhs12(&self, _t: f64, y: &State<12>) -> Result<State<12>> {
        let x = FourVector([y[0], y[1], y[2], y[3]]);
        let v = FourVector([y[4], y[5], y[6], y[7]]);
        let a = FourVector([y[8], y[9], y[10], y[11]]);
        let [dx, dv, da] = lad_derivatives(&self.field, x, v, a, &self.constants)?;
        if !da.is_finite() {
            return Err(Error::NonFinite("jerk"));
        }
        let mut out = [0.0; 12];
        out[..4].copy_from_slice(&dx.0);
        out[4..8].copy_from_slice(&dv.0);
        out[8..].copy_from_slice(&da.0);
        Ok(out)
    }

    fn scale(&self, s: &ParticleState) -> [f64; 3] {
        let vs = s.v[0];
        let ts = self.dtau * self.config.steps_per_cycle;
        [vs * ts, vs, vs / ts]
    }

    /// One step of length `dtau()` followed by renormalization of v (and,
    /// for forward LAD, re-projection of a).
    pub fn step(&mut self, s: &ParticleState) -> Result<ParticleState> {
        let c = self.constants.c;
        let h = self.dtau;
        let control =
            AdaptiveControl { rtol: self.config.rtol, atol: self.config.atol, h_min: h * 1e-12 };
        let [ls, vs, as_] = self.scale(s);
        let (x, v, a) = if self.dynamics == Dynamics::LadForward {
            let a = s.a.unwrap_or(FourVector::ZERO);
            let mut y = [0.0; 12];
            y[..4].copy_from_slice(&s.x.0);
            y[4..8].copy_from_slice(&s.v.0);
            y[8..].copy_from_slice(&a.0);
            let f = |t: f64, y: &State<12>| self.rhs12(t, y);
            let y = match self.config.scheme {
                Scheme::Rk4 => rk4_step(&f, s.tau, &y, h)?,
                Scheme::Rk45 => {
                    let scale = [ls, ls, ls, ls, vs, vs, vs, vs, as_, as_, as_, as_];
                    let mut ht = self.h_trial;
                    let out = dopri_advance(&f, s.tau, &y, s.tau + h, &mut ht, &scale, &control)?;
                    self.h_trial = ht;
                    out
                }
            };
            let part = |i: usize| FourVector([y[i], y[i + 1], y[i + 2], y[i + 3]]);
            (part(0), part(4), Some(part(8)))
        } else {
            let mut y = [0.0; 8];
            y[..4].copy_from_slice(&s.x.0);
            y[4..].copy_from_slice(&s.v.0);
            let f = |t: f64, y: &State<8>| self.rhs8(t, y);
            let y = match self.config.scheme {
                Scheme::Rk4 => rk4_step(&f, s.tau, &y, h)?,
                Scheme::Rk45 => {
                    let scale = [ls, ls, ls, ls, vs, vs, vs, vs];
                    let mut ht = self.h_trial;
                    let out = dopri_advance(&f, s.tau, &y, s.tau + h, &mut ht, &scale, &control)?;
                    self.h_trial = ht;
                    out
                }
            };
            (FourVector([y[0], y[1], y[2], y[3]]), FourVector([y[4], y[5], y[6], y[7]]), None)
        };
        if !x.is_finite() {
            return Err(Error::NonFinite("position"));
        }
        let v = on_shell(v, c)?;
        Ok(ParticleState { tau: s.tau + h, x, v, a: a.map(|a| project(a, v, c)) })
    }

    /// Diagnostics for a state: external force, radiated power and the
    /// Schott rate, so that c·m0·dv⁰/dτ = c f⁰ − P γ + schott.
    pub fn sample(&self, s: &ParticleState) -> TrajectorySample {
        let k = &self.constants;
        let f = force(&self.field.evaluate(s.x), s.v, k);
        let accel = self.acceleration(s);
        let power = match self.dynamics {
            Dynamics::LadForward => larmor_power(accel, k),
            _ => perturbed_power(f, k),
        };
        let gamma = s.v[0] / k.c;
        let schott = if self.dynamics == Dynamics::Lorentz {
            0.0
        } else {
            k.c * k.m0 * accel[0] - k.c * f[0] + power * gamma
        };
        TrajectorySample { tau: s.tau, x: s.x, v: s.v, accel, force: f, power, schott }
    }

    /// Integrates until proper time `tau_end`, recording every step.
    pub fn run(&mut self, initial: ParticleState, tau_end: f64) -> Result<Trajectory> {
        let n = ((tau_end - initial.tau) / self.dtau).round().max(0.0) as usize;
        if n > self.config.max_steps {
            return Err(Error::MaxSteps(self.config.max_steps));
        }
        let mut samples = Vec::with_capacity(n + 1);
        let mut s = initial;
        samples.push(self.sample(&s));
        for _ in 0..n {
            s = self.step(&s)?;
            samples.push(self.sample(&s));
        }
        Ok(Trajectory { dynamics: self.dynamics, dtau: self.dtau, samples, last: s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub tau: f64,
    pub x: FourVector,
    pub v: FourVector,
    /// dv/dτ of the integrated dynamics.
    pub accel: FourVector,
    /// External Lorentz four-force.
    pub force: FourVector,
    /// Radiated power (W).
    pub power: f64,
    /// Schott energy rate per unit proper time (W).
    pub schott: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dynamics: Dynamics,
    pub dtau: f64,
    pub samples: Vec<TrajectorySample>,
    pub last: ParticleState,
}

impl Trajectory {
    pub fn final_state(&self) -> ParticleState {
        self.last
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub samples: usize,
    /// Change of γ m0 c² over the run (J).
    pub delta_energy: f64,
    /// ∫ F·v dt (J).
    pub work: f64,
    /// ∫ P dt (J).
    pub radiated: f64,
    /// ∫ Schott rate dτ (J); vanishes when the field is off at both ends.
    pub schott: f64,
    /// ΔE − (W − R) (J).
    pub net_residual: f64,
    /// |net residual| relative to the radiated energy.
    pub relative_net_residual: f64,
    /// Largest and RMS pointwise |dE/dt − (F·v − P + schott/γ)| (W), from a
    /// fourth-order difference of the sampled energy.
    pub max_residual: f64,
    pub rms_residual: f64,
    pub peak_power: f64,
    /// True when the net balance misses by more than the audit tolerance.
    pub violation: bool,
}

/// Tolerance on the relative net residual above which the audit flags a violation.
pub const AUDIT_TOLERANCE: f64 = 1e-3;

pub fn energy_balance_audit(traj: &Trajectory, k: &PhysicalConstants) -> Result<EnergyAudit> {
    let s = &traj.samples;
    if s.len() < 8 {
        return Err(Error::TooFewSamples { need: 8, got: s.len() });
    }
    let h = traj.dtau;
    let c = k.c;
    let energy: Vec<f64> = s.iter().map(|p| k.m0 * c * p.v[0]).collect();
    let gamma: Vec<f64> = s.iter().map(|p| p.v[0] / c).collect();
    let work_rate: Vec<f64> = s.iter().map(|p| c * p.force[0]).collect();
    let rad_rate: Vec<f64> = s.iter().zip(&gamma).map(|(p, g)| p.power * g).collect();
    let schott_rate: Vec<f64> = s.iter().map(|p| p.schott).collect();
    let work = simpson(&work_rate, h);
    let radiated = simpson(&rad_rate, h);
    let schott = simpson(&schott_rate, h);
    let delta_energy = energy[energy.len() - 1] - energy[0];
    let net_residual = delta_energy - (work - radiated);
    let denom = if radiated > 0.0 {
        radiated
    } else {
        work.abs().max(delta_energy.abs())
    };
    let relative_net_residual = if denom > 0.0 { net_residual.abs() / denom } else { 0.0 };

    let mut max_residual: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for i in 2..s.len() - 2 {
        let de_dtau = (energy[i - 2] - energy[i + 2] + 8.0 * (energy[i + 1] - energy[i - 1])) / (12.0 * h);
        let model = work_rate[i] - rad_rate[i] + schott_rate[i];
        let r = (de_dtau - model) / gamma[i];
        max_residual = max_residual.max(r.abs());
        sum_sq += r * r;
        count += 1;
    }
    let peak_power = s.iter().fold(0.0_f64, |m, p| m.max(p.power));
    Ok(EnergyAudit {
        samples: s.len(),
        delta_energy,
        work,
        radiated,
        schott,
        net_residual,
        relative_net_residual,
        max_residual,
        rms_residual: (sum_sq / count as f64).sqrt(),
        peak_power,
        violation: relative_net_residual > AUDIT_TOLERANCE,
    })
}

/// Least-squares slope of ln √(−a·a) against τ.
pub fn fit_growth_rate(traj: &Trajectory) -> Result<f64> {
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|p| (p.tau, (-p.accel.norm2()).max(0.0).sqrt()))
        .filter(|(_, a)| *a > 0.0)
        .map(|(t, a)| (t, a.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewSamples { need: 3, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(sxy / sxx)
}
