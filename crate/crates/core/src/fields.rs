//! Closed-form vacuum field models with analytic derivatives.
//!
//! Plane waves are built from a vector potential so that the field, its
//! gradient and the potential stay mutually consistent. For a wave moving
//! along n̂ with phase φ = k(x⁰ − n̂·r):
//!
//! ```text
//! A   = -(E0 / ω) g(φ) sin φ ε̂                 (linear)
//! E/c = (E0 / c) (g cos φ + g' sin φ) ε̂
//! B   = n̂ × E/c
//! ```
//!
//! where g is the pulse envelope (Gaussian in phase, or 1).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::minkowski::{cross3, dot3, norm3, scale3, FieldGradient, FieldTensor, FourVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    #[default]
    Linear,
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Envelope {
    #[default]
    None,
    /// `duration` is the full width at half maximum of the intensity (s).
    Gaussian { duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    /// Peak field amplitude divided by c (tesla).
    amplitude: f64,
    /// Wavenumber ω/c (1/m).
    k: f64,
    direction: [f64; 3],
    pol1: [f64; 3],
    pol2: [f64; 3],
    polarization: Polarization,
    /// Envelope width in phase units; infinite for a monochromatic wave.
    sigma: f64,
}

impl PlaneWave {
    /// Builds a wave with peak field `e0` (V/m) at angular frequency `omega`.
    ///
    /// For circular polarization `e0` is the amplitude of each of the two
    /// transverse components, so |E| = e0 at every phase.
    pub fn new(
        e0: f64,
        omega: f64,
        direction: [f64; 3],
        polarization_vector: [f64; 3],
        polarization: Polarization,
        envelope: Envelope,
        c: f64,
    ) -> Result<Self> {
        if !(e0.is_finite() && e0 >= 0.0) {
            return Err(Error::Domain(format!("field amplitude {e0}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Domain(format!("angular frequency {omega}")));
        }
        let nn = norm3(direction);
        let pn = norm3(polarization_vector);
        if !(nn > 0.0 && pn > 0.0) {
            return Err(Error::Domain("zero propagation or polarization vector".into()));
        }
        let n = scale3(direction, 1.0 / nn);
        let p = scale3(polarization_vector, 1.0 / pn);
        if dot3(n, p).abs() > 1e-9 {
            return Err(Error::Domain("polarization not perpendicular to propagation".into()));
        }
        let sigma = match envelope {
            Envelope::None => f64::INFINITY,
            Envelope::Gaussian { duration } => {
                if !(duration.is_finite() && duration > 0.0) {
                    return Err(Error::Domain(format!("pulse duration {duration}")));
                }
                omega * duration / (2.0 * std::f64::consts::LN_2.sqrt())
            }
        };
        Ok(PlaneWave {
            amplitude: e0 / c,
            k: omega / c,
            direction: n,
            pol1: p,
            pol2: cross3(n, p),
            polarization,
            sigma,
        })
    }

    /// Wave specified by its normalized amplitude a0 = eE0/(m0 c ω).
    pub fn from_a0(
        a0: f64,
        wavelength: f64,
        direction: [f64; 3],
        polarization_vector: [f64; 3],
        polarization: Polarization,
        envelope: Envelope,
        k: &PhysicalConstants,
    ) -> Result<Self> {
        let omega = angular_frequency(wavelength, k.c)?;
        let e0 = a0 * k.m0 * k.c * omega / k.e;
        Self::new(e0, omega, direction, polarization_vector, polarization, envelope, k.c)
    }

    pub fn phase(&self, x: FourVector) -> f64 {
        self.k * (x[0] - dot3(self.direction, x.spatial()))
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn peak_field(&self, c: f64) -> f64 {
        self.amplitude * c
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    /// Envelope and its first two phase derivatives.
    fn envelope(&self, phi: f64) -> (f64, f64, f64) {
        if self.sigma.is_infinite() {
            return (1.0, 0.0, 0.0);
        }
        let s2 = self.sigma * self.sigma;
        let g = (-0.5 * phi * phi / s2).exp();
        let g1 = -phi / s2 * g;
        let g2 = (phi * phi / (s2 * s2) - 1.0 / s2) * g;
        (g, g1, g2)
    }

    /// Transverse profile h(φ) of E/c (in units of `amplitude`) and dh/dφ,
    /// as coefficients along (ε̂1, ε̂2).
    fn profile(&self, phi: f64) -> ([f64; 2], [f64; 2]) {
        let (g, g1, g2) = self.envelope(phi);
        let (s, c) = phi.sin_cos();
        let h1 = g * c + g1 * s;
        let d1 = 2.0 * g1 * c + (g2 - g) * s;
        match self.polarization {
            Polarization::Linear => ([h1, 0.0], [d1, 0.0]),
            Polarization::Circular => {
                let h2 = g * s - g1 * c;
                let d2 = 2.0 * g1 * s + (g - g2) * c;
                ([h1, h2], [d1, d2])
            }
        }
    }

    fn tensor_from_profile(&self, h: [f64; 2]) -> FieldTensor {
        let e: [f64; 3] =
            std::array::from_fn(|i| self.amplitude * (h[0] * self.pol1[i] + h[1] * self.pol2[i]));
        FieldTensor::from_e_over_c_b(e, cross3(self.direction, e))
    }

    pub fn evaluate(&self, x: FourVector) -> FieldTensor {
        let (h, _) = self.profile(self.phase(x));
        self.tensor_from_profile(h)
    }

    pub fn gradient(&self, x: FourVector) -> FieldGradient {
        let (_, d) = self.profile(self.phase(x));
        let df = self.tensor_from_profile(d);
        let n = self.direction;
        FieldGradient([
            df * self.k,
            df * (-self.k * n[0]),
            df * (-self.k * n[1]),
            df * (-self.k * n[2]),
        ])
    }

    /// Four-potential (A⁰ = 0, A) in T·m.
    pub fn potential(&self, x: FourVector) -> FourVector {
        let phi = self.phase(x);
        let (g, _, _) = self.envelope(phi);
        let (s, c) = phi.sin_cos();
        let w = -self.amplitude / self.k * g;
        let (c1, c2) = match self.polarization {
            Polarization::Linear => (w * s, 0.0),
            Polarization::Circular => (w * s, -w * c),
        };
        FourVector::from_parts(0.0, std::array::from_fn(|i| c1 * self.pol1[i] + c2 * self.pol2[i]))
    }
}

/// External field F_ex(x).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FieldModel {
    #[default]
    Zero,
    PlaneWave(PlaneWave),
    /// Any constant field.
    Uniform(FieldTensor),
}

impl FieldModel {
    /// Constant crossed field: E = E0 x̂, B = (E0/c) ŷ, both invariants zero.
    pub fn constant_crossed(e0: f64, c: f64) -> Self {
        FieldModel::Uniform(FieldTensor::from_eb([e0, 0.0, 0.0], [0.0, e0 / c, 0.0], c))
    }

    pub fn constant_magnetic(b0: f64, axis: [f64; 3]) -> Self {
        let n = norm3(axis);
        let dir = if n > 0.0 { scale3(axis, 1.0 / n) } else { [0.0, 0.0, 1.0] };
        FieldModel::Uniform(FieldTensor::from_e_over_c_b([0.0; 3], scale3(dir, b0)))
    }

    pub fn evaluate(&self, x: FourVector) -> FieldTensor {
        match self {
            FieldModel::Zero => FieldTensor::ZERO,
            FieldModel::PlaneWave(w) => w.evaluate(x),
            FieldModel::Uniform(f) => *f,
        }
    }

    pub fn gradient(&self, x: FourVector) -> FieldGradient {
        match self {
            FieldModel::PlaneWave(w) => w.gradient(x),
            _ => FieldGradient::ZERO,
        }
    }

    /// A four-potential generating the field. Uniform fields use the
    /// symmetric gauge A^μ = -½ F^{μν} x_ν.
    pub fn potential(&self, x: FourVector) -> FourVector {
        match self {
            FieldModel::Zero => FourVector::ZERO,
            FieldModel::PlaneWave(w) => w.potential(x),
            FieldModel::Uniform(f) => f.contract(x) * -0.5,
        }
    }

    pub fn plane_wave(&self) -> Option<&PlaneWave> {
        match self {
            FieldModel::PlaneWave(w) => Some(w),
            _ => None,
        }
    }
}

pub fn angular_frequency(wavelength: f64, c: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::Domain(format!("wavelength {wavelength}")));
    }
    Ok(2.0 * PI * c / wavelength)
}

/// Laser intensity (W/cm²), wavelength (m) and electron kinetic energy (eV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserOperatingPoint {
    pub intensity: f64,
    pub wavelength: f64,
    pub kinetic_energy: f64,
}

impl LaserOperatingPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::Domain(format!("intensity {}", self.intensity)));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Domain(format!("wavelength {}", self.wavelength)));
        }
        if !(self.kinetic_energy >= 0.0 && self.kinetic_energy.is_finite()) {
            return Err(Error::Domain(format!("kinetic energy {}", self.kinetic_energy)));
        }
        Ok(())
    }

    /// Lorentz factor of the electron.
    pub fn gamma(&self, k: &PhysicalConstants) -> f64 {
        1.0 + self.kinetic_energy * k.e / k.mc2()
    }
}

/// Peak field amplitude (V/m) for a cycle-averaged intensity in W/cm².
///
/// Linear: I = ε0 c E0²/2. Circular: each of the two components carries E0,
/// so I = ε0 c E0².
pub fn peak_field_from_intensity(intensity: f64, polarization: Polarization, k: &PhysicalConstants) -> f64 {
    let i_si = intensity * 1e4;
    let factor = match polarization {
        Polarization::Linear => 2.0,
        Polarization::Circular => 1.0,
    };
    (factor * i_si / (k.eps0 * k.c)).sqrt()
}

/// a0 = eE0/(m0 c ω) with the linear-polarization peak field E0 = √(2I/ε0c).
pub fn a0_from_intensity(op: &LaserOperatingPoint, k: &PhysicalConstants) -> Result<f64> {
    a0_from_intensity_with(op, Polarization::Linear, k)
}

pub fn a0_from_intensity_with(
    op: &LaserOperatingPoint,
    polarization: Polarization,
    k: &PhysicalConstants,
) -> Result<f64> {
    op.validate()?;
    let omega = angular_frequency(op.wavelength, k.c)?;
    let e0 = peak_field_from_intensity(op.intensity, polarization, k);
    Ok(k.e * e0 / (k.m0 * k.c * omega))
}

/// Strength of a plane wave in a config: either a0 directly or an intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    A0(f64),
    /// W/cm².
    Intensity(f64),
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_polarization_vector() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

/// Serializable description of a field model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero {},
    PlaneWave {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a0: Option<f64>,
        /// W/cm².
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intensity: Option<f64>,
        wavelength: f64,
        #[serde(default = "default_direction")]
        direction: [f64; 3],
        #[serde(default = "default_polarization_vector")]
        polarization_vector: [f64; 3],
        #[serde(default)]
        polarization: Polarization,
        #[serde(default)]
        envelope: Envelope,
    },
    ConstantCrossed {
        e0: f64,
    },
    ConstantMagnetic {
        b0: f64,
        #[serde(default = "default_direction")]
        axis: [f64; 3],
    },
    Uniform {
        e: [f64; 3],
        b: [f64; 3],
    },
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Zero {}
    }
}

impl FieldSpec {
    pub fn build(&self, k: &PhysicalConstants) -> Result<FieldModel> {
        Ok(match self {
            FieldSpec::Zero {} => FieldModel::Zero,
            FieldSpec::PlaneWave {
                a0,
                intensity,
                wavelength,
                direction,
                polarization_vector,
                polarization,
                envelope,
            } => {
                let omega = angular_frequency(*wavelength, k.c)?;
                let e0 = match (a0, intensity) {
                    (Some(a0), None) => a0 * k.m0 * k.c * omega / k.e,
                    (None, Some(i)) => {
                        if !(*i >= 0.0) {
                            return Err(Error::Config(format!("intensity {i}")));
                        }
                        peak_field_from_intensity(*i, *polarization, k)
                    }
                    _ => {
                        return Err(Error::Config(
                            "plane-wave needs exactly one of `a0` or `intensity`".into(),
                        ))
                    }
                };
                FieldModel::PlaneWave(PlaneWave::new(
                    e0,
                    omega,
                    *direction,
                    *polarization_vector,
                    *polarization,
                    *envelope,
                    k.c,
                )?)
            }
            FieldSpec::ConstantCrossed { e0 } => FieldModel::constant_crossed(*e0, k.c),
            FieldSpec::ConstantMagnetic { b0, axis } => FieldModel::constant_magnetic(*b0, *axis),
            FieldSpec::Uniform { e, b } => FieldModel::Uniform(FieldTensor::from_eb(*e, *b, k.c)),
        })
    }
}
