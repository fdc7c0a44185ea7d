//! Closed-form wavefunctions supplying the complex velocity
//! 𝒱^α = iλ² ∂^α ln φ + (e/m0) A^α and the density |φ|².

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::fields::{FieldModel, PlaneWave};
use crate::minkowski::{dot, Boost, FourVector};

/// Complex four-vector split into real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexFourVector {
    pub re: FourVector,
    pub im: FourVector,
}

impl ComplexFourVector {
    pub fn real(re: FourVector) -> Self {
        ComplexFourVector { re, im: FourVector::ZERO }
    }

    /// Osmotic drift (λ²/2) ∂ ln|φ|² with the index taken Euclidean, matching
    /// the δ^{μν} covariance of the noise: spatially it points up the density
    /// gradient.
    pub fn osmotic(&self) -> FourVector {
        FourVector(self.im.lower())
    }

    /// Drift of the forward process, Re 𝒱 + osmotic.
    pub fn forward(&self) -> FourVector {
        self.re + self.osmotic()
    }

    /// Drift of the backward process, Re 𝒱 − osmotic.
    pub fn backward(&self) -> FourVector {
        self.re - self.osmotic()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Anything that supplies drifts and a density to the stochastic paths.
pub trait DriftSource: Sync {
    fn complex_velocity(&self, x: FourVector) -> Result<ComplexFourVector>;

    /// |φ(x)|², normalized where the model allows it.
    fn density(&self, x: FourVector) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WavepacketSpec {
    /// Free Gaussian packet of rest-frame width `sigma0` (m) moving with
    /// spatial proper velocity `u0` (units of c).
    GaussianFree {
        sigma0: f64,
        #[serde(default)]
        u0: [f64; 3],
        #[serde(default)]
        x0: [f64; 4],
    },
    /// Volkov-type phase of momentum m0·u0 dressed by the external plane wave;
    /// `sigma0` sets the spread of the initial ensemble only.
    PlaneWaveDressed {
        sigma0: f64,
        #[serde(default)]
        u0: [f64; 3],
        #[serde(default)]
        x0: [f64; 4],
    },
    /// Stationary Gaussian held by a purely osmotic drift (the ground state
    /// of an isotropic oscillator, at rest).
    Stationary {
        sigma0: f64,
        #[serde(default)]
        x0: [f64; 4],
    },
}

impl WavepacketSpec {
    pub fn sigma0(&self) -> f64 {
        match *self {
            WavepacketSpec::GaussianFree { sigma0, .. }
            | WavepacketSpec::PlaneWaveDressed { sigma0, .. }
            | WavepacketSpec::Stationary { sigma0, .. } => sigma0,
        }
    }

    pub fn build(&self, field: &FieldModel, k: &PhysicalConstants) -> Result<Wavepacket> {
        let sigma0 = self.sigma0();
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(Error::Config(format!("sigma0 must be positive, got {sigma0}")));
        }
        let u_of = |u0: [f64; 3]| {
            let s2: f64 = u0.iter().map(|u| u * u).sum();
            FourVector::from_parts(k.c * (1.0 + s2).sqrt(), u0.map(|u| u * k.c))
        };
        let lambda2 = k.hbar / k.m0;
        Ok(match *self {
            WavepacketSpec::GaussianFree { sigma0, u0, x0 } => {
                let u = u_of(u0);
                Wavepacket::GaussianFree(GaussianFree {
                    x0: FourVector(x0),
                    sigma0,
                    u,
                    boost: Boost::from_velocity(u, k.c),
                    lambda2,
                    c: k.c,
                })
            }
            WavepacketSpec::PlaneWaveDressed { sigma0, u0, x0 } => {
                let wave = match field {
                    FieldModel::PlaneWave(w) => Some(*w),
                    FieldModel::Zero => None,
                    FieldModel::Uniform(_) => {
                        return Err(Error::Config("plane-wave-dressed packet needs a plane-wave or zero field".into()))
                    }
                };
                Wavepacket::PlaneWaveDressed(Dressed {
                    x0: FourVector(x0),
                    sigma0,
                    p: u_of(u0) * k.m0,
                    wave,
                    m0: k.m0,
                    e: k.e,
                })
            }
            WavepacketSpec::Stationary { sigma0, x0 } => {
                Wavepacket::Stationary(Stationary { x0: FourVector(x0), sigma0, lambda2, c: k.c })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavepacket {
    GaussianFree(GaussianFree),
    PlaneWaveDressed(Dressed),
    Stationary(Stationary),
}

impl Wavepacket {
    /// Draws an initial event: rest-frame Gaussian of width σ0 per axis.
    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> FourVector {
        let mut r = [0.0; 3];
        for ri in &mut r {
            let z: f64 = rng.sample(StandardNormal);
            *ri = z;
        }
        match self {
            Wavepacket::GaussianFree(g) => g.x0 + g.boost.apply(FourVector::from_parts(0.0, r.map(|z| z * g.sigma0))),
            Wavepacket::PlaneWaveDressed(d) => d.x0 + FourVector::from_parts(0.0, r.map(|z| z * d.sigma0)),
            Wavepacket::Stationary(s) => s.x0 + FourVector::from_parts(0.0, r.map(|z| z * s.sigma0)),
        }
    }

    /// Rest-frame spatial variance per axis at rest-frame time `t` (s), where
    /// the model has one.
    pub fn width_squared(&self, t: f64) -> Option<f64> {
        match self {
            Wavepacket::GaussianFree(g) => Some(g.width_squared(t)),
            Wavepacket::Stationary(s) => Some(s.sigma0 * s.sigma0),
            Wavepacket::PlaneWaveDressed(_) => None,
        }
    }

    /// Natural time scale: the spreading time 2σ0²/λ² for Gaussian packets.
    pub fn spreading_time(&self) -> Option<f64> {
        match self {
            Wavepacket::GaussianFree(g) => Some(1.0 / g.kappa()),
            Wavepacket::Stationary(s) => Some(2.0 * s.sigma0 * s.sigma0 / s.lambda2),
            Wavepacket::PlaneWaveDressed(_) => None,
        }
    }

    pub fn mean_velocity(&self, c: f64) -> FourVector {
        match self {
            Wavepacket::GaussianFree(g) => g.u,
            Wavepacket::PlaneWaveDressed(d) => d.p * (1.0 / d.m0),
            Wavepacket::Stationary(_) => FourVector::new(c, 0.0, 0.0, 0.0),
        }
    }
}

impl DriftSource for Wavepacket {
    fn complex_velocity(&self, x: FourVector) -> Result<ComplexFourVector> {
        match self {
            Wavepacket::GaussianFree(g) => g.complex_velocity(x),
            Wavepacket::PlaneWaveDressed(d) => d.complex_velocity(x),
            Wavepacket::Stationary(s) => s.complex_velocity(x),
        }
    }

    fn density(&self, x: FourVector) -> Result<f64> {
        match self {
            Wavepacket::GaussianFree(g) => g.density(x),
            Wavepacket::PlaneWaveDressed(_) => Ok(1.0),
            Wavepacket::Stationary(s) => s.density(x),
        }
    }
}

/// Free Gaussian packet: the rest-frame wavefunction is
/// exp(−i m0c²t/ħ)·ψ(t, r) with ψ the spreading Schrödinger Gaussian
/// ψ ∝ A^{−3/2} exp(−r²/(4σ0²A)), A = 1 + iκt, κ = λ²/(2σ0²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFree {
    x0: FourVector,
    sigma0: f64,
    u: FourVector,
    boost: Boost,
    lambda2: f64,
    c: f64,
}

impl GaussianFree {
    fn kappa(&self) -> f64 {
        self.lambda2 / (2.0 * self.sigma0 * self.sigma0)
    }

    /// σ(t)² = σ0²(1 + κ²t²).
    pub fn width_squared(&self, t: f64) -> f64 {
        let kt = self.kappa() * t;
        self.sigma0 * self.sigma0 * (1.0 + kt * kt)
    }

    fn rest_coordinates(&self, x: FourVector) -> (f64, [f64; 3]) {
        let xr = self.boost.inverse().apply(x - self.x0);
        (xr[0] / self.c, xr.spatial())
    }

    fn complex_velocity(&self, x: FourVector) -> Result<ComplexFourVector> {
        let (t, r) = self.rest_coordinates(x);
        let s2 = self.sigma0 * self.sigma0;
        let kappa = self.kappa();
        let a = Complex64::new(1.0, kappa * t);
        let i = Complex64::i();
        // ∂_i ln ψ = −r_i/(2σ0²A), ∂_t ln ψ = −(3/2)iκ/A + r² iκ/(4σ0²A²)
        let grad = r.map(|ri| -ri / (2.0 * s2 * a));
        let r2: f64 = r.iter().map(|v| v * v).sum();
        let dt = -1.5 * i * kappa / a + r2 * i * kappa / (4.0 * s2 * a * a);
        let l2 = self.lambda2;
        let c = self.c;
        let re = FourVector::from_parts(c - l2 / c * dt.im, grad.map(|g| l2 * g.im));
        let im = FourVector::from_parts(l2 / c * dt.re, grad.map(|g| -l2 * g.re));
        let out = ComplexFourVector { re: self.boost.apply(re), im: self.boost.apply(im) };
        if !out.is_finite() {
            return Err(Error::NonFinite("complex velocity"));
        }
        Ok(out)
    }

    fn density(&self, x: FourVector) -> Result<f64> {
        let (t, r) = self.rest_coordinates(x);
        let w2 = self.width_squared(t);
        let r2: f64 = r.iter().map(|v| v * v).sum();
        let rho = (2.0 * std::f64::consts::PI * w2).powf(-1.5) * (-r2 / (2.0 * w2)).exp();
        if rho > 0.0 {
            Ok(rho)
        } else {
            Err(Error::WavefunctionNode(rho))
        }
    }
}

/// Plane-wave-dressed phase: Re 𝒱 is the kinetic momentum of a classical
/// electron of asymptotic momentum p, divided by m0; |φ| = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dressed {
    x0: FourVector,
    sigma0: f64,
    p: FourVector,
    wave: Option<PlaneWave>,
    m0: f64,
    e: f64,
}

impl Dressed {
    fn complex_velocity(&self, x: FourVector) -> Result<ComplexFourVector> {
        let Some(w) = &self.wave else {
            return Ok(ComplexFourVector::real(self.p * (1.0 / self.m0)));
        };
        let n = w.direction();
        let kv = FourVector::new(w.wavenumber(), w.wavenumber() * n[0], w.wavenumber() * n[1], w.wavenumber() * n[2]);
        let kp = dot(kv, self.p);
        if kp <= 0.0 {
            return Err(Error::Domain("electron co-moving with the wave at light speed".into()));
        }
        let a = w.potential(x);
        // π = p + eA − k (e p·A + e² A·A/2)/(k·p)
        let pa = dot(self.p, a);
        let aa = dot(a, a);
        let pi = self.p + a * self.e - kv * ((self.e * pa + 0.5 * self.e * self.e * aa) / kp);
        Ok(ComplexFourVector::real(pi * (1.0 / self.m0)))
    }
}

/// Stationary Gaussian: Re 𝒱 = (c, 0), Im 𝒱 from ln|φ|² = −r²/(2σ0²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationary {
    x0: FourVector,
    sigma0: f64,
    lambda2: f64,
    c: f64,
}

impl Stationary {
    fn complex_velocity(&self, x: FourVector) -> Result<ComplexFourVector> {
        let r = (x - self.x0).spatial();
        let s2 = self.sigma0 * self.sigma0;
        // Im 𝒱^i = (λ²/2) ∂^i ln ρ = +λ² r_i / (2σ0²)
        let im = FourVector::from_parts(0.0, r.map(|ri| self.lambda2 * ri / (2.0 * s2)));
        Ok(ComplexFourVector { re: FourVector::new(self.c, 0.0, 0.0, 0.0), im })
    }

    fn density(&self, x: FourVector) -> Result<f64> {
        let r = (x - self.x0).spatial();
        let s2 = self.sigma0 * self.sigma0;
        let r2: f64 = r.iter().map(|v| v * v).sum();
        let rho = (2.0 * std::f64::consts::PI * s2).powf(-1.5) * (-r2 / (2.0 * s2)).exp();
        if rho > 0.0 {
            Ok(rho)
        } else {
            Err(Error::WavefunctionNode(rho))
        }
    }
}

/// 𝒱 at x for a drift source, plus (e/m0)A when the source is a bare phase.
pub fn complex_velocity(model: &dyn DriftSource, x: FourVector) -> Result<ComplexFourVector> {
    let v = model.complex_velocity(x)?;
    if !v.is_finite() {
        return Err(Error::NonFinite("complex velocity"));
    }
    Ok(v)
}
