//! TOML run configuration. Every table rejects unknown keys and the whole
//! file is validated before anything is computed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rr_core::classical::{Dynamics, IntegratorConfig, ParticleState, Scheme};
use rr_core::fields::{FieldSpec, Polarization};
use rr_core::minkowski::FourVector;
use rr_core::stochastic::EnsembleConfig;
use rr_core::PhysicalConstants;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    QfactorScan,
    Trajectory,
    Ensemble,
    Spectrum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::QfactorScan => "qfactor-scan",
            Command::Trajectory => "trajectory",
            Command::Ensemble => "ensemble",
            Command::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: PhysicalConstants,
    #[serde(default)]
    pub field: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particle: Option<ParticleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<TrajectorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Initial electron state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    /// (ct, x, y, z) in metres.
    #[serde(default)]
    pub position: [f64; 4],
    pub gamma: f64,
    /// Direction of motion; ignored at γ = 1.
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    /// Initial four-acceleration (m/s²), used by forward LAD integration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceleration: Option<[f64; 4]>,
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl ParticleSpec {
    pub fn state(&self, k: &PhysicalConstants) -> Result<ParticleState> {
        let v = FourVector::velocity_from_gamma(self.gamma, self.direction, k.c);
        let s = ParticleState::new(FourVector(self.position), v, k.c)?;
        Ok(match self.acceleration {
            Some(a) => s.with_acceleration(FourVector(a), k.c),
            None => s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default)]
    pub dynamics: Dynamics,
    #[serde(default)]
    pub scheme: Scheme,
    /// Proper-time step (s); chosen from the field when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtau: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps_per_cycle: f64,
    /// Proper time to integrate (s).
    pub tau_end: f64,
    /// Write every `stride`-th sample.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_steps() -> f64 {
    IntegratorConfig::default().steps_per_cycle
}

fn default_stride() -> usize {
    1
}

impl TrajectorySpec {
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            scheme: self.scheme,
            dtau: self.dtau,
            steps_per_cycle: self.steps_per_cycle,
            ..IntegratorConfig::default()
        }
    }
}

/// A list of values, or `n` points from `min` to `max` (log-spaced when
/// `log` is set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        n: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Range { min, max, n, log } => {
                if *n == 0 || !(min <= max) || (*log && *min <= 0.0) {
                    return Err(HarnessError::Config(format!("bad grid range {min}..{max} with {n} points")));
                }
                let at = |t: f64| if *log { (min.ln() + t * (max.ln() - min.ln())).exp() } else { min + t * (max - min) };
                (0..*n).map(|i| if *n == 1 { *min } else { at(i as f64 / (*n - 1) as f64) }).collect()
            }
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(HarnessError::Config("grid values must be finite and non-empty".into()));
        }
        Ok(v)
    }
}

/// Head-on scan of q over laser intensity and electron energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// W/cm².
    pub intensities: Grid,
    /// Kinetic energies (eV).
    pub energies: Grid,
    /// Laser wavelength (m).
    pub wavelength: f64,
    #[serde(default)]
    pub polarization: Polarization,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_max_cells() -> usize {
    1_000_000
}

/// Emission spectrum at one quantum parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub chi: f64,
    pub gamma: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    4000
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for output files; `--out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    fn require<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| HarnessError::Config(format!("`{}` needs a [{name}] table", self.command.name())))
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.field.build(&self.constants)?;
        match self.command {
            Command::QfactorScan => {
                let s = self.require(&self.scan, "scan")?;
                let (i, e) = (s.intensities.values()?, s.energies.values()?);
                if i.iter().chain(&e).any(|v| *v < 0.0) || !(s.wavelength > 0.0) {
                    return Err(HarnessError::Config("scan grids must be non-negative".into()));
                }
            }
            Command::Trajectory => {
                let p = self.require(&self.particle, "particle")?;
                let t = self.require(&self.integrator, "integrator")?;
                if !(p.gamma >= 1.0) {
                    return Err(HarnessError::Config(format!("gamma {} below 1", p.gamma)));
                }
                if !(t.tau_end.is_finite() && t.tau_end > 0.0) || t.stride == 0 {
                    return Err(HarnessError::Config("tau_end and stride must be positive".into()));
                }
                t.integrator().validate()?;
                p.state(&self.constants)?;
            }
            Command::Ensemble => {
                let e = self.require(&self.ensemble, "ensemble")?;
                e.validate()?;
            }
            Command::Spectrum => {
                let s = self.require(&self.spectrum, "spectrum")?;
                if !(s.chi > 0.0 && s.gamma > 1.0 && s.points >= 2) {
                    return Err(HarnessError::Config("spectrum needs chi > 0, gamma > 1, points >= 2".into()));
                }
            }
        }
        Ok(())
    }
}
