//! Named scenarios, each a complete run configuration.

use std::f64::consts::{LN_2, PI};

use rr_core::classical::{Dynamics, Scheme};
use rr_core::fields::{Envelope, FieldSpec, LaserOperatingPoint, Polarization};
use rr_core::minkowski::FourVector;
use rr_core::stochastic::{EnsembleConfig, WavepacketSpec};
use rr_core::PhysicalConstants;

use crate::config::{Command, Grid, OutputSpec, ParticleSpec, RunConfig, ScanSpec, SpectrumSpec, TrajectorySpec};
use crate::error::{HarnessError, Result};
use crate::scan::head_on_chi;

pub const PRESETS: &[(&str, &str)] = &[
    ("figure1", "q over 1e18-1e24 W/cm2 and 0.1-100 GeV, head-on, circular, 0.8 um"),
    ("eli-np", "q at 1e22 W/cm2 and 1 GeV"),
    ("slac-e144", "q at 1e18 W/cm2 and 46 GeV"),
    ("eli-np-spectrum", "emission spectrum at the eli-np operating point"),
    ("runaway-demo", "forward LAD without field from a seeded acceleration, 5 tau0"),
    ("free-motion", "Landau-Lifshitz without field: straight line, no radiation"),
    ("ll-pulse", "Landau-Lifshitz through a0 = 68, 30 fs, head-on at gamma = 2000"),
    ("free-packet", "1e5 paths of a free Gaussian packet over two spreading times"),
    ("rr-identity", "1e5 dressed paths through a circularly polarized pulse, P(0) = 0.3"),
];

const WAVELENGTH: f64 = 0.8e-6;
const ELI_NP: LaserOperatingPoint = LaserOperatingPoint { intensity: 1e22, wavelength: WAVELENGTH, kinetic_energy: 1e9 };

fn base(command: Command) -> RunConfig {
    RunConfig {
        command,
        seed: 0,
        constants: PhysicalConstants::codata(),
        field: FieldSpec::Zero {},
        particle: None,
        integrator: None,
        ensemble: None,
        scan: None,
        spectrum: None,
        output: OutputSpec::default(),
    }
}

fn scan(intensities: Vec<f64>, energies: Vec<f64>) -> RunConfig {
    RunConfig {
        scan: Some(ScanSpec {
            intensities: Grid::List(intensities),
            energies: Grid::List(energies),
            wavelength: WAVELENGTH,
            polarization: Polarization::Circular,
            max_cells: 10_000,
        }),
        ..base(Command::QfactorScan)
    }
}

fn pulse(a0: f64, polarization: Polarization, duration: f64) -> FieldSpec {
    FieldSpec::PlaneWave {
        a0: Some(a0),
        intensity: None,
        wavelength: WAVELENGTH,
        direction: [0.0, 0.0, 1.0],
        polarization_vector: [1.0, 0.0, 0.0],
        polarization,
        envelope: Envelope::Gaussian { duration },
    }
}

/// Envelope width in phase units for an intensity FWHM `duration`.
fn phase_width(duration: f64, k: &PhysicalConstants) -> f64 {
    2.0 * PI * k.c / WAVELENGTH * duration / (2.0 * LN_2.sqrt())
}

/// Start position and proper-time span for an electron with Lorentz factor
/// `gamma` meeting the pulse head-on, beginning `lead` envelope widths ahead
/// of the peak and integrating for `span` widths.
pub fn head_on_transit(gamma: f64, duration: f64, lead: f64, span: f64, k: &PhysicalConstants) -> (f64, f64) {
    let sigma = phase_width(duration, k);
    let wavenumber = 2.0 * PI / WAVELENGTH;
    let v = FourVector::velocity_from_gamma(gamma, [0.0, 0.0, -1.0], k.c);
    let kv = wavenumber * (v[0] - v[3]);
    (lead * sigma / wavenumber, span * sigma / kv)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let k = PhysicalConstants::codata();
    let cfg = match name {
        "figure1" => scan(
            vec![1e18, 1e19, 1e20, 1e21, 1e22, 1e23, 1e24],
            vec![1e8, 3e8, 1e9, 3e9, 1e10, 4.6e10, 1e11],
        ),
        "eli-np" => scan(vec![ELI_NP.intensity], vec![ELI_NP.kinetic_energy]),
        "slac-e144" => scan(vec![1e18], vec![4.6e10]),
        "eli-np-spectrum" => RunConfig {
            spectrum: Some(SpectrumSpec {
                chi: head_on_chi(&ELI_NP, Polarization::Circular, &k)?,
                gamma: ELI_NP.gamma(&k),
                points: 4000,
            }),
            ..base(Command::Spectrum)
        },
        "runaway-demo" => RunConfig {
            particle: Some(ParticleSpec {
                position: [0.0; 4],
                gamma: 1.0,
                direction: [1.0, 0.0, 0.0],
                acceleration: Some([0.0, 1e10, 0.0, 0.0]),
            }),
            integrator: Some(TrajectorySpec {
                dynamics: Dynamics::LadForward,
                scheme: Scheme::Rk4,
                dtau: Some(k.tau0() / 100.0),
                steps_per_cycle: 200.0,
                tau_end: 5.0 * k.tau0(),
                stride: 1,
            }),
            ..base(Command::Trajectory)
        },
        "free-motion" => RunConfig {
            particle: Some(ParticleSpec {
                position: [0.0; 4],
                gamma: 10.0,
                direction: [1.0, 0.0, 0.0],
                acceleration: None,
            }),
            integrator: Some(TrajectorySpec {
                dynamics: Dynamics::LandauLifshitz,
                scheme: Scheme::Rk4,
                dtau: Some(1e-15),
                steps_per_cycle: 200.0,
                tau_end: 1e-13,
                stride: 1,
            }),
            ..base(Command::Trajectory)
        },
        "ll-pulse" => {
            let (gamma, duration) = (2000.0, 30e-15);
            let (z0, tau_end) = head_on_transit(gamma, duration, 6.0, 18.0, &k);
            RunConfig {
                field: pulse(68.0, Polarization::Linear, duration),
                particle: Some(ParticleSpec {
                    position: [0.0, 0.0, 0.0, z0],
                    gamma,
                    direction: [0.0, 0.0, -1.0],
                    acceleration: None,
                }),
                integrator: Some(TrajectorySpec {
                    dynamics: Dynamics::LandauLifshitz,
                    scheme: Scheme::Rk4,
                    dtau: None,
                    steps_per_cycle: 200.0,
                    tau_end,
                    stride: 10,
                }),
                ..base(Command::Trajectory)
            }
        }
        "free-packet" => {
            let sigma0 = 1e-10;
            let spreading = 2.0 * sigma0 * sigma0 / k.lambda().powi(2);
            let mut e = EnsembleConfig::new(
                100_000,
                2.0 * spreading,
                WavepacketSpec::GaussianFree { sigma0, u0: [0.0; 3], x0: [0.0; 4] },
            );
            e.dtau = Some(spreading / 100.0);
            e.stride = 10;
            RunConfig { ensemble: Some(e), ..base(Command::Ensemble) }
        }
        "rr-identity" => {
            let (gamma, duration) = (100.0, 10e-15);
            let (z0, tau_span) = head_on_transit(gamma, duration, 6.0, 12.0, &k);
            let u = (gamma * gamma - 1.0f64).sqrt();
            let mut e = EnsembleConfig::new(
                100_000,
                tau_span,
                WavepacketSpec::PlaneWaveDressed { sigma0: 1e-9, u0: [0.0, 0.0, -u], x0: [0.0, 0.0, 0.0, z0] },
            );
            e.steps_per_cycle = 25.0;
            e.p0 = 0.3;
            e.stride = 5;
            RunConfig {
                field: pulse(10.0, Polarization::Circular, duration),
                ensemble: Some(e),
                ..base(Command::Ensemble)
            }
        }
        other => return Err(HarnessError::UnknownPreset(other.to_string())),
    };
    cfg.validate()?;
    Ok(cfg)
}
