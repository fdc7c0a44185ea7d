//! Physical constants (SI). CODATA 2018 values are the defaults; any subset
//! can be overridden from a TOML table with keys `m0`, `e`, `c`, `hbar`, `eps0`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Constant set shared by every model. `e` is the magnitude of the electron
/// charge; the electron itself carries `-e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConstants {
    pub m0: f64,
    pub e: f64,
    pub c: f64,
    pub hbar: f64,
    pub eps0: f64,
    /// Multiplies the radiation-reaction time. Only numerical experiments
    /// (order-of-accuracy studies) set this to anything but 1.
    pub tau0_scale: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            m0: ELECTRON_MASS,
            e: ELEMENTARY_CHARGE,
            c: SPEED_OF_LIGHT,
            hbar: HBAR,
            eps0: VACUUM_PERMITTIVITY,
            tau0_scale: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn codata() -> Self {
        Self::default()
    }

    /// Radiation-reaction time e²/(6π ε0 m0 c³), times `tau0_scale`.
    pub fn tau0(&self) -> f64 {
        self.tau0_scale * self.e * self.e / (6.0 * PI * self.eps0 * self.m0 * self.c.powi(3))
    }

    /// Diffusion scale √(ħ/m0) of the stochastic kinematics.
    pub fn lambda(&self) -> f64 {
        (self.hbar / self.m0).sqrt()
    }

    pub fn mc2(&self) -> f64 {
        self.m0 * self.c * self.c
    }

    pub fn with_tau0_scale(mut self, scale: f64) -> Self {
        self.tau0_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.m0, self.e, self.c, self.hbar, self.eps0, self.tau0_scale];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Config("physical constants must be finite and positive".into()))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let constants: PhysicalConstants = toml::from_str(text)?;
        constants.validate()?;
        Ok(constants)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau0_codata_range() {
        let k = PhysicalConstants::codata();
        let tau0 = k.tau0();
        assert!(tau0 > 6.2e-24 && tau0 < 6.3e-24, "tau0 = {tau0:e}");
        // hand-computed from CODATA 2018: 6.266 424 77e-24 s
        assert!((tau0 / 6.266_424_77e-24 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lambda_codata() {
        let k = PhysicalConstants::codata();
        // sqrt(1.054571817e-34 / 9.1093837015e-31) = 1.075 953 70e-2
        assert!((k.lambda() / 1.075_953_70e-2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn partial_override_keeps_defaults() {
        let k = PhysicalConstants::from_toml_str("c = 3.0e8\n").unwrap();
        assert_eq!(k.c, 3.0e8);
        assert_eq!(k.m0, ELECTRON_MASS);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PhysicalConstants::from_toml_str("mass = 1.0\n").is_err());
    }

    #[test]
    fn negative_value_rejected() {
        assert!(PhysicalConstants::from_toml_str("e = -1.0\n").is_err());
    }
}
