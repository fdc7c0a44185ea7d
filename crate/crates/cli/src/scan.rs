//! Quantum-correction factors over a grid of laser intensities and electron
//! energies, for a head-on collision at the peak of the field.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rr_core::fields::{
    a0_from_intensity_with, angular_frequency, peak_field_from_intensity, Envelope, LaserOperatingPoint, PlaneWave,
    Polarization,
};
use rr_core::minkowski::FourVector;
use rr_core::quantum::{chi, q_factors};
use rr_core::{Error, PhysicalConstants};

use crate::config::ScanSpec;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub intensity_w_cm2: f64,
    pub kinetic_energy_ev: f64,
    pub gamma: f64,
    pub a0: f64,
    pub chi: f64,
    pub q: f64,
    pub q_scalar: f64,
}

/// χ of an electron meeting the wave head-on at a field maximum.
pub fn head_on_chi(op: &LaserOperatingPoint, polarization: Polarization, k: &PhysicalConstants) -> Result<f64> {
    op.validate()?;
    if op.intensity == 0.0 {
        return Ok(0.0);
    }
    let omega = angular_frequency(op.wavelength, k.c)?;
    let e0 = peak_field_from_intensity(op.intensity, polarization, k);
    let wave = PlaneWave::new(e0, omega, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], polarization, Envelope::None, k.c)?;
    let v = FourVector::velocity_from_gamma(op.gamma(k), [0.0, 0.0, -1.0], k.c);
    Ok(chi(&wave.evaluate(FourVector::ZERO), v, k)?)
}

pub fn scan_cell(op: &LaserOperatingPoint, polarization: Polarization, k: &PhysicalConstants) -> Result<ScanRow> {
    let x = head_on_chi(op, polarization, k)?;
    let q = q_factors(x)?;
    Ok(ScanRow {
        intensity_w_cm2: op.intensity,
        kinetic_energy_ev: op.kinetic_energy,
        gamma: op.gamma(k),
        a0: a0_from_intensity_with(op, polarization, k)?,
        chi: x,
        q: q.q,
        q_scalar: q.q_scalar,
    })
}

/// Rows ordered intensity-major. Cells are computed in parallel; the order
/// of the result does not depend on the thread count.
pub fn qfactor_scan(spec: &ScanSpec, k: &PhysicalConstants) -> Result<Vec<ScanRow>> {
    let intensities = spec.intensities.values()?;
    let energies = spec.energies.values()?;
    let cells = intensities.len() * energies.len();
    if cells > spec.max_cells {
        return Err(Error::GridTooLarge { cells, cap: spec.max_cells }.into());
    }
    let ops: Vec<LaserOperatingPoint> = intensities
        .iter()
        .flat_map(|&intensity| {
            energies.iter().map(move |&kinetic_energy| LaserOperatingPoint {
                intensity,
                wavelength: spec.wavelength,
                kinetic_energy,
            })
        })
        .collect();
    ops.par_iter().map(|op| scan_cell(op, spec.polarization, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;

    fn spec(i: Vec<f64>, e: Vec<f64>) -> ScanSpec {
        ScanSpec {
            intensities: Grid::List(i),
            energies: Grid::List(e),
            wavelength: 0.8e-6,
            polarization: Polarization::Circular,
            max_cells: 1000,
        }
    }

    #[test]
    fn grid_is_intensity_major_and_monotone() {
        let k = PhysicalConstants::codata();
        let i = vec![1e20, 1e21, 1e22];
        let e = vec![1e8, 1e9, 1e10];
        let rows = qfactor_scan(&spec(i.clone(), e.clone()), &k).unwrap();
        assert_eq!(rows.len(), 9);
        for (n, r) in rows.iter().enumerate() {
            assert_eq!(r.intensity_w_cm2, i[n / 3]);
            assert_eq!(r.kinetic_energy_ev, e[n % 3]);
            assert!(r.q_scalar <= r.q && r.q <= 1.0);
        }
        for a in 0..3 {
            for b in 0..2 {
                // q falls along both axes
                assert!(rows[3 * a + b + 1].q < rows[3 * a + b].q);
                assert!(rows[3 * (b + 1) + a].q < rows[3 * b + a].q);
            }
        }
    }

    #[test]
    fn zero_intensity_is_classical() {
        let k = PhysicalConstants::codata();
        let rows = qfactor_scan(&spec(vec![0.0, 1e10], vec![1e9]), &k).unwrap();
        assert_eq!(rows[0].q, 1.0);
        assert!((rows[1].q - 1.0).abs() < 1e-3);
    }

    #[test]
    fn oversized_grid_is_refused() {
        let k = PhysicalConstants::codata();
        let mut s = spec(vec![1e20; 40], vec![1e9; 40]);
        s.max_cells = 1000;
        assert!(matches!(qfactor_scan(&s, &k), Err(crate::HarnessError::Core(Error::GridTooLarge { .. }))));
    }
}
