// q and q_scalar from an independent SciPy evaluation of the integral in
// the original variable r ∈ [0, 1/χ] (kv, and nested quad for the K_{5/3}
// tail), printed to 12 digits.

use rr_core::quantum::{q_factors, spectrum, QFactorResult};
use rr_core::PhysicalConstants;

const TABLE: &[(f64, f64, f64)] = &[
    (1e-3, 0.996_051_909_317, 0.996_049_279_287),
    (0.01, 0.962_308_661_002, 0.962_075_301_548),
    (0.1, 0.734_553_298_363, 0.725_044_199_546),
    (1.0, 0.247_352_574_010, 0.213_052_497_926),
    (10.0, 0.029_407_647_763, 0.019_908_415_332),
    (50.0, 0.004_429_996_069, 0.002_698_787_205),
];

#[test]
fn matches_reference_table() {
    for &(chi, q, qs) in TABLE {
        let r: QFactorResult = q_factors(chi).unwrap();
        assert!((r.q - q).abs() < 1e-9, "q({chi}) = {} want {q}", r.q);
        assert!((r.q_scalar - qs).abs() < 1e-9, "q_scalar({chi}) = {} want {qs}", r.q_scalar);
        assert!(r.abs_error_estimate <= 1e-6);
    }
}

#[test]
fn scalar_never_exceeds_full() {
    for chi in [0.01, 0.1, 1.0, 10.0] {
        let r = q_factors(chi).unwrap();
        assert!(0.0 < r.q_scalar && r.q_scalar <= r.q && r.q <= 1.0);
    }
}

#[test]
fn scalar_vanishes_at_large_chi() {
    let mut last = 1.0;
    for chi in [1e2, 1e3, 1e4, 1e5] {
        let qs = q_factors(chi).unwrap().q_scalar;
        assert!(qs < last);
        last = qs;
    }
    assert!(last < 1e-3);
}

#[test]
fn error_estimate_bounds_true_error() {
    for &(chi, q, _) in TABLE {
        let r = q_factors(chi).unwrap();
        assert!((r.q - q).abs() <= r.abs_error_estimate + 1e-12);
    }
}

#[test]
fn spectrum_closure() {
    let k = PhysicalConstants::codata();
    for chi in [0.05, 0.5, 2.0] {
        let s = spectrum(chi, 2000.0, 4000, &k).unwrap();
        let qs = q_factors(chi).unwrap().q_scalar;
        let want = qs * s.classical_power;
        let got = s.total_power();
        assert!((got / want - 1.0).abs() < 1e-4, "chi {chi}: {got:e} vs {want:e}");
    }
}

#[test]
fn spectrum_small_chi_is_synchrotron_shape() {
    let k = PhysicalConstants::codata();
    let chi = 1e-5;
    let s = spectrum(chi, 1000.0, 3000, &k).unwrap();
    let pts: Vec<_> = s.points.iter().filter(|p| p.r >= 0.01 && p.r <= 5.0).collect();
    let shape = |r: f64| r * rr_core::bessel::bessel_k53_tail(r).unwrap();
    let norm = pts[0].rate / shape(pts[0].r);
    for p in pts {
        let rel = (p.rate / (norm * shape(p.r)) - 1.0).abs();
        assert!(rel < 1e-3, "r = {}: {rel:e}", p.r);
    }
}

#[test]
fn doubling_chi_hardens_spectrum() {
    let k = PhysicalConstants::codata();
    let a = spectrum(0.3, 1000.0, 2000, &k).unwrap();
    let b = spectrum(0.6, 1000.0, 2000, &k).unwrap();
    let pa = a.peak().unwrap();
    let pb = b.peak().unwrap();
    assert!(pb.photon_energy > pa.photon_energy);
    assert!(pb.r < pa.r);
}
