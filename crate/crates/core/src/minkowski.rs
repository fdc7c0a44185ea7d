//! Four-vectors and field tensors under the metric diag(+1, -1, -1, -1).
//!
//! Index 0 is the time component. A field tensor is stored as the pair
//! (E/c, B) and expanded with
//!
//! ```text
//! F^{0i} = -E_i / c,    F^{ij} = -ε_{ijk} B_k
//! ```
//!
//! so that `-e F^{μν} v_ν` is the Lorentz force on an electron of charge `-e`.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `v.v = c²` accepted by force evaluations.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Roundoff floor of v·v for a stored four-velocity, in units of (v⁰)².
/// At large γ the cancellation in (v⁰)² − |v|² alone exceeds the relative
/// tolerance above, so the accepted band never drops below this.
const ROUNDOFF_FLOOR: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    /// Like `new`, but refuses NaN and infinite components.
    pub fn try_new(t: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let v = FourVector([t, x, y, z]);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("four-vector"))
        }
    }

    pub fn from_parts(t: f64, spatial: [f64; 3]) -> Self {
        FourVector([t, spatial[0], spatial[1], spatial[2]])
    }

    /// Four-velocity of a particle with Lorentz factor `gamma` moving along
    /// the unit direction `dir`.
    pub fn velocity_from_gamma(gamma: f64, dir: [f64; 3], c: f64) -> Self {
        let u = c * (gamma * gamma - 1.0).max(0.0).sqrt();
        FourVector([gamma * c, u * dir[0], u * dir[1], u * dir[2]])
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn spatial_norm(&self) -> f64 {
        norm3(self.spatial())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Components with the index lowered, `v_μ = g_{μν} v^ν`.
    pub fn lower(&self) -> [f64; 4] {
        [self.0[0], -self.0[1], -self.0[2], -self.0[3]]
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        dot(*self, *other)
    }

    pub fn norm2(&self) -> f64 {
        dot(*self, *self)
    }

    /// Sum of squared components (Euclidean, metric-free).
    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Lorentz factor of a four-velocity.
    pub fn gamma(&self, c: f64) -> f64 {
        self.0[0] / c
    }
}

/// Minkowski product a⁰b⁰ − a¹b¹ − a²b² − a³b³.
pub fn dot(a: FourVector, b: FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl AddAssign for FourVector {
    fn add_assign(&mut self, o: FourVector) {
        for i in 0..4 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Antisymmetric field strength F^{μν}, stored as (E/c, B) in tesla.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldTensor {
    e_over_c: [f64; 3],
    b: [f64; 3],
}

impl FieldTensor {
    pub const ZERO: FieldTensor = FieldTensor { e_over_c: [0.0; 3], b: [0.0; 3] };

    /// Builds the tensor from lab-frame fields E (V/m) and B (T).
    pub fn from_eb(e: [f64; 3], b: [f64; 3], c: f64) -> Self {
        FieldTensor { e_over_c: scale3(e, 1.0 / c), b }
    }

    pub fn from_e_over_c_b(e_over_c: [f64; 3], b: [f64; 3]) -> Self {
        FieldTensor { e_over_c, b }
    }

    pub fn electric(&self, c: f64) -> [f64; 3] {
        scale3(self.e_over_c, c)
    }

    pub fn e_over_c(&self) -> [f64; 3] {
        self.e_over_c
    }

    pub fn magnetic(&self) -> [f64; 3] {
        self.b
    }

    /// F^{μν}.
    pub fn component(&self, mu: usize, nu: usize) -> f64 {
        self.matrix()[mu][nu]
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let [ex, ey, ez] = self.e_over_c;
        let [bx, by, bz] = self.b;
        [
            [0.0, -ex, -ey, -ez],
            [ex, 0.0, -bz, by],
            [ey, bz, 0.0, -bx],
            [ez, -by, bx, 0.0],
        ]
    }

    /// Inverse of `matrix`; only the upper triangle is read.
    pub fn from_matrix(m: &[[f64; 4]; 4]) -> Self {
        FieldTensor {
            e_over_c: [-m[0][1], -m[0][2], -m[0][3]],
            b: [-m[2][3], m[1][3], -m[1][2]],
        }
    }

    /// (F v)^μ = F^{μν} v_ν.
    pub fn contract(&self, v: FourVector) -> FourVector {
        let m = self.matrix();
        let vl = v.lower();
        FourVector(std::array::from_fn(|mu| {
            m[mu][0] * vl[0] + m[mu][1] * vl[1] + m[mu][2] * vl[2] + m[mu][3] * vl[3]
        }))
    }

    /// Antisymmetrized outer product a⊗b − b⊗a with both indices up.
    pub fn wedge(a: FourVector, b: FourVector) -> Self {
        let m: [[f64; 4]; 4] =
            std::array::from_fn(|mu| std::array::from_fn(|nu| a.0[mu] * b.0[nu] - a.0[nu] * b.0[mu]));
        Self::from_matrix(&m)
    }

    /// F_{μν}F^{μν} = 2(B² − E²/c²).
    pub fn invariant_scalar(&self) -> f64 {
        2.0 * (dot3(self.b, self.b) - dot3(self.e_over_c, self.e_over_c))
    }

    /// (E/c)·B, proportional to the pseudoscalar invariant.
    pub fn invariant_pseudoscalar(&self) -> f64 {
        dot3(self.e_over_c, self.b)
    }

    pub fn max_abs(&self) -> f64 {
        self.e_over_c.iter().chain(self.b.iter()).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.e_over_c.iter().chain(self.b.iter()).all(|v| v.is_finite())
    }
}

impl Add for FieldTensor {
    type Output = FieldTensor;
    fn add(self, o: FieldTensor) -> FieldTensor {
        FieldTensor {
            e_over_c: std::array::from_fn(|i| self.e_over_c[i] + o.e_over_c[i]),
            b: std::array::from_fn(|i| self.b[i] + o.b[i]),
        }
    }
}

impl Sub for FieldTensor {
    type Output = FieldTensor;
    fn sub(self, o: FieldTensor) -> FieldTensor {
        self + o * -1.0
    }
}

impl Mul<f64> for FieldTensor {
    type Output = FieldTensor;
    fn mul(self, s: f64) -> FieldTensor {
        FieldTensor { e_over_c: scale3(self.e_over_c, s), b: scale3(self.b, s) }
    }
}

/// ∂_α F^{μν}; entry α is itself an antisymmetric tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldGradient(pub [FieldTensor; 4]);

impl FieldGradient {
    pub const ZERO: FieldGradient = FieldGradient([FieldTensor::ZERO; 4]);

    pub fn component(&self, alpha: usize, mu: usize, nu: usize) -> f64 {
        self.0[alpha].component(mu, nu)
    }

    /// v^α ∂_α F^{μν}.
    pub fn along(&self, v: FourVector) -> FieldTensor {
        (0..4).fold(FieldTensor::ZERO, |acc, a| acc + self.0[a] * v.0[a])
    }

    /// ∂_μ F^{μν}, zero for source-free fields.
    pub fn divergence(&self) -> [f64; 4] {
        std::array::from_fn(|nu| (0..4).map(|mu| self.component(mu, mu, nu)).sum())
    }
}

/// Lorentz force f^μ = −e F^{μν} v_ν on an electron (charge −e, `e > 0`).
///
/// Rejects four-velocities whose square deviates from c² by more than
/// `NORMALIZATION_TOLERANCE`·c² (or the roundoff floor at large γ).
pub fn lorentz_force(field: &FieldTensor, v: FourVector, e: f64, c: f64) -> Result<FourVector> {
    check_normalized(v, c)?;
    Ok(field.contract(v) * -e)
}

pub fn check_normalized(v: FourVector, c: f64) -> Result<()> {
    let c2 = c * c;
    let d = v.norm2();
    let tol = (NORMALIZATION_TOLERANCE * c2).max(ROUNDOFF_FLOOR * v.0[0] * v.0[0]);
    if !v.is_finite() || (d - c2).abs() > tol {
        return Err(Error::NotNormalized { dot: d, c2 });
    }
    Ok(())
}

/// Rescales a future-directed timelike vector onto the mass shell v·v = c²,
/// then recomputes v⁰ from the spatial part so the constraint holds to roundoff.
pub fn normalize_velocity(v: FourVector, c: f64) -> Result<FourVector> {
    let d = v.norm2();
    if !v.is_finite() || v.0[0] <= 0.0 || d <= 0.0 {
        return Err(Error::InvalidVelocity);
    }
    // inside the roundoff band the spatial part is kept as is, which makes
    // the map idempotent
    let s = if (d - c * c).abs() <= ROUNDOFF_FLOOR * v.0[0] * v.0[0] { 1.0 } else { c / d.sqrt() };
    let sp = scale3(v.spatial(), s);
    let t = (c * c + dot3(sp, sp)).sqrt();
    Ok(FourVector::from_parts(t, sp))
}

/// Pure boost taking the rest frame to the frame moving with four-velocity `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    gamma: f64,
    beta: [f64; 3],
}

impl Boost {
    pub fn from_velocity(u: FourVector, c: f64) -> Self {
        let gamma = u.0[0] / c;
        let beta = scale3(u.spatial(), 1.0 / (gamma * c));
        Boost { gamma, beta }
    }

    pub fn identity() -> Self {
        Boost { gamma: 1.0, beta: [0.0; 3] }
    }

    pub fn inverse(&self) -> Self {
        Boost { gamma: self.gamma, beta: scale3(self.beta, -1.0) }
    }

    /// Maps rest-frame components to lab components.
    pub fn apply(&self, v: FourVector) -> FourVector {
        let b2 = dot3(self.beta, self.beta);
        if b2 == 0.0 {
            return v;
        }
        let g = self.gamma;
        let sp = v.spatial();
        let bdotx = dot3(self.beta, sp);
        let t = g * (v.0[0] + bdotx);
        let k = (g - 1.0) * bdotx / b2 + g * v.0[0];
        FourVector::new(
            t,
            sp[0] + k * self.beta[0],
            sp[1] + k * self.beta[1],
            sp[2] + k * self.beta[2],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: f64 = crate::constants::SPEED_OF_LIGHT;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(FourVector::new(1.0, 0.0, 0.0, 0.0), FourVector::new(1.0, 0.0, 0.0, 0.0)), 1.0);
        assert_eq!(dot(FourVector::new(1.0, 1.0, 0.0, 0.0), FourVector::new(1.0, 1.0, 0.0, 0.0)), 0.0);
        assert_eq!(dot(FourVector::new(3.0, 1.0, 2.0, 2.0), FourVector::new(2.0, 1.0, 0.0, 1.0)), 3.0);
    }

    #[test]
    fn try_new_rejects_nan() {
        assert!(FourVector::try_new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(FourVector::try_new(1.0, f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_field_no_force() {
        let v = FourVector::new(C, 0.0, 0.0, 0.0);
        let f = lorentz_force(&FieldTensor::ZERO, v, 1.6e-19, C).unwrap();
        assert_eq!(f, FourVector::ZERO);
    }

    #[test]
    fn electric_field_pushes_electron_against_e() {
        let e = 1.602e-19;
        let e0 = 1.0e12;
        let f = FieldTensor::from_eb([e0, 0.0, 0.0], [0.0; 3], C);
        let force = lorentz_force(&f, FourVector::new(C, 0.0, 0.0, 0.0), e, C).unwrap();
        assert!((force[1] + e * e0).abs() < 1e-12 * e * e0);
        assert_eq!(force[0], 0.0);
        assert_eq!(force[2], 0.0);
    }

    #[test]
    fn magnetic_force_matches_three_vector_form() {
        // charge -e moving along +x through B along +z: F = -e v × B points along +y
        let e = 1.602e-19;
        let beta = 0.6;
        let gamma = 1.25;
        let v = FourVector::new(gamma * C, gamma * beta * C, 0.0, 0.0);
        let f = FieldTensor::from_eb([0.0; 3], [0.0, 0.0, 2.0], C);
        let force = lorentz_force(&f, v, e, C).unwrap();
        // f^i = gamma * (-e) (v × B)^i, (x̂ × ẑ) = -ŷ
        let expected = gamma * e * beta * C * 2.0;
        assert!((force[2] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn lorentz_rejects_unnormalized() {
        let v = FourVector::new(2.0 * C, 0.0, 0.0, 0.0);
        assert!(lorentz_force(&FieldTensor::ZERO, v, 1.0, C).is_err());
    }

    #[test]
    fn matrix_round_trip_and_antisymmetry() {
        let f = FieldTensor::from_e_over_c_b([1.0, -2.0, 3.0], [0.5, 0.25, -4.0]);
        let m = f.matrix();
        for mu in 0..4 {
            for nu in 0..4 {
                assert_eq!(m[mu][nu], -m[nu][mu]);
            }
        }
        assert_eq!(FieldTensor::from_matrix(&m), f);
    }

    #[test]
    fn normalize_examples() {
        let rest = FourVector::new(C, 0.0, 0.0, 0.0);
        assert_eq!(normalize_velocity(rest, C).unwrap(), rest);
        assert_eq!(normalize_velocity(rest * 2.0, C).unwrap(), rest);
        let g = 1.25 * (1.0 + 3e-7);
        let v = normalize_velocity(FourVector::new(g * C, g * 0.6 * C, 0.0, 0.0), C).unwrap();
        assert!((v[0] / C - 1.25).abs() < 1e-14);
        assert!((v[1] / C - 0.75).abs() < 1e-14);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(normalize_velocity(FourVector::new(1.0, 2.0, 0.0, 0.0), C).is_err());
        assert!(normalize_velocity(FourVector::new(-C, 0.0, 0.0, 0.0), C).is_err());
    }

    #[test]
    fn boost_maps_rest_to_velocity() {
        let u = FourVector::velocity_from_gamma(3.0, [0.0, 0.6, 0.8], C);
        let b = Boost::from_velocity(u, C);
        let got = b.apply(FourVector::new(C, 0.0, 0.0, 0.0));
        for i in 0..4 {
            assert!((got[i] - u[i]).abs() < 1e-12 * C);
        }
        let back = b.inverse().apply(got);
        assert!((back[0] - C).abs() < 1e-12 * C && back.spatial_norm() < 1e-12 * C);
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e3..1e3_f64
    }

    fn four() -> impl Strategy<Value = FourVector> {
        (finite(), finite(), finite(), finite()).prop_map(|(a, b, c, d)| FourVector::new(a, b, c, d))
    }

    fn velocity() -> impl Strategy<Value = FourVector> {
        (-0.99..0.99_f64, -0.99..0.99_f64, -0.99..0.99_f64, 1.0..1e4_f64).prop_map(|(x, y, z, g)| {
            let n = norm3([x, y, z]).max(1e-12);
            FourVector::velocity_from_gamma(g, [x / n, y / n, z / n], C)
        })
    }

    fn tensor() -> impl Strategy<Value = FieldTensor> {
        proptest::array::uniform6(-1e3..1e3_f64)
            .prop_map(|a| FieldTensor::from_e_over_c_b([a[0], a[1], a[2]], [a[3], a[4], a[5]]))
    }

    proptest! {
        #[test]
        fn dot_symmetric_bilinear(a in four(), b in four(), w in four(), s in -10.0..10.0_f64) {
            prop_assert_eq!(dot(a, b), dot(b, a));
            let lhs = dot(a * s + w, b);
            let rhs = s * dot(a, b) + dot(w, b);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs()) + (s * 1e6).abs()));
        }

        #[test]
        fn force_orthogonal_to_velocity(f in tensor(), v in velocity()) {
            let e = 1.602e-19;
            let force = lorentz_force(&f, v, e, C).unwrap();
            let scale = force.euclidean_norm() * v.euclidean_norm();
            prop_assert!(dot(force, v).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn normalize_idempotent(v in velocity(), s in 0.5..2.0_f64) {
            let once = normalize_velocity(v * s, C).unwrap();
            let twice = normalize_velocity(once, C).unwrap();
            let g = once[0] / C;
            prop_assert!((once.norm2() / (C * C) - 1.0).abs() < 4.0 * f64::EPSILON * g * g);
            for i in 0..4 {
                prop_assert!((once[i] - twice[i]).abs() <= 1e-12 * once[0]);
            }
        }

        #[test]
        fn wedge_antisymmetric(a in four(), b in four()) {
            let m = FieldTensor::wedge(a, b).matrix();
            for mu in 0..4 {
                for nu in 0..4 {
                    let expected = a.0[mu] * b.0[nu] - a.0[nu] * b.0[mu];
                    prop_assert!((m[mu][nu] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
                }
            }
        }
    }
}
