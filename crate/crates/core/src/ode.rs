//! Explicit Runge-Kutta steppers over fixed-size state arrays.

use crate::error::{Error, Result};

pub type State<const N: usize> = [f64; N];

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Classical fourth-order Runge-Kutta step.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &State<N>, h: f64) -> Result<State<N>>
where
    F: Fn(f64, &State<N>) -> Result<State<N>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince step: fifth-order solution and the embedded error vector.
pub fn dopri_step<const N: usize, F>(f: &F, t: f64, y: &State<N>, h: f64) -> Result<(State<N>, State<N>)>
where
    F: Fn(f64, &State<N>) -> Result<State<N>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]))?;
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5)?;
    let err: State<N> = std::array::from_fn(|i| {
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    Ok((y5, err))
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
}

/// Scaled RMS error norm; `scale` gives the per-component magnitude used with
/// the relative tolerance (so mixed-unit states can share one tolerance).
pub fn error_norm<const N: usize>(err: &State<N>, y: &State<N>, y_new: &State<N>, scale: &State<N>, c: &AdaptiveControl) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = c.atol * scale[i] + c.rtol * y[i].abs().max(y_new[i].abs()).max(scale[i]);
            let r = err[i] / sc;
            r * r
        })
        .sum();
    (s / N as f64).sqrt()
}

/// Advances from `t` to exactly `t_end` with adaptive Dormand-Prince steps.
/// `h` is the initial trial step and is updated to the last accepted size.
pub fn dopri_advance<const N: usize, F>(
    f: &F,
    t: f64,
    y: &State<N>,
    t_end: f64,
    h: &mut f64,
    scale: &State<N>,
    control: &AdaptiveControl,
) -> Result<State<N>>
where
    F: Fn(f64, &State<N>) -> Result<State<N>>,
{
    let mut t = t;
    let mut y = *y;
    let mut guard = 0usize;
    while t < t_end {
        let step = h.min(t_end - t);
        let (y_new, err) = dopri_step(f, t, &y, step)?;
        let e = error_norm(&err, &y, &y_new, scale, control);
        let e = if e.is_finite() { e } else { f64::INFINITY };
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if e <= 1.0 {
            let last = step >= t_end - t;
            let clipped = step < *h;
            t = if last { t_end } else { t + step };
            y = y_new;
            if !clipped || factor < 1.0 {
                *h = step * factor;
            }
        } else {
            *h = step * factor;
            if *h < control.h_min {
                return Err(Error::StepUnderflow { tau: t });
            }
        }
        guard += 1;
        if guard > 10_000_000 {
            return Err(Error::MaxSteps(guard));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &State<2>) -> Result<State<2>> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn rk4_fourth_order() {
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [0.0, 1.0];
            for i in 0..n {
                y = rk4_step(&decay, i as f64 * h, &y, h).unwrap();
            }
            (y[0] - 1f64.sin()).abs()
        };
        let ratio = run(20) / run(40);
        assert!((ratio.log2() - 4.0).abs() < 0.1, "order {}", ratio.log2());
    }

    #[test]
    fn dopri_reaches_tolerance() {
        let control = AdaptiveControl { rtol: 1e-10, atol: 1e-12, h_min: 1e-12 };
        let mut h = 0.1;
        let y = dopri_advance(&decay, 0.0, &[0.0, 1.0], 10.0, &mut h, &[1.0, 1.0], &control).unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        assert!((y[1] - 10f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn dopri_underflow_reported() {
        let blow = |_t: f64, y: &State<1>| -> Result<State<1>> { Ok([y[0] * y[0]]) };
        let control = AdaptiveControl { rtol: 1e-10, atol: 1e-12, h_min: 1e-9 };
        let mut h = 0.1;
        let r = dopri_advance(&blow, 0.0, &[1.0], 2.0, &mut h, &[1.0], &control);
        assert!(r.is_err());
    }
}
