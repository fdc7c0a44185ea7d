//! Deterministic adaptive Gauss-Kronrod quadrature and uniform-grid rules.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_367_580,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 2000 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// One 21-point Kronrod panel with the embedded 10-point Gauss error estimate.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection on [a, b], always refining the panel with the largest
/// error estimate. The result depends only on the inputs.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, abs_error: 0.0, evals: 0 });
    }
    let (value, err) = gk21(&f, a, b);
    let mut segs = vec![Segment { a, b, value, err }];
    let mut evals = 21;
    loop {
        let (total, total_err) = sums(&segs);
        if !total.is_finite() {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(Integral { value: total, abs_error: total_err, evals });
        }
        if segs.len() >= tol.max_intervals {
            return Err(Error::Quadrature { err: total_err, evals });
        }
        let worst = segs
            .iter()
            .enumerate()
            .fold(0, |best, (i, s)| if s.err > segs[best].err { i } else { best });
        let s = segs[worst];
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // cannot split further; accept what we have
            return Ok(Integral { value: total, abs_error: total_err, evals });
        }
        let (v1, e1) = gk21(&f, s.a, mid);
        let (v2, e2) = gk21(&f, mid, s.b);
        evals += 42;
        segs[worst] = Segment { a: s.a, b: mid, value: v1, err: e1 };
        segs.push(Segment { a: mid, b: s.b, value: v2, err: e2 });
    }
}

fn sums(segs: &[Segment]) -> (f64, f64) {
    segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err))
}

/// Composite Simpson rule over uniformly spaced samples. An even number of
/// panels is handled exactly; an odd number closes with a 3/8 panel.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let panels = n - 1;
            let (even_end, tail) = if panels.is_multiple_of(2) { (n - 1, 0.0) } else {
                let k = n - 4;
                let t = 3.0 * h / 8.0
                    * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
                (k, t)
            };
            let mut s = values[0] + values[even_end];
            for (i, v) in values.iter().enumerate().take(even_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0 + tail
        }
    }
}

/// Trapezoid rule on a non-uniform grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::new(0.0, 1e-12)).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((r.value / exact - 1.0).abs() < 1e-11);
        assert!(r.abs_error <= 1e-12 * r.value.abs());
    }

    #[test]
    fn error_estimate_bounds_true_error() {
        let exact = 1.0 - (-10.0f64).exp();
        for rel in [1e-4, 1e-8, 1e-12] {
            let r = integrate(|x| (-x).exp(), 0.0, 10.0, Tolerance::new(0.0, rel)).unwrap();
            assert!((r.value - exact).abs() <= r.abs_error.max(4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn interval_cap_reported() {
        let tol = Tolerance { abs: 0.0, rel: 1e-15, max_intervals: 3 };
        assert!(matches!(
            integrate(|x| x.abs().sqrt(), -1.0, 1.0, tol),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn simpson_cubic_exact() {
        for n in [3usize, 4, 5, 8, 11] {
            let h = 2.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&v, h) - 4.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn trapezoid_linear_exact() {
        let x = [0.0, 0.1, 0.5, 2.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((trapezoid(&x, &y) - 8.0).abs() < 1e-14);
    }
}
