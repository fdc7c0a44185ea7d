//! Kernel density estimates on the spatial marginal of an ensemble and the
//! checks built on them: the Fokker-Planck residual and the forward/backward
//! drift duality.
//!
//! Both checks compare kernel-smoothed quantities whose expectations agree
//! exactly for any bandwidth (the drift flux is smoothed with the same kernel
//! as the density), so the bandwidth trades resolution against noise only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{Direction, EnsembleState};
use super::wavepacket::DriftSource;
use crate::error::{Error, Result};
use crate::minkowski::FourVector;

/// Smallest ensemble for which density-based diagnostics are computed.
pub const MIN_KDE_PATHS: usize = 10_000;

const CHUNK: usize = 4096;

/// Product Gaussian kernel on the three spatial coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kde3 {
    pub bandwidth: [f64; 3],
}

/// Silverman's rule per component, h_i = scale·σ_i·(4/(5N))^{1/7}.
pub fn silverman_bandwidth(std: [f64; 3], n: usize, scale: f64) -> [f64; 3] {
    let f = (4.0 / (5.0 * n as f64)).powf(1.0 / 7.0);
    std.map(|s| scale * s * f)
}

/// Per-axis spatial standard deviation of a point set.
pub fn spatial_std(points: &[FourVector]) -> [f64; 3] {
    let n = points.len() as f64;
    let m = chunked_sum(points, |p| {
        let s = p.spatial();
        [s[0], s[1], s[2]]
    })
    .map(|v| v / n);
    let v = chunked_sum(points, |p| {
        let s = p.spatial();
        [(s[0] - m[0]).powi(2), (s[1] - m[1]).powi(2), (s[2] - m[2]).powi(2)]
    });
    v.map(|x| (x / n).sqrt())
}

/// Deterministic parallel sum: fixed chunks, partial sums combined in order.
pub(crate) fn chunked_sum<T: Sync, const M: usize>(items: &[T], f: impl Fn(&T) -> [f64; M] + Sync) -> [f64; M] {
    let partial: Vec<[f64; M]> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = [0.0; M];
            for it in chunk {
                let v = f(it);
                for i in 0..M {
                    acc[i] += v[i];
                }
            }
            acc
        })
        .collect();
    let mut out = [0.0; M];
    for p in partial {
        for i in 0..M {
            out[i] += p[i];
        }
    }
    out
}

impl Kde3 {
    pub fn new(bandwidth: [f64; 3]) -> Result<Self> {
        if bandwidth.iter().all(|h| h.is_finite() && *h > 0.0) {
            Ok(Kde3 { bandwidth })
        } else {
            Err(Error::Domain(format!("kernel bandwidth {bandwidth:?}")))
        }
    }

    pub fn silverman(points: &[FourVector], scale: f64) -> Result<Self> {
        Kde3::new(silverman_bandwidth(spatial_std(points), points.len(), scale))
    }

    /// K(d), ∇K(d) and ∇²K(d) for a spatial separation d = y − x.
    pub fn kernel(&self, d: [f64; 3]) -> (f64, [f64; 3], f64) {
        let h = self.bandwidth;
        let mut arg = 0.0;
        let mut norm = 1.0;
        for i in 0..3 {
            arg += d[i] * d[i] / (h[i] * h[i]);
            norm *= (2.0 * std::f64::consts::PI).sqrt() * h[i];
        }
        let k = (-0.5 * arg).exp() / norm;
        let grad = std::array::from_fn(|i| -d[i] / (h[i] * h[i]) * k);
        let lap = (0..3).map(|i| d[i] * d[i] / h[i].powi(4) - 1.0 / (h[i] * h[i])).sum::<f64>() * k;
        (k, grad, lap)
    }

    pub fn density(&self, points: &[FourVector], y: [f64; 3]) -> f64 {
        let s = chunked_sum(points, |p| [self.kernel(sub3(y, p.spatial())).0]);
        s[0] / points.len() as f64
    }

    /// Kernel-weighted mean of `f` over the points, weights K(y − x_j).
    pub fn weighted_mean(&self, points: &[FourVector], values: &[f64], y: [f64; 3]) -> f64 {
        let idx: Vec<usize> = (0..points.len()).collect();
        let s = chunked_sum(&idx, |&j| {
            let w = self.kernel(sub3(y, points[j].spatial())).0;
            [w * values[j], w]
        });
        s[0] / s[1]
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FpOptions {
    /// Multiplier on Silverman's bandwidth.
    pub bandwidth_scale: f64,
    /// Probes span mean ± `probe_span`·σ per axis.
    pub probe_span: f64,
    pub probes_per_axis: usize,
    /// Negative control: apply the diffusion term with the wrong sign.
    pub flip_diffusion: bool,
}

impl Default for FpOptions {
    fn default() -> Self {
        FpOptions { bandwidth_scale: 5.0, probe_span: 1.5, probes_per_axis: 5, flip_diffusion: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpReport {
    pub tau: f64,
    pub probes: usize,
    pub bandwidth: [f64; 3],
    /// RMS over probes of each term and of their sum.
    pub time_derivative: f64,
    pub flux: f64,
    pub diffusion: f64,
    pub residual: f64,
    /// residual / time derivative.
    pub relative: f64,
    /// residual / largest term; meaningful for stationary ensembles.
    pub relative_to_max_term: f64,
}

fn probes(mean: [f64; 3], std: [f64; 3], opts: &FpOptions) -> Vec<[f64; 3]> {
    let m = opts.probes_per_axis.max(1);
    let offs: Vec<f64> = (0..m)
        .map(|i| if m == 1 { 0.0 } else { -opts.probe_span + 2.0 * opts.probe_span * i as f64 / (m - 1) as f64 })
        .collect();
    let mut out = Vec::with_capacity(m * m * m);
    for &a in &offs {
        for &b in &offs {
            for &c in &offs {
                out.push([mean[0] + a * std[0], mean[1] + b * std[1], mean[2] + c * std[2]]);
            }
        }
    }
    out
}

/// Residual of ∂_τp + ∇·(𝒱_± p) ∓ (λ²/2)∇²p on the spatial marginal at
/// slice `slice`, with ∂_τ taken between slices `slice ± lag`.
pub fn fokker_planck_residual(
    state: &EnsembleState,
    model: &dyn DriftSource,
    slice: usize,
    lag: usize,
    opts: &FpOptions,
) -> Result<FpReport> {
    if lag == 0 || slice < lag {
        return Err(Error::TooFewSamples { need: 3, got: 1 });
    }
    let get = |i: usize| {
        state.snapshots.get(&i).ok_or_else(|| Error::Config(format!("no stored positions at slice {i}")))
    };
    let (before, now, after) = (get(slice - lag)?, get(slice)?, get(slice + lag)?);
    if now.len() < MIN_KDE_PATHS {
        return Err(Error::TooFewSamples { need: MIN_KDE_PATHS, got: now.len() });
    }
    let std = spatial_std(now);
    let kde = Kde3::new(silverman_bandwidth(std, now.len(), opts.bandwidth_scale))?;
    let drifts: Vec<[f64; 3]> = now
        .par_iter()
        .map(|x| {
            let v = model.complex_velocity(*x)?;
            Ok(match state.direction {
                Direction::Forward => v.forward(),
                Direction::Backward => v.backward(),
            }
            .spatial())
        })
        .collect::<Result<_>>()?;
    let l2 = state.lambda * state.lambda;
    let sign = match (state.direction, opts.flip_diffusion) {
        (Direction::Forward, false) | (Direction::Backward, true) => -1.0,
        _ => 1.0,
    };
    let mean = state.slices[slice].mean.spatial();
    let span = 2.0 * lag as f64 * state.dtau;
    let idx: Vec<usize> = (0..now.len()).collect();
    let mut acc = [0.0; 4];
    let pts = probes(mean, std, opts);
    for y in &pts {
        let dt = (kde.density(after, *y) - kde.density(before, *y)) / span;
        let s = chunked_sum(&idx, |&j| {
            let (_, grad, lap) = kde.kernel(sub3(*y, now[j].spatial()));
            let b = drifts[j];
            [b[0] * grad[0] + b[1] * grad[1] + b[2] * grad[2], lap]
        });
        let n = now.len() as f64;
        let flux = s[0] / n;
        let diffusion = sign * 0.5 * l2 * s[1] / n;
        let r = dt + flux + diffusion;
        acc[0] += dt * dt;
        acc[1] += flux * flux;
        acc[2] += diffusion * diffusion;
        acc[3] += r * r;
    }
    let np = pts.len() as f64;
    let [t, f, d, r] = acc.map(|a| (a / np).sqrt());
    Ok(FpReport {
        tau: state.slices[slice].tau,
        probes: pts.len(),
        bandwidth: kde.bandwidth,
        time_derivative: t,
        flux: f,
        diffusion: d,
        residual: r,
        relative: r / t,
        relative_to_max_term: r / t.max(f).max(d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OsmoticReport {
    pub probes: usize,
    pub samples: usize,
    /// z-scores of smoothed (𝒱_+ − 𝒱_−)p against λ²∇p over probes and axes.
    pub rms_z: f64,
    pub max_z: f64,
    /// Largest relative deviation of the smoothed drift difference.
    pub max_relative: f64,
}

/// Checks 𝒱_+ − 𝒱_− = λ²∇ ln p on pooled forward and backward samples taken
/// at the same τ: kernel-smoothed D·p must equal λ²∇(p∗K) at every probe.
pub fn osmotic_check(
    forward: &[FourVector],
    backward: &[FourVector],
    model: &dyn DriftSource,
    lambda: f64,
    opts: &FpOptions,
) -> Result<OsmoticReport> {
    let pooled: Vec<FourVector> = forward.iter().chain(backward).copied().collect();
    if pooled.len() < MIN_KDE_PATHS {
        return Err(Error::TooFewSamples { need: MIN_KDE_PATHS, got: pooled.len() });
    }
    let std = spatial_std(&pooled);
    let n = pooled.len();
    let kde = Kde3::new(silverman_bandwidth(std, n, opts.bandwidth_scale))?;
    let diff: Vec<[f64; 3]> = pooled
        .par_iter()
        .map(|x| {
            let v = model.complex_velocity(*x)?;
            Ok((v.forward() - v.backward()).spatial())
        })
        .collect::<Result<_>>()?;
    let mean = chunked_sum(&pooled, |p| {
        let s = p.spatial();
        [s[0], s[1], s[2]]
    })
    .map(|v| v / n as f64);
    let l2 = lambda * lambda;
    let idx: Vec<usize> = (0..n).collect();
    let pts = probes(mean, std, opts);
    let (mut z2, mut zmax, mut rel) = (0.0, 0.0_f64, 0.0_f64);
    for y in &pts {
        // per sample: c = D K − λ²∇K, plus c² and the reference λ²∇K
        let s = chunked_sum(&idx, |&j| {
            let (k, grad, _) = kde.kernel(sub3(*y, pooled[j].spatial()));
            let d = diff[j];
            let c = [d[0] * k - l2 * grad[0], d[1] * k - l2 * grad[1], d[2] * k - l2 * grad[2]];
            [c[0], c[1], c[2], c[0] * c[0], c[1] * c[1], c[2] * c[2], l2 * grad[0], l2 * grad[1], l2 * grad[2]]
        });
        let nf = n as f64;
        let scale = (s[6].powi(2) + s[7].powi(2) + s[8].powi(2)).sqrt() / nf;
        for i in 0..3 {
            let m = s[i] / nf;
            let var = (s[3 + i] / nf - m * m).max(0.0);
            let se = (var / nf).sqrt();
            let z = if se > 0.0 { m / se } else { 0.0 };
            z2 += z * z;
            zmax = zmax.max(z.abs());
            if scale > 0.0 {
                rel = rel.max(m.abs() / scale);
            }
        }
    }
    Ok(OsmoticReport {
        probes: pts.len(),
        samples: n,
        rms_z: (z2 / (3 * pts.len()) as f64).sqrt(),
        max_z: zmax,
        max_relative: rel,
    })
}
