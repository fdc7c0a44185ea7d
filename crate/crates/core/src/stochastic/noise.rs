//! Per-path random streams and (−g)-Wiener increments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::minkowski::FourVector;

/// Stream offset separating backward-process paths from forward ones.
pub const BACKWARD_STREAM: u64 = 1 << 62;

/// Independent generator for path `stream` under `master`; the sequence does
/// not depend on which thread draws it.
pub fn path_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Four independent N(0, dτ) components (Euclidean covariance δ^{μν}dτ).
pub fn wiener_increment<R: Rng + ?Sized>(rng: &mut R, dtau: f64) -> Result<FourVector> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(Error::Domain(format!("dtau must be positive, got {dtau}")));
    }
    let s = dtau.sqrt();
    let mut w = [0.0; 4];
    for wi in &mut w {
        let z: f64 = rng.sample(StandardNormal);
        *wi = s * z;
    }
    Ok(FourVector(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_definition() {
        let n = 1_000_000;
        let dtau = 0.25;
        let mut rng = path_rng(7, 0);
        let mut sum = [0.0; 4];
        let mut cov = [[0.0; 4]; 4];
        for _ in 0..n {
            let w = wiener_increment(&mut rng, dtau).unwrap();
            for i in 0..4 {
                sum[i] += w[i];
                for j in 0..4 {
                    cov[i][j] += w[i] * w[j];
                }
            }
        }
        let nf = n as f64;
        let sigma = dtau.sqrt();
        for i in 0..4 {
            assert!((sum[i] / nf).abs() <= 4.0 * sigma / nf.sqrt());
            for j in 0..4 {
                let c = cov[i][j] / nf / dtau;
                if i == j {
                    assert!((c - 1.0).abs() <= 0.01, "var {c}");
                    assert!((c - 1.0).abs() <= 5.0 / nf.sqrt());
                } else {
                    assert!(c.abs() <= 5.0 / nf.sqrt(), "cov {c}");
                }
            }
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let draw = |stream| {
            let mut rng = path_rng(42, stream);
            (0..100).map(|_| wiener_increment(&mut rng, 1e-3).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
        // drawing on another thread changes nothing
        let other = std::thread::spawn(move || draw(3)).join().unwrap();
        assert_eq!(other, draw(3));
    }

    #[test]
    fn rejects_bad_step() {
        let mut rng = path_rng(1, 0);
        assert!(wiener_increment(&mut rng, 0.0).is_err());
        assert!(wiener_increment(&mut rng, f64::NAN).is_err());
    }
}
