//! Planar TDOA bound with a known closed form, used to cross-check the FIM
//! and inversion machinery.
//!
//! Sensors sit around the source at angles φ_i and distances D_i; sensor i
//! receives with amplitude A_i = D_i^−γ. The information scale here is
//! 4W_eρ/c², a different convention from the satellite modules' ηρ.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spd_inverse;
use crate::rng::stream_rng;

/// Triple sums below this fraction of their scale count as collinear.
const COLLINEAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarSensors {
    pub angles: Vec<f64>,
    pub distances: Vec<f64>,
    pub gamma: f64,
    pub w_e: f64,
    pub rho: f64,
    pub c: f64,
}

impl PlanarSensors {
    fn validate(&self) -> Result<()> {
        if self.angles.len() != self.distances.len() {
            return Err(Error::InvalidParams("angles and distances differ in length".into()));
        }
        if self.distances.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
            return Err(Error::InvalidParams("distances must be positive".into()));
        }
        for (name, v) in [("w_e", self.w_e), ("rho", self.rho), ("c", self.c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.angles.len() < 3 {
            return Err(Error::CollinearSensors);
        }
        Ok(())
    }

    /// 4W_eρ/c².
    pub fn eta(&self) -> f64 {
        4.0 * self.w_e * self.rho / (self.c * self.c)
    }

    fn amplitudes(&self) -> Vec<f64> {
        self.distances.iter().map(|d| d.powf(-self.gamma)).collect()
    }
}

/// A random, well-spread array of 3 to 8 sensors: angles jittered by up to
/// ±0.3 rad around even spacing, distances in [0.5, 5], γ in [1, 3].
pub fn sample_sensors(seed: u64, stream: u64) -> PlanarSensors {
    let mut rng = stream_rng(seed, stream);
    let m = rng.random_range(3..=8usize);
    let angles = (0..m)
        .map(|i| TAU * i as f64 / m as f64 + rng.random_range(-0.3..0.3))
        .collect();
    let distances = (0..m).map(|_| rng.random_range(0.5..5.0)).collect();
    PlanarSensors {
        angles,
        distances,
        gamma: rng.random_range(1.0..3.0),
        w_e: 1e6,
        rho: 1.0,
        c: 3e5,
    }
}

/// 3c²ΣΣ A_iA_jβ_ij / (4W_eρ ΣΣΣ A_iA_jA_k β_ijβ_jkβ_ki), β_ij = 1 − cos(φ_i − φ_j).
pub fn planar_crb_closed(s: &PlanarSensors) -> Result<f64> {
    s.validate()?;
    let a = s.amplitudes();
    let m = a.len();
    let beta = |i: usize, j: usize| 1.0 - (s.angles[i] - s.angles[j]).cos();
    let mut pair = 0.0;
    let mut triple = 0.0;
    let mut triple_scale = 0.0;
    for i in 0..m {
        for j in 0..m {
            let bij = beta(i, j);
            pair += a[i] * a[j] * bij;
            for k in 0..m {
                let w = a[i] * a[j] * a[k];
                triple += w * bij * beta(j, k) * beta(k, i);
                triple_scale += w;
            }
        }
    }
    if triple <= COLLINEAR_TOLERANCE * triple_scale {
        return Err(Error::CollinearSensors);
    }
    Ok(3.0 * s.c * s.c * pair / (4.0 * s.w_e * s.rho * triple))
}

/// [J⁻¹]₁₁ + [J⁻¹]₂₂ for J = η Σ A_i u_iu_iᵀ, u_i = (cos φ_i, sin φ_i, −1).
pub fn planar_crb_fim(s: &PlanarSensors) -> Result<f64> {
    s.validate()?;
    let eta = s.eta();
    let mut j = [[0.0; 3]; 3];
    for (&phi, a) in s.angles.iter().zip(s.amplitudes()) {
        let u = [phi.cos(), phi.sin(), -1.0];
        for r in 0..3 {
            for c in 0..3 {
                j[r][c] += eta * a * u[r] * u[c];
            }
        }
    }
    let inv = spd_inverse(&j)?;
    Ok(inv[0][0] + inv[1][1])
}

/// The same sensors with a known emission time (TOA): 2×2 spatial FIM only.
pub fn planar_toa_crb(s: &PlanarSensors) -> Result<f64> {
    s.validate()?;
    let eta = s.eta();
    let mut j = [[0.0; 2]; 2];
    for (&phi, a) in s.angles.iter().zip(s.amplitudes()) {
        let u = [phi.cos(), phi.sin()];
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] += eta * a * u[r] * u[c];
            }
        }
    }
    let inv = spd_inverse(&j)?;
    Ok(inv[0][0] + inv[1][1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sensors(angles: Vec<f64>, distances: Vec<f64>) -> PlanarSensors {
        PlanarSensors {
            angles,
            distances,
            gamma: 2.0,
            w_e: 1e6,
            rho: 3.0,
            c: 3e5,
        }
    }

    #[test]
    fn symmetric_triangle() {
        let d = 7.5;
        let s = sensors(vec![0.0, TAU / 3.0, 2.0 * TAU / 3.0], vec![d; 3]);
        let expected = s.c * s.c * d * d / (3.0 * s.w_e * s.rho);
        assert!((planar_crb_closed(&s).unwrap() / expected - 1.0).abs() < 1e-10);
        assert!((planar_crb_fim(&s).unwrap() / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_sensors_are_collinear() {
        let s = sensors(vec![0.0, 1.0], vec![1.0, 1.0]);
        assert_eq!(planar_crb_closed(&s), Err(Error::CollinearSensors));
    }

    #[test]
    fn sensors_on_a_line_are_collinear() {
        let s = sensors(vec![0.0, PI, 0.0, PI], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(planar_crb_closed(&s), Err(Error::CollinearSensors));
        assert!(planar_crb_fim(&s).is_err());
    }

    #[test]
    fn uniform_angular_array_matches_toa() {
        for m in 3..9 {
            let angles = (0..m).map(|i| 0.3 + TAU * i as f64 / m as f64).collect();
            let s = sensors(angles, vec![2.0; m]);
            let tdoa = planar_crb_fim(&s).unwrap();
            let toa = planar_toa_crb(&s).unwrap();
            assert!((tdoa / toa - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sampled_arrays_agree_tightly() {
        for k in 0..100 {
            let s = sample_sensors(1, k);
            let (a, b) = (planar_crb_closed(&s).unwrap(), planar_crb_fim(&s).unwrap());
            assert!((a / b - 1.0).abs() < 1e-10, "{k}: {a} {b}");
        }
        assert_eq!(sample_sensors(4, 2), sample_sensors(4, 2));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let s = sensors(vec![0.0, 1.0, 2.0], vec![1.0, 1.0]);
        assert!(matches!(planar_crb_closed(&s), Err(Error::InvalidParams(_))));
    }

    proptest! {
        #[test]
        fn closed_form_matches_fim(
            cfg in proptest::collection::vec((0.0..TAU, 0.5..5.0f64), 3..10),
            gamma in 1.0..4.0f64,
        ) {
            let (angles, distances): (Vec<_>, Vec<_>) = cfg.into_iter().unzip();
            // near-collinear arrays are ill-conditioned for both routes
            let beta = |a: f64, b: f64| 1.0 - (a - b).cos();
            let mut spread = 0.0f64;
            for &a in &angles {
                for &b in &angles {
                    for &c in &angles {
                        spread = spread.max(beta(a, b) * beta(b, c) * beta(c, a));
                    }
                }
            }
            prop_assume!(spread > 1e-3);
            let s = PlanarSensors { gamma, ..sensors(angles, distances) };
            if let (Ok(a), Ok(b)) = (planar_crb_closed(&s), planar_crb_fim(&s)) {
                prop_assert!((a / b - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn rotation_invariant(offset in 0.0..TAU) {
            let s = sensors(vec![0.1, 1.3, 2.9, 4.4], vec![1.0, 2.0, 1.5, 3.0]);
            let r = PlanarSensors {
                angles: s.angles.iter().map(|a| a + offset).collect(),
                ..s.clone()
            };
            let a = planar_crb_fim(&s).unwrap();
            let b = planar_crb_fim(&r).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-10);
        }

        #[test]
        fn inverse_in_rho(k in 0i32..8) {
            let s = sensors(vec![0.1, 1.3, 2.9, 4.4], vec![1.0, 2.0, 1.5, 3.0]);
            let scale = 2f64.powi(k);
            let t = PlanarSensors { rho: s.rho * scale, ..s.clone() };
            prop_assert_eq!(planar_crb_closed(&t).unwrap(), planar_crb_closed(&s).unwrap() / scale);
        }
    }
}
