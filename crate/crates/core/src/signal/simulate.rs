use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::SignalConfig;
use crate::error::{Error, Result};
use crate::geometry::{SatelliteState, SystemParams};
use crate::rng::stream_rng;

/// True receiver position (local frame, km) and emission time (s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Truth {
    pub xi: [f64; 3],
    pub t0: f64,
}

/// One satellite's observation window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub samples: Vec<f64>,
    /// Index into the geometry the measurement was simulated from.
    pub sat_index: usize,
    /// Pulse centre within the window, s. Known only to tests.
    pub true_delay: f64,
}

/// D(ξ) − D(0) for a satellite, without subtracting two ~20000 km numbers.
pub(crate) fn range_change(sat: &SatelliteState, xi: &[f64; 3]) -> f64 {
    let p = sat.position();
    let diff = [p[0] - xi[0], p[1] - xi[1], p[2] - xi[2]];
    let d_xi = (diff[0].powi(2) + diff[1].powi(2) + diff[2].powi(2)).sqrt();
    let dot = p[0] * xi[0] + p[1] * xi[1] + p[2] * xi[2];
    let xi2 = xi[0].powi(2) + xi[1].powi(2) + xi[2].powi(2);
    (xi2 - 2.0 * dot) / (d_xi + sat.d)
}

/// Pulse centre inside the window for a receiver at `xi` with range bias
/// `b = c·T₀` (km).
pub(crate) fn pulse_centre(sat: &SatelliteState, xi: &[f64; 3], b: f64, config: &SignalConfig) -> f64 {
    0.5 * config.obs_window + (range_change(sat, xi) + b) / config.c
}

/// Amplitude law A_m = √Es,max · h/D_m, so a satellite at zenith receives
/// exactly Es,max.
pub(crate) fn amplitude(sat: &SatelliteState, params: &SystemParams, config: &SignalConfig) -> f64 {
    config.es_max.sqrt() * params.h / sat.d
}

/// Visible satellites, or `InsufficientCoverage`.
pub(crate) fn usable(geometry: &[SatelliteState], required: usize) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..geometry.len()).filter(|&i| geometry[i].visible).collect();
    if idx.len() < required {
        return Err(Error::InsufficientCoverage {
            visible: idx.len(),
            required,
        });
    }
    Ok(idx)
}

/// Simulates one window per visible satellite on RNG stream 0.
pub fn simulate_measurements(
    truth: &Truth,
    geometry: &[SatelliteState],
    params: &SystemParams,
    config: &SignalConfig,
    seed: u64,
) -> Result<Vec<Measurement>> {
    let mut rng = stream_rng(seed, 0);
    simulate_with_rng(truth, geometry, params, config, &mut rng)
}

pub(crate) fn simulate_with_rng<R: Rng + ?Sized>(
    truth: &Truth,
    geometry: &[SatelliteState],
    params: &SystemParams,
    config: &SignalConfig,
    rng: &mut R,
) -> Result<Vec<Measurement>> {
    config.validate()?;
    let idx = usable(geometry, 4)?;
    let pulse = config.pulse()?;
    let dt = config.dt();
    let sigma = config.noise_sigma();
    let n = config.n_samples();
    let b = config.c * truth.t0;
    Ok(idx
        .into_iter()
        .map(|i| {
            let sat = &geometry[i];
            let centre = pulse_centre(sat, &truth.xi, b, config);
            let a = amplitude(sat, params, config);
            let samples = (0..n)
                .map(|k| {
                    let noise: f64 = rng.sample(StandardNormal);
                    a * pulse.value(k as f64 * dt - centre) + sigma * noise
                })
                .collect();
            Measurement {
                samples,
                sat_index: i,
                true_delay: centre,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ml_geometry;

    #[test]
    fn range_change_matches_direct_difference() {
        let p = SystemParams::default();
        let g = ml_geometry(&p);
        let xi = [0.3, -0.2, 0.1];
        for s in &g {
            let pos = s.position();
            let direct = ((pos[0] - xi[0]).powi(2) + (pos[1] - xi[1]).powi(2) + (pos[2] - xi[2]).powi(2))
                .sqrt()
                - s.d;
            assert!((range_change(s, &xi) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn ring_amplitude_ratio() {
        let p = SystemParams::default();
        let c = SignalConfig::default();
        let g = ml_geometry(&p);
        let ratio = amplitude(&g[1], &p, &c) / amplitude(&g[0], &p, &c);
        assert!((ratio - p.h / g[1].d).abs() < 1e-15);
        assert!((amplitude(&g[0], &p, &c).powi(2) - c.es_max).abs() < 1e-9);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SystemParams::default();
        let c = SignalConfig::default();
        let g = ml_geometry(&p);
        let a = simulate_measurements(&Truth::default(), &g, &p, &c, 5).unwrap();
        let b = simulate_measurements(&Truth::default(), &g, &p, &c, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a[0].samples.len(), c.n_samples());
    }

    #[test]
    fn noise_only_window_is_centred() {
        let p = SystemParams::default();
        let c = SignalConfig {
            es_max: 0.0,
            ..SignalConfig::default()
        };
        let g = ml_geometry(&p);
        let m = simulate_measurements(&Truth::default(), &g, &p, &c, 2).unwrap();
        let all: Vec<f64> = m.iter().flat_map(|m| m.samples.iter().copied()).collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let sigma = c.noise_sigma() / (all.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma);
    }

    #[test]
    fn too_few_satellites() {
        let p = SystemParams::default();
        let g = &ml_geometry(&p)[..3];
        let err = simulate_measurements(&Truth::default(), g, &p, &SignalConfig::default(), 1);
        assert!(matches!(err, Err(Error::InsufficientCoverage { visible: 3, required: 4 })));
    }
}
