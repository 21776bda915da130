use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{ml_localize, SearchConfig, SolveMode};
use super::simulate::{amplitude, pulse_centre, simulate_with_rng, usable, Truth};
use super::SignalConfig;
use crate::error::{Error, Result};
use crate::fim::{crb_from_fim, crb_xy_known_z, fim_tdoa, BoundSet};
use crate::geometry::{l_to_state, SatelliteState, SystemParams};
use crate::rng::{derive_seed, stream_rng};

/// Squared errors above this multiple of their bound count as outliers.
const OUTLIER_FACTOR: f64 = 25.0;

/// One satellite at zenith and five evenly spread at 30° from zenith.
pub fn ml_geometry(params: &SystemParams) -> Vec<SatelliteState> {
    let ring = 30f64.to_radians();
    std::iter::once(l_to_state(0.0, 0.0, params))
        .chain((0..5).map(|k| l_to_state(ring, TAU * k as f64 / 5.0, params)))
        .collect()
}

/// The ηρ that makes the satellite-level TDOA bound equal to the bound of
/// the sampled signal model: Es,max·h²·(Σṡ²Δt)/(N₀c²).
///
/// Satellite m contributes (2A_m²/N₀)(Σṡ²Δt)/c² per km² of range; with
/// A_m² = Es,max h²/D_m² this is 2ηρ/D_m².
pub fn eta_rho_equivalent(params: &SystemParams, config: &SignalConfig) -> Result<f64> {
    config.validate()?;
    let pulse = config.pulse()?;
    let s = pulse.derivative_energy(config.dt());
    Ok(config.es_max * params.h * params.h * s / (config.n0 * config.c * config.c))
}

/// The bound matching an estimator mode: in `FixZ` the z row and column
/// are dropped and `z` is reported as 0.
pub fn crb_for_mode(
    geometry: &[SatelliteState],
    params: &SystemParams,
    config: &SignalConfig,
    mode: SolveMode,
) -> Result<BoundSet> {
    let calibrated = params.with_eta_rho(eta_rho_equivalent(params, config)?);
    let j = fim_tdoa(geometry, &calibrated);
    match mode {
        SolveMode::Full3d => crb_from_fim(&j),
        SolveMode::FixZ => Ok(BoundSet::new(crb_xy_known_z(&j)?, 0.0)),
    }
}

/// One SNR point of [`mse_experiment`]. Squared errors in km².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MsePoint {
    pub snr_db: f64,
    pub mse_xy: f64,
    pub mse_xyz: f64,
    pub crb_xy: f64,
    pub crb_xyz: f64,
    /// Calibrated ηρ used for the bound.
    pub eta_rho: f64,
    /// Trials whose xy or total squared error exceeded 25× its bound.
    pub outliers: usize,
    pub converged_fraction: f64,
}

/// Monte Carlo MSE of [`ml_localize`] against the bound, per SNR.
///
/// Each trial draws the true (x, y, c·T₀) uniformly within half a lattice
/// spacing of the search centre (z stays at the centre, so `FixZ` knows it),
/// then simulates fresh noise.
#[allow(clippy::too_many_arguments)]
pub fn mse_experiment(
    geometry: &[SatelliteState],
    params: &SystemParams,
    config: &SignalConfig,
    snr_grid: &[f64],
    trials: usize,
    seed: u64,
    mode: SolveMode,
    search: &SearchConfig,
) -> Result<Vec<MsePoint>> {
    if trials < 50 {
        return Err(Error::InvalidParams("mse_experiment needs at least 50 trials".into()));
    }
    config.validate()?;
    let spacing = search.spacing_for(config, &config.pulse()?);
    let c0 = search.center;

    snr_grid
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let cfg = config.with_snr_db(snr_db);
            let bound = crb_for_mode(geometry, params, &cfg, mode)?;
            let point_seed = derive_seed(seed, i as u64);
            let errors = (0..trials as u64)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream_rng(point_seed, k);
                    let mut jitter = || spacing * (rng.random::<f64>() - 0.5);
                    let (dx, dy, db) = (jitter(), jitter(), jitter());
                    let truth = Truth {
                        xi: [c0[0] + dx, c0[1] + dy, c0[2]],
                        t0: (c0[3] + db) / cfg.c,
                    };
                    let m = simulate_with_rng(&truth, geometry, params, &cfg, &mut rng)?;
                    let est = ml_localize(&m, geometry, &cfg, mode, search)?;
                    let e: Vec<f64> = (0..3).map(|j| est.xi_hat[j] - truth.xi[j]).collect();
                    let xy = e[0] * e[0] + e[1] * e[1];
                    Ok((xy, xy + e[2] * e[2], est.converged))
                })
                .collect::<Result<Vec<_>>>()?;
            let n = errors.len() as f64;
            let mse_xy = errors.iter().map(|e| e.0).sum::<f64>() / n;
            let mse_xyz = errors.iter().map(|e| e.1).sum::<f64>() / n;
            let crb_xyz = bound.xyz;
            let outliers = errors
                .iter()
                .filter(|e| e.0 > OUTLIER_FACTOR * bound.xy || e.1 > OUTLIER_FACTOR * crb_xyz)
                .count();
            let converged = errors.iter().filter(|e| e.2).count();
            Ok(MsePoint {
                snr_db,
                mse_xy,
                mse_xyz,
                crb_xy: bound.xy,
                crb_xyz,
                eta_rho: eta_rho_equivalent(params, &cfg)?,
                outliers,
                converged_fraction: converged as f64 / n,
            })
        })
        .collect()
}

/// First index from which every point is outlier-free: the estimator's
/// threshold SNR on the grid.
pub fn threshold_index(points: &[MsePoint]) -> Option<usize> {
    let last_bad = points.iter().rposition(|p| p.outliers > 0);
    match last_bad {
        None if !points.is_empty() => Some(0),
        Some(i) if i + 1 < points.len() => Some(i + 1),
        _ => None,
    }
}

/// Largest normalized cross-information between the amplitudes and
/// (x, y, z, c·T₀), from finite differences of the noiseless sampled signal.
pub fn decoupling_check(
    geometry: &[SatelliteState],
    params: &SystemParams,
    config: &SignalConfig,
) -> Result<f64> {
    config.validate()?;
    let idx = usable(geometry, 1)?;
    let pulse = config.pulse()?;
    let dt = config.dt();
    let n = config.n_samples();
    let m = idx.len();
    let dim = 4 + m;
    let amps: Vec<f64> = idx.iter().map(|&i| amplitude(&geometry[i], params, config)).collect();

    // mean signal of every window, stacked
    let mean = |theta: &[f64]| -> Vec<f64> {
        let xi = [theta[0], theta[1], theta[2]];
        let mut out = Vec::with_capacity(m * n);
        for (j, &i) in idx.iter().enumerate() {
            let centre = pulse_centre(&geometry[i], &xi, theta[3], config);
            out.extend((0..n).map(|k| theta[4 + j] * pulse.value(k as f64 * dt - centre)));
        }
        out
    };
    let theta0: Vec<f64> = [0.0; 4].iter().copied().chain(amps.iter().copied()).collect();
    let grads: Vec<Vec<f64>> = (0..dim)
        .map(|p| {
            let step = if p < 4 { 1e-5 } else { 1e-6 * amps[p - 4].abs().max(1e-12) };
            let mut up = theta0.clone();
            let mut down = theta0.clone();
            up[p] += step;
            down[p] -= step;
            mean(&up)
                .iter()
                .zip(mean(&down))
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect()
        })
        .collect();
    let scale = 2.0 * dt / config.n0;
    let info = |a: usize, b: usize| -> f64 {
        scale * grads[a].iter().zip(&grads[b]).map(|(x, y)| x * y).sum::<f64>()
    };
    let diag: Vec<f64> = (0..dim).map(|p| info(p, p)).collect();
    let mut worst = 0.0f64;
    for g in 0..4 {
        for a in 4..dim {
            let d = (diag[g] * diag[a]).sqrt();
            if d > 0.0 {
                worst = worst.max(info(g, a).abs() / d);
            }
        }
    }
    Ok(worst)
}
