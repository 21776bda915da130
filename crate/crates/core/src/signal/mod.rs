//! Sampled-signal simulation and maximum-likelihood localization for the
//! TDOA model, where every satellite's amplitude is an unknown nuisance.
//!
//! Each visible satellite yields one observation window of
//! `obs_window · sample_rate` samples, `A_m s(t − τ_m) + noise`, with the
//! noise white at two-sided density N₀/2. Windows are aligned on the delays
//! of a nominal receiver position at the origin with T₀ = 0, so the pulse of
//! a receiver near the origin sits near the window centre.

mod estimate;
mod experiment;
mod nelder_mead;
mod pulse;
mod simulate;

pub use estimate::{ml_localize, LocationEstimate, SearchConfig, SolveMode};
pub use experiment::{
    crb_for_mode, decoupling_check, eta_rho_equivalent, ml_geometry, mse_experiment,
    threshold_index, MsePoint,
};
pub use nelder_mead::{nelder_mead, Minimum};
pub use pulse::{
    effective_bandwidth, effective_bandwidth_spectral, gaussian_bandwidth, Pulse, PulseShape,
};
pub use simulate::{simulate_measurements, Measurement, Truth};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_LIGHT_KM_S;

/// Minimum samples per pulse width.
pub const MIN_SAMPLES_PER_WIDTH: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalConfig {
    pub pulse: PulseShape,
    /// s.
    pub pulse_width: f64,
    /// Hz.
    pub sample_rate: f64,
    /// s.
    pub obs_window: f64,
    /// Noise spectral density N₀ (the noise is white with density N₀/2).
    pub n0: f64,
    /// Energy received from a satellite at distance h (the zenith one).
    pub es_max: f64,
    /// km/s.
    pub c: f64,
    /// See [`Pulse::truncate_after`].
    pub truncate_after: Option<f64>,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            pulse: PulseShape::Gaussian,
            pulse_width: 1e-6,
            sample_rate: 20e6,
            obs_window: 60e-6,
            n0: 1.0,
            es_max: 1e3,
            c: SPEED_OF_LIGHT_KM_S,
            truncate_after: None,
        }
    }
}

impl SignalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        for (name, v) in [
            ("pulse_width", self.pulse_width),
            ("sample_rate", self.sample_rate),
            ("obs_window", self.obs_window),
            ("n0", self.n0),
            ("c", self.c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.es_max.is_finite() && self.es_max >= 0.0) {
            return bad("es_max must be non-negative");
        }
        if self.sample_rate * self.pulse_width < MIN_SAMPLES_PER_WIDTH {
            return bad("sample_rate * pulse_width must be at least 16");
        }
        if self.obs_window < 4.0 * self.pulse().map(|p| p.support()).unwrap_or(0.0) {
            return bad("obs_window must cover at least twice the pulse support");
        }
        Ok(())
    }

    /// Es,max/N₀ given in dB.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.es_max = self.n0 * 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn n_samples(&self) -> usize {
        (self.obs_window * self.sample_rate).round() as usize
    }

    pub fn pulse(&self) -> Result<Pulse> {
        Pulse::new(self.pulse, self.pulse_width, self.dt(), self.truncate_after)
    }

    /// Per-sample noise standard deviation, √(N₀/(2Δt)).
    pub fn noise_sigma(&self) -> f64 {
        (self.n0 / (2.0 * self.dt())).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SignalConfig::default();
        c.validate().unwrap();
        assert_eq!(c.n_samples(), 1200);
    }

    #[test]
    fn undersampled_pulse_rejected() {
        let c = SignalConfig {
            sample_rate: 10e6,
            ..SignalConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn snr_sets_energy() {
        let c = SignalConfig::default().with_snr_db(20.0);
        assert!((c.es_max - 100.0).abs() < 1e-9);
    }
}
