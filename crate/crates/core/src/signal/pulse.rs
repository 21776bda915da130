//! Unit-energy baseband pulses and their effective bandwidth.

use std::f64::consts::{PI, TAU};

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// exp(−t²/(2w²)).
    #[default]
    Gaussian,
    /// ½(1 + cos(πt/w)) on |t| ≤ w.
    RaisedCosine,
}

impl std::str::FromStr for PulseShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "raised_cosine" => Ok(Self::RaisedCosine),
            other => Err(Error::InvalidConfig(format!("unknown pulse `{other}`"))),
        }
    }
}

/// Gaussian tails are cut here, in widths; the energy lost is below 1e−20.
const GAUSSIAN_SUPPORT: f64 = 7.0;

/// A pulse s(t) centred at t = 0, normalized to unit energy on the sampling
/// grid it was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub shape: PulseShape,
    pub width: f64,
    /// Zero the pulse for t > `truncate_after`. Breaks time symmetry; only
    /// meant for sanity checks.
    pub truncate_after: Option<f64>,
    norm: f64,
}

impl Pulse {
    /// Builds the pulse and scales it so that Σ s(kΔt)²Δt = 1.
    pub fn new(shape: PulseShape, width: f64, dt: f64, truncate_after: Option<f64>) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidConfig("pulse width and sample spacing must be positive".into()));
        }
        let mut p = Self {
            shape,
            width,
            truncate_after,
            norm: 1.0,
        };
        let half = (p.support() / dt).ceil() as i64;
        let energy: f64 = (-half..=half).map(|k| p.value(k as f64 * dt).powi(2)).sum::<f64>() * dt;
        if !(energy > 0.0) {
            return Err(Error::InvalidConfig("pulse has no energy on the sampling grid".into()));
        }
        p.norm = energy.sqrt().recip();
        Ok(p)
    }

    /// Half-length of the support.
    pub fn support(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian => GAUSSIAN_SUPPORT * self.width,
            PulseShape::RaisedCosine => self.width,
        }
    }

    fn truncated(&self, t: f64) -> bool {
        t.abs() > self.support() || self.truncate_after.is_some_and(|c| t > c)
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.truncated(t) {
            return 0.0;
        }
        let w = self.width;
        self.norm
            * match self.shape {
                PulseShape::Gaussian => (-0.5 * (t / w).powi(2)).exp(),
                PulseShape::RaisedCosine => 0.5 * (1.0 + (PI * t / w).cos()),
            }
    }

    /// ds/dt.
    pub fn derivative(&self, t: f64) -> f64 {
        if self.truncated(t) {
            return 0.0;
        }
        let w = self.width;
        self.norm
            * match self.shape {
                PulseShape::Gaussian => -t / (w * w) * (-0.5 * (t / w).powi(2)).exp(),
                PulseShape::RaisedCosine => -0.5 * PI / w * (PI * t / w).sin(),
            }
    }

    /// Samples s(kΔt) for k = −half..=half, with `half` covering the support.
    pub fn sampled(&self, dt: f64) -> (Vec<f64>, usize) {
        let half = (self.support() / dt).ceil() as usize;
        let samples = (-(half as i64)..=half as i64)
            .map(|k| self.value(k as f64 * dt))
            .collect();
        (samples, half)
    }

    /// Σ ṡ²Δt on the sampling grid.
    pub fn derivative_energy(&self, dt: f64) -> f64 {
        let half = (self.support() / dt).ceil() as i64;
        (-half..=half).map(|k| self.derivative(k as f64 * dt).powi(2)).sum::<f64>() * dt
    }

    /// Σ s ṡ Δt on the sampling grid; zero for a time-symmetric pulse.
    pub fn symmetry_defect(&self, dt: f64) -> f64 {
        let half = (self.support() / dt).ceil() as i64;
        (-half..=half)
            .map(|k| {
                let t = k as f64 * dt;
                self.value(t) * self.derivative(t)
            })
            .sum::<f64>()
            * dt
    }
}

/// RMS (Gabor) bandwidth, √(Σṡ²Δt / Σs²Δt)/(2π), in Hz.
pub fn effective_bandwidth(pulse: &Pulse, dt: f64) -> f64 {
    let (samples, _) = pulse.sampled(dt);
    let energy: f64 = samples.iter().map(|s| s * s).sum::<f64>() * dt;
    (pulse.derivative_energy(dt) / energy).sqrt() / TAU
}

/// The same bandwidth from the spectrum of the samples,
/// √(Σ f²|S(f)|² / Σ|S(f)|²), zero-padded to a power of two.
pub fn effective_bandwidth_spectral(samples: &[f64], dt: f64) -> f64 {
    let n = (4 * samples.len()).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, c) in buf.iter().enumerate() {
        let idx = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let power = c.norm_sqr();
        num += (idx * df).powi(2) * power;
        den += power;
    }
    (num / den).sqrt()
}

/// Analytic Gabor bandwidth of the Gaussian pulse of width `w`.
pub fn gaussian_bandwidth(w: f64) -> f64 {
    1.0 / (TAU * std::f64::consts::SQRT_2 * w)
}
