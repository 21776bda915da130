//! Spherical constellation geometry.
//!
//! The localized terminal (LT) sits on a sphere of radius `r`; satellites sit
//! on a concentric sphere of radius `R = r + h`. A satellite position is
//! described either in the Earth frame by its angle `phi_e` from the
//! Earth-centre → LT axis, or in the local frame by its angle `phi_l` from the
//! LT zenith. Both frames share the azimuth `theta`.
//!
//! The LT sees a satellite when `phi_l <= phi_l_max`. The far rim of that
//! cone is at distance [`d_max`].

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Mean Earth radius, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Speed of light, km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Earth, constellation and radiometric scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Earth radius, km.
    pub r: f64,
    /// Satellite altitude, km.
    pub h: f64,
    /// Maximal viewing angle from the LT zenith, radians.
    pub phi_l_max: f64,
    /// Combined information scale ηρ, km⁻².
    pub eta_rho: f64,
    /// Number of satellites N.
    pub n_sats: usize,
    /// Propagation speed, km/s.
    pub c: f64,
    /// Optional η of the (η, ρ) split. Only the TDOA+RSS model needs it.
    pub eta: Option<f64>,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            r: EARTH_RADIUS_KM,
            h: 20_000.0,
            phi_l_max: 60f64.to_radians(),
            eta_rho: 6.4e13,
            n_sats: 250,
            c: SPEED_OF_LIGHT_KM_S,
            eta: None,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.r.is_finite() && self.r > 0.0) {
            return bad("r must be positive");
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad("h must be positive");
        }
        if !(self.phi_l_max > 0.0 && self.phi_l_max <= PI / 2.0) {
            return bad("phi_l_max must lie in (0, pi/2]");
        }
        if !(self.eta_rho.is_finite() && self.eta_rho > 0.0) {
            return bad("eta_rho must be positive");
        }
        if self.n_sats == 0 {
            return bad("n_sats must be at least 1");
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad("c must be positive");
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return bad("eta must be positive");
            }
        }
        Ok(())
    }

    /// Satellite sphere radius R = r + h.
    pub fn orbit_radius(&self) -> f64 {
        self.r + self.h
    }

    /// ζ = cos(phi_l_max).
    pub fn zeta(&self) -> f64 {
        self.phi_l_max.cos()
    }

    /// 1 − ζ without cancellation at small angles.
    pub fn one_minus_zeta(&self) -> f64 {
        let s = (0.5 * self.phi_l_max).sin();
        2.0 * s * s
    }

    /// R² − r² = h(2r + h).
    pub fn radius_gap_sq(&self) -> f64 {
        self.h * (2.0 * self.r + self.h)
    }

    /// The (η, ρ) split required by the TDOA+RSS model.
    pub fn rss_split(&self) -> Result<(f64, f64)> {
        match self.eta {
            Some(eta) => Ok((eta, self.eta_rho / eta)),
            None => Err(Error::MissingRssSplit),
        }
    }

    /// c/h in Hz. Amplitude information is negligible for pulses whose
    /// effective bandwidth is far above this.
    pub fn rss_negligible_bandwidth(&self) -> f64 {
        self.c / self.h
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_phi_l_max(mut self, phi_l_max: f64) -> Self {
        self.phi_l_max = phi_l_max;
        self
    }

    pub fn with_n_sats(mut self, n_sats: usize) -> Self {
        self.n_sats = n_sats;
        self
    }

    pub fn with_eta_rho(mut self, eta_rho: f64) -> Self {
        self.eta_rho = eta_rho;
        self
    }

    /// Sets η and ρ separately; `eta_rho` becomes their product.
    pub fn with_split(mut self, eta: f64, rho: f64) -> Self {
        self.eta = Some(eta);
        self.eta_rho = eta * rho;
        self
    }
}

/// One satellite as seen from the LT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatelliteState {
    /// Angle from the LT zenith, radians in [0, π].
    pub phi_l: f64,
    /// Azimuth, radians in [0, 2π).
    pub theta: f64,
    /// LT–satellite distance, km.
    pub d: f64,
    /// `phi_l <= phi_l_max`.
    pub visible: bool,
}

impl SatelliteState {
    /// Unit vector from the LT towards the satellite, local frame (z up).
    pub fn direction(&self) -> [f64; 3] {
        let (sp, cp) = self.phi_l.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        [sp * ct, sp * st, cp]
    }

    /// Satellite position in the local frame, km.
    pub fn position(&self) -> [f64; 3] {
        let u = self.direction();
        [self.d * u[0], self.d * u[1], self.d * u[2]]
    }
}

/// Earth-frame satellite position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EarthPosition {
    pub phi_e: f64,
    pub theta: f64,
}

/// A random constellation realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constellation {
    pub sats: Vec<EarthPosition>,
    pub seed: u64,
}

impl Constellation {
    /// Local-frame view of every satellite.
    pub fn states(&self, params: &SystemParams) -> Vec<SatelliteState> {
        self.sats
            .iter()
            .map(|s| e_to_l_at(s.phi_e, s.theta, params))
            .collect()
    }

    /// Local-frame view of the satellites inside the coverage cup.
    pub fn visible_states(&self, params: &SystemParams) -> Vec<SatelliteState> {
        self.sats
            .iter()
            .map(|s| e_to_l_at(s.phi_e, s.theta, params))
            .filter(|s| s.visible)
            .collect()
    }
}

/// Draws `params.n_sats` satellites uniformly on the satellite sphere.
pub fn sample_constellation(params: &SystemParams, seed: u64) -> Constellation {
    sample_constellation_stream(params, seed, 0)
}

/// Same as [`sample_constellation`] but on an explicit trial stream, so
/// trial `k` of an experiment is reproducible on its own.
pub fn sample_constellation_stream(params: &SystemParams, seed: u64, stream: u64) -> Constellation {
    let mut rng = stream_rng(seed, stream);
    let sats = (0..params.n_sats)
        .map(|_| sample_position(&mut rng))
        .collect();
    Constellation { sats, seed }
}

/// One uniform point on the sphere: cos(phi_e) ~ U[-1, 1], theta ~ U[0, 2π).
pub fn sample_position<R: Rng + ?Sized>(rng: &mut R) -> EarthPosition {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let theta = TAU * rng.random::<f64>();
    EarthPosition {
        phi_e: z.clamp(-1.0, 1.0).acos(),
        theta,
    }
}

/// LT–satellite distance for Earth-centre angle `phi_e`.
pub fn distance(phi_e: f64, params: &SystemParams) -> f64 {
    // D² = R² + r² − 2rR cos φ = h² + 4rR sin²(φ/2)
    let s = (0.5 * phi_e).sin();
    (params.h * params.h + 4.0 * params.r * params.orbit_radius() * s * s).sqrt()
}

/// Earth-frame → local-frame conversion (azimuth 0).
pub fn e_to_l(phi_e: f64, params: &SystemParams) -> SatelliteState {
    e_to_l_at(phi_e, 0.0, params)
}

/// Earth-frame → local-frame conversion.
pub fn e_to_l_at(phi_e: f64, theta: f64, params: &SystemParams) -> SatelliteState {
    let big_r = params.orbit_radius();
    let d = distance(phi_e, params);
    let (se, ce) = phi_e.sin_cos();
    let sin_l = big_r * se / d;
    let cos_l = (big_r * ce - params.r) / d;
    let phi_l = sin_l.atan2(cos_l);
    SatelliteState {
        phi_l,
        theta,
        d,
        visible: phi_l <= params.phi_l_max,
    }
}

/// Local-frame description of a satellite at zenith angle `phi_l` on the
/// satellite sphere, for `phi_l` in [0, π/2].
pub fn l_to_state(phi_l: f64, theta: f64, params: &SystemParams) -> SatelliteState {
    let c = phi_l.cos();
    let root = (params.radius_gap_sq() + params.r * params.r * c * c).sqrt();
    let d = params.radius_gap_sq() / (root + params.r * c);
    SatelliteState {
        phi_l,
        theta,
        d,
        visible: phi_l <= params.phi_l_max,
    }
}

/// Distance to the rim of the coverage cup,
/// `sqrt(R² + r²(ζ² − 1)) − rζ`, evaluated as `h(2r+h) / (sqrt(h(2r+h) + r²ζ²) + rζ)`.
pub fn d_max(params: &SystemParams) -> f64 {
    let zeta = params.zeta();
    let gap = params.radius_gap_sq();
    let root = (gap + params.r * params.r * zeta * zeta).sqrt();
    gap / (root + params.r * zeta)
}

/// The textbook form of [`d_max`]; loses precision as h → 0.
pub fn d_max_literal(params: &SystemParams) -> f64 {
    let big_r = params.orbit_radius();
    let zeta = params.zeta();
    (big_r * big_r + params.r * params.r * (zeta * zeta - 1.0)).sqrt() - params.r * zeta
}

/// `d_max − h`, computed without subtracting nearby numbers.
pub fn d_max_excess(params: &SystemParams) -> f64 {
    let zeta = params.zeta();
    let gap = params.radius_gap_sq();
    let root = (gap + params.r * params.r * zeta * zeta).sqrt();
    2.0 * params.r * params.h * params.one_minus_zeta() / (root + params.h + params.r * zeta)
}

/// `1 − χ_max` where `χ_max = cos(phi_e_max)`.
pub fn one_minus_chi_max(params: &SystemParams) -> f64 {
    let dm = d_max(params);
    let excess = d_max_excess(params);
    excess * (dm + params.h) / (2.0 * params.r * params.orbit_radius())
}

/// Earth-centre half-angle of the coverage cup.
pub fn max_earth_angle(params: &SystemParams) -> f64 {
    let half = (0.5 * one_minus_chi_max(params)).sqrt().min(1.0);
    2.0 * half.asin()
}
