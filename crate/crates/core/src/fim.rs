//! Fisher information for the unknowns (x, y, z, T₀) and the resulting bounds.
//!
//! Satellite i contributes through `L_i = 2ηρ/D_i²` (delay information) and,
//! when the amplitude follows the path loss, through
//! `K_i = L_i + 2ρ/D_i⁴` (delay plus received-strength information).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SatelliteState, SystemParams};
use crate::linalg::{drop_index, spd_inverse, Matrix};

/// Which measurements carry location information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SignalModel {
    /// Amplitudes are unknown nuisance parameters; only delays count.
    #[default]
    Tdoa,
    /// Amplitudes follow free-space loss and add range information.
    TdoaRss,
}

impl FromStr for SignalModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "tdoa" => Ok(Self::Tdoa),
            "tdoa-rss" | "tdoa+rss" | "rss" => Ok(Self::TdoaRss),
            other => Err(Error::InvalidParams(format!("unknown signal model `{other}`"))),
        }
    }
}

impl fmt::Display for SignalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tdoa => "tdoa",
            Self::TdoaRss => "tdoa-rss",
        })
    }
}

/// Symmetric 4×4 information matrix, ordering (x, y, z, T₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherMatrix {
    pub m: Matrix<4>,
}

impl Default for FisherMatrix {
    fn default() -> Self {
        Self::zero()
    }
}

impl FisherMatrix {
    pub fn zero() -> Self {
        Self { m: [[0.0; 4]; 4] }
    }

    /// Adds `w · a bᵀ`.
    fn add_outer(&mut self, w: f64, a: &[f64; 4], b: &[f64; 4]) {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += w * a[i] * b[j];
            }
        }
    }

    pub fn add(&mut self, other: &FisherMatrix) {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += other.m[i][j];
            }
        }
    }

    pub fn scaled(&self, s: f64) -> FisherMatrix {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.m[i][i]).sum()
    }

    /// Largest |m_ij − m_ji| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..i {
                worst = worst.max((self.m[i][j] - self.m[j][i]).abs());
            }
        }
        worst / scale
    }
}

/// Bounds on the horizontal, vertical and total squared error, km².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub xy: f64,
    pub z: f64,
    pub xyz: f64,
}

impl BoundSet {
    pub fn new(xy: f64, z: f64) -> Self {
        Self { xy, z, xyz: xy + z }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.xy * s, self.z * s)
    }
}

fn direction(s: &SatelliteState) -> [f64; 4] {
    let v = s.direction();
    [v[0], v[1], v[2], -1.0]
}

/// TDOA-only information of the visible satellites: Σ L_i u_i u_iᵀ with
/// u_i = (v_i, −1).
pub fn fim_tdoa(sats: &[SatelliteState], params: &SystemParams) -> FisherMatrix {
    let mut j = FisherMatrix::zero();
    for s in sats.iter().filter(|s| s.visible) {
        let l = 2.0 * params.eta_rho / (s.d * s.d);
        let u = direction(s);
        j.add_outer(l, &u, &u);
    }
    j
}

/// TDOA+RSS information of the visible satellites. Needs the (η, ρ) split.
pub fn fim_tdoa_rss(sats: &[SatelliteState], params: &SystemParams) -> Result<FisherMatrix> {
    let (_, rho) = params.rss_split()?;
    let mut j = FisherMatrix::zero();
    for s in sats.iter().filter(|s| s.visible) {
        let d2 = s.d * s.d;
        let l = 2.0 * params.eta_rho / d2;
        let k = l + 2.0 * rho / (d2 * d2);
        let u = direction(s);
        // L u uᵀ plus the extra range information (K − L) on the spatial block
        j.add_outer(l, &u, &u);
        let v = [u[0], u[1], u[2], 0.0];
        j.add_outer(k - l, &v, &v);
    }
    Ok(j)
}

pub fn fim_for(
    model: SignalModel,
    sats: &[SatelliteState],
    params: &SystemParams,
) -> Result<FisherMatrix> {
    match model {
        SignalModel::Tdoa => Ok(fim_tdoa(sats, params)),
        SignalModel::TdoaRss => fim_tdoa_rss(sats, params),
    }
}

/// CRB_xy = [J⁻¹]₁₁ + [J⁻¹]₂₂, CRB_z = [J⁻¹]₃₃.
pub fn crb_from_fim(j: &FisherMatrix) -> Result<BoundSet> {
    let inv = spd_inverse(&j.m)?;
    Ok(BoundSet::new(inv[0][0] + inv[1][1], inv[2][2]))
}

/// Horizontal bound when the altitude of the terminal is known, so the z
/// row and column of J are dropped.
pub fn crb_xy_known_z(j: &FisherMatrix) -> Result<f64> {
    let inv = spd_inverse(&drop_index(&j.m, 2))?;
    Ok(inv[0][0] + inv[1][1])
}
