//! Random-constellation experiments.
//!
//! Trial `k` of an experiment seeded with `s` always uses the RNG stream
//! `(s, k)`, so tables are identical whatever the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{acrb, lcrb};
use crate::coverage::coverage_prob;
use crate::error::{Error, Result};
use crate::fim::{crb_from_fim, fim_for, FisherMatrix, SignalModel};
use crate::geometry::{sample_constellation_stream, SystemParams};
use crate::rng::derive_seed;

/// Coverage probability below which sweep points are flagged.
pub const COVERAGE_THRESHOLD: f64 = 0.9;

/// Minimum sample count accepted by [`mean_fim`].
pub const MIN_MEAN_FIM_SAMPLES: usize = 10_000;

/// Empirical law of N·CRB over random constellations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrbDistribution {
    pub model: SignalModel,
    pub n_sats: usize,
    pub trials: usize,
    pub samples_xy: Vec<f64>,
    pub samples_z: Vec<f64>,
    /// Draws with fewer than four visible satellites or an ill-conditioned FIM.
    pub singular_count: usize,
}

/// Nearest-rank percentiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentiles {
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
}

impl Percentiles {
    /// NaN everywhere when `samples` is empty.
    pub fn of(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            p10: nearest_rank(&sorted, 0.10),
            median: nearest_rank(&sorted, 0.50),
            p90: nearest_rank(&sorted, 0.90),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            p10: self.p10 * s,
            median: self.median * s,
            p90: self.p90 * s,
        }
    }
}

/// The smallest sample with at least a fraction `q` of samples at or below it.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

impl CrbDistribution {
    pub fn xy(&self) -> Percentiles {
        Percentiles::of(&self.samples_xy)
    }

    pub fn z(&self) -> Percentiles {
        Percentiles::of(&self.samples_z)
    }

    /// Every draw was unidentifiable.
    pub fn is_empty(&self) -> bool {
        self.samples_xy.is_empty()
    }

    /// Fraction of samples within ±`tol` (relative) of the median.
    pub fn fraction_near_median(samples: &[f64], tol: f64) -> f64 {
        if samples.is_empty() {
            return f64::NAN;
        }
        let m = Percentiles::of(samples).median;
        let hits = samples.iter().filter(|&&v| (v / m - 1.0).abs() <= tol).count();
        hits as f64 / samples.len() as f64
    }
}

/// N·CRB of one trial, or `None` for an unidentifiable draw.
pub fn trial_crb(
    params: &SystemParams,
    model: SignalModel,
    seed: u64,
    trial: u64,
) -> Result<Option<(f64, f64)>> {
    let sats = sample_constellation_stream(params, seed, trial).visible_states(params);
    if sats.len() < 4 {
        return Ok(None);
    }
    let j = fim_for(model, &sats, params)?;
    let n = params.n_sats as f64;
    Ok(crb_from_fim(&j).ok().map(|b| (n * b.xy, n * b.z)))
}

pub fn crb_distribution(
    params: &SystemParams,
    model: SignalModel,
    trials: usize,
    seed: u64,
) -> Result<CrbDistribution> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|k| trial_crb(params, model, seed, k))
        .collect::<Result<Vec<_>>>()?;
    let mut samples_xy = Vec::with_capacity(trials);
    let mut samples_z = Vec::with_capacity(trials);
    for (xy, z) in outcomes.iter().flatten() {
        samples_xy.push(*xy);
        samples_z.push(*z);
    }
    Ok(CrbDistribution {
        model,
        n_sats: params.n_sats,
        trials,
        singular_count: trials - samples_xy.len(),
        samples_xy,
        samples_z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub median_xy: f64,
    pub p10_xy: f64,
    pub p90_xy: f64,
    pub median_z: f64,
    pub p10_z: f64,
    pub p90_z: f64,
    pub lcrb_xy: f64,
    pub lcrb_z: f64,
    pub singular_count: usize,
}

/// N·CRB percentiles for each N in `n_list`, next to the LCRB. Each N gets
/// its own derived seed, so rows do not depend on the rest of the list.
pub fn convergence_sweep(
    params: &SystemParams,
    model: SignalModel,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(Error::InvalidParams("n_list must not be empty".into()));
    }
    let limit = lcrb(params, model)?;
    n_list
        .iter()
        .map(|&n| {
            let p = params.with_n_sats(n);
            let dist = crb_distribution(&p, model, trials, derive_seed(seed, n as u64))?;
            let (xy, z) = (dist.xy(), dist.z());
            Ok(ConvergenceRow {
                n,
                median_xy: xy.median,
                p10_xy: xy.p10,
                p90_xy: xy.p90,
                median_z: z.median,
                p10_z: z.p10,
                p90_z: z.p90,
                lcrb_xy: limit.xy,
                lcrb_z: limit.z,
                singular_count: dist.singular_count,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PhiLMax,
    H,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi_l_max" | "phi" => Ok(Self::PhiLMax),
            "h" => Ok(Self::H),
            other => Err(Error::InvalidParams(format!("unknown sweep axis `{other}`"))),
        }
    }
}

impl SweepAxis {
    /// `params` with this axis set to `value` (radians for the angle).
    pub fn apply(self, params: &SystemParams, value: f64) -> SystemParams {
        match self {
            Self::PhiLMax => params.with_phi_l_max(value),
            Self::H => params.with_h(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub coverage_prob: f64,
    pub covered: bool,
    pub median_xy: f64,
    pub p10_xy: f64,
    pub p90_xy: f64,
    pub median_z: f64,
    pub p10_z: f64,
    pub p90_z: f64,
    pub acrb_xy: f64,
    pub acrb_z: f64,
    pub singular_count: usize,
}

/// CRB percentiles (not N-scaled) and the ACRB along one parameter axis.
/// Points below [`COVERAGE_THRESHOLD`] are still evaluated but flagged.
pub fn parameter_sweep(
    params: &SystemParams,
    model: SignalModel,
    axis: SweepAxis,
    grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    grid.iter()
        .enumerate()
        .map(|(i, &value)| {
            let p = axis.apply(params, value);
            p.validate()?;
            let cov = coverage_prob(&p);
            let dist = crb_distribution(&p, model, trials, derive_seed(seed, i as u64))?;
            let inv_n = 1.0 / p.n_sats as f64;
            let (xy, z) = (dist.xy().scaled(inv_n), dist.z().scaled(inv_n));
            let a = acrb(&p, model)?;
            Ok(SweepRow {
                value,
                coverage_prob: cov,
                covered: cov >= COVERAGE_THRESHOLD,
                median_xy: xy.median,
                p10_xy: xy.p10,
                p90_xy: xy.p90,
                median_z: z.median,
                p10_z: z.p10,
                p90_z: z.p90,
                acrb_xy: a.xy,
                acrb_z: a.z,
                singular_count: dist.singular_count,
            })
        })
        .collect()
}

/// Average per-satellite information over `n_samples` uniform positions;
/// positions outside the cup contribute zero.
pub fn mean_fim(
    params: &SystemParams,
    model: SignalModel,
    n_samples: usize,
    seed: u64,
) -> Result<FisherMatrix> {
    params.validate()?;
    if n_samples < MIN_MEAN_FIM_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "mean_fim needs at least {MIN_MEAN_FIM_SAMPLES} samples"
        )));
    }
    let p = params.with_n_sats(n_samples);
    let sats = sample_constellation_stream(&p, seed, 0).visible_states(&p);
    Ok(fim_for(model, &sats, &p)?.scaled(1.0 / n_samples as f64))
}
