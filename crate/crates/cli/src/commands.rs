use satcrb::closed_form::{aacrb, acrb, lcrb, limit_coefficients};
use satcrb::coverage::{coverage, min_angle_for_coverage, min_height_for_coverage};
use satcrb::montecarlo::{convergence_sweep, SweepAxis, COVERAGE_THRESHOLD};
use satcrb::signal::{ml_geometry, mse_experiment, SearchConfig, SolveMode};
use satcrb::SignalModel;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::table::Table;
use crate::CliError;

/// Evenly spaced points from `from` to `to`, geometric when `log`.
pub fn grid(from: f64, to: f64, points: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if points == 0 || !from.is_finite() || !to.is_finite() || (log && (from <= 0.0 || to <= 0.0)) {
        return Err(CliError::Config(format!("bad grid {from}..{to} with {points} points")));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if log {
                from * (to / from).powf(step(i))
            } else {
                from + (to - from) * step(i)
            }
        })
        .collect())
}

/// Closed-form bounds along `axis`; angles in degrees.
pub fn bounds(cfg: &RunConfig, axis: SweepAxis, values: &[f64], model: SignalModel) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "axis_value",
        "lcrb_xy",
        "lcrb_z",
        "acrb_xy",
        "acrb_z",
        "aacrb_xy",
        "aacrb_z",
        "alpha_xy",
        "alpha_z",
        "beta_xy",
        "beta_z",
        "coverage_prob",
        "covered",
    ]);
    for &v in values {
        let internal = match axis {
            SweepAxis::PhiLMax => v.to_radians(),
            SweepAxis::H => v,
        };
        let p = axis.apply(&cfg.params, internal);
        p.validate()?;
        let (l, a, aa, k) = (lcrb(&p, model)?, acrb(&p, model)?, aacrb(&p)?, limit_coefficients(&p)?);
        let cov = coverage(&p).p_cov;
        t.push(vec![
            v.into(),
            l.xy.into(),
            l.z.into(),
            a.xy.into(),
            a.z.into(),
            aa.xy.into(),
            aa.z.into(),
            k.alpha_xy.into(),
            k.alpha_z.into(),
            k.beta_xy.into(),
            k.beta_z.into(),
            cov.into(),
            (cov >= COVERAGE_THRESHOLD).into(),
        ]);
    }
    Ok(t)
}

pub fn montecarlo(cfg: &RunConfig, model: SignalModel, trials: usize, n_list: &[usize]) -> Result<Table, CliError> {
    let rows = convergence_sweep(&cfg.params, model, n_list, trials, cfg.seed)?;
    let mut t = Table::new(vec![
        "n",
        "median_xy",
        "p10_xy",
        "p90_xy",
        "median_z",
        "p10_z",
        "p90_z",
        "lcrb_xy",
        "lcrb_z",
        "singular_count",
    ]);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.median_xy.into(),
            r.p10_xy.into(),
            r.p90_xy.into(),
            r.median_z.into(),
            r.p10_z.into(),
            r.p90_z.into(),
            r.lcrb_xy.into(),
            r.lcrb_z.into(),
            r.singular_count.into(),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageQuery {
    Prob,
    MinAngle,
    MinHeight,
}

impl std::str::FromStr for CoverageQuery {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "prob" => Ok(Self::Prob),
            "min_angle" => Ok(Self::MinAngle),
            "min_height" => Ok(Self::MinHeight),
            other => Err(format!("unknown query `{other}` (expected prob, min_angle or min_height)")),
        }
    }
}

/// Degrees back from radians without the round-trip noise in the last digit.
fn degrees(rad: f64) -> f64 {
    (rad.to_degrees() * 1e9).round() / 1e9
}

/// One JSON object: the inputs, then the answer.
pub fn coverage_report(cfg: &RunConfig, query: CoverageQuery, target: f64) -> Result<String, CliError> {
    let p = &cfg.params;
    let mut obj = Map::new();
    let name = match query {
        CoverageQuery::Prob => "prob",
        CoverageQuery::MinAngle => "min_angle",
        CoverageQuery::MinHeight => "min_height",
    };
    obj.insert("query".into(), json!(name));
    obj.insert("n_sats".into(), json!(p.n_sats));
    if query != CoverageQuery::MinHeight {
        obj.insert("h_km".into(), json!(p.h));
    }
    if query != CoverageQuery::MinAngle {
        obj.insert("phi_l_max_deg".into(), json!(degrees(p.phi_l_max)));
    }
    match query {
        CoverageQuery::Prob => {
            let c = coverage(p);
            obj.insert("visibility_prob".into(), json!(c.p));
            obj.insert("coverage_prob".into(), json!(c.p_cov));
        }
        CoverageQuery::MinAngle => {
            obj.insert("target".into(), json!(target));
            let phi = min_angle_for_coverage(p, target)?;
            obj.insert("min_angle_deg".into(), json!(phi.to_degrees()));
            obj.insert("coverage_prob".into(), json!(coverage(&p.with_phi_l_max(phi)).p_cov));
        }
        CoverageQuery::MinHeight => {
            obj.insert("target".into(), json!(target));
            let h = min_height_for_coverage(p, target)?;
            obj.insert("min_height_km".into(), json!(h));
            obj.insert("coverage_prob".into(), json!(coverage(&p.with_h(h)).p_cov));
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).unwrap_or_default();
    s.push('\n');
    Ok(s)
}

/// MSE of the ML estimator next to its bound, one block of rows per mode.
pub fn ml(cfg: &RunConfig, snr_grid: &[f64], trials: usize, modes: &[SolveMode]) -> Result<Table, CliError> {
    let signal = cfg.signal_or_default();
    let geometry = ml_geometry(&cfg.params);
    let search = SearchConfig::default();
    let mut t = Table::new(vec![
        "mode",
        "snr_db",
        "mse_xy",
        "mse_xyz",
        "crb_xy",
        "crb_xyz",
        "outliers",
        "converged_fraction",
    ]);
    for &mode in modes {
        let name = match mode {
            SolveMode::FixZ => "fix_z",
            SolveMode::Full3d => "full_3d",
        };
        let points = mse_experiment(&geometry, &cfg.params, &signal, snr_grid, trials, cfg.seed, mode, &search)?;
        for q in points {
            t.push(vec![
                name.into(),
                q.snr_db.into(),
                q.mse_xy.into(),
                q.mse_xyz.into(),
                q.crb_xy.into(),
                q.crb_xyz.into(),
                q.outliers.into(),
                q.converged_fraction.into(),
            ]);
        }
    }
    Ok(t)
}
