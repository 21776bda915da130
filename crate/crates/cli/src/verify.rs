//! Cross-checks between independent routes to the same quantities.

use std::fmt;

use satcrb::closed_form::{
    lcrb_tdoa, lcrb_tdoa_closed, lcrb_tdoa_moments, moment_integrals, quadrature_moments,
    DEFAULT_QUADRATURE_NODES,
};
use satcrb::montecarlo::convergence_sweep;
use satcrb::planar::{planar_crb_closed, planar_crb_fim, sample_sensors};
use satcrb::signal::{decoupling_check, ml_geometry};
use satcrb::{SignalModel, SystemParams};

use crate::config::RunConfig;
use crate::CliError;

pub const MOMENT_TOLERANCE: f64 = 1e-8;
pub const ROUTE_TOLERANCE: f64 = 1e-9;
pub const MONTE_CARLO_TOLERANCE: f64 = 0.05;
pub const PLANAR_TOLERANCE: f64 = 1e-10;
pub const DECOUPLING_TOLERANCE: f64 = 1e-3;

const MC_SATELLITES: usize = 2000;
const MC_TRIALS: usize = 200;
const PLANAR_CASES: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value < self.limit
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<22} {:.3e} (limit {:.0e})", self.name, self.value, self.limit)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let r = (a / b - 1.0).abs();
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

/// The (h, φ_L,max) grid shared by the moment and route checks: h from 500
/// to 40000 km geometrically, φ from 20° to 90°.
pub fn check_grid(base: &SystemParams) -> Vec<SystemParams> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            let h = 500.0 * 80f64.powf(i as f64 / 9.0);
            let phi = (20.0 + 70.0 * j as f64 / 9.0).to_radians();
            out.push(base.with_h(h).with_phi_l_max(phi));
        }
    }
    out
}

/// Runs every check. `perturb` scales ηρ on one side of each comparison,
/// which every check must then catch.
pub fn run_checks(cfg: &RunConfig, perturb: Option<f64>) -> Result<Vec<Check>, CliError> {
    let k = perturb.unwrap_or(1.0);
    let base = cfg.params;
    let skewed = |p: &SystemParams| p.with_eta_rho(p.eta_rho * k);
    let grid = check_grid(&base.with_split(1e-3, base.eta_rho / 1e-3));

    let mut moments = 0.0f64;
    for p in &grid {
        let a = moment_integrals(p);
        let q = quadrature_moments(&skewed(p), DEFAULT_QUADRATURE_NODES);
        for (x, y) in [
            (a.m_l, q.m_l),
            (a.m_l_cos, q.m_l_cos),
            (a.m_l_sin2, q.m_l_sin2),
            (a.m_k_sin2.unwrap_or(f64::NAN), q.m_k_sin2.unwrap_or(f64::NAN)),
            (a.m_k_cos2.unwrap_or(f64::NAN), q.m_k_cos2.unwrap_or(f64::NAN)),
        ] {
            moments = moments.max(rel(x, y));
        }
    }

    let mut routes = 0.0f64;
    for p in &grid {
        let closed = lcrb_tdoa_closed(p)?;
        let via = lcrb_tdoa_moments(&moment_integrals(&skewed(p)))?;
        routes = routes.max(rel(closed.xy, via.xy)).max(rel(closed.z, via.z));
    }

    let row = convergence_sweep(
        &base.with_n_sats(MC_SATELLITES),
        SignalModel::Tdoa,
        &[MC_SATELLITES],
        MC_TRIALS,
        cfg.seed,
    )?[0];
    let limit = lcrb_tdoa(&skewed(&base))?;
    let monte_carlo = rel(row.median_xy, limit.xy).max(rel(row.median_z, limit.z));

    let mut planar = 0.0f64;
    for i in 0..PLANAR_CASES {
        let s = sample_sensors(cfg.seed, i);
        let t = satcrb::planar::PlanarSensors { rho: s.rho * k, ..s.clone() };
        planar = planar.max(rel(planar_crb_closed(&s)?, planar_crb_fim(&t)?));
    }

    let geometry = ml_geometry(&base);
    let decoupling = decoupling_check(&geometry, &base, &cfg.signal_or_default())?;

    Ok(vec![
        Check { name: "moments-quadrature", value: moments, limit: MOMENT_TOLERANCE },
        Check { name: "limit-routes", value: routes, limit: ROUTE_TOLERANCE },
        Check { name: "montecarlo-limit", value: monte_carlo, limit: MONTE_CARLO_TOLERANCE },
        Check { name: "planar-closed-fim", value: planar, limit: PLANAR_TOLERANCE },
        Check { name: "amplitude-decoupling", value: decoupling, limit: DECOUPLING_TOLERANCE },
    ])
}
