use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, Minimum};

/// Refinement restarts after the first Nelder–Mead run.
const MAX_RESTARTS: usize = 8;
use super::pulse::{effective_bandwidth, Pulse};
use super::simulate::{pulse_centre, range_change, usable, Measurement};
use super::SignalConfig;
use crate::error::{Error, Result};
use crate::geometry::SatelliteState;
use crate::linalg::{cholesky, drop_index, spd_inverse, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Altitude known: estimate (x, y, T₀).
    FixZ,
    /// Estimate (x, y, z, T₀).
    Full3d,
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fix_z" => Ok(Self::FixZ),
            "full_3d" => Ok(Self::Full3d),
            other => Err(Error::InvalidParams(format!("unknown solve mode `{other}`"))),
        }
    }
}

impl SolveMode {
    fn required(self) -> usize {
        match self {
            Self::FixZ => 3,
            Self::Full3d => 4,
        }
    }
}

/// Coarse lattice plus local refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Prior guess (x, y, z, c·T₀) in km; the lattice is centred here and in
    /// `FixZ` mode z is held at this value.
    pub center: [f64; 4],
    /// Lattice points per side of the centre, per axis.
    pub half_extent: usize,
    /// Lattice spacing, km; `None` means c/(4W_e).
    pub spacing: Option<f64>,
    /// Step of the c·T₀ scan at each lattice point, km; `None` means c·Δt/2.
    pub b_step: Option<f64>,
    /// Refinement stops when the simplex is this small, km.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            center: [0.0; 4],
            half_extent: 2,
            spacing: None,
            b_step: None,
            tol: 1e-3,
            max_iter: 2000,
        }
    }
}

impl SearchConfig {
    pub fn spacing_for(&self, config: &SignalConfig, pulse: &Pulse) -> f64 {
        self.spacing
            .unwrap_or_else(|| config.c / (4.0 * effective_bandwidth(pulse, config.dt())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocationEstimate {
    /// km.
    pub xi_hat: [f64; 3],
    /// s.
    pub t0_hat: f64,
    /// Least-squares amplitude per measurement, in input order.
    pub amplitudes_hat: Vec<f64>,
    pub converged: bool,
}

/// Matched filter for one window.
struct Channel<'a> {
    samples: &'a [f64],
    sat: SatelliteState,
    /// Correlation with the sampled pulse centred on each sample.
    table: Vec<f64>,
}

impl<'a> Channel<'a> {
    fn new(m: &'a Measurement, sat: SatelliteState, pulse: &Pulse, dt: f64) -> Self {
        let (template, half) = pulse.sampled(dt);
        let n = m.samples.len();
        let table = (0..n)
            .map(|j| {
                let lo = j.saturating_sub(half);
                let hi = (j + half).min(n - 1);
                (lo..=hi)
                    .map(|k| m.samples[k] * template[k + half - j])
                    .sum::<f64>()
                    * dt
            })
            .collect();
        Self {
            samples: &m.samples,
            sat,
            table,
        }
    }

    /// Cubic (Catmull–Rom) interpolation of the correlation table.
    fn interpolated(&self, centre: f64, dt: f64) -> f64 {
        let x = centre / dt;
        let i = x.floor() as i64;
        let n = self.table.len() as i64;
        if i < 1 || i + 2 >= n {
            return 0.0;
        }
        let t = x - i as f64;
        let p = |k: i64| self.table[(i + k) as usize];
        let (p0, p1, p2, p3) = (p(-1), p(0), p(1), p(2));
        p1 + 0.5
            * t
            * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
    }

    /// (⟨r, s_c⟩, ⟨s_c, s_c⟩) for a pulse centred at `centre`.
    fn exact(&self, centre: f64, pulse: &Pulse, dt: f64) -> (f64, f64) {
        let n = self.samples.len();
        let support = pulse.support();
        let lo = ((centre - support) / dt).floor().max(0.0) as usize;
        let hi = (((centre + support) / dt).ceil().max(0.0) as usize).min(n.saturating_sub(1));
        let (mut num, mut den) = (0.0, 0.0);
        for k in lo..=hi {
            let s = pulse.value(k as f64 * dt - centre);
            num += self.samples[k] * s;
            den += s * s;
        }
        (num * dt, den * dt)
    }
}

/// Columns of a map u ↦ θ − θ₀ under which the equal-weight TDOA information
/// at `xi` is isotropic, scaled so the widest direction has unit length.
/// Falls back to the identity when that information is singular.
fn whitening(channels: &[Channel], xi: &[f64; 3], mode: SolveMode) -> Vec<Vec<f64>> {
    const STEP: f64 = 1e-4;
    let mut j: Matrix<4> = [[0.0; 4]; 4];
    for ch in channels {
        let mut g = [0.0, 0.0, 0.0, 1.0];
        for (k, gk) in g.iter_mut().take(3).enumerate() {
            let (mut up, mut down) = (*xi, *xi);
            up[k] += STEP;
            down[k] -= STEP;
            *gk = (range_change(&ch.sat, &up) - range_change(&ch.sat, &down)) / (2.0 * STEP);
        }
        for r in 0..4 {
            for c in 0..4 {
                j[r][c] += g[r] * g[c];
            }
        }
    }
    fn columns<const N: usize>(j: &Matrix<N>) -> Option<Vec<Vec<f64>>> {
        let l = cholesky(&spd_inverse(j).ok()?).ok()?;
        let widest = (0..N)
            .map(|c| (0..N).map(|r| l[r][c] * l[r][c]).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Some((0..N).map(|c| (0..N).map(|r| l[r][c] / widest).collect()).collect())
    }
    let cols = match mode {
        SolveMode::Full3d => columns(&j),
        SolveMode::FixZ => columns(&drop_index(&j, 2)),
    };
    let n = mode.required();
    cols.unwrap_or_else(|| (0..n).map(|c| (0..n).map(|r| f64::from(u8::from(r == c))).collect()).collect())
}

/// Maximum-likelihood (x, y, z, T₀) with the amplitudes profiled out.
///
/// Given the delays, each amplitude's least-squares value is the matched
/// filter output over the pulse energy, which leaves Σ_m ⟨r_m, s_m⟩²/⟨s_m, s_m⟩
/// to maximize. A lattice over ξ with a c·T₀ scan at each node (using
/// interpolated correlation tables) finds the basin, Nelder–Mead on the
/// exact correlations refines it.
pub fn ml_localize(
    measurements: &[Measurement],
    geometry: &[SatelliteState],
    config: &SignalConfig,
    mode: SolveMode,
    search: &SearchConfig,
) -> Result<LocationEstimate> {
    config.validate()?;
    if measurements.len() < mode.required() {
        return Err(Error::InsufficientCoverage {
            visible: measurements.len(),
            required: mode.required(),
        });
    }
    let visible = usable(geometry, 0)?;
    let pulse = config.pulse()?;
    let dt = config.dt();
    let channels: Vec<Channel> = measurements
        .iter()
        .map(|m| {
            let sat = geometry
                .get(m.sat_index)
                .filter(|_| visible.contains(&m.sat_index))
                .ok_or_else(|| {
                    Error::InvalidParams(format!("measurement refers to unknown satellite {}", m.sat_index))
                })?;
            Ok(Channel::new(m, *sat, &pulse, dt))
        })
        .collect::<Result<_>>()?;

    let spacing = search.spacing_for(config, &pulse);
    let b_step = search.b_step.unwrap_or(0.5 * config.c * dt);
    let half = search.half_extent as i64;
    let c0 = search.center;
    let b_span = half as f64 * spacing;
    let b_count = (2.0 * b_span / b_step).round() as i64;

    // coarse: lattice over ξ, c·T₀ scanned at each node
    let z_range = match mode {
        SolveMode::FixZ => 0..=0,
        SolveMode::Full3d => -half..=half,
    };
    let mut best = (f64::NEG_INFINITY, [c0[0], c0[1], c0[2]], c0[3]);
    for ix in -half..=half {
        for iy in -half..=half {
            for iz in z_range.clone() {
                let xi = [
                    c0[0] + ix as f64 * spacing,
                    c0[1] + iy as f64 * spacing,
                    c0[2] + iz as f64 * spacing,
                ];
                let base: Vec<f64> = channels
                    .iter()
                    .map(|ch| pulse_centre(&ch.sat, &xi, 0.0, config))
                    .collect();
                for ib in 0..=b_count {
                    let b = c0[3] - b_span + ib as f64 * b_step;
                    let shift = b / config.c;
                    let score: f64 = channels
                        .iter()
                        .zip(&base)
                        .map(|(ch, c)| ch.interpolated(c + shift, dt).powi(2))
                        .sum();
                    if score > best.0 {
                        best = (score, xi, b);
                    }
                }
            }
        }
    }

    let (_, xi0, b0) = best;
    let unpack = |v: &[f64]| -> ([f64; 3], f64) {
        match mode {
            SolveMode::FixZ => ([v[0], v[1], c0[2]], v[2]),
            SolveMode::Full3d => ([v[0], v[1], v[2]], v[3]),
        }
    };
    let objective = |v: &[f64]| -> f64 {
        let (xi, b) = unpack(v);
        -channels
            .iter()
            .map(|ch| {
                let (num, den) = ch.exact(pulse_centre(&ch.sat, &xi, b, config), &pulse, dt);
                if den > 0.0 {
                    num * num / den
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    };
    let start: Vec<f64> = match mode {
        SolveMode::FixZ => vec![xi0[0], xi0[1], b0],
        SolveMode::Full3d => vec![xi0[0], xi0[1], xi0[2], b0],
    };
    // refine in whitened coordinates so the narrow z/T₀ valley looks round,
    // restarting until the point stops moving
    let basis = whitening(&channels, &xi0, mode);
    let to_theta = |u: &[f64]| -> Vec<f64> {
        (0..start.len())
            .map(|r| start[r] + basis.iter().zip(u).map(|(col, uc)| col[r] * uc).sum::<f64>())
            .collect()
    };
    let whitened = |u: &[f64]| objective(&to_theta(u));
    let step = vec![0.25 * spacing; start.len()];
    let origin = vec![0.0; start.len()];
    let mut min = nelder_mead(&whitened, &origin, &step, search.tol, search.max_iter);
    for _ in 0..MAX_RESTARTS {
        let again = nelder_mead(&whitened, &min.x, &step, search.tol, search.max_iter);
        let moved = again.x.iter().zip(&min.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let converged = min.converged && again.converged;
        min = Minimum { converged, ..again };
        if moved <= search.tol {
            break;
        }
    }

    let (xi, b) = unpack(&to_theta(&min.x));
    let amplitudes_hat = channels
        .iter()
        .map(|ch| {
            let (num, den) = ch.exact(pulse_centre(&ch.sat, &xi, b, config), &pulse, dt);
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();
    Ok(LocationEstimate {
        xi_hat: xi,
        t0_hat: b / config.c,
        amplitudes_hat,
        converged: min.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SystemParams;
    use crate::signal::{ml_geometry, simulate_measurements, Truth};

    fn noiseless() -> SignalConfig {
        SignalConfig {
            n0: 1e-30,
            es_max: 1e4,
            ..SignalConfig::default()
        }
    }

    #[test]
    fn noiseless_recovery() {
        let p = SystemParams::default();
        let g = ml_geometry(&p);
        let cfg = noiseless();
        let truth = Truth {
            xi: [0.21, -0.13, 0.07],
            t0: 0.4 / cfg.c,
        };
        let m = simulate_measurements(&truth, &g, &p, &cfg, 1).unwrap();
        for mode in [SolveMode::Full3d, SolveMode::FixZ] {
            let search = SearchConfig {
                center: [0.0, 0.0, if mode == SolveMode::FixZ { 0.07 } else { 0.0 }, 0.0],
                ..SearchConfig::default()
            };
            let est = ml_localize(&m, &g, &cfg, mode, &search).unwrap();
            assert!(est.converged);
            for k in 0..3 {
                assert!((est.xi_hat[k] - truth.xi[k]).abs() < 1e-3, "{mode:?} {:?}", est.xi_hat);
            }
            assert!((est.t0_hat - truth.t0).abs() * cfg.c < 1e-3);
        }
    }

    #[test]
    fn profiled_amplitude_is_matched_filter_over_energy() {
        let p = SystemParams::default();
        let g = ml_geometry(&p);
        let cfg = SignalConfig::default().with_snr_db(30.0);
        let m = simulate_measurements(&Truth::default(), &g, &p, &cfg, 3).unwrap();
        let est = ml_localize(&m, &g, &cfg, SolveMode::Full3d, &SearchConfig::default()).unwrap();
        let pulse = cfg.pulse().unwrap();
        let dt = cfg.dt();
        let b = est.t0_hat * cfg.c;
        for (meas, a_hat) in m.iter().zip(&est.amplitudes_hat) {
            let centre = pulse_centre(&g[meas.sat_index], &est.xi_hat, b, &cfg);
            let (mut num, mut den) = (0.0, 0.0);
            for (k, r) in meas.samples.iter().enumerate() {
                let s = pulse.value(k as f64 * dt - centre);
                num += r * s * dt;
                den += s * s * dt;
            }
            assert!((a_hat - num / den).abs() < 1e-9 * a_hat.abs());
        }
    }

    #[test]
    fn interpolated_table_matches_exact_correlation() {
        let p = SystemParams::default();
        let g = ml_geometry(&p);
        let cfg = SignalConfig::default().with_snr_db(20.0);
        let m = simulate_measurements(&Truth::default(), &g, &p, &cfg, 4).unwrap();
        let pulse = cfg.pulse().unwrap();
        let ch = Channel::new(&m[0], g[0], &pulse, cfg.dt());
        for frac in [0.0, 0.25, 0.5, 0.9] {
            let centre = (600.0 + frac) * cfg.dt();
            let (exact, _) = ch.exact(centre, &pulse, cfg.dt());
            let approx = ch.interpolated(centre, cfg.dt());
            assert!((approx - exact).abs() < 1e-3 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn common_time_shift_moves_only_t0() {
        let p = SystemParams::default();
        let g = ml_geometry(&p);
        let cfg = SignalConfig::default().with_snr_db(30.0);
        let shift = 0.3e-6;
        let a = simulate_measurements(&Truth::default(), &g, &p, &cfg, 8).unwrap();
        let b = simulate_measurements(&Truth { xi: [0.0; 3], t0: shift }, &g, &p, &cfg, 8).unwrap();
        let s = SearchConfig::default();
        let ea = ml_localize(&a, &g, &cfg, SolveMode::Full3d, &s).unwrap();
        let eb = ml_localize(&b, &g, &cfg, SolveMode::Full3d, &s).unwrap();
        // same noise realization, pulses shifted by exactly `shift`
        for k in 0..3 {
            assert!((ea.xi_hat[k] - eb.xi_hat[k]).abs() < 0.02, "{:?} {:?}", ea.xi_hat, eb.xi_hat);
        }
        assert!(((eb.t0_hat - ea.t0_hat) - shift).abs() * cfg.c < 0.02);
    }

    #[test]
    fn needs_enough_measurements() {
        let p = SystemParams::default();
        let g = ml_geometry(&p);
        let cfg = SignalConfig::default();
        let m = simulate_measurements(&Truth::default(), &g, &p, &cfg, 1).unwrap();
        let err = ml_localize(&m[..3], &g, &cfg, SolveMode::Full3d, &SearchConfig::default());
        assert!(matches!(err, Err(Error::InsufficientCoverage { .. })));
        assert!(ml_localize(&m[..3], &g, &cfg, SolveMode::FixZ, &SearchConfig::default()).is_ok());
    }
}
