//! Large-constellation bounds in closed form.
//!
//! As N grows, N·CRB converges to a deterministic limit (LCRB) built from a
//! handful of per-satellite expectations over the coverage cup. This module
//! evaluates those expectations exactly, assembles the limits for both
//! signal models, and provides the small/large altitude asymptotics.
//!
//! All expectations are over one satellite placed uniformly on the sphere,
//! with the visibility indicator folded in.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fim::{BoundSet, SignalModel};
use crate::geometry::{d_max, d_max_excess, one_minus_chi_max, SystemParams};
use crate::quadrature::GaussLegendre;

/// Default node count for the quadrature oracle.
pub const DEFAULT_QUADRATURE_NODES: usize = 128;

/// Nodes for the log-distance evaluation of the TDOA limit.
const LOG_DISTANCE_NODES: usize = 64;

/// Relative rounding error tolerated in the literal TDOA formulas before
/// switching to the log-distance evaluation.
const CANCELLATION_BUDGET: f64 = 1e-11;

/// Per-satellite expectations. The K-moments need the (η, ρ) split and are
/// `None` without it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub m_k_sin2: Option<f64>,
    pub m_k_cos2: Option<f64>,
    pub m_l: f64,
    pub m_l_cos: f64,
    pub m_l_sin2: f64,
}

impl MomentSet {
    /// E[L cos²φ_L·1].
    pub fn m_l_cos2(&self) -> f64 {
        self.m_l - self.m_l_sin2
    }
}

/// Altitude asymptotes: ACRB → α as h → 0 and ACRB ~ βh² as h → ∞.
/// Each already carries the 1/(ηρN) factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCoefficients {
    pub alpha_xy: f64,
    pub alpha_z: f64,
    pub beta_xy: f64,
    pub beta_z: f64,
}

/// Cancellation-free building blocks shared by the formulas below.
#[derive(Debug, Clone, Copy)]
struct Cup {
    r: f64,
    h: f64,
    big_r: f64,
    zeta: f64,
    /// D_max.
    d: f64,
    /// D_max − h.
    d_excess: f64,
    /// 1 − χ_max.
    omc: f64,
    /// log(D_max / h).
    lg: f64,
    /// R² − r².
    gap: f64,
}

impl Cup {
    fn new(p: &SystemParams) -> Self {
        let d_excess = d_max_excess(p);
        Self {
            r: p.r,
            h: p.h,
            big_r: p.orbit_radius(),
            zeta: p.zeta(),
            d: d_max(p),
            d_excess,
            omc: one_minus_chi_max(p),
            lg: (d_excess / p.h).ln_1p(),
            gap: p.radius_gap_sq(),
        }
    }

    /// R − rζ² − ζD_max = R(1 − χ_max) + r(1 − ζ²).
    fn a(&self) -> f64 {
        self.big_r * self.omc + self.r * (1.0 - self.zeta) * (1.0 + self.zeta)
    }

    /// R − (r(h − D_max ζ) + hR)/D_max, i.e. R(D−h)(2r − (D−h)) / (2R D).
    fn b(&self) -> f64 {
        self.d_excess * (2.0 * self.r - self.d_excess) / (2.0 * self.d)
    }

    /// D_max² − h².
    fn d2_minus_h2(&self) -> f64 {
        self.d_excess * (self.d + self.h)
    }
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::DegenerateGeometry(format!(
            "{what} is not a positive finite number ({v:e})"
        )))
    }
}

/// Closed-form per-satellite expectations.
pub fn moment_integrals(params: &SystemParams) -> MomentSet {
    let c = Cup::new(params);
    let er = params.eta_rho;
    let (r, big_r) = (c.r, c.big_r);

    let m_l = er * c.lg / (r * big_r);
    let m_l_cos = er * c.d_excess * (2.0 * r - c.d_excess) / (2.0 * r * r * big_r * c.d);
    let m_l_sin2 = 2.0
        * er
        * (c.lg * (big_r * big_r + r * r) / (4.0 * r.powi(3) * big_r)
            - c.omc * (c.d * c.d + r * big_r * (2.0 - c.omc)) / (4.0 * r * r * c.d * c.d));

    let (m_k_sin2, m_k_cos2) = match params.rss_split() {
        Ok((eta, rho)) => {
            let pre = rho / (16.0 * r.powi(3) * big_r);
            let d2h2 = c.d * c.d * c.h * c.h;
            let diff2 = c.d2_minus_h2();
            let diff4 = diff2 * (c.d * c.d + c.h * c.h);
            let sum_sq = big_r * big_r + r * r;
            let g = c.gap;
            let sin2 = pre
                * (4.0 * (2.0 * eta * sum_sq - 1.0) * c.lg
                    - (2.0 * eta * g * g - 4.0 * sum_sq) * diff2 / d2h2
                    - 4.0 * eta * r * big_r * c.omc
                    - g * g * diff4 / (d2h2 * d2h2));
            let cos2 = pre
                * (2.0 * g * (eta * g - 2.0) * diff2 / d2h2
                    - 4.0 * (2.0 * eta * g - 1.0) * c.lg
                    + 4.0 * eta * r * big_r * c.omc
                    + g * g * diff4 / (d2h2 * d2h2));
            (Some(sin2), Some(cos2))
        }
        Err(_) => (None, None),
    };

    MomentSet {
        m_k_sin2,
        m_k_cos2,
        m_l,
        m_l_cos,
        m_l_sin2,
    }
}

/// Local-frame quantities at one point of the cup, for quadrature integrands.
#[derive(Debug, Clone, Copy)]
pub struct CupPoint {
    pub d: f64,
    pub cos_l: f64,
    pub sin2_l: f64,
}

/// E[f·1] = ½ ∫ f dχ over χ ∈ [χ_max, 1], by Gauss–Legendre in w = 1 − χ.
pub fn cup_expectation<F: FnMut(CupPoint) -> f64>(
    params: &SystemParams,
    n_points: usize,
    mut f: F,
) -> f64 {
    let rule = GaussLegendre::new(n_points);
    let (r, h, big_r) = (params.r, params.h, params.orbit_radius());
    let w_max = one_minus_chi_max(params);
    0.5 * rule.integrate(0.0, w_max, |w| {
        let d = (h * h + 2.0 * r * big_r * w).sqrt();
        let cos_l = (h - big_r * w) / d;
        let sin2_l = big_r * big_r * w * (2.0 - w) / (d * d);
        f(CupPoint { d, cos_l, sin2_l })
    })
}

/// The same expectations as [`moment_integrals`], by quadrature straight off
/// the per-satellite information terms.
pub fn quadrature_moments(params: &SystemParams, n_points: usize) -> MomentSet {
    let n = n_points.max(8);
    let er = params.eta_rho;
    let l = |p: &CupPoint| 2.0 * er / (p.d * p.d);
    let m_l = cup_expectation(params, n, |p| l(&p));
    let m_l_cos = cup_expectation(params, n, |p| l(&p) * p.cos_l);
    let m_l_sin2 = cup_expectation(params, n, |p| l(&p) * p.sin2_l);
    let (m_k_sin2, m_k_cos2) = match params.rss_split() {
        Ok((_, rho)) => {
            let k = |p: &CupPoint| l(p) + 2.0 * rho / p.d.powi(4);
            (
                Some(cup_expectation(params, n, |p| k(&p) * p.sin2_l)),
                Some(cup_expectation(params, n, |p| k(&p) * p.cos_l * p.cos_l)),
            )
        }
        Err(_) => (None, None),
    };
    MomentSet {
        m_k_sin2,
        m_k_cos2,
        m_l,
        m_l_cos,
        m_l_sin2,
    }
}

/// TDOA+RSS limit, closed form.
pub fn lcrb_tdoa_rss(params: &SystemParams) -> Result<BoundSet> {
    params.validate()?;
    let (eta, rho) = params.rss_split()?;
    let c = Cup::new(params);
    let (r, h, big_r, g) = (c.r, c.h, c.big_r, c.gap);
    let d2h2 = c.d * c.d * h * h;
    let diff2 = c.d2_minus_h2();
    let diff4 = diff2 * (c.d * c.d + h * h);
    let sum_sq = big_r * big_r + r * r;
    // r(h − Dζ) = rR(1 − χ_max)
    let rim = r * big_r * c.omc;

    let xy_den = 4.0 * (2.0 * eta * sum_sq - 1.0) * c.lg
        - 2.0 * (eta * g * g - 2.0 * sum_sq) * diff2 / d2h2
        - 4.0 * eta * rim
        - g * g * diff4 / (d2h2 * d2h2);
    let xy = 64.0 * big_r * r.powi(3) / (rho * positive(xy_den, "TDOA+RSS xy denominator")?);

    // D(R + rζ) − (R² − r²) = D·r(1−ζ)(√X − h + rζ)/(√X + h + rζ)
    let root = (g + r * r * c.zeta * c.zeta).sqrt();
    let root_minus_h = (2.0 * r * h + r * r * c.zeta * c.zeta) / (root + h);
    let one_minus_zeta = params.one_minus_zeta();
    let e = c.d * r * one_minus_zeta * (root_minus_h + r * c.zeta) / (root + h + r * c.zeta);
    let z_den = 2.0 * g * (eta * g - 2.0) * diff2 / d2h2 - 4.0 * (2.0 * eta * g - 1.0) * c.lg
        + 4.0 * eta * rim
        + g * g * diff4 / (d2h2 * d2h2)
        - 16.0 * eta * e * e / (c.d * c.d * c.lg);
    let z = 16.0 * big_r * r.powi(3) / (rho * positive(z_den, "TDOA+RSS z denominator")?);
    Ok(BoundSet::new(xy, z))
}

/// TDOA+RSS limit assembled from [`MomentSet`].
pub fn lcrb_tdoa_rss_moments(m: &MomentSet) -> Result<BoundSet> {
    let (ks2, kc2) = match (m.m_k_sin2, m.m_k_cos2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::MissingRssSplit),
    };
    let xy = 4.0 / positive(ks2, "E[K sin²]")?;
    let z = m.m_l / positive(kc2 * m.m_l - m.m_l_cos * m.m_l_cos, "z information")?;
    Ok(BoundSet::new(xy, z))
}

/// TDOA limit. Uses the closed form unless its terms cancel too heavily
/// (narrow cones, very high orbits), then the log-distance evaluation.
pub fn lcrb_tdoa(params: &SystemParams) -> Result<BoundSet> {
    params.validate()?;
    let closed = tdoa_closed_terms(params);
    let eps = f64::EPSILON;
    if closed.xy_cond * eps <= CANCELLATION_BUDGET && closed.z_cond * eps <= CANCELLATION_BUDGET {
        return closed.bounds();
    }
    let stable = lcrb_tdoa_log_distance(params)?;
    let xy = if closed.xy_cond * eps <= CANCELLATION_BUDGET {
        closed.bounds()?.xy
    } else {
        stable.xy
    };
    Ok(BoundSet::new(xy, stable.z))
}

/// TDOA limit, literal closed form (with cancellation-free D_max, D_max − h
/// and 1 − χ_max).
pub fn lcrb_tdoa_closed(params: &SystemParams) -> Result<BoundSet> {
    params.validate()?;
    tdoa_closed_terms(params).bounds()
}

struct ClosedTerms {
    eta_rho: f64,
    xy_den: f64,
    z_den: f64,
    xy_cond: f64,
    z_cond: f64,
}

impl ClosedTerms {
    fn bounds(&self) -> Result<BoundSet> {
        let xy = 1.0 / (self.eta_rho * positive(self.xy_den, "TDOA xy denominator")?);
        let z = 1.0 / (self.eta_rho * positive(self.z_den, "TDOA z denominator")?);
        Ok(BoundSet::new(xy, z))
    }
}

fn tdoa_closed_terms(params: &SystemParams) -> ClosedTerms {
    let c = Cup::new(params);
    let (r, big_r) = (c.r, c.big_r);
    let p1 = c.lg * (big_r * big_r + r * r) / (8.0 * big_r * r.powi(3));
    let p2 = c.a() / (8.0 * big_r * r * r);
    let t1 = c.a() / (2.0 * big_r * r * r);
    let t2 = c.gap / (2.0 * r.powi(3) * big_r) * c.lg;
    let b = c.b();
    let t3 = b * b / (r.powi(3) * big_r * c.lg);
    let xy_den = p1 - p2;
    let z_den = t1 - t2 - t3;
    ClosedTerms {
        eta_rho: params.eta_rho,
        xy_den,
        z_den,
        xy_cond: (p1 + p2) / xy_den.abs(),
        z_cond: (t1 + t2 + t3) / z_den.abs(),
    }
}

/// TDOA limit assembled from [`MomentSet`].
pub fn lcrb_tdoa_moments(m: &MomentSet) -> Result<BoundSet> {
    let xy = 4.0 / positive(m.m_l_sin2, "E[L sin²]")?;
    let z = m.m_l / positive(m.m_l_cos2() * m.m_l - m.m_l_cos * m.m_l_cos, "z information")?;
    Ok(BoundSet::new(xy, z))
}

/// TDOA limit evaluated in u = log(D/h).
///
/// Under the weight L the variable u is uniform on [0, log(D_max/h)], and
/// 2r·cos φ_L = (2r+h)e^{−u} − h e^{u}. The z bound is 1/(E[L]·Var cos φ_L);
/// computing the variance around the midpoint keeps every term positive.
pub fn lcrb_tdoa_log_distance(params: &SystemParams) -> Result<BoundSet> {
    params.validate()?;
    let c = Cup::new(params);
    let (r, h) = (c.r, c.h);
    let ell = positive(c.lg, "log(D_max/h)")?;
    let rule = GaussLegendre::new(LOG_DISTANCE_NODES);

    let x = |u: f64| (2.0 * r + h) * (-u).exp() - h * u.exp();
    let sin2 = |u: f64| {
        let lower = -2.0 * r * (-u).exp_m1() + 2.0 * h * u.sinh();
        let upper = 2.0 * r + x(u);
        lower * upper / (4.0 * r * r)
    };
    let mid = 0.5 * ell;
    let dev = |u: f64| {
        let a = (2.0 * r + h) * (-mid).exp() * (mid - u).exp_m1();
        let b = h * mid.exp() * (u - mid).exp_m1();
        (a - b) / (2.0 * r)
    };
    let int_sin2 = rule.integrate(0.0, ell, sin2);
    let mean_dev = rule.integrate(0.0, ell, dev) / ell;
    let mean_dev2 = rule.integrate(0.0, ell, |u| dev(u).powi(2)) / ell;
    let var = mean_dev2 - mean_dev * mean_dev;

    let scale = r * c.big_r / params.eta_rho;
    let xy = 4.0 * scale / positive(int_sin2, "TDOA xy information")?;
    let z = scale / (ell * positive(var, "TDOA z information")?);
    Ok(BoundSet::new(xy, z))
}

/// The limit for either model.
pub fn lcrb(params: &SystemParams, model: SignalModel) -> Result<BoundSet> {
    match model {
        SignalModel::Tdoa => lcrb_tdoa(params),
        SignalModel::TdoaRss => lcrb_tdoa_rss(params),
    }
}

/// Average CRB, LCRB / N.
pub fn acrb(params: &SystemParams, model: SignalModel) -> Result<BoundSet> {
    Ok(lcrb(params, model)?.scaled(1.0 / params.n_sats as f64))
}

/// Altitude asymptotes of the TDOA ACRB.
pub fn limit_coefficients(params: &SystemParams) -> Result<LimitCoefficients> {
    if !(params.phi_l_max > 0.0 && params.phi_l_max <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParams("phi_l_max must lie in (0, pi/2]".into()));
    }
    let phi = params.phi_l_max;
    let zeta = params.zeta();
    let w = params.one_minus_zeta();
    let sin2 = phi.sin().powi(2);
    let ln_zeta = (-w).ln_1p();
    let r2 = params.r * params.r;
    let scale = params.eta_rho * params.n_sats as f64;
    Ok(LimitCoefficients {
        alpha_xy: -8.0 * r2 / (scale * (2.0 * ln_zeta + sin2)),
        alpha_z: 2.0 * r2 / (scale * (sin2 + 2.0 * w * w / ln_zeta)),
        beta_xy: 12.0 / (scale * (zeta + 2.0) * w * w),
        beta_z: 12.0 / (scale * w.powi(3)),
    })
}

/// Two-term approximation α + βh² of the TDOA ACRB.
pub fn aacrb(params: &SystemParams) -> Result<BoundSet> {
    let k = limit_coefficients(params)?;
    let h2 = params.h * params.h;
    Ok(BoundSet::new(k.alpha_xy + k.beta_xy * h2, k.alpha_z + k.beta_z * h2))
}
