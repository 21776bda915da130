//! Probability that the terminal sees enough satellites, and inverse design
//! solvers for the cone angle and altitude.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{one_minus_chi_max, SystemParams};

/// Satellites needed to resolve (x, y, z, T₀).
pub const MIN_VISIBLE: usize = 4;

/// Bisection tolerance for [`min_angle_for_coverage`], radians.
pub const ANGLE_TOLERANCE: f64 = 1e-4;
/// Bisection tolerance for [`min_height_for_coverage`], km.
pub const HEIGHT_TOLERANCE: f64 = 1.0;
/// Upper end of the altitude search, km.
pub const MAX_HEIGHT: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageResult {
    /// One satellite lands in the coverage cup.
    pub p: f64,
    /// At least four satellites land in the cup.
    pub p_cov: f64,
}

/// Probability that a uniformly placed satellite is visible, (1 − χ_max)/2.
pub fn visibility_prob(params: &SystemParams) -> f64 {
    0.5 * one_minus_chi_max(params)
}

pub fn coverage(params: &SystemParams) -> CoverageResult {
    let p = visibility_prob(params);
    CoverageResult {
        p,
        p_cov: binomial_tail(params.n_sats, p, MIN_VISIBLE),
    }
}

/// P(at least four of N satellites visible).
pub fn coverage_prob(params: &SystemParams) -> f64 {
    coverage(params).p_cov
}

fn ln_choose(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// P(X ≥ k) for X ~ Binomial(n, p), evaluated in log space. Whichever side
/// of the distribution is smaller is summed directly so the result keeps
/// its relative accuracy near both 0 and 1.
pub fn binomial_tail(n: usize, p: f64, k: usize) -> f64 {
    if n < k || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let term = |m: usize| (ln_choose(n, m) + m as f64 * ln_p + (n - m) as f64 * ln_q).exp();

    let lower: f64 = (0..k).map(term).sum();
    if lower < 0.5 {
        return (1.0 - lower).clamp(0.0, 1.0);
    }
    // upper side: terms rise to the mode then fall; stop once negligible
    let mode = ((n + 1) as f64 * p).floor() as usize;
    let mut upper = 0.0;
    for m in k..=n {
        let t = term(m);
        upper += t;
        if m > mode && t < 1e-18 * upper {
            break;
        }
    }
    upper.clamp(0.0, 1.0)
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("target probability {target} must lie in (0, 1)")))
    }
}

/// Smallest cone angle whose coverage probability reaches `target`, to
/// within [`ANGLE_TOLERANCE`].
pub fn min_angle_for_coverage(params: &SystemParams, target: f64) -> Result<f64> {
    check_target(target)?;
    let cov = |phi: f64| coverage_prob(&params.with_phi_l_max(phi));
    if cov(FRAC_PI_2) < target {
        return Err(Error::Unachievable {
            target,
            reason: format!("coverage at 90 degrees is only {:.6}", cov(FRAC_PI_2)),
        });
    }
    Ok(bisect(0.0, FRAC_PI_2, ANGLE_TOLERANCE, |phi| cov(phi) >= target))
}

/// Smallest altitude whose coverage probability reaches `target`, to within
/// [`HEIGHT_TOLERANCE`].
pub fn min_height_for_coverage(params: &SystemParams, target: f64) -> Result<f64> {
    check_target(target)?;
    let cov = |h: f64| coverage_prob(&params.with_h(h));
    if cov(MAX_HEIGHT) < target {
        return Err(Error::Unachievable {
            target,
            reason: format!("coverage at {MAX_HEIGHT} km is only {:.6}", cov(MAX_HEIGHT)),
        });
    }
    Ok(bisect(0.0, MAX_HEIGHT, HEIGHT_TOLERANCE, |h| cov(h) >= target))
}

/// Smallest x in (lo, hi] with `ok(x)`, for monotone `ok`; `ok(hi)` holds
/// and `lo` is never evaluated.
fn bisect<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, tol: f64, ok: F) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::d_max;
    use proptest::prelude::*;

    fn at(n: usize, h: f64, phi_deg: f64) -> SystemParams {
        SystemParams::default()
            .with_n_sats(n)
            .with_h(h)
            .with_phi_l_max(phi_deg.to_radians())
    }

    #[test]
    fn both_forms_of_p_agree() {
        for (h, phi) in [(20_000.0, 60.0), (500.0, 10.0), (1e5, 89.0), (2400.0, 30.0)] {
            let p = at(1, h, phi);
            let alt = (h - d_max(&p) * p.zeta()) / (2.0 * p.orbit_radius());
            assert!((visibility_prob(&p) / alt - 1.0).abs() < 1e-12, "h={h}");
        }
        assert!((visibility_prob(&at(1, 20_000.0, 60.0)) - 0.1650).abs() < 1e-4);
    }

    #[test]
    fn p_limits() {
        assert!(visibility_prob(&at(1, 20_000.0, 1e-6)) < 1e-12);
        let far = visibility_prob(&at(1, 1e12, 90.0));
        assert!((far - 0.5).abs() < 1e-6);
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial_tail(10, 0.0, 4), 0.0);
        assert_eq!(binomial_tail(10, 1.0, 4), 1.0);
        assert_eq!(binomial_tail(3, 0.9, 4), 0.0);
        // exact: N=4 needs all four
        assert!((binomial_tail(4, 0.3, 4) - 0.3f64.powi(4)).abs() < 1e-16);
    }

    #[test]
    fn binomial_tail_tiny_and_huge() {
        // P(X ≥ 4) ≈ C(n,4)p⁴ when np ≪ 1
        let (n, p) = (10_000, 1e-8_f64);
        let approx = ln_choose(n, 4).exp() * p.powi(4);
        assert!((binomial_tail(n, p, 4) / approx - 1.0).abs() < 1e-3);
        assert!(binomial_tail(10_000, 0.3, 4) == 1.0);
    }

    #[test]
    fn reported_coverage_points() {
        assert!((coverage_prob(&at(250, 20_000.0, 24.5)) - 0.90).abs() < 0.01);
        assert!((coverage_prob(&at(2000, 20_000.0, 8.7)) - 0.90).abs() < 0.01);
    }

    #[test]
    fn reported_minimal_angles() {
        let a = min_angle_for_coverage(&at(250, 20_000.0, 60.0), 0.9).unwrap();
        assert!((a.to_degrees() - 24.5).abs() < 0.3);
        let b = min_angle_for_coverage(&at(2000, 20_000.0, 60.0), 0.9).unwrap();
        assert!((b.to_degrees() - 8.7).abs() < 0.3);
        let p = at(250, 20_000.0, 60.0);
        assert!(coverage_prob(&p.with_phi_l_max(a)) >= 0.9);
        assert!(coverage_prob(&p.with_phi_l_max(a - ANGLE_TOLERANCE)) < 0.9);
    }

    #[test]
    fn reported_minimal_heights() {
        let a = min_height_for_coverage(&at(200, 20_000.0, 60.0), 0.9).unwrap();
        assert!((a / 2400.0 - 1.0).abs() < 0.1, "{a}");
        let b = min_height_for_coverage(&at(2000, 20_000.0, 60.0), 0.9).unwrap();
        assert!((b / 500.0 - 1.0).abs() < 0.1, "{b}");
        let c = min_height_for_coverage(&at(4, 20_000.0, 60.0), 0.5);
        let d = min_height_for_coverage(&at(200, 20_000.0, 60.0), 0.5).unwrap();
        match c {
            Ok(c) => assert!(c > d),
            Err(e) => assert!(matches!(e, Error::Unachievable { .. })),
        }
    }

    #[test]
    fn tiny_target_gives_tiny_angle() {
        let a = min_angle_for_coverage(&at(250, 20_000.0, 60.0), 1e-9).unwrap();
        assert!(a < 3f64.to_radians());
    }

    #[test]
    fn unachievable_and_invalid_targets() {
        let err = min_angle_for_coverage(&at(4, 20_000.0, 60.0), 0.99).unwrap_err();
        assert!(matches!(err, Error::Unachievable { .. }));
        assert!(matches!(
            min_height_for_coverage(&at(250, 20_000.0, 60.0), 1.0),
            Err(Error::InvalidParams(_))
        ));
    }

    proptest! {
        #[test]
        fn coverage_is_monotone(n in 4usize..3000, h in 100.0..50_000.0f64, phi in 0.05..1.5f64) {
            let base = coverage_prob(&at(n, h, phi.to_degrees()));
            prop_assert!(coverage_prob(&at(n + 10, h, phi.to_degrees())) >= base);
            prop_assert!(coverage_prob(&at(n, h * 1.05, phi.to_degrees())) >= base);
            prop_assert!(coverage_prob(&at(n, h, phi.to_degrees() + 0.5)) >= base);
        }

        #[test]
        fn coverage_bounded_by_any_visible(n in 1usize..3000, p in 0.0..1.0f64) {
            let cov = binomial_tail(n, p, 4);
            prop_assert!((0.0..=1.0).contains(&cov));
            prop_assert!(cov <= 1.0 - (1.0 - p).powi(n as i32) + 1e-12);
        }
    }
}
