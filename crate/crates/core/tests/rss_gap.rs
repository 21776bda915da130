//! How much the amplitude (RSS) term adds on top of timing information.

use satcrb::closed_form::{lcrb_tdoa, lcrb_tdoa_rss};
use satcrb::fim::{crb_from_fim, fim_tdoa, fim_tdoa_rss, BoundSet};
use satcrb::geometry::sample_constellation_stream;
use satcrb::signal::{effective_bandwidth, SignalConfig};
use satcrb::SystemParams;

/// Split with the given ηh², keeping ηρ fixed.
fn split(base: SystemParams, eta_h2: f64) -> SystemParams {
    let eta = eta_h2 / (base.h * base.h);
    base.with_split(eta, base.eta_rho / eta)
}

fn gap(tdoa: BoundSet, rss: BoundSet) -> f64 {
    ((tdoa.xy - rss.xy) / tdoa.xy).max((tdoa.z - rss.z) / tdoa.z)
}

fn median_gap(p: &SystemParams) -> f64 {
    let mut gaps: Vec<f64> = (0..300)
        .filter_map(|k| {
            let s = sample_constellation_stream(p, 11, k).visible_states(p);
            let t = crb_from_fim(&fim_tdoa(&s, p)).ok()?;
            let r = crb_from_fim(&fim_tdoa_rss(&s, p).ok()?).ok()?;
            Some(gap(t, r))
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

#[test]
fn gap_falls_as_one_over_eta_h2() {
    let base = SystemParams::default().with_n_sats(50);
    let g6 = median_gap(&split(base, 1e6));
    let g8 = median_gap(&split(base, 1e8));
    assert!(g6 > 0.0 && g8 > 0.0);
    assert!((g6 / g8 / 100.0 - 1.0).abs() < 0.02, "{g6} {g8}");
}

#[test]
fn limit_gap_falls_as_one_over_eta_h2() {
    let base = SystemParams::default();
    let at = |eta_h2| {
        let p = split(base, eta_h2);
        gap(lcrb_tdoa(&p).unwrap(), lcrb_tdoa_rss(&p).unwrap())
    };
    let (a, b) = (at(1e6), at(1e9));
    assert!(a > 0.0 && (a / b / 1000.0 - 1.0).abs() < 1e-2, "{a} {b}");
}

#[test]
fn rss_information_vanishes_for_large_eta() {
    let p = split(SystemParams::default().with_n_sats(50), 1e12);
    let s = sample_constellation_stream(&p, 2, 0).visible_states(&p);
    let (j, k) = (fim_tdoa(&s, &p), fim_tdoa_rss(&s, &p).unwrap());
    for a in 0..4 {
        for b in 0..4 {
            let scale = j.m[a][a].max(j.m[b][b]);
            assert!((j.m[a][b] - k.m[a][b]).abs() < 1e-9 * scale);
        }
    }
}

#[test]
fn bandwidth_threshold_example() {
    let p = SystemParams {
        c: 3e5,
        ..SystemParams::default()
    };
    assert_eq!(p.rss_negligible_bandwidth(), 15.0);
    let cfg = SignalConfig::default();
    let we = effective_bandwidth(&cfg.pulse().unwrap(), cfg.dt());
    assert!(we > 1e3 * p.rss_negligible_bandwidth());
}
