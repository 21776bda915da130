//! Limit bounds against values computed independently at 50 significant
//! digits (mpmath, adaptive quadrature of the moment integrals).

use satcrb::closed_form::{
    aacrb, acrb, lcrb_tdoa, lcrb_tdoa_closed, lcrb_tdoa_moments, lcrb_tdoa_rss, limit_coefficients,
    moment_integrals, quadrature_moments, DEFAULT_QUADRATURE_NODES,
};
use satcrb::{SignalModel, SystemParams};

fn params(phi_deg: f64, h: f64) -> SystemParams {
    SystemParams::default().with_phi_l_max(phi_deg.to_radians()).with_h(h)
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

// (φ_L,max in degrees, h in km, LCRB_xy, LCRB_z) at ηρ = 6.4e13, r = 6371
const REFERENCE: [(f64, f64, f64, f64); 12] = [
    (60.0, 0.01, 7.9738774938626132e-6, 4.4269556952252298e-5),
    (60.0, 2400.0, 1.9481522216113715e-5, 1.0157605831813961e-4),
    (60.0, 20000.0, 2.0536868757176749e-4, 1.0308220283259835e-3),
    (60.0, 1e6, 0.30383154999344463, 1.5191617074715414),
    (60.0, 1e8, 3000.3822689500169, 15001.911348707578),
    (10.0, 20000.0, 0.18916413420099629, 37.170373312715222),
    (10.0, 1e8, 2722050.7586779415, 534798981.03331535),
    (90.0, 0.01, 3.8855653459703587e-7, 1.7704424162918095e-6),
    (90.0, 20000.0, 6.3652185426995287e-5, 1.2807228195178116e-4),
    (2.0, 0.01, 6.8348204190617274, 33656.088215132155),
    (2.0, 20000.0, 117.14664457566414, 576799.47044013678),
    (2.0, 1e8, 1684776453.3939544, 8295349922428.3351),
];

#[test]
fn tdoa_limit_matches_high_precision_reference() {
    for (phi, h, xy, z) in REFERENCE {
        let b = lcrb_tdoa(&params(phi, h)).unwrap();
        assert!(rel(b.xy, xy) < 1e-9, "xy at φ={phi} h={h}: {} vs {xy}", b.xy);
        assert!(rel(b.z, z) < 1e-9, "z at φ={phi} h={h}: {} vs {z}", b.z);
    }
}

#[test]
fn rss_limit_at_defaults() {
    let p = SystemParams::default().with_split(1e-3, 6.4e16);
    let b = lcrb_tdoa_rss(&p).unwrap();
    assert!(rel(b.xy, 2.0536824879e-4) < 1e-9, "{}", b.xy);
    assert!(rel(b.z, 1.0307564659e-3) < 1e-9, "{}", b.z);
    let tdoa = lcrb_tdoa(&p).unwrap();
    assert!(b.xy < tdoa.xy && b.z < tdoa.z);
}

#[test]
fn closed_and_moment_routes_on_a_grid() {
    for i in 0..10 {
        for j in 0..10 {
            let h = 500.0 * (80f64).powf(i as f64 / 9.0);
            let phi = 20.0 + 70.0 * j as f64 / 9.0;
            let p = params(phi, h);
            let closed = lcrb_tdoa_closed(&p).unwrap();
            let moments = lcrb_tdoa_moments(&moment_integrals(&p)).unwrap();
            assert!(rel(closed.xy, moments.xy) < 1e-9, "φ={phi} h={h}");
            assert!(rel(closed.z, moments.z) < 1e-9, "φ={phi} h={h}");
        }
    }
}

#[test]
fn moments_match_quadrature_on_a_grid() {
    for i in 0..10 {
        for j in 0..10 {
            let h = 500.0 * (80f64).powf(i as f64 / 9.0);
            let phi = 20.0 + 70.0 * j as f64 / 9.0;
            let p = params(phi, h).with_split(1e-3, 6.4e16);
            let a = moment_integrals(&p);
            let q = quadrature_moments(&p, DEFAULT_QUADRATURE_NODES);
            for (x, y) in [
                (a.m_l, q.m_l),
                (a.m_l_cos, q.m_l_cos),
                (a.m_l_sin2, q.m_l_sin2),
                (a.m_k_sin2.unwrap(), q.m_k_sin2.unwrap()),
                (a.m_k_cos2.unwrap(), q.m_k_cos2.unwrap()),
            ] {
                assert!(rel(x, y) < 1e-8, "φ={phi} h={h}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn acrb_reaches_both_asymptotes() {
    let base = SystemParams::default();
    let k = limit_coefficients(&base).unwrap();
    let low = acrb(&base.with_h(0.01), SignalModel::Tdoa).unwrap();
    assert!(rel(low.xy, k.alpha_xy) < 1e-3);
    assert!(rel(low.z, k.alpha_z) < 1e-3);
    let h = 1e8;
    let high = acrb(&base.with_h(h), SignalModel::Tdoa).unwrap();
    assert!(rel(high.xy, k.beta_xy * h * h) < 1e-3);
    assert!(rel(high.z, k.beta_z * h * h) < 1e-3);
}

#[test]
fn two_term_approximation_tracks_acrb() {
    // the approximation overshoots in the mid range; record how far
    let base = SystemParams::default();
    let mut worst = 1.0f64;
    for i in 0..=200 {
        let h = 500.0 * (80f64).powf(i as f64 / 200.0);
        let p = base.with_h(h);
        let a = acrb(&p, SignalModel::Tdoa).unwrap();
        let b = aacrb(&p).unwrap();
        for (x, y) in [(a.xy, b.xy), (a.z, b.z)] {
            worst = worst.max((x / y).max(y / x));
        }
    }
    assert!(worst > 1.0 && worst < 3.0, "{worst}");
}
