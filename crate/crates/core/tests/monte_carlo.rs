use satcrb::closed_form::{lcrb, moment_integrals};
use satcrb::coverage::coverage_prob;
use satcrb::fim::{crb_from_fim, fim_tdoa, fim_tdoa_rss};
use satcrb::geometry::sample_constellation_stream;
use satcrb::montecarlo::{convergence_sweep, crb_distribution, mean_fim, CrbDistribution};
use satcrb::{SignalModel, SystemParams};

#[test]
fn median_scaled_crb_approaches_the_limit() {
    let p = SystemParams::default();
    let rows = convergence_sweep(&p, SignalModel::Tdoa, &[2000], 200, 1).unwrap();
    let row = rows[0];
    assert!((row.median_xy / row.lcrb_xy - 1.0).abs() < 0.05, "{row:?}");
    assert!((row.median_z / row.lcrb_z - 1.0).abs() < 0.05, "{row:?}");
    assert_eq!(row.singular_count, 0);
}

#[test]
fn spread_shrinks_with_more_satellites() {
    let p = SystemParams::default();
    let rows = convergence_sweep(&p, SignalModel::Tdoa, &[100, 1000], 300, 4).unwrap();
    let width = |r: &satcrb::montecarlo::ConvergenceRow| (r.p90_xy - r.p10_xy) / r.median_xy;
    assert!(width(&rows[1]) < width(&rows[0]));
}

#[test]
fn concentration_around_the_median() {
    let p = SystemParams::default().with_n_sats(420);
    let d = crb_distribution(&p, SignalModel::Tdoa, 2000, 1).unwrap();
    assert!(CrbDistribution::fraction_near_median(&d.samples_z, 0.5) >= 0.75);
    assert!(CrbDistribution::fraction_near_median(&d.samples_xy, 0.36) >= 0.75);
}

#[test]
fn amplitude_information_never_hurts() {
    let p = SystemParams::default().with_n_sats(60).with_split(1e-3, 6.4e16);
    for trial in 0..200 {
        let sats = sample_constellation_stream(&p, 7, trial).visible_states(&p);
        if sats.len() < 4 {
            continue;
        }
        let (Ok(t), Ok(tr)) = (
            crb_from_fim(&fim_tdoa(&sats, &p)),
            crb_from_fim(&fim_tdoa_rss(&sats, &p).unwrap()),
        ) else {
            continue;
        };
        assert!(tr.xy <= t.xy * (1.0 + 1e-12) && tr.z <= t.z * (1.0 + 1e-12));
    }
}

#[test]
fn coverage_formula_matches_simulation() {
    for (n, h, phi) in [(250usize, 20000.0, 24.5f64), (40, 20000.0, 60.0), (20, 5000.0, 60.0)] {
        let p = SystemParams::default().with_n_sats(n).with_h(h).with_phi_l_max(phi.to_radians());
        let trials = 4000;
        let covered = (0..trials)
            .filter(|&k| sample_constellation_stream(&p, 3, k).visible_states(&p).len() >= 4)
            .count();
        let empirical = covered as f64 / trials as f64;
        let exact = coverage_prob(&p);
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt().max(1e-3);
        assert!((empirical - exact).abs() < 4.0 * sigma, "N={n}: {empirical} vs {exact}");
    }
}

#[test]
fn mean_information_has_block_structure() {
    let p = SystemParams::default();
    let j = mean_fim(&p, SignalModel::Tdoa, 100_000, 1).unwrap();
    let m = moment_integrals(&p);
    let smallest = (0..4).map(|i| j.m[i][i]).fold(f64::INFINITY, f64::min);
    for (a, b) in [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)] {
        assert!(j.m[a][b].abs() < 0.02 * smallest, "({a},{b}) = {}", j.m[a][b]);
    }
    assert!((j.m[3][3] / m.m_l - 1.0).abs() < 0.01, "{} vs {}", j.m[3][3], m.m_l);
}

#[test]
fn limit_is_the_tdoa_scale_of_the_mean_information() {
    // the limit is the inverse of the mean information with its z/T₀ block
    let p = SystemParams::default();
    let j = mean_fim(&p, SignalModel::Tdoa, 200_000, 2).unwrap();
    let b = crb_from_fim(&j).unwrap();
    let limit = lcrb(&p, SignalModel::Tdoa).unwrap();
    assert!((b.xy / limit.xy - 1.0).abs() < 0.05, "{} {}", b.xy, limit.xy);
    assert!((b.z / limit.z - 1.0).abs() < 0.05, "{} {}", b.z, limit.z);
}
