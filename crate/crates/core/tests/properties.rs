use proptest::prelude::*;

use reinsurance_game::bargaining::{bargaining_product_oracle, total_welfare, welfare};
use reinsurance_game::contract::Indemnity;
use reinsurance_game::game::{
    f1, f2, gamma_bar_1, gamma_bar_2, nash_equilibria, stackelberg, Leader, LowerThreshold, UpperThreshold,
};
use reinsurance_game::{rho, DistortionFamily, GameSpec, LossDistribution, PayoutSlice, RiskAversion};

fn ra(v: f64) -> RiskAversion {
    RiskAversion::new(v).unwrap()
}

fn family() -> impl Strategy<Value = DistortionFamily> {
    prop_oneof![
        (0.5f64..0.995).prop_map(|a| DistortionFamily::mean_cvar(a).unwrap()),
        Just(DistortionFamily::ProportionalHazard),
    ]
}

fn distribution() -> impl Strategy<Value = LossDistribution> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| LossDistribution::exponential(r).unwrap()),
        (-1.0f64..1.0, 0.1f64..1.0).prop_map(|(m, s)| LossDistribution::lognormal(m, s).unwrap()),
        (0.0f64..2.0, 0.1f64..3.0).prop_map(|(a, w)| LossDistribution::uniform(a, a + w).unwrap()),
        prop::collection::vec(0.0f64..20.0, 2..40)
            .prop_filter("needs two distinct values", |v| v.iter().any(|&x| x != v[0]))
            .prop_map(|v| LossDistribution::empirical(&v, None).unwrap()),
    ]
}

fn indemnity(dist: &LossDistribution, cells: usize, slopes: &[f64]) -> Indemnity {
    let grid = Indemnity::quantile_grid(dist, cells).unwrap();
    let marginal = (0..grid.len()).map(|k| slopes[k % slopes.len()]).collect();
    Indemnity::new(grid, marginal).unwrap()
}

fn game() -> impl Strategy<Value = GameSpec> {
    (family(), distribution(), 0.0f64..=1.0, 0.0f64..=1.0, 0.01f64..0.99)
        .prop_map(|(f, d, g1, g2, delta)| GameSpec::new(f, d, ra(g1), ra(g2), delta).unwrap())
}

/// Only games where a contract can be traded.
fn gainful_game() -> impl Strategy<Value = GameSpec> {
    (family(), distribution(), 0.05f64..=1.0, 0.0f64..0.95, 0.01f64..0.99)
        .prop_filter("needs gamma1 > gamma2 by a margin", |(_, _, g1, g2, _)| g1 - g2 > 0.02)
        .prop_map(|(f, d, g1, g2, delta)| GameSpec::new(f, d, ra(g1), ra(g2), delta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn comonotonic_additivity(
        f in family(),
        d in distribution(),
        g in 0.0f64..=1.0,
        cells in 1usize..24,
        slopes in prop::collection::vec(0.0f64..=1.0, 1..8),
    ) {
        let i = indemnity(&d, cells, &slopes);
        let whole = rho(&f, &d, PayoutSlice::whole(), ra(g)).unwrap();
        let ceded = rho(&f, &d, PayoutSlice::ceded(&i), ra(g)).unwrap();
        let kept = rho(&f, &d, PayoutSlice::retained(&i), ra(g)).unwrap();
        prop_assert!((whole - ceded - kept).abs() <= 1e-8, "{whole} vs {ceded} + {kept}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn monotone_in_gamma(f in family(), d in distribution(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r_lo = rho(&f, &d, PayoutSlice::whole(), ra(lo)).unwrap();
        let r_hi = rho(&f, &d, PayoutSlice::whole(), ra(hi)).unwrap();
        prop_assert!(r_lo <= r_hi + 1e-10);
        if hi - lo > 1e-3 {
            prop_assert!(r_lo < r_hi);
        }
    }

    #[test]
    fn distortion_normalised(f in family(), g in 0.0f64..=1.0, s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        prop_assert_eq!(f.distortion(0.0, ra(g)), 0.0);
        prop_assert!((f.distortion(1.0, ra(g)) - 1.0).abs() < 1e-15);
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        prop_assert!(f.distortion(lo, ra(g)) <= f.distortion(hi, ra(g)));
    }

    #[test]
    fn cash_invariance(f in family(), d in distribution(), g in 0.0f64..=1.0, c in -5.0f64..5.0) {
        let plain = rho(&f, &d, PayoutSlice::whole(), ra(g)).unwrap();
        let shifted = rho(&f, &d, PayoutSlice::whole().plus_cash(c), ra(g)).unwrap();
        prop_assert!((shifted - plain - c).abs() < 1e-12);
        prop_assert!((rho(&f, &d, PayoutSlice::cash(c), ra(g)).unwrap() - c).abs() < 1e-15);
    }

    #[test]
    fn gains_add_up(s in game(), z1 in 0.0f64..=1.0, z2 in 0.0f64..=1.0) {
        let w = welfare(&s, ra(z1), ra(z2)).unwrap();
        let total = total_welfare(&s, ra(z1), ra(z2)).unwrap();
        prop_assert!((w.wg1_hat + w.wg2_hat - total).abs() < 1e-9);
        prop_assert!(w.premium >= 0.0);
    }

    #[test]
    fn acceptance_gate(s in game(), z1 in 0.0f64..=1.0, z2 in 0.0f64..=1.0) {
        let w = welfare(&s, ra(z1), ra(z2)).unwrap();
        prop_assert!(w.wg1 >= 0.0 && w.wg2 >= 0.0);
        if w.wg1_hat >= 0.0 && w.wg2_hat >= 0.0 {
            prop_assert_eq!((w.wg1, w.wg2), (w.wg1_hat, w.wg2_hat));
        } else {
            prop_assert_eq!((w.wg1, w.wg2), (0.0, 0.0));
        }
    }

    #[test]
    fn thresholds_exclusive(s in gainful_game()) {
        let upper_inside = matches!(gamma_bar_1(&s).unwrap(), UpperThreshold::At(v) if v.value() < 1.0);
        let lower_inside = matches!(gamma_bar_2(&s).unwrap(), LowerThreshold::At(v) if v.value() > 0.0);
        prop_assert!(!(upper_inside && lower_inside));
    }

    #[test]
    fn diagonal_equilibria(s in gainful_game(), t in 0.0f64..=1.0) {
        let (g1, g2) = (s.gamma1.value(), s.gamma2.value());
        let g = g2 + t * (g1 - g2);
        let w = welfare(&s, ra(g), ra(g)).unwrap();
        let r = |v: f64| s.rho_whole(ra(v)).unwrap();
        prop_assert!((w.wg1 - (r(g1) - r(g))).abs() < 1e-9);
        prop_assert!((w.wg2 - (r(g) - r(g2))).abs() < 1e-9);
        prop_assert!((w.wg1 + w.wg2 - (r(g1) - r(g2))).abs() < 1e-9);
        prop_assert!(nash_equilibria(&s).unwrap().contains(g, g));
    }

    #[test]
    fn premium_ignores_bargaining_power_on_diagonal(s in gainful_game(), t in 0.0f64..=1.0) {
        let g = s.gamma2.value() + t * (s.gamma1.value() - s.gamma2.value());
        let premiums: Vec<u64> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&d| welfare(&s.with_delta(d).unwrap(), ra(g), ra(g)).unwrap().premium.to_bits())
            .collect();
        prop_assert!(premiums.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn reinsurer_gain_rises_along_diagonal(s in gainful_game(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let (g1, g2) = (s.gamma1.value(), s.gamma2.value());
        let at = |t: f64| welfare(&s, ra(g2 + t * (g1 - g2)), ra(g2 + t * (g1 - g2))).unwrap().wg2;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(at(lo) < at(hi));
    }

    #[test]
    fn stackelberg_points_are_equilibria(s in gainful_game()) {
        let report = nash_equilibria(&s).unwrap();
        for leader in [Leader::Insurer, Leader::Reinsurer] {
            let o = stackelberg(&s, leader).unwrap();
            prop_assert!(report.contains(o.zeta1.value(), o.zeta2.value()));
        }
        let lead = stackelberg(&s, Leader::Reinsurer).unwrap().welfare.wg2;
        for k in 0..=20 {
            let g = if k == 20 {
                s.gamma1.value()
            } else {
                s.gamma2.value() + k as f64 / 20.0 * (s.gamma1.value() - s.gamma2.value())
            };
            let w = welfare(&s, ra(g), ra(g)).unwrap().wg2;
            if k < 20 {
                prop_assert!(lead > w);
            } else {
                prop_assert!((lead - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn indifference_curves_decrease(s in gainful_game(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        prop_assume!((a - b).abs() > 1e-2);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let top = gamma_bar_1(&s).unwrap().value().unwrap_or(1.0);
        let g1 = s.gamma1.value();
        if top > g1 + 1e-6 {
            let at = |t: f64| f2(&s, ra(g1 + (0.01 + 0.99 * t) * (top - g1))).unwrap();
            prop_assert!(at(lo) >= at(hi));
        }
        let bottom = gamma_bar_2(&s).unwrap().value().unwrap_or(0.0);
        let g2 = s.gamma2.value();
        if g2 > bottom + 1e-6 {
            let at = |t: f64| f1(&s, ra(bottom + 0.99 * t * (g2 - bottom))).unwrap();
            prop_assert!(at(lo) >= at(hi));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bargaining_oracle_agrees(
        f in family(),
        d in distribution(),
        z2 in 0.0f64..0.9,
        gap in 0.05f64..0.5,
        delta in 0.05f64..0.95,
    ) {
        let z1 = (z2 + gap).min(1.0);
        let s = GameSpec::new(f, d, ra(z1), ra(z2), delta).unwrap();
        let direct = bargaining_product_oracle(&s, ra(z1), ra(z2)).unwrap();
        let formula = welfare(&s, ra(z1), ra(z2)).unwrap().premium;
        prop_assert!((direct - formula).abs() < 1e-6, "{direct} vs {formula}");
    }
}
