use liquidspeed::analytic::*;
use liquidspeed::{ModelParams, Regime};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn params() -> impl Strategy<Value = ModelParams> {
    (
        log_uniform(1e-2, 1e2),
        log_uniform(1e-2, 1e2),
        log_uniform(1e-2, 1e2),
        log_uniform(1e-3, 1e2),
    )
        .prop_map(|(d, m, s, k)| ModelParams::new(d, m, s, k).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn on_demand_races_faster_and_pays_more_for_speed(p in params()) {
        let pc = equilibrium_point(&p, Regime::PreCommitment).unwrap();
        let od = equilibrium_point(&p, Regime::OnDemand).unwrap();
        prop_assert!(od.lambda_star > pc.lambda_star);
        prop_assert!(od.speed_price > pc.speed_price);
        prop_assert!(od.price_discovery_time < pc.price_discovery_time);
    }

    #[test]
    fn precommitment_uses_more_resources_and_earns_more(p in params()) {
        let pc = equilibrium_point(&p, Regime::PreCommitment).unwrap();
        let od = equilibrium_point(&p, Regime::OnDemand).unwrap();
        prop_assert!(pc.resource_usage > od.resource_usage);
        prop_assert!(pc.hft_rent > od.hft_rent);
        let idle = 2.0 * pc.lambda_star / (p.delta + p.mu);
        let diff = pc.resource_usage - od.resource_usage;
        prop_assert!((diff - idle).abs() <= 1e-12 * pc.resource_usage);
    }

    #[test]
    fn spread_shared_and_free_of_kappa(p in params(), k2 in log_uniform(1e-3, 1e2)) {
        let pc = equilibrium_point(&p, Regime::PreCommitment).unwrap();
        let od = equilibrium_point(&p, Regime::OnDemand).unwrap();
        prop_assert_eq!(pc.ask, od.ask);
        prop_assert_eq!(pc.spread(), od.spread());
        let mut q = p;
        q.kappa = k2;
        prop_assert_eq!(ask_star(&q), ask_star(&p));
    }

    #[test]
    fn on_demand_intensity_identity(p in params()) {
        let direct = (p.sigma - ask_star(&p)) / (4.0 * p.kappa);
        prop_assert!(rel(direct, lambda_od_star(&p)) < 1e-12);
    }

    #[test]
    fn precommitment_rent_is_indifferent(p in params()) {
        let lam = lambda_pc_star(&p);
        let ask = ask_star(&p);
        let rent = hft_rent(&p, Regime::PreCommitment);
        let maker = payoff_market_maker_pc(&p, ask, lam, lam).unwrap();
        let bandit = payoff_bandit_pc(&p, ask, lam, lam).unwrap();
        // size of the largest gross term, so cancellation in the payoffs is not
        // mistaken for disagreement
        let news = p.delta / (p.delta + p.mu);
        let rental = expected_rental_time_pc(&p, lam, lam).unwrap();
        let scale = ask * (1.0 - news) + (p.sigma - ask) * news + 2.0 * p.kappa * lam * lam * rental;
        prop_assert!((maker - rent).abs() / scale < 1e-9, "maker {maker} rent {rent}");
        prop_assert!((bandit - rent).abs() / scale < 1e-9, "bandit {bandit} rent {rent}");
    }

    #[test]
    fn on_demand_rent_is_news_weighted_race_value(p in params()) {
        let lam = lambda_od_star(&p);
        let ask = ask_star(&p);
        let race = payoff_bandit_od(&p, ask, lam, lam).unwrap();
        let maker_race = payoff_maker_od(&p, ask, lam, lam).unwrap();
        let news = p.delta / (p.delta + p.mu);
        let rent = hft_rent(&p, Regime::OnDemand);
        prop_assert!(rel(news * race, rent) < 1e-9);
        // the maker collects the half-spread from liquidity trades instead
        let maker = news * maker_race + (1.0 - news) * ask;
        let scale = (1.0 - news) * ask + news * (p.sigma - ask);
        prop_assert!((maker - rent).abs() <= 1e-9 * scale, "maker {maker} rent {rent}");
    }

    #[test]
    fn offset_moves_only_quote_levels(p in params(), c in -1e3f64..1e3) {
        let mut q = p;
        q.v = c;
        for regime in Regime::BOTH {
            let a = equilibrium_point(&p, regime).unwrap();
            let b = equilibrium_point(&q, regime).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(b.ask_absolute(&q), c + a.ask);
            prop_assert_eq!(b.bid_absolute(&q), c - a.ask);
        }
    }

    #[test]
    fn validate_is_idempotent(p in params()) {
        let once = p.validate().unwrap();
        prop_assert_eq!(once.validate().unwrap(), once);
    }

    #[test]
    fn discovery_time_is_half_inverse_intensity(p in params()) {
        for regime in Regime::BOTH {
            let eq = equilibrium_point(&p, regime).unwrap();
            prop_assert!(rel(eq.price_discovery_time * 2.0 * eq.lambda_star, 1.0) < 1e-12);
        }
    }

    #[test]
    fn precommitment_intensity_solves_symmetric_first_order_condition(p in params()) {
        let lam = lambda_pc_star(&p);
        let (d, m, s, k) = (p.delta, p.mu, p.sigma, p.kappa);
        let lhs = d * m * s / (d + m);
        let rhs = 4.0 * k * lam * (3.0 * lam + d);
        prop_assert!(rel(rhs, lhs) < 1e-9);
    }
}

#[test]
fn rent_gap_grows_from_zero_in_sigma() {
    let gap = |s: f64| {
        let p = ModelParams::new(2.0, 2.0, s, 0.25).unwrap();
        hft_rent(&p, Regime::PreCommitment) - hft_rent(&p, Regime::OnDemand)
    };
    let mut prev = 0.0;
    for i in 1..=60 {
        let g = gap(1e-4 * 1.3f64.powi(i));
        assert!(g > prev, "gap not increasing at step {i}");
        prev = g;
    }
    assert!(gap(1e-12) < 1e-12);
}
