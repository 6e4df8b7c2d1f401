use ccds_core::analytics::{check_case, cva, Resolvers, SweepCase};
use ccds_core::contracts::{ccds_notional, mirror_check, required_collateral, swap_mtm, SignedMtm};
use ccds_core::market::{discount_factor, simulate_mtm_paths, simulate_path};
use ccds_core::{
    resolve, DefaultModel, DefaultScenario, Lgd, MarketState, Money, PartyId, PathConfig, Schedule, SchedulePeriod,
    StructureConfig, StructureKind, TimeGrid,
};
use proptest::prelude::*;

const NOTIONAL: Money = Money::from_major(500_000_000);

fn schedule_strategy() -> impl Strategy<Value = Schedule> {
    prop::collection::vec((0.05f64..1.5, -0.05f64..0.1, -0.05f64..0.1), 1..12).prop_map(|rows| {
        let mut t = 0.0;
        let periods = rows
            .into_iter()
            .map(|(dt, a, n)| {
                t += dt;
                SchedulePeriod { time: t, asset_rate: a, note_rate: n }
            })
            .collect();
        Schedule::new(periods).unwrap()
    })
}

fn market_strategy() -> impl Strategy<Value = MarketState> {
    prop_oneof![
        (0.0f64..0.1).prop_map(MarketState::curve),
        (0.0f64..0.1, -100_000_000_000i64..100_000_000_000)
            .prop_map(|(r, x)| MarketState::direct(r, Money::from_minor(x))),
    ]
}

fn config(kind: StructureKind, schedule: Schedule) -> StructureConfig {
    StructureConfig::standard(kind, NOTIONAL, schedule, Lgd::new(0.6).unwrap()).unwrap()
}

fn ten_year() -> StructureConfig {
    config(StructureKind::Baseline, Schedule::annual(10, 0.0, 0.0).unwrap())
}

proptest! {
    #[test]
    fn perspective_antisymmetry(schedule in schedule_strategy(), market in market_strategy(), frac in 0.0f64..=1.0) {
        let cfg = config(StructureKind::Baseline, schedule);
        let t = frac * cfg.back().maturity();
        for swap in [cfg.front(), cfg.back()] {
            let [a, b] = swap.parties();
            let va = swap_mtm(swap, &market, t, a).unwrap();
            let vb = swap_mtm(swap, &market, t, b).unwrap();
            prop_assert_eq!(va.value, -vb.value);
            prop_assert!(va.equivalent(&vb));
        }
    }

    #[test]
    fn back_to_back_pair_mirrors(schedule in schedule_strategy(), market in market_strategy(), frac in 0.0f64..=1.0) {
        let cfg = config(StructureKind::Baseline, schedule);
        let t = frac * cfg.back().maturity();
        prop_assert!(mirror_check(cfg.front(), cfg.back(), &market, t).unwrap());
    }

    #[test]
    fn collateral_is_non_negative(value in any::<i32>(), front in any::<bool>(), pick_a in any::<bool>()) {
        let cfg = ten_year();
        let ns = if front { cfg.front_set() } else { cfg.back_set() };
        let [a, b] = ns.parties();
        let mtm = SignedMtm::new(Money::from_minor(value as i64), if pick_a { a } else { b });
        let c = required_collateral(ns, mtm).unwrap();
        prop_assert!(c >= Money::ZERO);
        let secured = ns.csa().unwrap().secured_party();
        let for_secured = if mtm.perspective == secured { mtm.value } else { -mtm.value };
        if for_secured <= Money::ZERO {
            prop_assert_eq!(c, Money::ZERO);
        } else {
            prop_assert_eq!(c, for_secured);
        }
    }

    #[test]
    fn ccds_notional_is_positive_part(m in -100_000_000_000i64..=100_000_000_000, tau in 0.0f64..=10.0) {
        let cfg = config(StructureKind::CcdsChain, Schedule::annual(10, 0.0, 0.0).unwrap());
        let market = MarketState::direct(0.01, Money::from_minor(m));
        for ccds in cfg.ccds() {
            prop_assert_eq!(ccds_notional(ccds, cfg.back(), &market, tau).unwrap(), Money::from_minor(m.max(0)));
        }
    }

    #[test]
    fn discount_decreasing(r in 1e-4f64..0.2, t in 0.0f64..50.0, dt in 1e-3f64..5.0) {
        prop_assert!(discount_factor(r, t + dt).unwrap() < discount_factor(r, t).unwrap());
    }

    #[test]
    fn closeout_invariants_hold(
        x in prop_oneof![Just(0i64), -100_000_000_000i64..=100_000_000_000],
        ppb in 0u32..=1_000_000_000,
        tau in 1e-6f64..=10.0,
        r in 0.0f64..0.05,
    ) {
        let scenario = DefaultScenario::at_default(tau, MarketState::direct(r, Money::from_minor(x))).unwrap();
        let case = SweepCase { index: 0, scenario, lgd: Lgd::from_parts_per_billion(ppb).unwrap() };
        let failed = check_case(&case, &ten_year(), &Resolvers::default()).unwrap();
        prop_assert!(failed.is_empty(), "{:?}", failed);
    }

    #[test]
    fn curve_mode_closeouts_conserve(schedule in schedule_strategy(), r in 0.0f64..0.1, frac in 0.0f64..=1.0) {
        let base = config(StructureKind::Baseline, schedule);
        let scn = DefaultScenario::at_default(frac * base.back().maturity(), MarketState::curve(r)).unwrap();
        for kind in StructureKind::ALL {
            let report = resolve(&scn, &base.as_kind(kind).unwrap()).unwrap();
            prop_assert_eq!(report.conservation_residual(), Money::ZERO);
        }
    }

    #[test]
    fn survival_has_no_flows(x in any::<i32>()) {
        let scn = DefaultScenario::no_default(MarketState::direct(0.01, Money::from_minor(x as i64)));
        for kind in StructureKind::ALL {
            let report = resolve(&scn, &ten_year().as_kind(kind).unwrap()).unwrap();
            prop_assert!(report.flows.is_empty());
            for p in PartyId::LEDGER {
                prop_assert_eq!(report.outcome(p).realized_loss, Money::ZERO);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cva_monotone_in_lgd(a in 0u32..=1_000_000_000, b in 0u32..=1_000_000_000, seed in any::<u64>()) {
        let (lo, hi) = (a.min(b), a.max(b));
        let paths = simulate_mtm_paths(&PathConfig {
            initial_mtm: 0.0,
            volatility: 30e6,
            drift: 0.0,
            grid: TimeGrid::uniform(10.0, 40).unwrap(),
            n_paths: 200,
            seed,
        })
        .unwrap();
        let run = |ppb| {
            let model = DefaultModel::new(0.1, Lgd::from_parts_per_billion(ppb).unwrap()).unwrap();
            cva(&paths, &model, 0.01, &ten_year()).unwrap().cva
        };
        prop_assert!(run(lo) <= run(hi));
        prop_assert_eq!(run(0), 0.0);
    }

    #[test]
    fn paths_do_not_depend_on_evaluation_order(seed in any::<u64>(), n in 1u64..40) {
        let cfg = PathConfig {
            initial_mtm: 1e6,
            volatility: 10e6,
            drift: 1e5,
            grid: TimeGrid::uniform(5.0, 20).unwrap(),
            n_paths: n,
            seed,
        };
        let forward = simulate_mtm_paths(&cfg).unwrap();
        for i in (0..n).rev() {
            prop_assert_eq!(&simulate_path(&cfg, i), &forward.paths[i as usize]);
        }
    }
}
