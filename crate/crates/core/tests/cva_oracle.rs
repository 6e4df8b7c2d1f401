mod support;

use ccds_core::market::{simulate_default_time, simulate_mtm_paths};
use ccds_core::{cva, DefaultModel, Lgd, Money, PathConfig, Schedule, StructureConfig, StructureKind, TimeGrid};
use support::tree_oracle::{baseline_cva, OracleInput};

fn oracle(hazard_rate: f64, volatility: f64) -> OracleInput {
    OracleInput {
        initial_mtm: 0.0,
        drift: 0.0,
        volatility,
        hazard_rate,
        discount_rate: 0.01,
        lgd: 0.6,
        horizon: 10.0,
        dt: 0.25,
        substeps: 32,
    }
}

fn baseline() -> StructureConfig {
    StructureConfig::standard(
        StructureKind::Baseline,
        Money::from_major(500_000_000),
        Schedule::annual(10, 0.0, 0.0).unwrap(),
        Lgd::new(0.6).unwrap(),
    )
    .unwrap()
}

#[test]
fn oracle_values_are_frozen() {
    let frozen = [
        (0.005, 10e6, 234_564.51),
        (0.005, 30e6, 703_693.54),
        (0.005, 60e6, 1_407_387.07),
        (0.02, 10e6, 860_089.69),
        (0.02, 30e6, 2_580_269.08),
        (0.02, 60e6, 5_160_538.17),
        (0.1, 10e6, 2_779_509.84),
        (0.1, 30e6, 8_338_529.51),
        (0.1, 60e6, 16_677_059.01),
    ];
    for (lambda, sigma, value) in frozen {
        let got = baseline_cva(&oracle(lambda, sigma));
        assert!((got - value).abs() < 0.01, "lambda {lambda} sigma {sigma}: {got} vs {value}");
    }
}

#[test]
fn reference_cva_agrees_with_oracle() {
    let paths = simulate_mtm_paths(&PathConfig {
        initial_mtm: 0.0,
        volatility: 30e6,
        drift: 0.0,
        grid: TimeGrid::uniform(10.0, 40).unwrap(),
        n_paths: 20_000,
        seed: 42,
    })
    .unwrap();
    let model = DefaultModel::new(0.02, Lgd::new(0.6).unwrap()).unwrap();
    let r = cva(&paths, &model, 0.01, &baseline()).unwrap();
    let target = baseline_cva(&oracle(0.02, 30e6));
    assert!(r.stderr > 0.0);
    assert!((r.cva - target).abs() <= 3.0 * r.stderr, "mc {} ± {} vs oracle {target}", r.cva, r.stderr);

    let chain = cva(&paths, &model, 0.01, &baseline().as_kind(StructureKind::CcdsChain).unwrap()).unwrap();
    assert_eq!((chain.cva, chain.stderr), (0.0, 0.0));
}

#[test]
fn default_frequency_matches_hazard() {
    let n = 20_000u64;
    for lambda in [0.005, 0.02, 0.1] {
        let model = DefaultModel::new(lambda, Lgd::ONE).unwrap();
        let hits = (0..n).filter(|&i| simulate_default_time(&model, 10.0, 7, i).is_some()).count() as f64;
        let p = 1.0 - (-lambda * 10.0f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() <= 4.0 * se, "lambda {lambda}");
    }
}
