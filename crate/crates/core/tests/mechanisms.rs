use proptest::prelude::*;
use relaymatch::format::{parse_instance, parse_matching, write_instance, write_matching};
use relaymatch::{
    brute_force_optimum, g_dac, g_rdac, generate_topology, gsg_rdac, run_mechanism,
    verify_equilibrium, Error, ExactUtf, MechanismConfig, MechanismKind, NetworkInstance,
    TopologyConfig, UtilityTransfer,
};

const EPS: f64 = 0.01;

fn instance(m: usize, n: usize, seed: u64) -> NetworkInstance {
    generate_topology(&TopologyConfig::default(), m, n, seed).unwrap()
}

#[test]
fn pu_proposing_round_bound() {
    let cfg = MechanismConfig {
        settle: false,
        ..MechanismConfig::default()
    };
    for seed in 0..40 {
        let inst = instance(
            1 + seed as usize % 4,
            1 + (seed as usize / 4) % 5,
            700 + seed,
        );
        let utf = ExactUtf::new(&inst, &cfg.solver).unwrap();
        let (pus, sus) = (utf.num_pus(), utf.num_sus());
        let ceilings: f64 = (0..sus)
            .map(|n| (0..pus).map(|m| utf.su_ceiling(m, n)).fold(0.0, f64::max))
            .sum();
        let bound = pus as f64 * ceilings / EPS + (pus * sus) as f64 + 1.0;
        let trace = g_dac(&inst, EPS, &cfg).unwrap();
        assert!(trace.converged);
        assert!(
            trace.rounds as f64 <= bound,
            "seed {seed}: {} > {bound}",
            trace.rounds
        );
    }
}

#[test]
fn pu_optimal_dominates_robust() {
    let cfg = MechanismConfig::default();
    for seed in 0..40 {
        let inst = instance(3, 1 + seed as usize % 5, 900 + seed);
        let dac = g_dac(&inst, EPS, &cfg).unwrap();
        let rdac = g_rdac(&inst, EPS, &cfg).unwrap();
        for (a, b) in dac.pu_utilities.iter().zip(&rdac.pu_utilities) {
            assert!(*a >= b - 5.0 * EPS, "seed {seed}: {a} < {b}");
        }
    }
}

#[test]
fn robust_su_utilities_dominate() {
    let cfg = MechanismConfig::default();
    for seed in 0..40 {
        let inst = instance(1 + seed as usize % 5, 3, 1100 + seed);
        let dac = g_dac(&inst, EPS, &cfg).unwrap();
        let rdac = g_rdac(&inst, EPS, &cfg).unwrap();
        for (a, b) in rdac
            .matching
            .su_utilities
            .iter()
            .zip(&dac.matching.su_utilities)
        {
            assert!(*a >= b - 5.0 * EPS, "seed {seed}: {a} < {b}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = MechanismConfig {
        record_events: true,
        ..MechanismConfig::default()
    };
    let inst = instance(3, 4, 17);
    for kind in [
        MechanismKind::GDac,
        MechanismKind::GRdac,
        MechanismKind::GsgRdac,
    ] {
        let a = run_mechanism(&inst, kind, EPS, &cfg).unwrap();
        let b = run_mechanism(&inst, kind, EPS, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mechanism, kind);
    }
}

#[test]
fn event_log_has_header_and_rounds() {
    let cfg = MechanismConfig {
        record_events: true,
        ..MechanismConfig::default()
    };
    let trace = g_dac(&instance(2, 3, 5), EPS, &cfg).unwrap();
    let lines: Vec<String> = trace.log_lines().collect();
    assert_eq!(lines[0], "round, actor, action, target, value");
    assert!(lines.len() > 1);
    let rounds: Vec<usize> = trace.events.iter().map(|e| e.round).collect();
    assert!(rounds.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn brute_force_dispatch() {
    let cfg = MechanismConfig::default();
    let inst = instance(2, 2, 3);
    let a = run_mechanism(&inst, MechanismKind::BruteForce, 123.0, &cfg).unwrap();
    let b = brute_force_optimum(&inst, &cfg).unwrap();
    assert_eq!(a, b);
    let dac = g_dac(&inst, EPS, &cfg).unwrap();
    assert!((a.total_pu_utility() - dac.total_pu_utility()).abs() <= 5.0 * EPS);
    assert!(matches!(
        brute_force_optimum(&instance(5, 2, 3), &cfg),
        Err(Error::InstanceTooLarge { .. })
    ));
}

#[test]
fn bad_epsilon_rejected() {
    let inst = instance(1, 1, 1);
    for eps in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(matches!(
            g_dac(&inst, eps, &MechanismConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
    }
}

#[test]
fn guess_contracts_never_hurt_sus() {
    let cfg = MechanismConfig::default();
    for seed in 0..20 {
        let inst = instance(3, 4, 1300 + seed);
        let trace = gsg_rdac(&inst, EPS, &cfg).unwrap();
        for (m, n) in trace.matching.assignment.pairs() {
            let exch = trace.matching.exchanges[n].unwrap();
            assert!(inst.pair(m, n).su_utility(exch) >= -1e-9);
        }
    }
}

#[test]
fn certificate_survives_file_roundtrip() {
    let cfg = MechanismConfig::default();
    let inst = instance(3, 3, 44);
    let back = parse_instance(&write_instance(&inst)).unwrap();
    let trace = g_dac(&back, EPS, &cfg).unwrap();
    let text = write_matching(&trace.matching);
    let matching = parse_matching(&text, 3, 3).unwrap();
    let utf = ExactUtf::new(&back, &cfg.solver).unwrap();
    assert!(verify_equilibrium(&utf, &matching, &cfg.equilibrium).verdict);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn settled_outputs_are_equilibria(m in 1usize..=4, n in 1usize..=4, seed in 0u64..1_000_000) {
        let cfg = MechanismConfig::default();
        let inst = instance(m, n, seed);
        let utf = ExactUtf::new(&inst, &cfg.solver).unwrap();
        for trace in [g_dac(&inst, EPS, &cfg).unwrap(), g_rdac(&inst, EPS, &cfg).unwrap()] {
            prop_assert!(trace.settled);
            let cert = verify_equilibrium(&utf, &trace.matching, &cfg.equilibrium);
            prop_assert!(cert.verdict, "{:?}", cert.violations);
        }
    }

    #[test]
    fn finer_epsilon_keeps_pu_optimum(m in 1usize..=3, n in 1usize..=3, seed in 0u64..1_000_000) {
        let cfg = MechanismConfig::default();
        let inst = instance(m, n, seed);
        let coarse = g_dac(&inst, 0.02, &cfg).unwrap();
        let fine = g_dac(&inst, 0.005, &cfg).unwrap();
        prop_assert!((coarse.total_pu_utility() - fine.total_pu_utility()).abs() <= 5.0 * 0.02 * m as f64);
    }
}
