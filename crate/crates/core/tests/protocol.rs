use std::f64::consts::PI;

use steer_core::algebra::{aklt_ground_space, mapping_set};
use steer_core::protocol::{
    commuting_toy_model, dephasing_probability, run_ensemble, run_trajectory, stop_scheme, write_ensemble_csv,
    ProtocolConfig, SteeringContext,
};
use steer_core::{InitialState, MappingKind, C64};

fn config(periods: usize, trajectories: usize) -> ProtocolConfig {
    ProtocolConfig {
        periods,
        trajectories,
        seed: 11,
        ..ProtocolConfig::default()
    }
}

#[test]
fn trajectories_are_reproducible_and_thread_independent() {
    let set = mapping_set(MappingKind::M1).unwrap();
    let ctx = SteeringContext::aklt(3, &set).unwrap();
    let cfg = config(8, 6);
    let a = run_ensemble(&ctx, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_ensemble(&ctx, &cfg).unwrap());
    assert_eq!(a.records, b.records);
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    write_ensemble_csv(&mut ca, &a).unwrap();
    write_ensemble_csv(&mut cb, &b).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(run_trajectory(&ctx, &cfg, 3), a.records[3]);
}

#[test]
fn ground_state_never_flips_an_ancilla() {
    let ls = 3;
    let set = mapping_set(MappingKind::M2(0.404)).unwrap();
    let ctx = SteeringContext::aklt(ls, &set).unwrap();
    let g = aklt_ground_space(ls).unwrap().vectors[1].as_slice().to_vec();
    let cfg = ProtocolConfig {
        initial: InitialState::System(g),
        stop_window: Some(4),
        ..config(6, 4)
    };
    let r = run_ensemble(&ctx, &cfg).unwrap();
    for t in &r.records {
        assert!(t.outcomes.iter().flatten().all(|&o| o == 0));
        assert_eq!(t.conv_period, 0);
        assert_eq!(t.t_conv, 0.0);
        assert_eq!(t.stop_period, Some(4));
        assert!(t.post.iter().all(|s| (s.fidelity - 1.0).abs() < 1e-9 && s.energy.abs() < 1e-9));
    }
}

#[test]
fn noiseless_ensemble_converges() {
    let set = mapping_set(MappingKind::M1).unwrap();
    let ctx = SteeringContext::aklt(3, &set).unwrap();
    let r = run_ensemble(&ctx, &config(30, 16)).unwrap();
    assert_eq!(r.excluded, 0);
    let last = r.periods();
    assert!(r.energy_pre[last].mean < 1e-4, "{}", r.energy_pre[last].mean);
    assert!(r.infidelity_pre[last].mean < 1e-3);
    assert!(r.energy_pre[0].mean > r.energy_pre[last].mean);
    assert!(r.t_conv.mean > 0.0 && r.t_conv.mean.is_finite());
}

#[test]
fn stop_scheme_follows_the_window_definition() {
    let set = mapping_set(MappingKind::M1).unwrap();
    let ctx = SteeringContext::aklt(2, &set).unwrap();
    let mut rec = run_trajectory(&ctx, &config(8, 1), 0);
    rec.outcomes = vec![vec![1], vec![0], vec![0], vec![0], vec![0], vec![2], vec![0], vec![0]];
    assert_eq!(stop_scheme(&rec, 4), Some(5));
    assert_eq!(stop_scheme(&rec, 5), None);
    assert_eq!(stop_scheme(&rec, 1), Some(2));
}

#[test]
fn dephasing_probability_matches_rate() {
    assert_eq!(dephasing_probability(0.0, 0.3), 0.0);
    let p = dephasing_probability(1e-3, 0.1);
    assert!((p - (1.0 - (-1e-4f64).exp())).abs() < 1e-15);
}

#[test]
fn noise_injects_events_and_keeps_norm() {
    let set = mapping_set(MappingKind::M1).unwrap();
    let ctx = SteeringContext::aklt(2, &set).unwrap();
    let cfg = ProtocolConfig { eps: 0.05, ..config(10, 8) };
    let r = run_ensemble(&ctx, &cfg).unwrap();
    assert!(r.records.iter().map(|t| t.dephasing_events).sum::<usize>() > 0);
    assert!(r.records.iter().all(|t| t.max_norm_drift < 1e-10));
}

#[test]
fn toy_model_one_shot_at_half_pi() {
    for n in 1..=3 {
        let mut down = vec![C64::new(0.0, 0.0); 1 << n];
        down[(1 << n) - 1] = C64::new(1.0, 0.0);
        let r = commuting_toy_model(n, PI / 2.0, 2, &InitialState::System(down), 0, 0).unwrap();
        assert!((r.channel_fidelity[1] - 1.0).abs() < 1e-12, "n {n}");
        assert!(r.max_recursion_error() < 1e-12);
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let set = mapping_set(MappingKind::M1).unwrap();
    let ctx = SteeringContext::aklt(2, &set).unwrap();
    for bad in [
        ProtocolConfig { dt: 0.0, ..config(2, 1) },
        ProtocolConfig { slice: Some(10.0), ..config(2, 1) },
        ProtocolConfig { eps: -1.0, ..config(2, 1) },
        ProtocolConfig { trajectories: 0, ..config(2, 1) },
    ] {
        assert!(run_ensemble(&ctx, &bad).is_err());
    }
}
