use decoherence_core::{
    run_oracle, Complex64, EcsKind, EcsState, OracleSettings, PhaseBranch, SpectralParams, SystemParams,
};

fn report(cutoff: usize) -> decoherence_core::OracleReport {
    let env = SpectralParams::ohmic(0.005, 30.0).unwrap();
    let sys = SystemParams::normalized(0.5, PhaseBranch::InPhase).unwrap();
    let s = EcsState::new(EcsKind::PhiMinus, Complex64::new(0.8, 0.0)).unwrap();
    let settings = OracleSettings { stride: 5, compare_every: 100, cutoff, ..OracleSettings::default() };
    run_oracle(&s, &sys, &env, &settings, |c| c).unwrap()
}

#[test]
fn raising_the_cutoff_leaves_the_endpoint_distance_unchanged() {
    let (low, high) = (report(16), report(20));
    let shift = (low.final_distance() - high.final_distance()).abs();
    assert!(shift < 1e-5, "endpoint distance moved by {shift:e}");
    for r in [&low, &high] {
        assert!(r.max_trace_drift < 1e-8, "trace drift {:e}", r.max_trace_drift);
        assert!(r.max_distance() < 1e-3);
    }
}
