use crate::verify::{minimize_report, run_sweep, Context, MinimizeOutcome, SweepConfig, TheoremId};

#[test]
fn injected_fault_minimizes_to_a_small_witness() {
    let cfg = SweepConfig { seed: 7, trials: Some(40), constant_scale: 1e-3, ..SweepConfig::default() };
    let ctx = Context::new(TheoremId::EmbedHaar, &cfg).unwrap();
    let r = run_sweep(&ctx).unwrap();
    assert!(!r.passed && r.failures > 0);
    let f = r.first_failure.as_ref().unwrap();
    assert!(!f.tolerance_artifact);
    let m = f.minimized.as_ref().unwrap();
    assert!(m.depth <= 2, "depth {}", m.depth);
    assert!(m.eval.excess() > cfg.tolerance);
    let replay = ctx.evaluate(&crate::verify::Sample::Dyadic(m.instance.decode().unwrap())).unwrap();
    assert_eq!(replay.lhs, m.eval.lhs);
    match minimize_report(&r).unwrap() {
        MinimizeOutcome::Minimized { trial, minimized } => {
            assert_eq!(trial, f.trial);
            assert_eq!(&minimized, m);
        }
        other => panic!("unexpected outcome {other:?}"),
    }
}

#[test]
fn passing_report_has_no_violation() {
    let cfg = SweepConfig { trials: Some(30), ..SweepConfig::default() };
    let r = run_sweep(&Context::new(TheoremId::Para2Sided, &cfg).unwrap()).unwrap();
    assert!(r.passed);
    assert_eq!(minimize_report(&r).unwrap(), MinimizeOutcome::NoViolation);
}

#[test]
fn violations_inside_the_band_are_artifacts() {
    let base = SweepConfig { seed: 5, trials: Some(30), depth_max: 4, ..SweepConfig::default() };
    let r = run_sweep(&Context::new(TheoremId::SawyerK, &base).unwrap()).unwrap();
    let cfg = SweepConfig { constant_scale: r.max_ratio * (1.0 - 1e-8), ..base };
    let r = run_sweep(&Context::new(TheoremId::SawyerK, &cfg).unwrap()).unwrap();
    assert_eq!(r.failures, 1);
    assert!(r.first_failure.as_ref().unwrap().tolerance_artifact);
    assert!(matches!(minimize_report(&r).unwrap(), MinimizeOutcome::Vanished { tolerance_artifact: true, .. }));
}

#[test]
fn scalar_violations_are_reported_unchanged() {
    let cfg = SweepConfig { trials: Some(50), constant_scale: 1e-3, ..SweepConfig::default() };
    let r = run_sweep(&Context::new(TheoremId::ConvGap, &cfg).unwrap()).unwrap();
    assert!(!r.passed);
    assert!(matches!(minimize_report(&r).unwrap(), MinimizeOutcome::NotMinimizable { .. }));
}
