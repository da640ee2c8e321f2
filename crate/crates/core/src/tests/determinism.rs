use crate::verify::{run_sweep, sweep, Context, SweepConfig, TheoremId};

fn cfg(seed: u64, trials: usize, jobs: usize) -> SweepConfig {
    SweepConfig { seed, trials: Some(trials), jobs, depth_max: 5, ..SweepConfig::default() }
}

#[test]
fn reports_are_byte_identical() {
    for t in [TheoremId::Shift2Sided, TheoremId::BellmanM, TheoremId::OneSided] {
        let c = cfg(4, 60, 0);
        let a = run_sweep(&Context::new(t, &c).unwrap()).unwrap().to_json();
        let b = run_sweep(&Context::new(t, &c).unwrap()).unwrap().to_json();
        assert_eq!(a, b, "{t}");
    }
}

#[test]
fn reports_do_not_depend_on_jobs() {
    let t = TheoremId::SawyerK;
    let (a, rows_a) = sweep(&Context::new(t, &cfg(9, 80, 1)).unwrap()).unwrap();
    let (b, rows_b) = sweep(&Context::new(t, &cfg(9, 80, 3)).unwrap()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(rows_a, rows_b);
}

#[test]
fn seeds_change_reports() {
    let t = TheoremId::EmbedCarleson;
    let a = run_sweep(&Context::new(t, &cfg(1, 30, 0)).unwrap()).unwrap();
    let b = run_sweep(&Context::new(t, &cfg(2, 30, 0)).unwrap()).unwrap();
    assert_ne!(a.content_hash, b.content_hash);
    assert_ne!(a.config_hash, b.config_hash);
    assert_eq!(a.preset_hash, b.preset_hash);
}

#[test]
fn content_hash_detects_edits() {
    let mut r = run_sweep(&Context::new(TheoremId::ConvGap, &cfg(1, 50, 0)).unwrap()).unwrap();
    assert!(r.verify_hash());
    r.max_ratio *= 0.5;
    assert!(!r.verify_hash());
}
