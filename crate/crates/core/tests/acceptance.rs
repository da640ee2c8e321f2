//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use bumplab::bellman::{build_m, embedding_sum_carleson, BellmanM, StepFn};
use bumplab::bumps::orlicz::{alpha_from_psi, alpha_from_young, min_young, young_llogl_floor};
use bumplab::bumps::{Convention, PenaltyFn, YoungFn};
use bumplab::functionals::{second_derivative_check, DistributionFn, QuasiconcaveFn};
use bumplab::model::{CarlesonSequence, DyadicModel, SparseFamily, Weight};
use bumplab::operators::{dense_norm, weighted_norm, BlockNorm, OperatorSpec};
use bumplab::random::{
    random_carleson, random_distribution, random_model, random_model_at_depth, random_paraproduct, random_shift, random_sparse,
    random_weight, trial_rng, ModelLaw, WeightLaw,
};
use bumplab::sharpness::{
    bump_stability, certify_divergence, entropy_sharpness, ContinuumWeightPair, Verdict, DEFAULT_CUTOFFS, DEFAULT_SCALES,
    DEFAULT_THRESHOLD,
};
use bumplab::stopping::{
    build_stopping_forest, c1, one_sided_verify, sawyer_constant, sawyer_k, uj_carleson_bounds, StopScope, DEFAULT_CAP,
};
use bumplab::verify::{run_sweep, Context, Report, SweepConfig, TheoremId};
use rand::RngExt;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sweep_with(theorem: TheoremId, edit: impl FnOnce(&mut SweepConfig)) -> Report {
    let mut cfg = SweepConfig { seed: 20_240_601, ..SweepConfig::default() };
    edit(&mut cfg);
    let ctx = Context::new(theorem, &cfg).expect("valid sweep config");
    run_sweep(&ctx).expect("sweep runs")
}

fn check_report(r: &Report) -> Result<String, String> {
    let line = format!("{} {}/{} max ratio {:.4}", r.theorem, r.trials - r.failures - r.errors, r.trials, r.max_ratio);
    if r.passed {
        Ok(line)
    } else {
        Err(format!("{line}; first failure {:?}; first error {:?}", r.first_failure.as_ref().map(|f| f.trial), r.first_error))
    }
}

fn bellman_report() -> &'static Report {
    static R: OnceLock<Report> = OnceLock::new();
    R.get_or_init(|| sweep_with(TheoremId::BellmanM, |_| {}))
}

fn c1_carleson() -> Outcome {
    let m = DyadicModel::uniform(2, 0);
    let one = Weight::constant(&m, 1.0);
    let a = CarlesonSequence::new(&m, vec![1.0]).map_err(|e| e.to_string())?;
    let r = embedding_sum_carleson(&m, &one, &one, &a, &PenaltyFn::identity()).map_err(|e| e.to_string())?;
    ensure((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 8.0).abs() < 1e-9, format!("single atom gives {} vs {}", r.lhs, r.rhs))?;
    let mut out = vec![format!("oracle {:.3} vs {:.3}", r.lhs, r.rhs)];
    for alpha in ["alpha:t", "alpha:log2"] {
        let rep = sweep_with(TheoremId::EmbedCarleson, |c| c.alpha = alpha.into());
        out.push(check_report(&rep)?);
    }
    Ok(out.join("; "))
}

fn c2_haar() -> Outcome {
    check_report(&sweep_with(TheoremId::EmbedHaar, |_| {}))
}

fn c3_two_sided() -> Outcome {
    let mut out = Vec::new();
    for t in [TheoremId::Lerner2Sided, TheoremId::Shift2Sided, TheoremId::Para2Sided] {
        out.push(check_report(&sweep_with(t, |_| {}))?);
    }
    let law = ModelLaw { depth_max: 5, ..ModelLaw::default() };
    let wl = WeightLaw::default();
    let (mut checked, mut worst) = (0, 0.0f64);
    for t in 0..300u64 {
        let mut rng = trial_rng(33, t);
        let m = random_model(&mut rng, &law);
        if m.n_leaves() > 64 {
            continue;
        }
        let u = random_weight(&mut rng, &m, &wl);
        let v = random_weight(&mut rng, &m, &wl);
        let ops = [
            OperatorSpec::positive_dyadic(&m, random_carleson(&mut rng, &m, 0.4)),
            random_shift(&mut rng, &m, BlockNorm::L1xL1),
            random_paraproduct(&mut rng, &m),
        ];
        for op in ops {
            let op = op.map_err(|e| e.to_string())?;
            let p = weighted_norm(&op, &m, &u, &v).map_err(|e| e.to_string())?;
            let d = dense_norm(&op, &m, &u, &v).map_err(|e| e.to_string())?;
            let rel = (p - d).abs() / d.max(f64::MIN_POSITIVE);
            worst = worst.max(if d == 0.0 { p } else { rel });
            checked += 1;
        }
    }
    ensure(worst <= 1e-9, format!("power iteration vs dense: relative gap {worst:e}"))?;
    out.push(format!("{checked} dense cross-checks, worst gap {worst:.1e}"));
    Ok(out.join("; "))
}

fn c4_concavity() -> Outcome {
    let rep = sweep_with(TheoremId::ConvGap, |_| {});
    let line = check_report(&rep)?;
    let n = DistributionFn::from_values(&[1.0, 3.0], &[0.2, 0.3]);
    let n1 = DistributionFn::from_values(&[1.0, 3.0], &[0.3, 0.45]);
    let rows = second_derivative_check(&n, &n1, &[0.0, 0.25, 0.5, 0.75, 1.0]).map_err(|e| e.to_string())?;
    let worst = rows.iter().map(|r| (r.integral - r.bound).abs() / r.bound).fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("proportional path: relative gap {worst:e}"))?;
    Ok(format!("{line}; proportional path equality to {worst:.1e}"))
}

fn c5_bellman_m() -> Outcome {
    let m = build_m(&StepFn::new(vec![(1.0, 1.0)]).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let worst = (0..=1000)
        .map(|i| {
            let y = i as f64 * 0.01;
            (m.m(y) - 4.0 / (1.0 + y)).abs() / (4.0 / (1.0 + y))
        })
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("m(y) vs 4/(1+y): {worst:e}"))?;
    let mut eq = 0.0f64;
    for (r, w) in [(0.3, 2.0), (1.0, 1.0), (7.5, 0.01)] {
        let s = BellmanM::from_atoms(vec![(r, w)]).map_err(|e| e.to_string())?;
        for i in 0..=200 {
            let y = i as f64 * 0.1;
            let (lhs, rhs) = (2.0 * s.dm(y).powi(2), s.m(y) * s.d2m(y));
            eq = eq.max((lhs - rhs).abs() / rhs);
        }
    }
    ensure(eq <= 1e-12, format!("single atom 2m′² vs mm″: {eq:e}"))?;
    Ok(format!("closed form to {worst:.1e}; single-atom equality to {eq:.1e}; {}", check_report(bellman_report())?))
}

fn c6_dyadic_splitting() -> Outcome {
    check_report(bellman_report())
}

fn c7_sawyer() -> Outcome {
    let m = DyadicModel::uniform(2, 0);
    let one = Weight::constant(&m, 1.0);
    let op = OperatorSpec::sparse(&m, &[m.root()]).map_err(|e| e.to_string())?;
    let s = sawyer_constant(&op, &m, &one, &one).map_err(|e| e.to_string())?.value;
    let n = weighted_norm(&op, &m, &one, &one).map_err(|e| e.to_string())?;
    ensure((n * n - 1.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12, format!("trivial instance: norm² {} testing {s}", n * n))?;
    let line = check_report(&sweep_with(TheoremId::SawyerK, |_| {}))?;
    Ok(format!("trivial 1 ≤ K = {:.4}; {line}", sawyer_k()))
}

/// Max testing ratio and regression points `(x, y)` at one depth.
fn one_sided_depth(depth: usize, trials: u64) -> Result<(f64, Vec<(f64, f64)>), String> {
    let alpha = PenaltyFn::identity();
    let law = ModelLaw { depth_min: depth, depth_max: depth, branching_max: 2, ..ModelLaw::default() };
    let wl = WeightLaw::default();
    let mut worst = 0.0f64;
    let mut pts = Vec::new();
    for t in 0..trials {
        let mut rng = trial_rng(11 + depth as u64, t);
        let m = random_model_at_depth(&mut rng, &law, depth);
        let u = random_weight(&mut rng, &m, &wl);
        let v = random_weight(&mut rng, &m, &wl);
        let q = random_sparse(&mut rng, &m, 0.4);
        let fam = SparseFamily::new(&m, &q).map_err(|e| e.to_string())?;
        let r = one_sided_verify(&fam, &m, &u, &v, &alpha, m.root(), DEFAULT_CAP).map_err(|e| e.to_string())?;
        ensure(r.passed, format!("depth {depth} trial {t}: one-sided checks fail"))?;
        worst = worst.max(r.ratio);
        for p in &r.pieces {
            if p.norm > 0.0 && p.packing > 0.0 {
                let a2k = alpha.alpha(2f64.powi(p.k as i32));
                let x = (2f64.powi(-(p.n as i32)) / (a2k * a2k) * r.a).ln();
                let y = (p.norm * p.norm).ln() - (2f64.powi(-(p.k as i32)) * p.packing).ln();
                pts.push((x, y));
            }
        }
    }
    Ok((worst, pts))
}

fn c8_one_sided() -> Outcome {
    let rep = sweep_with(TheoremId::OneSided, |_| {});
    let line = check_report(&rep)?;
    let mut ratios = Vec::new();
    let mut pts = Vec::new();
    for depth in 4..=10 {
        let (w, p) = one_sided_depth(depth, 200)?;
        ratios.push(w);
        pts.extend(p);
    }
    let fitted = ratios.iter().copied().fold(rep.stats.get("ratio").copied().unwrap_or(0.0), f64::max);
    let growth = ratios[6] / ratios[0];
    ensure(growth <= 2.0, format!("testing ratio grows by {growth:.3} from depth 4 to 10"))?;
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    ensure((0.9..=1.1).contains(&slope), format!("piece-norm slope {slope:.4}"))?;
    Ok(format!("{line}; fitted constant {fitted:.4}; depth 4→10 growth {growth:.3}; slope {slope:.4} over {} pieces", pts.len()))
}

fn c9_stopping() -> Outcome {
    let line = check_report(&sweep_with(TheoremId::OneSided, |c| c.seed = 99))?;
    let law = ModelLaw::default();
    let wl = WeightLaw::default();
    let mut worst_uj = 0.0f64;
    for t in 0..1000u64 {
        let mut rng = trial_rng(909, t);
        let m = random_model(&mut rng, &law);
        let u = random_weight(&mut rng, &m, &wl);
        let v = random_weight(&mut rng, &m, &wl);
        let q = random_sparse(&mut rng, &m, 0.5);
        let fam = SparseFamily::new(&m, &q).map_err(|e| e.to_string())?;
        for scope in [StopScope::Dyadic, StopScope::Family] {
            let f = build_stopping_forest(&m, &u, m.root(), &fam, scope).map_err(|e| e.to_string())?;
            ensure(f.partition, format!("trial {t}: E(J) is not a partition"))?;
            let r = uj_carleson_bounds(&f, &m, &u, &v);
            ensure(r.per_j_holds(), format!("trial {t}: ‖U_J‖² ratio {}", r.worst_ratio))?;
            worst_uj = worst_uj.max(r.worst_ratio);
        }
    }
    let presets = ["alpha:t", "alpha:log", "alpha:log2", "alpha:logp=1.5", "alpha:logp=3", "alpha:const", "alpha:const=2"];
    for p in presets {
        let a = PenaltyFn::preset(p).map_err(|e| e.to_string())?;
        let (sum, two_int) = a.riemann_check(60);
        ensure(sum <= two_int, format!("{p}: Σ1/α(2^k) = {sum} > {two_int}"))?;
    }
    Ok(format!("{line}; 1000 forests, worst U_J ratio {worst_uj:.4} at C₁ = {:.4}; Riemann lemma on {} presets", c1(), presets.len()))
}

fn c10_orlicz() -> Outcome {
    let mut floors = Vec::new();
    for p in ["young:t2", "young:power=3", "young:tln2", "young:loglog", "young:loglog:eps=0.5"] {
        let phi = YoungFn::preset(p).map_err(|e| e.to_string())?;
        let c = young_llogl_floor(&phi, 16.0).map_err(|e| format!("{p}: {e}"))?;
        ensure(c > 0.0, format!("{p}: floor {c}"))?;
        floors.push(c);
    }
    let my = min_young(&YoungFn::power(2.0), &YoungFn::power(3.0));
    ensure(my.dominated && my.c > 0.0, format!("min_young sandwich: c = {}, dominated {}", my.c, my.dominated))?;
    for t in [1.0, 10.0, 1e3] {
        let want = t * t - 4.0 / 27.0;
        ensure((my.young.phi(t) - want).abs() <= 1e-9 * want, format!("min_young at {t}: {} vs {want}", my.young.phi(t)))?;
    }
    let mut worst_jensen = f64::NEG_INFINITY;
    for p in ["psi:llogl", "psi:log2", "psi:logp=3"] {
        let pen = alpha_from_psi(&QuasiconcaveFn::preset(p).map_err(|e| e.to_string())?).map_err(|e| format!("{p}: {e}"))?;
        for t in 0..10_000u64 {
            let mut rng = trial_rng(1010, t);
            let n = random_distribution(&mut rng, 6, 4.0, 1.0);
            let c = pen.predicate(&n);
            ensure(c.slack() >= -1e-10 * c.rhs.max(1.0), format!("{p} trial {t}: {} > {}", c.lhs, c.rhs))?;
            worst_jensen = worst_jensen.max(c.ratio());
        }
    }
    let yp = alpha_from_young(&YoungFn::loglog(1.0), 16.0).map_err(|e| e.to_string())?;
    let ca = yp.alpha.c_alpha(Convention::IntegralOnly);
    ensure(ca.is_finite(), "C_α for t ln t (ln ln t)² is not finite")?;
    let mut worst_young = f64::NEG_INFINITY;
    for t in 0..1000u64 {
        let mut rng = trial_rng(1011, t);
        let mass = rng.random_range(0.01..=1.0);
        let n = random_distribution(&mut rng, 6, 4.0, mass);
        let c = yp.predicate(&n);
        ensure(c.slack() >= -1e-8 * c.rhs.max(1.0), format!("Orlicz trial {t}: {} > {}", c.lhs, c.rhs))?;
        worst_young = worst_young.max(c.ratio());
    }
    Ok(format!(
        "floors min {:.3}; min_young c = {:.3}; Jensen worst ratio {worst_jensen:.4}; C_α = {:.4}, Orlicz worst ratio {worst_young:.4}",
        floors.iter().copied().fold(f64::INFINITY, f64::min),
        my.c,
        ca.upper
    ))
}

fn c11_sharpness() -> Outcome {
    let start = Instant::now();
    let pair = ContinuumWeightPair::fundamental(QuasiconcaveFn::identity());
    let cert = certify_divergence(&pair, &DEFAULT_CUTOFFS, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    for p in &cert.partials {
        let want = 2.0 * p.log_cutoff;
        ensure((p.lower - want).abs() <= 1e-8 * want, format!("ψ = s: lower partial {} vs 2 ln X = {want}", p.lower))?;
        ensure(p.exact > p.lower, format!("ψ = s: exact partial {} ≤ lower {}", p.exact, p.lower))?;
    }
    let (base, _, change) = bump_stability(&pair, DEFAULT_SCALES).map_err(|e| e.to_string())?;
    ensure(change < 0.01, format!("ψ = s: bump changes by {change:e} under family doubling"))?;
    let llogl = ContinuumWeightPair::fundamental(QuasiconcaveFn::psi0());
    let cl = certify_divergence(&llogl, &DEFAULT_CUTOFFS, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    ensure(cl.strictly_increasing, "L log L partials do not increase strictly")?;
    ensure(cl.verdict == Verdict::Divergent, format!("L log L verdict {:?}", cl.verdict))?;
    let past = cl.threshold_log_cutoff.ok_or("L log L partials never reach the threshold")?;
    let log2 = ContinuumWeightPair::fundamental(QuasiconcaveFn::log_power(2.0));
    let c2 = certify_divergence(&log2, &DEFAULT_CUTOFFS, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    ensure(c2.verdict == Verdict::Bounded && c2.total.rel_gap() < 1e-3, format!("ln² verdict {:?}, gap {:e}", c2.verdict, c2.total.rel_gap()))?;
    let e = entropy_sharpness(PenaltyFn::constant(1.0), PenaltyFn::identity(), &DEFAULT_CUTOFFS, DEFAULT_THRESHOLD).map_err(|e| e.to_string())?;
    ensure(e.divergence.verdict == Verdict::Divergent, format!("α ≡ 1 verdict {:?}", e.divergence.verdict))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 30.0, format!("sharpness took {secs:.1} s"))?;
    Ok(format!(
        "ψ = s bump {:.4} (change {change:.1e}); L log L partial {:.3} at X = 1e12, threshold at ln X = {past:.3e}; ln² total {:.4} (gap {:.1e}); α ≡ 1 divergent; {secs:.1} s",
        base.b_observed,
        cl.partials.last().map_or(0.0, |p| p.lower),
        c2.total.value(),
        c2.total.rel_gap()
    ))
}

fn c12a_ainfty() -> Outcome {
    let rep = sweep_with(TheoremId::OneWeight, |_| {});
    let line = check_report(&rep)?;
    let worst = rep.stats.get("ainfty_over_a2").copied().unwrap_or(f64::NAN);
    ensure(worst <= 1.0 + 1e-12, format!("{line}; max [v]_A∞/[v]_A₂ = {worst:.4} over {} weights", rep.trials))?;
    Ok(format!("{line}; max [v]_A∞/[v]_A₂ = {worst:.4}"))
}

fn c12b_c_fit() -> Outcome {
    let mut fits = Vec::new();
    for depth in 2..=8 {
        let rep = sweep_with(TheoremId::OneWeight, |c| {
            c.trials = Some(500);
            c.depth_min = depth;
            c.depth_max = depth;
            c.seed = 1200 + depth as u64;
        });
        check_report(&rep)?;
        fits.push(rep.stats["c_fit"]);
    }
    let hi = fits.iter().copied().fold(0.0, f64::max);
    let table: Vec<String> = fits.iter().map(|c| format!("{c:.3}")).collect();
    ensure(hi <= 2.0 * fits[0], format!("C_fit grows with depth 2..8: [{}]", table.join(", ")))?;
    Ok(format!("C_fit by depth 2..8: [{}], at most {:.2}× the depth-2 value", table.join(", "), hi / fits[0]))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("1 carleson-embedding", c1_carleson),
        ("2 haar-embedding", c2_haar),
        ("3 two-sided-bounds", c3_two_sided),
        ("4 concavity-laws", c4_concavity),
        ("5 bellman-construction", c5_bellman_m),
        ("6 dyadic-and-splitting", c6_dyadic_splitting),
        ("7 sawyer-transfer", c7_sawyer),
        ("8 one-sided", c8_one_sided),
        ("9 stopping-machinery", c9_stopping),
        ("10 orlicz-pipeline", c10_orlicz),
        ("11 sharpness", c11_sharpness),
        ("12a ainfty-below-a2", c12a_ainfty),
        ("12b one-weight-c-fit", c12b_c_fit),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {name} ({secs:.1} s): {msg}"),
            Err(msg) => {
                println!("FAIL {name} ({secs:.1} s): {msg}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
