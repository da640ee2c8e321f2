//! Stopping moments, the U_J bounds, the one-sided testing analysis and the
//! Sawyer transfer on a random instance.

use bumplab::bumps::PenaltyFn;
use bumplab::model::SparseFamily;
use bumplab::operators::OperatorSpec;
use bumplab::random::{random_model, random_sparse, random_weight, trial_rng, ModelLaw, WeightLaw};
use bumplab::stopping::{build_stopping_forest, c1, one_sided_verify, sawyer_transfer_check, uj_carleson_bounds, StopScope, DEFAULT_CAP};

fn main() -> bumplab::Result<()> {
    let mut rng = trial_rng(5, 0);
    let model = random_model(&mut rng, &ModelLaw { depth_min: 6, depth_max: 6, ..ModelLaw::default() });
    let u = random_weight(&mut rng, &model, &WeightLaw::default());
    let v = random_weight(&mut rng, &model, &WeightLaw::default());
    let members = random_sparse(&mut rng, &model, 0.4);
    let family = SparseFamily::new(&model, &members)?;
    println!("{} leaves, {} family members", model.n_leaves(), members.len());

    let forest = build_stopping_forest(&model, &u, model.root(), &family, StopScope::Family)?;
    println!("{} stopping atoms in {} generations, E(J) partition: {}", forest.nodes.len(), forest.generations.len(), forest.partition);
    let r = uj_carleson_bounds(&forest, &model, &u, &v);
    println!("worst |U_J|^2 / (C1 A1 <u>_J |J|) = {:.4} with C1 = {:.4}", r.worst_ratio, c1());
    println!("nu-Carleson {:.4}, aggregate {:.4} <= {:.4}", r.nu_carleson, r.total, r.aggregate_bound);

    let one = one_sided_verify(&family, &model, &u, &v, &PenaltyFn::identity(), model.root(), DEFAULT_CAP)?;
    println!("testing / (C^2 A u|I0|) = {:.5} over {} (k, n) pieces, passed {}", one.ratio, one.pieces.len(), one.passed);
    for p in one.pieces.iter().take(5) {
        println!("  k = {}, n = {}: norm {:.4e}, target {:.4e}", p.k, p.n, p.norm, p.target);
    }

    let op = OperatorSpec::sparse(&model, &members)?;
    let s = sawyer_transfer_check(&op, &model, &u, &v)?;
    println!("Sawyer: norm^2 {:.4} <= K S = {:.4}", s.norm_sq, s.bound);
    Ok(())
}
