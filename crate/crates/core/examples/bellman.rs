//! The Bellman function: the layer-cake majorant m, its differential
//! inequality, the two-point and splitting gaps, and the Haar embedding.

use bumplab::bellman::{build_m, check_conv02, embedding_sum_haar, BellmanB, StepFn};
use bumplab::bumps::PenaltyFn;
use bumplab::functionals::DistributionFn;
use bumplab::model::{DyadicModel, Weight};

fn main() -> bumplab::Result<()> {
    let phi = StepFn::new(vec![(1.0, 1.0)])?;
    let m = build_m(&phi)?;
    for y in [0.0, 1.0, 3.0] {
        println!("m({y}) = {:.6}, 4/(1+y) = {:.6}", m.m(y), 4.0 / (1.0 + y));
    }
    let phi = StepFn::new(vec![(0.5, 3.0), (2.0, 1.0), (5.0, 0.2)])?;
    let m = build_m(&phi)?;
    let ys: Vec<f64> = (0..500).map(|i| i as f64 * 0.02).collect();
    let r = check_conv02(&m, Some(&phi), &ys);
    println!("m(0) = {:.4} = 4|phi|_1 = {:.4}; 2m'^2 <= m m'' slack {:.3e}; passed {}", m.m0(), 4.0 * phi.l1_norm(), r.min_slack, r.passed);

    let alpha = PenaltyFn::identity();
    let bell = BellmanB::new(&alpha)?;
    let np = DistributionFn::from_values(&[1.0, 4.0], &[0.3, 0.2]);
    let nm = DistributionFn::from_values(&[2.0], &[0.5]);
    let g = bell.dyadic_gap(1.5, &np, -0.5, &nm)?;
    println!("two-point gap {:.5} >= {:.5}", g.lhs, g.rhs);
    let s = bell.splitting_gap(&[1.0, -1.0, 0.5], &[np.clone(), nm.clone(), np], &[0.2, 0.3, 0.5])?;
    println!("splitting gap {:.5} >= {:.5}", s.lhs, s.rhs);

    let model = DyadicModel::uniform(2, 5);
    let u = Weight::new((0..32).map(|i| 1.0 + ((i * 7) % 11) as f64).collect());
    let f = Weight::new((0..32).map(|i| if i % 3 == 0 { -1.0 } else { 2.0 }).collect());
    let e = embedding_sum_haar(&model, &u, &f, &alpha)?;
    println!("Haar embedding {:.5} <= 36 C_alpha |f|^2 = {:.5} (ratio {:.4})", e.lhs, e.rhs, e.ratio);
    Ok(())
}
