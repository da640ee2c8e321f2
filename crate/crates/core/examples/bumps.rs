//! Penalty functions and their constants, entropy bumps, and the Orlicz and
//! Lorentz routes to a penalty.

use bumplab::bumps::{alpha_from_psi, alpha_from_young, bump_supremum, luxemburg_norm, BumpMode, Convention, PenaltyFn, YoungFn};
use bumplab::functionals::{DistributionFn, QuasiconcaveFn, Variant};
use bumplab::model::{DyadicModel, Weight};

fn main() -> bumplab::Result<()> {
    for name in ["alpha:t", "alpha:log2", "alpha:logp=1.5"] {
        let a = PenaltyFn::preset(name)?;
        let c = a.c_alpha(Convention::With1OverAlpha1);
        println!("{name}: C_alpha in [{:.6}, {:.6}]", c.lower, c.upper);
    }
    println!("alpha:const divergent: {}", PenaltyFn::constant(1.0).c_alpha(Convention::IntegralOnly).divergent);

    let model = DyadicModel::uniform(2, 4);
    let u = Weight::new((0..16).map(|i| 1.0 + (i % 5) as f64).collect());
    let v = Weight::new((0..16).map(|i| 1.0 / (1.0 + (i % 3) as f64)).collect());
    let b = bump_supremum(&model, &u, &v, &PenaltyFn::identity(), BumpMode::TwoSided, Variant::Lorentz);
    println!("two-sided entropy bump sup {:.4} at atom {}", b.value, b.atom);

    let phi = YoungFn::tlog2();
    println!("Luxemburg norm of u on the root: {:.6}", luxemburg_norm(&model, &u, model.root(), &phi)?);

    let from_psi = alpha_from_psi(&QuasiconcaveFn::log_power(2.0))?;
    let n = DistributionFn::from_values(&[1.0, 10.0, 100.0], &[0.5, 0.3, 0.2]);
    let c = from_psi.predicate(&n);
    println!("psi = ln^2(e/s): C_alpha {:.4}, Jensen {:.4} <= {:.4}", from_psi.c_alpha.upper, c.lhs, c.rhs);

    let from_young = alpha_from_young(&YoungFn::loglog(1.0), 16.0)?;
    let c = from_young.predicate(&n);
    println!("Phi = t ln t (ln ln t)^2: C_alpha {:.4}, comparison {:.4} <= {:.4}", from_young.c_alpha.upper, c.lhs, c.rhs);
    Ok(())
}
