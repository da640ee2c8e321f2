//! Distribution functions, the L log L functional u* in both variants, the
//! midpoint concavity law and the A2 / A∞ characteristics.

use bumplab::functionals::{a2_and_wilson, concavity_gap, distribution_fn, lorentz_norm, u_star, DistributionFn, QuasiconcaveFn, Variant};
use bumplab::model::{DyadicModel, Weight};

fn main() -> bumplab::Result<()> {
    let model = DyadicModel::uniform(2, 3);
    let u = Weight::new(vec![1.0, 1.0, 2.0, 4.0, 1.0, 8.0, 0.5, 0.5]);
    let root = model.root();
    let n = distribution_fn(&model, &u, root);
    println!("N(t) steps: {:?}", n.steps());
    println!("<u> = {:.4}", model.average(&u, root));
    for v in [Variant::Lorentz, Variant::Maximal] {
        println!("u* ({v:?}) = {:.4}", u_star(&model, &u, root, v));
    }
    println!("L log L norm = {:.4}", lorentz_norm(&n, &QuasiconcaveFn::psi0()));

    let n1 = DistributionFn::from_values(&[1.0, 5.0], &[0.5, 0.5]);
    let n2 = DistributionFn::from_values(&[2.0], &[1.0]);
    let mid = DistributionFn::combine(&[(0.5, &n1), (0.5, &n2)]);
    let g = concavity_gap(&mid, &n1, &n2)?;
    println!("concavity gap {:.5} >= {:.5} >= {:.5}", g.gap, g.bound, g.mass_bound);

    let c = a2_and_wilson(&model, &u, None)?;
    println!("[v]_A2 = {:.4} at atom {}, [v]_Ainf = {:.4} at atom {}", c.a2, c.a2_atom, c.ainfty, c.ainfty_atom);
    Ok(())
}
