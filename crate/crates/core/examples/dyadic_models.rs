//! Builds a dyadic model, a weight and a sparse family, and prints the basic
//! quantities every inequality is assembled from.

use bumplab::model::{DyadicModel, Plan, Weight};

fn main() -> bumplab::Result<()> {
    let plan = Plan::Node(vec![
        Plan::Node(vec![Plan::Leaf(0.25), Plan::Leaf(0.25)]),
        Plan::Node(vec![Plan::Leaf(0.1), Plan::Leaf(0.2), Plan::Leaf(0.2)]),
    ]);
    let model = DyadicModel::from_plan(&plan)?;
    println!("{} atoms, {} leaves, depth {}", model.len(), model.n_leaves(), model.depth());

    let u = Weight::new(vec![1.0, 4.0, 0.5, 2.0, 8.0]);
    let avg = model.averages(&u);
    for id in 0..model.len() {
        println!("atom {id}: mass {:.2}, <u> = {:.4}", model.mass(id), avg[id]);
    }
    let m = model.maximal_function(&u, model.root());
    println!("maximal function on leaves: {:?}", m.values);

    let family = [model.root(), 1, 3];
    let cert = model.check_sparse(&family);
    println!("family {family:?}: worst covered fraction {:.2}, sparse {}", cert.worst_ratio, cert.is_sparse());

    let mut a = vec![0.0; model.len()];
    a[model.root()] = 1.0;
    a[1] = 0.5;
    let (norm, at) = model.carleson_norm(&a);
    println!("Carleson norm {norm:.3} attained at atom {at}");
    Ok(())
}
