//! Sparse operators, Haar shifts and paraproducts with their weighted norms,
//! by power iteration and by the dense oracle.

use bumplab::model::{DyadicModel, Weight};
use bumplab::operators::{dense_norm, weighted_norm_detail, Block, BlockNorm, OperatorSpec, SymbolEntry};

fn main() -> bumplab::Result<()> {
    let model = DyadicModel::uniform(2, 4);
    let u = Weight::new((0..16).map(|i| 0.5 + (i % 4) as f64).collect());
    let v = Weight::new((0..16).map(|i| 1.0 / (0.5 + (i % 4) as f64)).collect());

    let sparse = OperatorSpec::sparse(&model, &[0, 2, 3, 17])?;
    let blocks: Vec<Block> = (0..model.len())
        .filter(|&i| !model.is_leaf(i))
        .map(|i| Block { atom: i, matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]] })
        .collect();
    let shift = OperatorSpec::haar_shift_normalized(&model, &blocks, BlockNorm::L1xL1)?;
    let symbol: Vec<SymbolEntry> = (0..model.len())
        .filter(|&i| !model.is_leaf(i))
        .map(|i| SymbolEntry { atom: i, values: vec![0.1, -0.1] })
        .collect();
    let para = OperatorSpec::paraproduct(&model, &symbol)?;

    for (name, op) in [("sparse", &sparse), ("haar shift", &shift), ("paraproduct", &para)] {
        let p = weighted_norm_detail(op, &model, &u, &v)?;
        let d = dense_norm(op, &model, &u, &v)?;
        println!("{name}: certificate {:.4}, power {:.10} ({} iterations), dense {:.10}", op.certificate().value, p.norm, p.iterations, d);
    }
    Ok(())
}
