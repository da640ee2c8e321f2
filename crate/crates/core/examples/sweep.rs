//! A seeded verification sweep with its sealed JSON report.

use bumplab::verify::{run_sweep, Context, SweepConfig, TheoremId};

fn main() -> bumplab::Result<()> {
    let config = SweepConfig { seed: 42, trials: Some(500), depth_max: 6, ..SweepConfig::default() };
    for theorem in TheoremId::ALL {
        let ctx = Context::new(theorem, &config)?;
        let r = run_sweep(&ctx)?;
        println!("{:16} {:5} trials, {} failures, max ratio {:.5}", theorem.name(), r.trials, r.failures, r.max_ratio);
    }
    let r = run_sweep(&Context::new(TheoremId::EmbedHaar, &config)?)?;
    println!("{}", r.to_json());
    Ok(())
}
