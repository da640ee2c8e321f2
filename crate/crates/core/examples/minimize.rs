//! Injects a fault by shrinking the asserted constant, then shrinks the first
//! violation to a small witness.

use bumplab::verify::{minimize_report, run_sweep, Context, MinimizeOutcome, SweepConfig, TheoremId};

fn main() -> bumplab::Result<()> {
    let config = SweepConfig { seed: 7, trials: Some(40), constant_scale: 1e-3, ..SweepConfig::default() };
    let report = run_sweep(&Context::new(TheoremId::EmbedHaar, &config)?)?;
    println!("{} of {} trials violate the scaled bound", report.failures, report.trials);
    match minimize_report(&report)? {
        MinimizeOutcome::Minimized { trial, minimized } => {
            println!("trial {trial} shrinks to depth {} with {} leaves after {} evaluations", minimized.depth, minimized.leaves, minimized.evaluations);
            println!("{}", serde_json::to_string_pretty(&minimized.instance).expect("instance serializes"));
            println!("lhs {:.6} > rhs {:.6}", minimized.eval.lhs, minimized.eval.rhs);
        }
        other => println!("{other:?}"),
    }
    Ok(())
}
