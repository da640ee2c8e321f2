//! Testing-integral partials for the continuum weight pairs: divergence for
//! psi(s) = s and L log L, convergence for ln^2, and the entropy construction.

use bumplab::bumps::PenaltyFn;
use bumplab::functionals::QuasiconcaveFn;
use bumplab::sharpness::{bump_stability, certify_divergence, entropy_sharpness, ContinuumWeightPair, DEFAULT_CUTOFFS, DEFAULT_SCALES, DEFAULT_THRESHOLD};

fn main() -> bumplab::Result<()> {
    for psi in [QuasiconcaveFn::identity(), QuasiconcaveFn::psi0(), QuasiconcaveFn::log_power(2.0)] {
        let name = psi.name().to_string();
        let pair = ContinuumWeightPair::fundamental(psi);
        let c = certify_divergence(&pair, &DEFAULT_CUTOFFS, DEFAULT_THRESHOLD)?;
        let (b, _, change) = bump_stability(&pair, DEFAULT_SCALES)?;
        println!("{name}: verdict {:?}, bump {:.4} (change {:.1e})", c.verdict, b.b_observed, change);
        for p in &c.partials {
            println!("  ln X = {:6.2}: lower {:10.4}, exact {:10.4}", p.log_cutoff, p.lower, p.exact);
        }
        if let Some(s) = c.threshold_log_cutoff {
            println!("  reaches {} at ln X = {s:.3e}", c.threshold);
        }
    }
    let e = entropy_sharpness(PenaltyFn::constant(1.0), PenaltyFn::identity(), &DEFAULT_CUTOFFS, DEFAULT_THRESHOLD)?;
    println!("entropy construction with alpha = 1: {:?}, bump {:.4}", e.divergence.verdict, e.bump.b_observed);
    Ok(())
}
