//! Ladders of values for families whose norm is infinite, next to a control family.

use grand_lebesgue::verifier::{divergence_demo, DemoFamily};
use grand_lebesgue::OptimizerConfig;

fn main() -> grand_lebesgue::Result<()> {
    let cfg = OptimizerConfig::default();
    let families = [
        DemoFamily::OldGrandNorm { q: 2.0, alpha: 1.5, theta: 1.0 },
        DemoFamily::SparseIndicator { p: 2.0, q: 1.0, alpha: 2.0, theta: 0.5 },
        DemoFamily::PowerLog { q: 2.0, theta: 1.0, a: 0.25 },
    ];
    for f in families {
        let o = divergence_demo(f, None, &cfg)?;
        println!(
            "{}: threshold {:.4} crossed {} monotone {} growth {:+.4} reference {:?}",
            f.label(),
            o.threshold,
            o.crossed,
            o.monotone,
            o.growth_exponent,
            o.reference
        );
        for p in &o.points {
            println!("  {:e}\t{:e}", p.x, p.value);
        }
    }
    Ok(())
}
