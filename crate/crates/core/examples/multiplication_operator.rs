//! Operator norm of f -> g f on the grand amalgam space, closed by level sets of |g|.

use grand_lebesgue::amalgam::{AmalgamParams, Cell, StepFunction};
use grand_lebesgue::operators::{op_norm_estimate, Multiplier};
use grand_lebesgue::{IndexSet, OptimizerConfig};

fn main() -> grand_lebesgue::Result<()> {
    let cfg = OptimizerConfig::default();
    let params = AmalgamParams::new(2.0, 2.0, 1.0)?;
    let g = StepFunction::new(
        IndexSet::Integers,
        [(0, vec![Cell::new(0.3, 3.0), Cell::new(0.7, -0.5)]), (2, vec![Cell::new(1.0, 1.5)])],
    )?;
    let m = Multiplier::new(g)?;
    let trial = StepFunction::plateau(IndexSet::Integers, 2, 1.0)?;
    let est = op_norm_estimate(&m, &params, &[trial], &cfg)?;
    println!("ess sup |g| = {}", m.ess_sup());
    println!("operator norm bracket {:?}", est.bracket());
    for s in &est.ladder {
        println!("  delta {:<8} ratio {:.12} running lower {:.12}", s.delta, s.ratio, s.lower);
    }
    println!("unimodular: {}", m.is_unimodular());
    Ok(())
}
