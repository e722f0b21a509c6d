//! Norms of step functions: classical amalgam, grand amalgam, and the bounds for
//! indicators of bounded sets.

use grand_lebesgue::amalgam::{
    amalgam_grand_norm, char_fn_check, char_fn_norm_bound, classical_amalgam_norm, powerlog_plateau, AmalgamParams, Cell,
    StepFunction,
};
use grand_lebesgue::smallnorm::SearchBudget;
use grand_lebesgue::{IndexSet, OptimizerConfig};

fn main() -> grand_lebesgue::Result<()> {
    let cfg = OptimizerConfig::default();
    let g = StepFunction::new(
        IndexSet::Integers,
        [(-1, vec![Cell::new(0.5, 2.0), Cell::new(0.5, -1.0)]), (0, vec![Cell::new(1.0, 1.0)])],
    )?;
    let params = AmalgamParams::new(2.0, 2.0, 1.0)?;
    println!("classical l^2(L^2): {:?}", classical_amalgam_norm(&g, 2.0, 2.0)?);
    println!("grand l^2)(L^2):    {:?}", amalgam_grand_norm(&g, &params, &cfg)?);

    let plateau = powerlog_plateau(2.0, 0.0)?;
    println!("n^(-1/2) plateaus, grand: {:?}", amalgam_grand_norm(&plateau, &params, &cfg)?);
    println!("n^(-1/2) plateaus, classical l^2: {:?}", classical_amalgam_norm(&plateau, 2.0, 2.0)?);

    let e = StepFunction::indicator(IndexSet::Integers, &[(-1.5, -0.25), (0.5, 1.75)])?;
    let params = AmalgamParams::new(2.0, 1.0, 1.0)?;
    println!("indicator bound for M = 2: {:.12}", char_fn_norm_bound(2, &params));
    let rep = char_fn_check(&e, &params, &SearchBudget::default(), &cfg, 1e-9)?;
    for r in &rep.records {
        println!("  {:<40} {:?}", r.check, r.status);
    }
    Ok(())
}
