//! Small norm brackets: decomposition search above, dual pairing below, and the
//! lattice comparison through decomposition transfer.

use grand_lebesgue::smallnorm::{lattice_compare, small_norm_upper, transfer_decomposition, Decomposition, SearchBudget};
use grand_lebesgue::{grand_norm, GrandParams, GrandSequence, IndexSet, OptimizerConfig};

fn main() -> grand_lebesgue::Result<()> {
    let cfg = OptimizerConfig::default();
    let budget = SearchBudget::default();
    let params = GrandParams::new(1.0, 1.0)?;

    let spike = GrandSequence::spike(IndexSet::Naturals, 1, 1.0)?;
    let small = small_norm_upper(&spike, &params, &budget, &cfg)?;
    let grand = grand_norm(&spike, &params, &cfg)?;
    println!("spike small norm {:?}", small.bracket());
    println!("spike grand x small = {:.12}", grand.upper() * small.upper);

    let params = GrandParams::new(2.0, 1.0)?;
    let x = GrandSequence::from_values(IndexSet::Naturals, 1, &[4.0, 2.0, 2.0, 1.0, 0.5])?;
    let est = small_norm_upper(&x, &params, &budget, &cfg)?;
    println!(
        "x small norm {:?}, {} parts after {} evaluations",
        est.bracket(),
        est.witness_decomposition.parts().len(),
        est.evaluations
    );

    let y = GrandSequence::from_values(IndexSet::Naturals, 1, &[3.0, 2.0, 0.0, 1.0, 0.25])?;
    let t = transfer_decomposition(&Decomposition::per_index(&x)?, &y)?;
    println!("transferred parts: {}", t.decomposition.parts().len());
    let rep = lattice_compare(&x, &y, &params, &budget, &cfg, 1e-9)?;
    println!("lattice comparison: {:?} over {} records", rep.status(), rep.records.len());
    Ok(())
}
