//! Grand norm brackets of finite and power-law sequences, full and truncated.

use grand_lebesgue::grandnorm::{check_equivalence, grand_norm_search};
use grand_lebesgue::{grand_norm, grand_norm_truncated, lp_norm, Epsilon, GrandParams, GrandSequence, IndexSet, OptimizerConfig};

fn main() -> grand_lebesgue::Result<()> {
    let cfg = OptimizerConfig::default();
    let params = GrandParams::new(1.0, 1.0)?;

    let spike = GrandSequence::spike(IndexSet::Naturals, 1, 1.0)?;
    let out = grand_norm_search(&spike, &params, None, &cfg)?;
    println!("spike, q = theta = 1: {:?} at eps = {:?}", out.bracket, out.argmax);

    let x = GrandSequence::from_values(IndexSet::Naturals, 1, &[3.0, -1.5, 0.75, 0.5])?;
    let p2 = GrandParams::new(2.0, 0.5)?;
    println!("||x||_2 = {:?}", lp_norm(&x, 2.0)?);
    println!("grand norm (q = 2, theta = 0.5) = {:?}", grand_norm(&x, &p2, &cfg)?);
    let eps0 = Epsilon::new(0.1)?;
    println!("truncated at eps0 = 0.1 = {:?}", grand_norm_truncated(&x, &p2, eps0, &cfg)?);
    let rep = check_equivalence(&x, &p2, eps0, &cfg, 1e-9)?;
    for r in &rep.records {
        println!("  {:<28} {:?}", r.check, r.status);
    }

    // n^(-1/2): not in l^2, but in the grand space for theta >= 1
    let root = GrandSequence::power_log(1, 0.5, 0.0)?;
    for theta in [0.5, 1.0, 2.0] {
        let b = grand_norm(&root, &GrandParams::new(2.0, theta)?, &cfg)?;
        println!("n^(-1/2), q = 2, theta = {theta}: {b:?}");
    }
    Ok(())
}
