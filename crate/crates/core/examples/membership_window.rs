//! Closed-form membership of n^(-1/q) (ln(n+1))^(-a) next to the numeric evidence.

use grand_lebesgue::grandnorm::powerlog_membership;
use grand_lebesgue::{GrandParams, OptimizerConfig};

fn main() -> grand_lebesgue::Result<()> {
    let cfg = OptimizerConfig::default();
    let params = GrandParams::new(2.0, 0.5)?;
    println!("q = 2, theta = 0.5, window [(1-theta)/q, 1/q] = [0.25, 0.5]");
    for a in [0.1, 0.25, 0.4, 0.5, 0.6] {
        let r = powerlog_membership(&params, a, false, &cfg)?;
        let ev = r.evidence.as_ref().expect("a >= 0 has evidence");
        println!(
            "a = {a:<4} {:<9?} bracket [{:.6}, {:.6}] slope {:+.3} agrees {:?}",
            r.verdict,
            ev.bracket.lower(),
            ev.bracket.upper(),
            ev.growth_exponent,
            r.evidence_agrees
        );
    }
    for theta in [0.5, 1.0] {
        let r = powerlog_membership(&GrandParams::new(2.0, theta)?, 0.0, true, &cfg)?;
        println!("pure power n^(-1/2), theta = {theta}: {:?}", r.verdict);
    }
    Ok(())
}
