//! eps^theta sum s_n^(q(1+eps)) as eps decreases, for a finite sequence and for 1/n.

use grand_lebesgue::grandnorm::vanishing_limit;
use grand_lebesgue::{Epsilon, GrandParams, GrandSequence, IndexSet};

fn main() -> grand_lebesgue::Result<()> {
    let ladder: Vec<Epsilon> = (1..=12).map(|i| Epsilon::new(10f64.powi(-i))).collect::<Result<_, _>>()?;
    let finite = GrandSequence::from_values(IndexSet::Naturals, 1, &[2.0, 1.0, 0.5])?;
    let harmonic = GrandSequence::power_log(1, 1.0, 0.0)?;
    for (name, s, theta) in [("finite", &finite, 1.0), ("1/n", &harmonic, 2.0), ("1/n", &harmonic, 1.0)] {
        let rep = vanishing_limit(s, &GrandParams::new(1.0, theta)?, &ladder, 1e-6)?;
        println!("{name}, theta = {theta}: {:?}, last value {:?}", rep.verdict, rep.final_value);
    }
    Ok(())
}
