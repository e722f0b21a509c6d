//! Constants built on the Lambert W function and the scaling function psi.

use grand_lebesgue::{c_eps0, lambert_w0, psi, psi_argmax, psi_max, Epsilon};

fn main() -> grand_lebesgue::Result<()> {
    let w = lambert_w0((-1.0f64).exp())?;
    println!("W(1/e)              = {w:.17}");
    println!("argmax of psi       = {:.16}", psi_argmax());
    println!("max of psi          = {:.16}", psi_max());
    println!("min of 1/psi        = {:.17}", 1.0 / psi_max());
    for eps in [1e-3, 0.1, 1.0, psi_argmax(), 10.0] {
        println!("psi({eps:<18}) = {:.12}", psi(Epsilon::new(eps)?));
    }
    for eps0 in [0.01, 0.5, 2.0] {
        println!("c({eps0}) = {:.12}", c_eps0(Epsilon::new(eps0)?));
    }
    Ok(())
}
