//! Closed-form dynamics of the driven ladder: the effective Hamiltonian,
//! the propagator, and the three-term expansion of the survival signal.
//!
//! Run with `cargo run --example exact_dynamics`.

use ladder::bayes::alpha_from_x;
use ladder::model::{
    effective_hamiltonian, p11_components, population, propagator, unitarity_defect, ModelParams,
};

fn main() -> ladder::Result<()> {
    let params = ModelParams::new(4.0484, alpha_from_x(0.5))?;
    let (w1, w2) = params.couplings();
    println!(
        "Omega = {}, alpha = {:.6}, x = {:.3}",
        params.omega(),
        params.alpha(),
        params.x()
    );
    println!("couplings: Omega1 = {w1:.6}, Omega2 = {w2:.6}");
    println!("H_eff = {}", effective_hamiltonian(&params));

    let c = p11_components(&params);
    println!(
        "survival signal: p11(t) = {:.4} + {:.4} cos(Omega t) + {:.4} cos(2 Omega t)",
        c.a0, c.a1, c.a2
    );

    println!("\n    t      p11      p12      p13    unitarity defect");
    for k in 0..=10 {
        let t = 0.25 * k as f64;
        let u = propagator(&params, t);
        let p11 = population(&params, 1, 1, t)?;
        let p12 = population(&params, 1, 2, t)?;
        let p13 = population(&params, 1, 3, t)?;
        println!(
            "{t:5.2}  {p11:.5}  {p12:.5}  {p13:.5}      {:.2e}",
            unitarity_defect(&u)
        );
    }
    Ok(())
}
