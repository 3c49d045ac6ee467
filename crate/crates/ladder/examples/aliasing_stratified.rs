//! Why the sampling layout matters at small sample counts. Thirty-two
//! regularly spaced points alias a fast signal into a family of
//! indistinguishable frequencies; jittering one sample into each cell of
//! the window (stratified sampling) breaks the regularity and restores a
//! unique likelihood maximum.
//!
//! Run with `cargo run --example aliasing_stratified`.

use ladder::bayes::alpha_from_x;
use ladder::estimator::{exhaustive_search, likelihood_profile};
use ladder::model::ModelParams;
use ladder::sampling::{stratified_grid, uniform_grid};
use ladder::simulator::exact_trace;

fn main() -> ladder::Result<()> {
    let omega = 4.0484;
    let params = ModelParams::new(omega, alpha_from_x(0.5))?;
    let step = std::f64::consts::PI / 800.0;

    let data = exact_trace(&params, &uniform_grid(100.0, 32)?);
    let profile = likelihood_profile(&data, step, 9.0, step)?;
    let threshold = 0.95 * profile.max_value();
    println!("uniform, 32 points: frequencies within 5% of the likelihood maximum");
    let mut i = 0;
    while i < profile.values.len() {
        if profile.values[i] < threshold {
            i += 1;
            continue;
        }
        let mut best = i;
        while i < profile.values.len() && profile.values[i] >= threshold {
            if profile.values[i] > profile.values[best] {
                best = i;
            }
            i += 1;
        }
        println!(
            "  omega = {:.4}  (logP {:.1})",
            profile.omegas[best], profile.values[best]
        );
    }
    println!("the true frequency {omega} hides among its aliases\n");

    println!("stratified, 32 points, ten seeds:");
    for seed in 0..10 {
        let grid = stratified_grid(100.0, 32, seed)?;
        let ex = exhaustive_search(&exact_trace(&params, &grid), 9.0, step, 1e-10)?;
        println!(
            "  seed {seed}: omega = {:.4}, relative error {:.2e}",
            ex.omega,
            (ex.omega - omega).abs() / omega
        );
    }
    Ok(())
}
