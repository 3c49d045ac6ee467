//! Shot-noise simulation with the adaptive stopping rule: the budget is
//! spent in batches until the running estimate clears the target
//! signal-to-noise ratio, so strong signals cost few shots and nulls cost
//! the whole cap.
//!
//! Run with `cargo run --example simulate_shots`.

use ladder::bayes::alpha_from_x;
use ladder::model::ModelParams;
use ladder::sampling::uniform_grid;
use ladder::simulator::{exact_trace, simulate_trace, ShotPolicy};

fn main() -> ladder::Result<()> {
    let params = ModelParams::new(2.2, alpha_from_x(0.4))?;
    let grid = uniform_grid(20.0, 24)?;
    let policy = ShotPolicy::default();
    let data = simulate_trace(&params, &grid, 7, &policy)?;
    let exact = exact_trace(&params, &grid);

    let shots = data.shots().expect("simulated data carry shot counts");
    println!("     t    exact   measured   shots");
    for (k, &t) in data.times().iter().enumerate() {
        println!(
            "{t:6.2}  {:.5}    {:.5}  {:>6}",
            exact.values()[k],
            data.values()[k],
            shots[k]
        );
    }
    let total: u64 = shots.iter().map(|&s| u64::from(s)).sum();
    println!(
        "\ntotal shots: {total} across {} points (cap would be {})",
        data.len(),
        data.len() * 10_000
    );
    Ok(())
}
