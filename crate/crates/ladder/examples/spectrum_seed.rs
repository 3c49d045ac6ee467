//! The spectral seed and its range limit. The frequency comb of a window
//! `T` with `N` samples reaches `pi N / T`; a Rabi frequency outside that
//! range cannot produce a trustworthy peak, no matter how clean the data.
//!
//! Run with `cargo run --example spectrum_seed`.

use ladder::bayes::alpha_from_x;
use ladder::estimator::seed_error;
use ladder::model::ModelParams;
use ladder::sampling::uniform_grid;
use ladder::simulator::exact_trace;
use ladder::spectral::{find_peak, power_spectrum, PeakCriteria};

fn main() -> ladder::Result<()> {
    let params = ModelParams::new(4.0484, alpha_from_x(0.5))?;
    let criteria = PeakCriteria::default();
    println!("Omega = {} in a window of T = 100", params.omega());
    for n in [64usize, 128, 256, 512] {
        let grid = uniform_grid(100.0, n)?;
        let spectrum = power_spectrum(&exact_trace(&params, &grid))?;
        print!("N = {n:4}: comb reaches {:6.3}; ", spectrum.max_omega());
        match find_peak(&spectrum, &criteria) {
            Ok(peak) => println!(
                "peak at omega = {:.4} (bin {}, {:.1} dB), seed error {:.2e}",
                peak.omega,
                peak.bin,
                peak.height,
                seed_error(peak.omega, params.omega())
            ),
            Err(reason) => println!("no usable peak ({reason})"),
        }
    }
    Ok(())
}
