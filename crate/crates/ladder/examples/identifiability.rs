//! What a diagonal measurement record can and cannot distinguish. When
//! the observable, the Hamiltonian, and the initial state share a block
//! structure, adding any multiple of the identity inside a block changes
//! nothing observable; neither does flipping coupling signs by a diagonal
//! phase change. Coupling two blocks, however, shows up immediately.
//!
//! Run with `cargo run --example identifiability`.

use ladder::identifiability::{trace_deviation, SystemSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn main() -> ladder::Result<()> {
    // Levels 0 and 1 are coupled; level 2 evolves alone.
    let h = DMatrix::from_row_slice(
        3,
        3,
        &[
            re(1.0),
            re(0.5),
            re(0.0),
            re(0.5),
            re(1.0),
            re(0.0),
            re(0.0),
            re(0.0),
            re(2.0),
        ],
    );
    let rho0 = DMatrix::from_diagonal(&DVector::from_vec(vec![re(0.5), re(0.3), re(0.2)]));
    let m = vec![1.0, 2.0, 3.0];
    let system = SystemSpec::new(m.clone(), h.clone(), rho0.clone())?;

    let times: Vec<f64> = (0..200).map(|k| 0.1 * k as f64).collect();
    let blocks = system.common_blocks(1e-10);
    println!("common blocks: {blocks:?}");

    let shifted = system.shift_hamiltonian(&blocks, &[0.7, -2.0], 1e-10)?;
    println!(
        "shifting the blocks by 0.7 and -2.0 moves the record by {:.2e}",
        trace_deviation(&system, &shifted, &times)?
    );

    let twin = system.gauged(&[std::f64::consts::PI, 0.0], 0.0)?;
    println!(
        "flipping the coupling sign by a diagonal phase moves it by {:.2e}",
        trace_deviation(&system, &twin, &times)?
    );

    let mut h_pert = h;
    h_pert[(0, 2)] = re(0.1);
    h_pert[(2, 0)] = re(0.1);
    let perturbed = SystemSpec::new(m, h_pert, rho0)?;
    println!(
        "a 0.1 coupling between the blocks moves it by {:.2e}",
        trace_deviation(&system, &perturbed, &times)?
    );
    Ok(())
}
