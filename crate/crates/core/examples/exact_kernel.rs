//! Transition kernel and one application of the map on a five-point space,
//! checked against brute-force enumeration.
//!
//! cargo run --example exact_kernel

use nearmap::exact::{apply_pi, brute_force_kernel, build_kernel, sandwich_holds, Distribution};
use nearmap::scenario::five_point_distances;
use nearmap::spaces::rank_matrix_from_distances;

fn main() -> nearmap::Result<()> {
    let r = rank_matrix_from_distances(&five_point_distances())?;
    let theta = Distribution::new(vec![0.1, 0.15, 0.2, 0.25, 0.3])?;
    let (j, k) = (2, 3);

    let kernel = build_kernel(&r, &theta, j, k)?;
    let oracle = brute_force_kernel(&r, &theta, j, k)?;
    println!("rank matrix: {:?}", r.rows());
    for row in kernel.rows() {
        println!(
            "  {}",
            row.iter()
                .map(|x| format!("{x:.5}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    println!(
        "max |closed form - enumeration| = {:.2e}",
        kernel.max_abs_diff(&oracle)
    );

    let pi = apply_pi(&r, &theta, j, k)?;
    println!("theta = {:?}", theta.weights());
    println!("pi    = {:?}", pi.weights());
    println!("sandwich holds: {}", sandwich_holds(&theta, &pi, k, 1e-12));
    Ok(())
}
