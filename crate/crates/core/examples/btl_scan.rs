//! Searches random BTL trees for fixed points with full support that are
//! not uniform. None exist for k = 2; k = 3 is scanned alongside, where
//! they do turn up.
//!
//! cargo run --release --example btl_scan [leaves] [trials]

use nearmap::exact::btl_scan;

fn main() -> nearmap::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let leaves = args.next().unwrap_or(4);
    let trials = args.next().unwrap_or(20);
    for k in 2..=3 {
        for j in 1..=k {
            let rep = btl_scan(leaves, trials, j, k, 2024)?;
            let mean = rep.fixed_points_per_trial.iter().sum::<usize>() as f64 / trials as f64;
            println!(
                "leaves={leaves} j={j} k={k}: {:.1} fixed points per tree, {} non-uniform with full support",
                mean,
                rep.findings.len()
            );
        }
    }
    Ok(())
}
