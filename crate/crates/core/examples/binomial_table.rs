//! Behaviour of the two-point map for every `1 <= j <= k <= 12`, plus a few
//! trajectories from p = 0.1.
//!
//! cargo run --example binomial_table

use nearmap::binomial::{classification_table, iterate_map, write_table_csv, BehaviorType};

fn main() -> nearmap::Result<()> {
    let table = classification_table(12)?;
    write_table_csv(&table, std::io::stdout())?;

    println!();
    for row in table
        .iter()
        .filter(|r| r.kind == BehaviorType::III && r.k <= 6)
    {
        let p = row.p_crit.expect("type III has a threshold");
        for start in [0.5 * p, 0.5 * (p + 0.5)] {
            let traj = iterate_map(start, row.j, row.k, 8)?;
            let tail: Vec<String> = traj.iter().step_by(2).map(|x| format!("{x:.4}")).collect();
            println!(
                "j={} k={} p0={start:.4}: {}",
                row.j,
                row.k,
                tail.join(" -> ")
            );
        }
    }
    Ok(())
}
