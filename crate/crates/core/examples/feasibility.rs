//! Finds a distance table realising a given rank matrix, or reports that
//! none exists.
//!
//! cargo run --example feasibility

use nearmap::exact::{feasibility_search, RankMatrix, DEFAULT_MARGIN};
use nearmap::scenario::r2_rank_matrix;
use nearmap::spaces::rank_matrix_from_distances;

fn report(name: &str, r: &RankMatrix) -> nearmap::Result<()> {
    match feasibility_search(r, DEFAULT_MARGIN) {
        Some(d) => {
            let back = rank_matrix_from_distances(&d)?;
            println!("{name}: realised, ranks reproduced = {}", back == *r);
            for row in &d {
                println!(
                    "  {}",
                    row.iter()
                        .map(|x| format!("{x:.3}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                );
            }
        }
        None => println!("{name}: no metric realises these ranks"),
    }
    Ok(())
}

fn main() -> nearmap::Result<()> {
    report("R2", &r2_rank_matrix())?;
    // each point's nearest neighbour is the next one round the cycle, so
    // d01 < d02 = d20 < d21 = d12 < d10
    let bad = RankMatrix::new(vec![vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]])?;
    report("cyclic", &bad)
}
