//! Fixed points of the map on the bundled finite scenarios, with their
//! stability.
//!
//! cargo run --release --example fixed_points [scenario]

use nearmap::exact::{find_fixed_points, SearchConfig};
use nearmap::scenario::bundled_scenario;

fn main() -> nearmap::Result<()> {
    let names: Vec<String> = match std::env::args().nth(1) {
        Some(n) => vec![n],
        None => ["paper-5pt", "paper-R2", "paper-0.4-0.6"]
            .map(String::from)
            .to_vec(),
    };
    for name in names {
        let s = bundled_scenario(&name)?;
        let r = s.space.rank_matrix()?;
        let found = find_fixed_points(&r, s.j, s.k, &SearchConfig::default())?;
        println!(
            "{name} (j={}, k={}): {} fixed points",
            s.j,
            s.k,
            found.len()
        );
        for f in &found {
            let w: Vec<String> = f
                .theta_star
                .weights()
                .iter()
                .map(|x| format!("{x:.4}"))
                .collect();
            println!(
                "  support {} radius {:.4} {:?} [{}]",
                f.support_size,
                f.spectral_radius,
                f.stability,
                w.join(", ")
            );
        }
    }
    Ok(())
}
