//! Runs every acceptance criterion and prints one line per criterion.
//! Exits nonzero if any criterion fails.

use manifold_oco::harness::verify::{run_criterion, CRITERIA};

fn main() {
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let r = run_criterion(id);
        println!("{r}");
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
