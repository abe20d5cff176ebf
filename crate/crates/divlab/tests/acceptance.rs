//! Runs every acceptance criterion and prints one line per criterion.
//! The process fails when any criterion fails.

use divlab::acceptance::{run_all, Options};

fn main() {
    let outcomes = run_all(&Options::default());
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        outcomes.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
