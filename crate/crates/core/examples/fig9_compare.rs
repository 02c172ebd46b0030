//! Two-phase against integrated design for every filter order.
//!
//! Writes all designs and `fig9_table.csv` to the given directory
//! (default `out/compare`). Takes several minutes.

use std::path::PathBuf;

use flexacs::cli::{compare, ProjectConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map_or_else(|| PathBuf::from("out/compare"), PathBuf::from);
    let opts = RunOptions {
        out: Some(out.clone()),
        ..RunOptions::default()
    };
    let (rows, _) = compare(&ProjectConfig::reference(), &opts)?;
    println!("{:>5} {:>10} {:>10} {:>10}", "order", "two-phase", "subcase 1", "subcase 2");
    for r in rows {
        println!("{:>5} {:>10.3} {:>10.3} {:>10.3}", r.order, r.two_phase_db, r.subcase1_db, r.subcase2_db);
    }
    println!("tables written to {}", out.display());
    Ok(())
}
