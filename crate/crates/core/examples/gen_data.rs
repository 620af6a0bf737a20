//! Regenerates the shipped data files: program texts, the four-monitor
//! whitelist manifest, the comparator-layout manifest, and the sample
//! finiteness universe.
//!
//! Run from the repository root: `cargo run -p limitlab --example gen_data`.

use std::path::Path;

use limitlab::gallery::{inversion_whitelist, sample_fin_universe};
use limitlab::transforms::comparators_universe;
use limitlab::vm::{copier_code, eq_test_code, print_program, save_universe_manifest};

fn main() -> limitlab::error::Result<()> {
    let dir = Path::new("data");
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("E.prog"), print_program(eq_test_code().program()))?;
    std::fs::write(dir.join("copier.prog"), print_program(copier_code().program()))?;
    save_universe_manifest(&inversion_whitelist(), dir, "friedberg")?;
    save_universe_manifest(&comparators_universe(), dir, "comparators")?;
    sample_fin_universe().save(&dir.join("fin.json"))?;
    println!("wrote data/E.prog, data/copier.prog, data/friedberg.json, data/comparators.json, data/fin.json");
    Ok(())
}
