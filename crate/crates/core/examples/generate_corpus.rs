//! Simulates all 1797 images under every defect configuration and writes
//! the corpus with its manifest.
//!
//! ```bash
//! cargo run --release --example generate_corpus -- runs/example
//! ```

use std::path::PathBuf;

use reram_correct::digits::bundled_digits;
use reram_correct::{Seeds, StuckMode, Workbench};

fn main() -> reram_correct::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "runs/example".into()));
    let wb = Workbench::build(bundled_digits(), Seeds::default(), StuckMode::StuckOff)?;
    let manifest = wb.write_corpus(&dir.join("corpus"))?;
    for entry in &manifest.configurations {
        println!("{:<30} {:>6} samples  sha256 {}", entry.file, entry.samples, &entry.sha256[..16]);
    }
    println!("{} samples total", manifest.total_samples);
    Ok(())
}
