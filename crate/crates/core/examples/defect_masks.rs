//! Renders every defect pattern on the 65x50 first array as PGM images and
//! prints its size in pairs.
//!
//! ```bash
//! cargo run --example defect_masks -- masks/
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use reram_correct::defect::coverage;
use reram_correct::{ConfigKey, DefectKind, StuckMode, LAYER_DIMS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "masks".into()));
    std::fs::create_dir_all(&out)?;
    let dims = LAYER_DIMS[0];
    for key in ConfigKey::all_for(&DefectKind::ALL) {
        let mask = key.spec(0, StuckMode::StuckOff)?.mask(dims)?;
        let path = out.join(format!("{key}.pgm"));
        let file = File::create(&path)?;
        mask.write_pgm(BufWriter::new(file))?;
        println!(
            "{:<24} {:>5} pairs  {:>5.1}%",
            key.to_string(),
            mask.masked_count(),
            coverage(&mask) * 100.0
        );
    }
    println!("wrote masks to {}", out.display());
    Ok(())
}
