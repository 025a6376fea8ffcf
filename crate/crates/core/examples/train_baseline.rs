//! Trains the 64-50-20-8-10 classifier and saves its weights.
//!
//! ```bash
//! cargo run --release --example train_baseline -- runs/example 1
//! ```

use std::path::PathBuf;

use reram_correct::digits::bundled_digits;
use reram_correct::experiment::{build_baseline, save_baseline};

fn main() -> reram_correct::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "runs/example".into()));
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let (params, report) = build_baseline(&bundled_digits(), seed)?;
    save_baseline(&dir, &params, &report, seed)?;
    println!(
        "seed {} after {} attempt(s): train {:.2}%  validation {:.2}%  test {:.2}%  ({} epochs)",
        report.seed_used,
        report.attempts,
        report.train_accuracy * 100.0,
        report.validation_accuracy * 100.0,
        report.test_accuracy * 100.0,
        report.epochs_run
    );
    println!("weights in {}", dir.display());
    Ok(())
}
