//! Trains a corrector on each defect kind and evaluates it on every kind.
//!
//! ```bash
//! cargo run --release --example cross_defect
//! ```

use reram_correct::experiment::run_cross_defect;
use reram_correct::{ExperimentConfig, ExperimentKind, Workbench};

fn main() -> reram_correct::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::CrossDefect);
    cfg.output_dir = "runs/example".into();
    let wb = Workbench::open_or_build(&cfg)?;
    let matrix = run_cross_defect(&wb, &cfg)?;
    println!("mean accuracy gain (pp), {}", matrix.architecture);
    print!("{}", matrix.render());
    matrix.report.write_csv(&cfg.output_dir.join("cross_defect.csv"))
}
