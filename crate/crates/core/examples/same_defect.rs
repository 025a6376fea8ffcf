//! Trains one MLP(10,10) corrector per defect kind and reports its gain on
//! held-out samples of the same kind.
//!
//! ```bash
//! cargo run --release --example same_defect
//! ```

use reram_correct::experiment::run_same_defect;
use reram_correct::{ExperimentConfig, ExperimentKind, Workbench};

fn main() -> reram_correct::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SameDefect);
    cfg.output_dir = "runs/example".into();
    let wb = Workbench::open_or_build(&cfg)?;
    let report = run_same_defect(&wb, &cfg)?;

    for agg in report.aggregates.iter().filter(|a| !a.all_sizes) {
        println!(
            "{:<18} size {:>4}: faulty {:6.2}%  corrected {:6.2}%",
            agg.kind_test.to_string(),
            agg.size.map_or("-".into(), |s| s.to_string()),
            agg.mean_acc_faulty * 100.0,
            agg.mean_acc_corrected.unwrap_or(f64::NAN) * 100.0
        );
    }
    for agg in report.aggregates.iter().filter(|a| a.all_sizes) {
        println!("{:<18} mean gain {:+.2} pp", agg.kind_test.to_string(), agg.mean_delta_pp.unwrap_or(f64::NAN));
    }
    report.write_csv(&cfg.output_dir.join("same_defect.csv"))
}
