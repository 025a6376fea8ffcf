//! Compares corrector sizes, from 31 to 23,310 parameters, on each defect
//! kind.
//!
//! ```bash
//! cargo run --release --example ladder -- "MLP(10,10)" "MLP(6,)" "MLP(1,)"
//! ```

use reram_correct::experiment::run_ladder;
use reram_correct::{ExperimentConfig, ExperimentKind, Workbench};

fn main() -> reram_correct::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Ladder);
    cfg.output_dir = "runs/example".into();
    if !names.is_empty() {
        cfg.architectures = Some(names);
    }
    cfg.validate()?;
    let wb = Workbench::open_or_build(&cfg)?;
    let report = run_ladder(&wb, &cfg)?;
    for agg in report.aggregates.iter().filter(|a| a.all_sizes) {
        println!(
            "{:>12} {:<18} {:+7.2} pp",
            agg.architecture.as_deref().unwrap_or("-"),
            agg.kind_test.to_string(),
            agg.mean_delta_pp.unwrap_or(f64::NAN)
        );
    }
    report.write_csv(&cfg.output_dir.join("ladder.csv"))
}
