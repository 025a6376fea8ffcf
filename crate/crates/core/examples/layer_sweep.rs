//! Uncorrected accuracy for each defect kind, size and layer.
//!
//! ```bash
//! cargo run --release --example layer_sweep
//! ```

use reram_correct::checks::layer_losses;
use reram_correct::experiment::run_layer_sweep;
use reram_correct::{DefectKind, ExperimentConfig, ExperimentKind, Workbench};

fn main() -> reram_correct::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::LayerSweep);
    cfg.output_dir = "runs/example".into();
    let wb = Workbench::open_or_build(&cfg)?;
    let sweep = run_layer_sweep(&wb, &cfg)?;

    println!("accuracy loss (pp) by layer at each size");
    for kind in DefectKind::ALL {
        for size in kind.sizes() {
            let losses = layer_losses(&sweep, kind, size)?.map(|l| l * 100.0);
            println!(
                "{:<18} {:>4}  {:>6.1} {:>6.1} {:>6.1} {:>6.1}",
                kind.to_string(),
                size.map_or("-".into(), |s| s.to_string()),
                losses[0],
                losses[1],
                losses[2],
                losses[3]
            );
        }
    }
    sweep.write_csv(&cfg.output_dir.join("layer_sweep.csv"))
}
