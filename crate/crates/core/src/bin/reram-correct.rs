//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 threshold failure under `--check`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use reram_correct::checks::{
    check_cross_defect, check_layer_sweep, check_same_defect, check_tiny_model, CheckResult,
};
use reram_correct::experiment::{
    build_baseline, run_cross_defect, run_ladder, run_layer_sweep, run_same_defect, save_baseline,
    CORPUS_DIR,
};
use reram_correct::report::emit_report;
use reram_correct::{
    EvalReport, Error, ExperimentConfig, ExperimentKind, ReportFormat, Workbench,
};

#[derive(Parser)]
#[command(name = "reram-correct", version, about = "ReRAM stuck-at fault simulation and correction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sets the base, corpus and corrector seeds at once.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    corpus_seed: Option<u64>,
    #[arg(long)]
    corrector_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Exit with code 4 if the result misses its acceptance thresholds.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Train the 64-50-20-8-10 baseline and save its weights.
    TrainBase(Common),
    /// Simulate the faulty corpus and write it with its manifest.
    GenCorpus(Common),
    /// Same-defect correction study.
    SameDefect(Common),
    /// Cross-defect generalisation matrix.
    CrossDefect(Common),
    /// Uncorrected accuracy per kind, size and layer.
    LayerSweep(Common),
    /// Corrector architecture ladder.
    Ladder(Common),
    /// Re-emit a JSON report as CSV or JSON.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load_config(common: &Common, kind: ExperimentKind) -> reram_correct::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(kind),
    };
    cfg.experiment = kind;
    if let Some(s) = common.seed {
        cfg.seeds = reram_correct::Seeds::all(s);
    }
    if let Some(s) = common.base_seed {
        cfg.seeds.base = s;
    }
    if let Some(s) = common.corpus_seed {
        cfg.seeds.corpus = s;
    }
    if let Some(s) = common.corrector_seed {
        cfg.seeds.corrector = s;
    }
    if let Some(d) = &common.output_dir {
        cfg.output_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_both(cfg: &ExperimentConfig, report: &EvalReport) -> reram_correct::Result<()> {
    let stem = report.experiment.name();
    emit_report(report, ReportFormat::Csv, &cfg.output_dir.join(format!("{stem}.csv")))?;
    emit_report(report, ReportFormat::Json, &cfg.output_dir.join(format!("{stem}.json")))?;
    for agg in report.aggregates.iter().filter(|a| a.all_sizes) {
        println!(
            "{:>12} {:>18} -> {:<18} faulty {:6.2}%  corrected {}  dA {}",
            agg.architecture.as_deref().unwrap_or("-"),
            agg.kind_train.map_or("-".into(), |k| k.to_string()),
            agg.kind_test.to_string(),
            agg.mean_acc_faulty * 100.0,
            agg.mean_acc_corrected
                .map_or("-".into(), |v| format!("{:6.2}%", v * 100.0)),
            agg.mean_delta_pp.map_or("-".into(), |v| format!("{v:+.2} pp")),
        );
    }
    Ok(())
}

fn print_checks(checks: &[CheckResult]) -> bool {
    for c in checks {
        println!("[{}] {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn run(cli: Cli) -> reram_correct::Result<bool> {
    match cli.command {
        Command::TrainBase(common) => {
            let cfg = load_config(&common, ExperimentKind::SameDefect)?;
            let digits = cfg.digits()?;
            let (params, report) = build_baseline(&digits, cfg.seeds.base)?;
            save_baseline(&cfg.output_dir, &params, &report, cfg.seeds.base)?;
            println!(
                "baseline test accuracy {:.2}% (seed {}, {} attempt(s))",
                report.test_accuracy * 100.0,
                report.seed_used,
                report.attempts
            );
            Ok(!common.check
                || report.test_accuracy >= reram_correct::baseline::MIN_BASELINE_ACCURACY)
        }
        Command::GenCorpus(common) => {
            let cfg = load_config(&common, ExperimentKind::LayerSweep)?;
            let wb = Workbench::open_or_build(&cfg)?;
            println!(
                "corpus: {} samples in {} configurations under {}",
                wb.corpus.total_samples(),
                wb.corpus.configs.len(),
                cfg.output_dir.join(CORPUS_DIR).display()
            );
            Ok(true)
        }
        Command::SameDefect(common) => {
            let cfg = load_config(&common, ExperimentKind::SameDefect)?;
            let wb = Workbench::open_or_build(&cfg)?;
            let report = run_same_defect(&wb, &cfg)?;
            write_both(&cfg, &report)?;
            Ok(!common.check || print_checks(&check_same_defect(&report, &cfg.corrector_spec()?.to_string())))
        }
        Command::CrossDefect(common) => {
            let cfg = load_config(&common, ExperimentKind::CrossDefect)?;
            let wb = Workbench::open_or_build(&cfg)?;
            let matrix = run_cross_defect(&wb, &cfg)?;
            write_both(&cfg, &matrix.report)?;
            let path = cfg.output_dir.join("cross_defect_matrix.json");
            std::fs::write(&path, serde_json::to_string_pretty(&matrix)? + "\n")
                .map_err(|e| Error::Io { path: path.clone(), source: e })?;
            print!("{}", matrix.render());
            Ok(!common.check || print_checks(&check_cross_defect(&matrix)))
        }
        Command::LayerSweep(common) => {
            let cfg = load_config(&common, ExperimentKind::LayerSweep)?;
            let wb = Workbench::open_or_build(&cfg)?;
            let report = run_layer_sweep(&wb, &cfg)?;
            write_both(&cfg, &report)?;
            Ok(!common.check || print_checks(&check_layer_sweep(&report)))
        }
        Command::Ladder(common) => {
            let cfg = load_config(&common, ExperimentKind::Ladder)?;
            let wb = Workbench::open_or_build(&cfg)?;
            let report = run_ladder(&wb, &cfg)?;
            write_both(&cfg, &report)?;
            Ok(!common.check || print_checks(&check_tiny_model(&report, "MLP(1,)")))
        }
        Command::Report {
            input,
            format,
            output,
        } => {
            let report = EvalReport::load_json(&input)?;
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            emit_report(&report, format, &output)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
