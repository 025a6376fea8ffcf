//! Machine-readable experiment reports.
//!
//! CSV columns, in order:
//! `experiment,kind_train,kind_test,size,layer,severity_pairs,coverage,`
//! `acc_faulty,acc_corrected,delta_pp,n_samples,seed,architecture`.
//! Missing values (no corrector, no size) are empty fields. Rows are sorted
//! canonically, so re-emitting the same report is byte-identical.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::defect::DefectKind;
use crate::error::{Error, Result};
use crate::metrics::delta_accuracy;

pub const REPORT_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 13] = [
    "experiment",
    "kind_train",
    "kind_test",
    "size",
    "layer",
    "severity_pairs",
    "coverage",
    "acc_faulty",
    "acc_corrected",
    "delta_pp",
    "n_samples",
    "seed",
    "architecture",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SameDefect,
    CrossDefect,
    LayerSweep,
    Ladder,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SameDefect => "same_defect",
            ExperimentKind::CrossDefect => "cross_defect",
            ExperimentKind::LayerSweep => "layer_sweep",
            ExperimentKind::Ladder => "ladder",
        }
    }
}

/// One (kind, size, layer) cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: ExperimentKind,
    pub kind_train: Option<DefectKind>,
    pub kind_test: DefectKind,
    /// Size index; `Some(0)` marks the defect-free anchor, `None` the
    /// unsized checkerboard.
    pub size: Option<u8>,
    pub layer: usize,
    pub severity_pairs: usize,
    pub coverage: f64,
    pub acc_faulty: f64,
    pub acc_corrected: Option<f64>,
    pub delta_pp: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub architecture: Option<String>,
}

impl ReportRow {
    pub fn with_correction(mut self, acc_corrected: f64) -> Self {
        self.acc_corrected = Some(acc_corrected);
        self.delta_pp = Some(delta_accuracy(acc_corrected, self.acc_faulty));
        self
    }

    fn sort_key(&self) -> (ExperimentKind, Option<&str>, Option<DefectKind>, DefectKind, Option<u8>, usize) {
        (
            self.experiment,
            self.architecture.as_deref(),
            self.kind_train,
            self.kind_test,
            self.size,
            self.layer,
        )
    }

    fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.experiment.name().to_string(),
            opt(self.kind_train.map(|k| k.to_string())),
            self.kind_test.to_string(),
            opt(self.size.map(|s| s.to_string())),
            self.layer.to_string(),
            self.severity_pairs.to_string(),
            format!("{}", self.coverage),
            format!("{}", self.acc_faulty),
            opt(self.acc_corrected.map(|v| format!("{v}"))),
            opt(self.delta_pp.map(|v| format!("{v}"))),
            self.n_samples.to_string(),
            self.seed.to_string(),
            opt(self.architecture.clone()),
        ]
    }
}

/// Means over cells sharing a train kind, test kind, architecture and
/// (optionally) size. `size: None` with `all_sizes` set is the per-kind
/// mean over every size and layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub kind_train: Option<DefectKind>,
    pub kind_test: DefectKind,
    pub architecture: Option<String>,
    pub all_sizes: bool,
    pub size: Option<u8>,
    pub cells: usize,
    pub mean_acc_faulty: f64,
    pub mean_acc_corrected: Option<f64>,
    pub mean_delta_pp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub experiment: ExperimentKind,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<Aggregate>,
}

impl EvalReport {
    pub fn new(experiment: ExperimentKind, mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let aggregates = aggregate(&rows);
        Self {
            format_version: REPORT_VERSION,
            experiment,
            rows,
            aggregates,
        }
    }

    /// Per-kind mean over all sizes and layers.
    pub fn kind_mean(
        &self,
        kind_train: Option<DefectKind>,
        kind_test: DefectKind,
        architecture: Option<&str>,
    ) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| {
            a.all_sizes
                && a.kind_train == kind_train
                && a.kind_test == kind_test
                && a.architecture.as_deref() == architecture
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.csv_fields())?;
        }
        w.into_inner()
            .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let r: EvalReport = serde_json::from_str(text)?;
        if r.format_version != REPORT_VERSION {
            return Err(Error::Config(format!(
                "unsupported report version {}",
                r.format_version
            )));
        }
        Ok(r)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}

fn mean(v: impl Iterator<Item = f64>) -> (f64, usize) {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (if n == 0 { f64::NAN } else { s / n as f64 }, n)
}

fn aggregate(rows: &[ReportRow]) -> Vec<Aggregate> {
    type Group<'a> = (Option<&'a str>, Option<DefectKind>, DefectKind);
    let mut groups: BTreeMap<Group<'_>, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.architecture.as_deref(), r.kind_train, r.kind_test))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((arch, kind_train, kind_test), members) in groups {
        let build = |cells: &[&ReportRow], all_sizes: bool, size: Option<u8>| {
            let (mean_acc_faulty, n) = mean(cells.iter().map(|r| r.acc_faulty));
            let corrected: Vec<f64> = cells.iter().filter_map(|r| r.acc_corrected).collect();
            let deltas: Vec<f64> = cells.iter().filter_map(|r| r.delta_pp).collect();
            Aggregate {
                kind_train,
                kind_test,
                architecture: arch.map(str::to_string),
                all_sizes,
                size,
                cells: n,
                mean_acc_faulty,
                mean_acc_corrected: (!corrected.is_empty()).then(|| mean(corrected.into_iter()).0),
                mean_delta_pp: (!deltas.is_empty()).then(|| mean(deltas.into_iter()).0),
            }
        };
        // Anchor rows (size 0) are not defective cells and stay out of means.
        let defective: Vec<&ReportRow> = members
            .iter()
            .copied()
            .filter(|r| r.size != Some(0))
            .collect();
        out.push(build(&defective, true, None));
        let mut sizes: Vec<Option<u8>> = members.iter().map(|r| r.size).collect();
        sizes.sort();
        sizes.dedup();
        for size in sizes {
            let cells: Vec<&ReportRow> = members.iter().copied().filter(|r| r.size == size).collect();
            out.push(build(&cells, false, size));
        }
    }
    out
}

/// Mean improvement for every (train kind, test kind) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossDefectMatrix {
    pub architecture: String,
    pub train_kinds: Vec<DefectKind>,
    pub test_kinds: Vec<DefectKind>,
    /// `mean_delta_pp[a][b]`: trained on `train_kinds[a]`, tested on
    /// `test_kinds[b]`.
    pub mean_delta_pp: Vec<Vec<f64>>,
    pub report: EvalReport,
}

impl CrossDefectMatrix {
    pub fn from_report(
        architecture: &str,
        train_kinds: Vec<DefectKind>,
        test_kinds: Vec<DefectKind>,
        report: EvalReport,
    ) -> Result<Self> {
        let mut grid = Vec::with_capacity(train_kinds.len());
        for &tr in &train_kinds {
            let mut line = Vec::with_capacity(test_kinds.len());
            for &te in &test_kinds {
                let agg = report
                    .kind_mean(Some(tr), te, Some(architecture))
                    .and_then(|a| a.mean_delta_pp)
                    .ok_or_else(|| Error::MissingData(format!("cross-defect cell {tr}->{te}")))?;
                line.push(agg);
            }
            grid.push(line);
        }
        Ok(Self {
            architecture: architecture.to_string(),
            train_kinds,
            test_kinds,
            mean_delta_pp: grid,
            report,
        })
    }

    pub fn get(&self, train: DefectKind, test: DefectKind) -> Option<f64> {
        let a = self.train_kinds.iter().position(|k| *k == train)?;
        let b = self.test_kinds.iter().position(|k| *k == test)?;
        Some(self.mean_delta_pp[a][b])
    }

    /// Plain-text table for terminals.
    pub fn render(&self) -> String {
        let mut s = format!("{:>18}", "train \\ test");
        for k in &self.test_kinds {
            s.push_str(&format!("{:>18}", k.name()));
        }
        s.push('\n');
        for (a, tr) in self.train_kinds.iter().enumerate() {
            s.push_str(&format!("{:>18}", tr.name()));
            for v in &self.mean_delta_pp[a] {
                s.push_str(&format!("{:>18.2}", v));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Writes `report` to `path` in the requested format.
pub fn emit_report(report: &EvalReport, format: ReportFormat, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    match format {
        ReportFormat::Csv => report.write_csv(path),
        ReportFormat::Json => {
            let text = report.to_json_string()?;
            std::fs::write(path, text).map_err(|e| Error::io(path, e))
        }
    }
}
