//! Pass/fail checks of experiment outcomes against fixed thresholds.

use serde::Serialize;

use crate::defect::DefectKind;
use crate::error::{Error, Result};
use crate::report::{CrossDefectMatrix, EvalReport};

/// Minimum mean same-defect improvement (pp) for circle, ring, row, column.
pub const SAME_DEFECT_MIN_PP: f64 = 20.0;
/// Minimum mean same-defect improvement (pp) for circle-complement.
pub const SAME_DEFECT_COMPLEMENT_MIN_PP: f64 = 8.0;
/// Minimum mean transfer (pp) between ring and circle, each direction.
pub const RING_CIRCLE_MIN_PP: f64 = 8.0;
/// Minimum mean transfer (pp) between row and column, each direction.
pub const ROW_COLUMN_MIN_PP: f64 = 5.0;
/// Maximum mean transfer (pp) from checkerboard to the structured kinds.
pub const CHECKERBOARD_MAX_PP: f64 = 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn kind_delta(report: &EvalReport, train: DefectKind, test: DefectKind, arch: &str) -> Result<f64> {
    report
        .kind_mean(Some(train), test, Some(arch))
        .and_then(|a| a.mean_delta_pp)
        .ok_or_else(|| Error::MissingData(format!("{arch} {train}->{test} in report")))
}

pub fn check_same_defect(report: &EvalReport, arch: &str) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let targets = [
        (DefectKind::Circle, SAME_DEFECT_MIN_PP),
        (DefectKind::Ring, SAME_DEFECT_MIN_PP),
        (DefectKind::Row, SAME_DEFECT_MIN_PP),
        (DefectKind::Column, SAME_DEFECT_MIN_PP),
        (DefectKind::CircleComplement, SAME_DEFECT_COMPLEMENT_MIN_PP),
    ];
    for (kind, min) in targets {
        let name = format!("same-defect {kind} mean dA >= {min} pp");
        match kind_delta(report, kind, kind, arch) {
            Ok(d) => out.push(CheckResult::new(name, d >= min, format!("{d:.2} pp"))),
            Err(e) => out.push(CheckResult::new(name, false, e.to_string())),
        }
    }
    out
}

pub fn check_cross_defect(matrix: &CrossDefectMatrix) -> Vec<CheckResult> {
    use DefectKind::*;
    let mut out = Vec::new();
    let mut min_pair = |a: DefectKind, b: DefectKind, min: f64| {
        let name = format!("cross-defect {a}->{b} mean dA >= {min} pp");
        match matrix.get(a, b) {
            Some(d) => out.push(CheckResult::new(name, d >= min, format!("{d:.2} pp"))),
            None => out.push(CheckResult::new(name, false, "missing cell")),
        }
    };
    min_pair(Ring, Circle, RING_CIRCLE_MIN_PP);
    min_pair(Circle, Ring, RING_CIRCLE_MIN_PP);
    min_pair(Row, Column, ROW_COLUMN_MIN_PP);
    min_pair(Column, Row, ROW_COLUMN_MIN_PP);
    for target in [Circle, Ring, Row, Column] {
        let name = format!("cross-defect checkerboard->{target} mean dA <= {CHECKERBOARD_MAX_PP} pp");
        match matrix.get(Checkerboard, target) {
            Some(d) => out.push(CheckResult::new(name, d <= CHECKERBOARD_MAX_PP, format!("{d:.2} pp"))),
            None => out.push(CheckResult::new(name, false, "missing cell")),
        }
    }
    out
}

/// The tiny corrector must end up below the uncorrected circuit for every
/// kind it was evaluated on.
pub fn check_tiny_model(report: &EvalReport, arch: &str) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for agg in report
        .aggregates
        .iter()
        .filter(|a| a.all_sizes && a.architecture.as_deref() == Some(arch))
    {
        let Some(corr) = agg.mean_acc_corrected else { continue };
        let train = agg.kind_train.map_or("-".to_string(), |k| k.to_string());
        out.push(CheckResult::new(
            format!("{arch} {train}->{} corrected < faulty", agg.kind_test),
            corr < agg.mean_acc_faulty,
            format!(
                "corrected {:.2}% vs faulty {:.2}%",
                corr * 100.0,
                agg.mean_acc_faulty * 100.0
            ),
        ));
    }
    out
}

/// Accuracy loss per layer at the given size, relative to the anchor rows.
pub fn layer_losses(sweep: &EvalReport, kind: DefectKind, size: Option<u8>) -> Result<[f64; 4]> {
    let mut loss = [f64::NAN; 4];
    for layer in 0..4 {
        let find = |s: Option<u8>| {
            sweep
                .rows
                .iter()
                .find(|r| r.kind_test == kind && r.size == s && r.layer == layer)
                .map(|r| r.acc_faulty)
                .ok_or_else(|| Error::MissingData(format!("{kind} size {s:?} layer {layer}")))
        };
        loss[layer] = find(Some(0))? - find(size)?;
    }
    Ok(loss)
}

fn argmax_layer_check(sweep: &EvalReport, kind: DefectKind, layer: usize) -> CheckResult {
    let name = format!("layer sweep {kind} size 4: loss largest at layer {layer}");
    match layer_losses(sweep, kind, Some(4)) {
        Ok(loss) => {
            let top = loss.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let detail = format!(
                "loss pp by layer: {:.1} {:.1} {:.1} {:.1}",
                loss[0] * 100.0,
                loss[1] * 100.0,
                loss[2] * 100.0,
                loss[3] * 100.0
            );
            CheckResult::new(name, loss[layer] >= top, detail)
        }
        Err(e) => CheckResult::new(name, false, e.to_string()),
    }
}

pub fn check_layer_sweep(sweep: &EvalReport) -> Vec<CheckResult> {
    vec![
        argmax_layer_check(sweep, DefectKind::Circle, 3),
        argmax_layer_check(sweep, DefectKind::CircleComplement, 0),
    ]
}
