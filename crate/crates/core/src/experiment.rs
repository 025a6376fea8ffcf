//! End-to-end experiments over a trained baseline and its faulty corpus.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::{train_baseline, BaselineOptions, BaselineReport};
use crate::circuit::Circuit;
use crate::corpus::{
    digest_hex, generate_corpus, read_corpus, read_manifest, split_corpus, write_corpus,
    ConfigKey, Corpus, CorpusSplit, FaultySample, Manifest,
};
use crate::corrector::{correct, default_corrector_config, train_corrector};
use crate::crossbar::{LAYER_DIMS, NUM_LAYERS};
use crate::defect::{coverage, DefectKind, StuckMode};
use crate::digits::{bundled_digits, load_digits, split_base, DigitSample};
use crate::error::{Error, Result};
use crate::metrics::accuracy;
use crate::mlp::{ladder_entry, MlpParams, MlpSpec, CORRECTOR_LADDER};
use crate::report::{CrossDefectMatrix, EvalReport, ExperimentKind, ReportRow};
use crate::train::TrainConfig;

pub const CONFIG_VERSION: u32 = 1;
pub const BASELINE_FILE: &str = "baseline.json";
pub const BASELINE_SUMMARY_FILE: &str = "baseline_summary.json";
pub const CORPUS_DIR: &str = "corpus";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeds {
    /// Base split and baseline training.
    pub base: u64,
    /// Corpus cross-validation / train / test split.
    pub corpus: u64,
    /// Corrector initialisation and shuffling.
    pub corrector: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            base: 1,
            corpus: 2,
            corrector: 3,
        }
    }
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Self {
            base: seed,
            corpus: seed,
            corrector: seed,
        }
    }
}

/// Which train/test defect pairs a ladder study covers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderPairing {
    /// Each train kind evaluated on itself only.
    #[default]
    Same,
    /// Every train kind against every test kind.
    All,
}

/// Optional overrides of the corrector training defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub patience: Option<usize>,
}

/// JSON experiment description. Unset defect fields mean "all six kinds".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub train_defect: Option<DefectKind>,
    #[serde(default)]
    pub test_defect: Option<DefectKind>,
    #[serde(default = "default_corrector")]
    pub corrector: String,
    /// Ladder subset by name; all eleven when unset.
    #[serde(default)]
    pub architectures: Option<Vec<String>>,
    #[serde(default)]
    pub ladder_pairing: LadderPairing,
    #[serde(default)]
    pub stuck_mode: StuckMode,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Digits CSV; the bundled copy when unset.
    #[serde(default)]
    pub digits_path: Option<PathBuf>,
    #[serde(default)]
    pub corrector_training: TrainOverrides,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_corrector() -> String {
    "MLP(10,10)".into()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/default")
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            version: CONFIG_VERSION,
            experiment,
            train_defect: None,
            test_defect: None,
            corrector: default_corrector(),
            architectures: None,
            ladder_pairing: LadderPairing::Same,
            stuck_mode: StuckMode::StuckOff,
            seeds: Seeds::default(),
            output_dir: default_output_dir(),
            digits_path: None,
            corrector_training: TrainOverrides::default(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}",
                self.version
            )));
        }
        ladder_entry(&self.corrector)?;
        for name in self.architectures.iter().flatten() {
            ladder_entry(name)?;
        }
        self.corrector_config(0).validate()
    }

    pub fn corrector_spec(&self) -> Result<MlpSpec> {
        Ok(ladder_entry(&self.corrector)?.spec())
    }

    pub fn ladder_specs(&self) -> Result<Vec<MlpSpec>> {
        match &self.architectures {
            Some(names) => names.iter().map(|n| Ok(ladder_entry(n)?.spec())).collect(),
            None => Ok(CORRECTOR_LADDER.iter().map(|e| e.spec()).collect()),
        }
    }

    pub fn train_kinds(&self) -> Vec<DefectKind> {
        self.train_defect
            .map_or_else(|| DefectKind::ALL.to_vec(), |k| vec![k])
    }

    pub fn test_kinds(&self) -> Vec<DefectKind> {
        self.test_defect
            .map_or_else(|| DefectKind::ALL.to_vec(), |k| vec![k])
    }

    /// Corrector training parameters for a given derived seed.
    pub fn corrector_config(&self, seed: u64) -> TrainConfig {
        let mut c = default_corrector_config(seed);
        let o = &self.corrector_training;
        if let Some(v) = o.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = o.epochs {
            c.epochs = v;
        }
        if let Some(v) = o.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = o.patience {
            c.patience = Some(v);
        }
        c
    }

    pub fn digits(&self) -> Result<Vec<DigitSample>> {
        match &self.digits_path {
            Some(p) => load_digits(p),
            None => Ok(bundled_digits()),
        }
    }
}

/// Seed for one corrector, derived from the corrector seed, the training
/// kind and the architecture, so the same corrector is rebuilt identically
/// by every experiment that needs it.
pub fn corrector_seed(base: u64, kind: DefectKind, spec: &MlpSpec) -> u64 {
    let digest = Sha256::digest(format!("{base}:{kind}:{spec}").as_bytes());
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

/// Everything an experiment needs: baseline, circuit, corpus and splits.
#[derive(Debug, Clone)]
pub struct Workbench {
    pub digits: Vec<DigitSample>,
    pub baseline: MlpParams,
    pub baseline_report: Option<BaselineReport>,
    pub circuit: Circuit,
    pub corpus: Corpus,
    pub splits: BTreeMap<ConfigKey, CorpusSplit>,
    pub seeds: Seeds,
}

/// Trains the baseline on the seeded 1617/180 split.
pub fn build_baseline(
    digits: &[DigitSample],
    seed: u64,
) -> Result<(MlpParams, BaselineReport)> {
    let (train, test) = split_base(digits, seed)?;
    let out = train_baseline(&train, &test, &BaselineOptions::with_seed(seed))?;
    Ok((out.params, out.report))
}

impl Workbench {
    /// Builds everything in memory from the dataset.
    pub fn build(digits: Vec<DigitSample>, seeds: Seeds, stuck_mode: StuckMode) -> Result<Self> {
        let (baseline, report) = build_baseline(&digits, seeds.base)?;
        let mut wb = Self::from_baseline(digits, baseline, seeds, stuck_mode)?;
        wb.baseline_report = Some(report);
        Ok(wb)
    }

    /// Builds the circuit and corpus for an existing baseline.
    pub fn from_baseline(
        digits: Vec<DigitSample>,
        baseline: MlpParams,
        seeds: Seeds,
        stuck_mode: StuckMode,
    ) -> Result<Self> {
        let circuit = Circuit::from_params(&baseline)?;
        let corpus = generate_corpus(&circuit, &digits, &DefectKind::ALL, stuck_mode)?;
        Self::assemble(digits, baseline, None, circuit, corpus, seeds)
    }

    fn assemble(
        digits: Vec<DigitSample>,
        baseline: MlpParams,
        baseline_report: Option<BaselineReport>,
        circuit: Circuit,
        corpus: Corpus,
        seeds: Seeds,
    ) -> Result<Self> {
        let splits = split_corpus(&corpus, seeds.corpus)?;
        Ok(Self {
            digits,
            baseline,
            baseline_report,
            circuit,
            corpus,
            splits,
            seeds,
        })
    }

    /// Loads cached artifacts from `config.output_dir`, creating whatever is
    /// missing or was produced with different seeds.
    pub fn open_or_build(config: &ExperimentConfig) -> Result<Self> {
        let dir = &config.output_dir;
        let digits = config.digits()?;
        let (baseline, report) = ensure_baseline(dir, &digits, config.seeds.base)?;
        let circuit = Circuit::from_params(&baseline)?;
        let baseline_hash = digest_hex(baseline.to_json_string()?.as_bytes());
        let corpus_dir = dir.join(CORPUS_DIR);
        let cached = read_manifest(&corpus_dir).ok().filter(|m| {
            m.base_seed == config.seeds.base
                && m.corpus_seed == config.seeds.corpus
                && m.stuck_mode == config.stuck_mode
                && m.baseline_sha256 == baseline_hash
        });
        let corpus = match cached {
            Some(_) => read_corpus(&corpus_dir)?.1,
            None => {
                let corpus =
                    generate_corpus(&circuit, &digits, &DefectKind::ALL, config.stuck_mode)?;
                write_corpus(
                    &corpus_dir,
                    &corpus,
                    config.seeds.base,
                    config.seeds.corpus,
                    &baseline_hash,
                )?;
                corpus
            }
        };
        Self::assemble(digits, baseline, report, circuit, corpus, config.seeds)
    }

    /// Writes the corpus and manifest under `dir`.
    pub fn write_corpus(&self, dir: &Path) -> Result<Manifest> {
        let hash = digest_hex(self.baseline.to_json_string()?.as_bytes());
        write_corpus(dir, &self.corpus, self.seeds.base, self.seeds.corpus, &hash)
    }

    fn config_keys(&self, kind: DefectKind) -> Vec<ConfigKey> {
        self.corpus
            .configs
            .keys()
            .filter(|k| k.kind == kind)
            .copied()
            .collect()
    }

    fn split_samples(
        &self,
        kind: DefectKind,
        pick: impl Fn(&CorpusSplit) -> &[usize],
    ) -> Result<Vec<&FaultySample>> {
        let keys = self.config_keys(kind);
        if keys.is_empty() {
            return Err(Error::MissingData(format!("corpus has no {kind} configurations")));
        }
        let mut out = Vec::new();
        for key in keys {
            let samples = self.corpus.get(&key)?;
            let split = self
                .splits
                .get(&key)
                .ok_or_else(|| Error::MissingData(format!("split for {key}")))?;
            out.extend(CorpusSplit::select(samples, pick(split)));
        }
        Ok(out)
    }

    /// Trains the corrector for one defect kind on its training split,
    /// selecting on its internal test split.
    pub fn train_kind_corrector(
        &self,
        kind: DefectKind,
        spec: &MlpSpec,
        config: &ExperimentConfig,
    ) -> Result<MlpParams> {
        let train = self.split_samples(kind, |s| &s.train)?;
        let val = self.split_samples(kind, |s| &s.test)?;
        let cfg = config.corrector_config(corrector_seed(self.seeds.corrector, kind, spec));
        Ok(train_corrector(spec, &train, &val, &cfg)?.params)
    }

    /// Defect-free accuracy of the circuit over all images.
    pub fn clean_accuracy(&self) -> Result<f64> {
        let preds = self
            .digits
            .iter()
            .map(|d| self.circuit.forward_inference(&d.pixels).map(|i| i.prediction))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<usize> = self.digits.iter().map(|d| usize::from(d.label)).collect();
        accuracy(&preds, &labels)
    }

    fn cell_template(
        &self,
        experiment: ExperimentKind,
        key: &ConfigKey,
        layer: usize,
    ) -> Result<ReportRow> {
        let spec = key.spec(layer, self.corpus.stuck_mode)?;
        let mask = spec.mask(LAYER_DIMS[layer])?;
        Ok(ReportRow {
            experiment,
            kind_train: None,
            kind_test: key.kind,
            size: key.size_index,
            layer,
            severity_pairs: mask.masked_count(),
            coverage: coverage(&mask),
            acc_faulty: f64::NAN,
            acc_corrected: None,
            delta_pp: None,
            n_samples: 0,
            seed: self.seeds.corpus,
            architecture: None,
        })
    }

    /// Evaluates a trained corrector on the cross-validation split of every
    /// (size, layer) cell of `test_kind`.
    pub fn evaluate_corrector(
        &self,
        experiment: ExperimentKind,
        params: &MlpParams,
        train_kind: DefectKind,
        test_kind: DefectKind,
        seed: u64,
    ) -> Result<Vec<ReportRow>> {
        let mut rows = Vec::new();
        for key in self.config_keys(test_kind) {
            let samples = self.corpus.get(&key)?;
            let split = &self.splits[&key];
            let cv = CorpusSplit::select(samples, &split.cross_validation);
            let corrected = correct(params, &cv)?;
            for layer in 0..NUM_LAYERS {
                let idx: Vec<usize> = (0..cv.len()).filter(|&k| cv[k].layer() == layer).collect();
                let labels: Vec<usize> = idx.iter().map(|&k| usize::from(cv[k].true_label)).collect();
                let faulty: Vec<usize> =
                    idx.iter().map(|&k| usize::from(cv[k].faulty_prediction)).collect();
                let fixed: Vec<usize> = idx.iter().map(|&k| corrected[k]).collect();
                let mut row = self.cell_template(experiment, &key, layer)?;
                row.kind_train = Some(train_kind);
                row.acc_faulty = accuracy(&faulty, &labels)?;
                row.n_samples = idx.len();
                row.seed = seed;
                row.architecture = Some(params.spec().to_string());
                rows.push(row.with_correction(accuracy(&fixed, &labels)?));
            }
        }
        Ok(rows)
    }

    fn train_many(
        &self,
        jobs: &[(DefectKind, MlpSpec)],
        config: &ExperimentConfig,
    ) -> Result<Vec<MlpParams>> {
        jobs.par_iter()
            .map(|(kind, spec)| self.train_kind_corrector(*kind, spec, config))
            .collect()
    }
}

fn ensure_baseline(
    dir: &Path,
    digits: &[DigitSample],
    seed: u64,
) -> Result<(MlpParams, Option<BaselineReport>)> {
    let path = dir.join(BASELINE_FILE);
    let summary_path = dir.join(BASELINE_SUMMARY_FILE);
    if path.exists() && summary_path.exists() {
        let summary: BaselineSummary = serde_json::from_str(
            &std::fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?,
        )?;
        if summary.base_seed == seed {
            return Ok((MlpParams::load_json(&path)?, Some(summary.report)));
        }
    }
    let (params, report) = build_baseline(digits, seed)?;
    save_baseline(dir, &params, &report, seed)?;
    Ok((params, Some(report)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub base_seed: u64,
    pub report: BaselineReport,
}

/// Persists the baseline weights and its training summary.
pub fn save_baseline(
    dir: &Path,
    params: &MlpParams,
    report: &BaselineReport,
    seed: u64,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    params.save_json(&dir.join(BASELINE_FILE))?;
    let summary = BaselineSummary {
        base_seed: seed,
        report: report.clone(),
    };
    let path = dir.join(BASELINE_SUMMARY_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
        .map_err(|e| Error::io(&path, e))
}

/// One corrector per kind, each evaluated on its own kind.
pub fn run_same_defect(wb: &Workbench, config: &ExperimentConfig) -> Result<EvalReport> {
    let spec = config.corrector_spec()?;
    let kinds = config.train_kinds();
    let jobs: Vec<(DefectKind, MlpSpec)> = kinds.iter().map(|&k| (k, spec.clone())).collect();
    let params = wb.train_many(&jobs, config)?;
    let mut rows = Vec::new();
    for (&kind, p) in kinds.iter().zip(&params) {
        let seed = corrector_seed(wb.seeds.corrector, kind, &spec);
        rows.extend(wb.evaluate_corrector(ExperimentKind::SameDefect, p, kind, kind, seed)?);
    }
    Ok(EvalReport::new(ExperimentKind::SameDefect, rows))
}

/// Correctors trained per kind and evaluated on every test kind.
pub fn run_cross_defect(wb: &Workbench, config: &ExperimentConfig) -> Result<CrossDefectMatrix> {
    let spec = config.corrector_spec()?;
    let train_kinds = config.train_kinds();
    let test_kinds = config.test_kinds();
    let jobs: Vec<(DefectKind, MlpSpec)> =
        train_kinds.iter().map(|&k| (k, spec.clone())).collect();
    let params = wb.train_many(&jobs, config)?;
    let mut rows = Vec::new();
    for (&tr, p) in train_kinds.iter().zip(&params) {
        let seed = corrector_seed(wb.seeds.corrector, tr, &spec);
        for &te in &test_kinds {
            rows.extend(wb.evaluate_corrector(ExperimentKind::CrossDefect, p, tr, te, seed)?);
        }
    }
    let report = EvalReport::new(ExperimentKind::CrossDefect, rows);
    CrossDefectMatrix::from_report(&spec.to_string(), train_kinds, test_kinds, report)
}

/// Uncorrected accuracy of every (kind, size, layer) cell over all images,
/// plus a defect-free anchor (size 0) per kind and layer.
pub fn run_layer_sweep(wb: &Workbench, config: &ExperimentConfig) -> Result<EvalReport> {
    let clean = wb.clean_accuracy()?;
    let mut rows = Vec::new();
    for kind in config.test_kinds() {
        for layer in 0..NUM_LAYERS {
            rows.push(ReportRow {
                experiment: ExperimentKind::LayerSweep,
                kind_train: None,
                kind_test: kind,
                size: Some(0),
                layer,
                severity_pairs: 0,
                coverage: 0.0,
                acc_faulty: clean,
                acc_corrected: None,
                delta_pp: None,
                n_samples: wb.digits.len(),
                seed: wb.seeds.base,
                architecture: None,
            });
        }
        for key in wb.config_keys(kind) {
            let samples = wb.corpus.get(&key)?;
            for layer in 0..NUM_LAYERS {
                let cell: Vec<&FaultySample> =
                    samples.iter().filter(|s| s.layer() == layer).collect();
                let preds: Vec<u8> = cell.iter().map(|s| s.faulty_prediction).collect();
                let labels: Vec<u8> = cell.iter().map(|s| s.true_label).collect();
                let mut row = wb.cell_template(ExperimentKind::LayerSweep, &key, layer)?;
                row.acc_faulty = accuracy(&preds, &labels)?;
                row.n_samples = cell.len();
                row.seed = wb.seeds.base;
                rows.push(row);
            }
        }
    }
    Ok(EvalReport::new(ExperimentKind::LayerSweep, rows))
}

/// Every selected ladder architecture under the configured pairings.
pub fn run_ladder(wb: &Workbench, config: &ExperimentConfig) -> Result<EvalReport> {
    let specs = config.ladder_specs()?;
    let train_kinds = config.train_kinds();
    let jobs: Vec<(DefectKind, MlpSpec)> = specs
        .iter()
        .flat_map(|s| train_kinds.iter().map(move |&k| (k, s.clone())))
        .collect();
    let params = wb.train_many(&jobs, config)?;
    let mut rows = Vec::new();
    for ((tr, spec), p) in jobs.iter().zip(&params) {
        let tests = match (config.ladder_pairing, config.test_defect) {
            (_, Some(t)) => vec![t],
            (LadderPairing::Same, None) => vec![*tr],
            (LadderPairing::All, None) => DefectKind::ALL.to_vec(),
        };
        let seed = corrector_seed(wb.seeds.corrector, *tr, spec);
        for te in tests {
            rows.extend(wb.evaluate_corrector(ExperimentKind::Ladder, p, *tr, te, seed)?);
        }
    }
    Ok(EvalReport::new(ExperimentKind::Ladder, rows))
}
