//! Faulty-inference corpus: every image through every defect configuration.
//!
//! A *configuration* is a defect kind and size, aggregated over the four
//! layers, i.e. `4 * 1797 = 7188` samples. Five sized kinds with four sizes
//! plus the fixed checkerboard give 21 configurations and 150,948 samples.
//!
//! On disk a corpus is one CSV per configuration with the columns
//! `image_id,layer,v0,...,v9,true_label,faulty_prediction` and a
//! `manifest.json` recording counts, seeds and a SHA-256 of every file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::Circuit;
use crate::crossbar::NUM_LAYERS;
use crate::defect::{DefectKind, DefectSpec, StuckMode};
use crate::digits::DigitSample;
use crate::error::{Error, Result};

pub const CV_PER_CONFIG: usize = 1000;
pub const TRAIN_PER_CONFIG: usize = 4950;
pub const TEST_PER_CONFIG: usize = 1238;
pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// One simulated inference of a defective circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultySample {
    pub image_id: usize,
    pub defect: DefectSpec,
    /// Rectified output voltages, one per class.
    pub voltages: Vec<f64>,
    pub true_label: u8,
    pub faulty_prediction: u8,
}

impl FaultySample {
    pub fn layer(&self) -> usize {
        self.defect.layer_index
    }
}

/// Defect kind and size, aggregated over layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigKey {
    pub kind: DefectKind,
    pub size_index: Option<u8>,
}

impl ConfigKey {
    pub fn all_for(kinds: &[DefectKind]) -> Vec<ConfigKey> {
        kinds
            .iter()
            .flat_map(|&kind| {
                kind.sizes()
                    .into_iter()
                    .map(move |size_index| ConfigKey { kind, size_index })
            })
            .collect()
    }

    pub fn spec(&self, layer: usize, stuck_mode: StuckMode) -> Result<DefectSpec> {
        DefectSpec::new(self.kind, self.size_index, layer, stuck_mode)
    }

    pub fn file_name(&self) -> String {
        format!("corpus_{self}.csv")
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.size_index {
            Some(s) => write!(f, "{}_s{s}", self.kind),
            None => write!(f, "{}_fixed", self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub stuck_mode: StuckMode,
    /// Samples per configuration, ordered by layer then image id.
    pub configs: BTreeMap<ConfigKey, Vec<FaultySample>>,
}

impl Corpus {
    pub fn total_samples(&self) -> usize {
        self.configs.values().map(Vec::len).sum()
    }

    pub fn samples_for_kind(&self, kind: DefectKind) -> usize {
        self.configs
            .iter()
            .filter(|(k, _)| k.kind == kind)
            .map(|(_, v)| v.len())
            .sum()
    }

    pub fn get(&self, key: &ConfigKey) -> Result<&[FaultySample]> {
        self.configs
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingData(format!("corpus configuration {key}")))
    }
}

/// Simulates every image on every (kind, size, layer) defect.
///
/// Cells run in parallel; results are assembled in canonical key order, so
/// the corpus does not depend on thread count.
pub fn generate_corpus(
    circuit: &Circuit,
    digits: &[DigitSample],
    kinds: &[DefectKind],
    stuck_mode: StuckMode,
) -> Result<Corpus> {
    let keys = ConfigKey::all_for(kinds);
    let cells: Vec<(ConfigKey, usize)> = keys
        .iter()
        .flat_map(|&k| (0..NUM_LAYERS).map(move |l| (k, l)))
        .collect();

    let simulated: Vec<Result<Vec<FaultySample>>> = cells
        .par_iter()
        .map(|&(key, layer)| {
            let spec = key.spec(layer, stuck_mode)?;
            let (faulty, _) = circuit.with_defect(&spec)?;
            digits
                .iter()
                .map(|d| {
                    let inf = faulty.forward_inference(&d.pixels).map_err(|e| {
                        Error::InvalidArgument(format!("simulating {key} layer {layer}: {e}"))
                    })?;
                    Ok(FaultySample {
                        image_id: d.image_id,
                        defect: spec,
                        voltages: inf.voltages.into_inner(),
                        true_label: d.label,
                        faulty_prediction: inf.prediction as u8,
                    })
                })
                .collect()
        })
        .collect();

    let mut configs: BTreeMap<ConfigKey, Vec<FaultySample>> = BTreeMap::new();
    for ((key, _), cell) in cells.iter().zip(simulated) {
        configs.entry(*key).or_default().extend(cell?);
    }
    Ok(Corpus {
        stuck_mode,
        configs,
    })
}

/// Disjoint cross-validation, training and internal test sets of one
/// configuration, as indices into the configuration's sample list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub cross_validation: Vec<usize>,
}

impl CorpusSplit {
    pub fn select<'a>(samples: &'a [FaultySample], idx: &[usize]) -> Vec<&'a FaultySample> {
        idx.iter().map(|&k| &samples[k]).collect()
    }
}

/// Splits one configuration: 250 cross-validation samples per layer, then a
/// seeded 80/20 split (floored) of the remaining 6188 into 4950 / 1238.
pub fn split_config(samples: &[FaultySample], key: &ConfigKey, seed: u64) -> Result<CorpusSplit> {
    let per_layer = samples.len() / NUM_LAYERS;
    if samples.len() != NUM_LAYERS * crate::digits::DIGIT_COUNT {
        return Err(Error::MissingData(format!(
            "configuration {key} holds {} samples, expected {}",
            samples.len(),
            NUM_LAYERS * crate::digits::DIGIT_COUNT
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(key));

    let cv_per_layer = CV_PER_CONFIG / NUM_LAYERS;
    let mut cv = Vec::with_capacity(CV_PER_CONFIG);
    let mut rest = Vec::with_capacity(samples.len() - CV_PER_CONFIG);
    for layer in 0..NUM_LAYERS {
        let mut idx: Vec<usize> = (0..samples.len())
            .filter(|&k| samples[k].layer() == layer)
            .collect();
        if idx.len() != per_layer {
            return Err(Error::MissingData(format!(
                "configuration {key} layer {layer} holds {} samples",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        cv.extend_from_slice(&idx[..cv_per_layer]);
        rest.extend_from_slice(&idx[cv_per_layer..]);
    }
    rest.shuffle(&mut rng);
    let n_train = rest.len() * 4 / 5;
    let test = rest.split_off(n_train);
    cv.sort_unstable();
    rest.sort_unstable();
    let mut test = test;
    test.sort_unstable();
    Ok(CorpusSplit {
        train: rest,
        test,
        cross_validation: cv,
    })
}

fn stream_id(key: &ConfigKey) -> u64 {
    let kind = DefectKind::ALL.iter().position(|k| *k == key.kind).unwrap_or(0) as u64;
    kind * 16 + u64::from(key.size_index.unwrap_or(0))
}

pub fn split_corpus(corpus: &Corpus, seed: u64) -> Result<BTreeMap<ConfigKey, CorpusSplit>> {
    corpus
        .configs
        .iter()
        .map(|(k, v)| split_config(v, k, seed).map(|s| (*k, s)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub kind: DefectKind,
    pub size_index: Option<u8>,
    pub file: String,
    pub samples: usize,
    pub train: usize,
    pub test: usize,
    pub cross_validation: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub stuck_mode: StuckMode,
    pub base_seed: u64,
    pub corpus_seed: u64,
    pub baseline_sha256: String,
    pub total_samples: usize,
    pub configurations: Vec<ManifestEntry>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Serialises one configuration to the documented CSV layout.
pub fn config_to_csv(samples: &[FaultySample]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["image_id".to_string(), "layer".to_string()];
    header.extend((0..10).map(|k| format!("v{k}")));
    header.push("true_label".into());
    header.push("faulty_prediction".into());
    w.write_record(&header)?;
    for s in samples {
        let mut rec = vec![s.image_id.to_string(), s.layer().to_string()];
        rec.extend(s.voltages.iter().map(|&v| fmt_f64(v)));
        rec.push(s.true_label.to_string());
        rec.push(s.faulty_prediction.to_string());
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))
}

/// Parses a configuration CSV back into samples.
pub fn config_from_csv(
    bytes: &[u8],
    key: &ConfigKey,
    stuck_mode: StuckMode,
) -> Result<Vec<FaultySample>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec?;
        let bad = |reason: String| Error::Ingest { row, reason };
        if rec.len() != 14 {
            return Err(bad(format!("expected 14 fields, found {}", rec.len())));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("field {i} not numeric: '{}'", &rec[i])))
        };
        let int = |i: usize| -> Result<usize> {
            rec[i]
                .parse::<usize>()
                .map_err(|_| bad(format!("field {i} not an integer: '{}'", &rec[i])))
        };
        let layer = int(1)?;
        let voltages = (2..12).map(num).collect::<Result<Vec<_>>>()?;
        out.push(FaultySample {
            image_id: int(0)?,
            defect: key.spec(layer, stuck_mode).map_err(|e| bad(e.to_string()))?,
            voltages,
            true_label: int(12)? as u8,
            faulty_prediction: int(13)? as u8,
        });
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of a weight file or any artifact, for manifests.
pub fn digest_hex(bytes: &[u8]) -> String {
    sha256_hex(bytes)
}

/// Writes one CSV per configuration plus the manifest into `dir`.
pub fn write_corpus(
    dir: &Path,
    corpus: &Corpus,
    base_seed: u64,
    corpus_seed: u64,
    baseline_sha256: &str,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let splits = split_corpus(corpus, corpus_seed)?;
    let mut configurations = Vec::new();
    for (key, samples) in &corpus.configs {
        let bytes = config_to_csv(samples)?;
        let path = dir.join(key.file_name());
        std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        let split = &splits[key];
        configurations.push(ManifestEntry {
            kind: key.kind,
            size_index: key.size_index,
            file: key.file_name(),
            samples: samples.len(),
            train: split.train.len(),
            test: split.test.len(),
            cross_validation: split.cross_validation.len(),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = Manifest {
        format_version: MANIFEST_VERSION,
        stuck_mode: corpus.stuck_mode,
        base_seed,
        corpus_seed,
        baseline_sha256: baseline_sha256.to_string(),
        total_samples: corpus.total_samples(),
        configurations,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let m: Manifest = serde_json::from_str(&text)?;
    if m.format_version != MANIFEST_VERSION {
        return Err(Error::Config(format!(
            "unsupported manifest version {}",
            m.format_version
        )));
    }
    Ok(m)
}

/// Loads a corpus written by [`write_corpus`], verifying file hashes.
pub fn read_corpus(dir: &Path) -> Result<(Manifest, Corpus)> {
    let manifest = read_manifest(dir)?;
    let mut configs = BTreeMap::new();
    for entry in &manifest.configurations {
        let path = dir.join(&entry.file);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if sha256_hex(&bytes) != entry.sha256 {
            return Err(Error::MissingData(format!(
                "{} does not match its manifest hash",
                entry.file
            )));
        }
        let key = ConfigKey {
            kind: entry.kind,
            size_index: entry.size_index,
        };
        let samples = config_from_csv(&bytes, &key, manifest.stuck_mode)?;
        if samples.len() != entry.samples {
            return Err(Error::MissingData(format!(
                "{} holds {} samples, manifest says {}",
                entry.file,
                samples.len(),
                entry.samples
            )));
        }
        configs.insert(key, samples);
    }
    let corpus = Corpus {
        stuck_mode: manifest.stuck_mode,
        configs,
    };
    Ok((manifest, corpus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_config(key: ConfigKey) -> Vec<FaultySample> {
        let mut v = Vec::new();
        for layer in 0..4 {
            for id in 0..1797 {
                v.push(FaultySample {
                    image_id: id,
                    defect: key.spec(layer, StuckMode::StuckOff).unwrap(),
                    voltages: vec![id as f64 / 7.0; 10],
                    true_label: (id % 10) as u8,
                    faulty_prediction: ((id + layer) % 10) as u8,
                });
            }
        }
        v
    }

    #[test]
    fn split_counts_and_disjointness() {
        let key = ConfigKey { kind: DefectKind::Ring, size_index: Some(3) };
        let samples = fake_config(key);
        let s = split_config(&samples, &key, 9).unwrap();
        assert_eq!((s.cross_validation.len(), s.train.len(), s.test.len()), (1000, 4950, 1238));
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).chain(&s.cross_validation).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 7188);
        for layer in 0..4 {
            let n = s.cross_validation.iter().filter(|&&k| samples[k].layer() == layer).count();
            assert_eq!(n, 250);
        }
        assert_eq!(split_config(&samples, &key, 9).unwrap(), s);
        assert_ne!(split_config(&samples, &key, 10).unwrap(), s);
        assert!(split_config(&samples[..100], &key, 9).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let key = ConfigKey { kind: DefectKind::Checkerboard, size_index: None };
        let samples = fake_config(key);
        let bytes = config_to_csv(&samples[..50]).unwrap();
        let back = config_from_csv(&bytes, &key, StuckMode::StuckOff).unwrap();
        assert_eq!(back, samples[..50].to_vec());
        let header = String::from_utf8(bytes[..80].to_vec()).unwrap();
        assert!(header.starts_with("image_id,layer,v0,v1,"));
    }

    #[test]
    fn key_naming() {
        let keys = ConfigKey::all_for(&DefectKind::ALL);
        assert_eq!(keys.len(), 21);
        assert_eq!(keys[0].file_name(), "corpus_circle_s1.csv");
        assert_eq!(keys[20].file_name(), "corpus_checkerboard_fixed.csv");
    }
}
