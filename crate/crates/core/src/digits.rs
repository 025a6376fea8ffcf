//! The 8x8 handwritten digits set (1797 images, 17 grey levels).
//!
//! File format: one image per line, 65 comma-separated integers, the 64
//! row-major pixel intensities (0..=16) followed by the label (0..=9).

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DIGIT_COUNT: usize = 1797;
pub const PIXELS: usize = 64;
pub const MAX_INTENSITY: u8 = 16;
pub const BASE_TRAIN_SIZE: usize = 1617;
pub const BASE_TEST_SIZE: usize = 180;

const BUNDLED: &str = include_str!("../data/digits.csv");

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitSample {
    /// Position in the canonical file, 0..1797.
    pub image_id: usize,
    pub pixels: [u8; PIXELS],
    pub label: u8,
}

impl DigitSample {
    /// Pixel intensities scaled to `[0, 1]`.
    pub fn normalized(&self) -> Vec<f64> {
        self.pixels
            .iter()
            .map(|&p| f64::from(p) / f64::from(MAX_INTENSITY))
            .collect()
    }
}

fn parse_row(record: &csv::StringRecord, row: usize) -> Result<DigitSample> {
    let bad = |reason: String| Error::Ingest { row, reason };
    if record.len() != PIXELS + 1 {
        return Err(bad(format!("expected 65 fields, found {}", record.len())));
    }
    let mut values = [0u8; PIXELS + 1];
    for (k, field) in record.iter().enumerate() {
        let v: u8 = field
            .trim()
            .parse()
            .map_err(|_| bad(format!("field {k} is not a small integer: '{field}'")))?;
        values[k] = v;
    }
    let mut pixels = [0u8; PIXELS];
    pixels.copy_from_slice(&values[..PIXELS]);
    if let Some(p) = pixels.iter().find(|&&p| p > MAX_INTENSITY) {
        return Err(bad(format!("pixel intensity {p} above 16")));
    }
    let label = values[PIXELS];
    if label > 9 {
        return Err(bad(format!("label {label} outside 0..=9")));
    }
    Ok(DigitSample {
        image_id: row - 1,
        pixels,
        label,
    })
}

/// Parses a digits CSV and checks the canonical sample count.
pub fn parse_digits(reader: impl Read) -> Result<Vec<DigitSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut samples = Vec::with_capacity(DIGIT_COUNT);
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| Error::Ingest {
            row,
            reason: e.to_string(),
        })?;
        samples.push(parse_row(&rec, row)?);
    }
    if samples.len() != DIGIT_COUNT {
        return Err(Error::Ingest {
            row: samples.len(),
            reason: format!("expected {DIGIT_COUNT} images, found {}", samples.len()),
        });
    }
    Ok(samples)
}

pub fn load_digits(path: &Path) -> Result<Vec<DigitSample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_digits(file)
}

/// The copy of the dataset shipped with the crate.
pub fn bundled_digits() -> Vec<DigitSample> {
    parse_digits(BUNDLED.as_bytes()).expect("bundled digits file is valid")
}

/// Seeded shuffle into 1617 training and 180 test images.
pub fn split_base(
    samples: &[DigitSample],
    seed: u64,
) -> Result<(Vec<DigitSample>, Vec<DigitSample>)> {
    if samples.len() != DIGIT_COUNT {
        return Err(Error::InvalidArgument(format!(
            "base split expects {DIGIT_COUNT} samples, got {}",
            samples.len()
        )));
    }
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = idx.split_at(BASE_TRAIN_SIZE);
    let pick = |ids: &[usize]| ids.iter().map(|&k| samples[k].clone()).collect::<Vec<_>>();
    Ok((pick(train), pick(test)))
}
