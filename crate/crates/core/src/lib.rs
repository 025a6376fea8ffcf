//! Analog ReRAM crossbar inference with stuck-at fault injection and
//! corrective post-processing networks.
//!
//! The pipeline:
//!
//! 1. [`baseline`] trains a 64-50-20-8-10 ReLU classifier on the 8x8 digits
//!    ([`digits`]).
//! 2. [`circuit`] maps its weights onto four differential crossbars
//!    ([`crossbar`], [`device`]) and runs fully analog inference.
//! 3. [`defect`] stamps spatial stuck-at patterns onto one array at a time;
//!    [`corpus`] simulates every image under every pattern.
//! 4. [`corrector`] trains small MLPs ([`mlp`], [`train`]) on the faulty
//!    output voltages, and [`experiment`] evaluates them into
//!    [`report`]s.
//!
//! See the crate's `examples/` directory for one runnable program per stage.

pub mod baseline;
pub mod checks;
pub mod circuit;
pub mod corpus;
pub mod corrector;
pub mod crossbar;
pub mod defect;
pub mod device;
pub mod digits;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod metrics;
pub mod mlp;
pub mod report;
pub mod train;

pub use circuit::{Circuit, Inference, InputEncoding, VoltageVector};
pub use corpus::{ConfigKey, Corpus, CorpusSplit, FaultySample};
pub use crossbar::{CrossbarArray, ReRamPair, LAYER_DIMS};
pub use defect::{DefectKind, DefectMask, DefectSpec, StuckMode};
pub use device::{gap_to_conductance, Conductance, GapSize};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Seeds, Workbench};
pub use matrix::Matrix;
pub use mlp::{param_count, MlpParams, MlpSpec};
pub use report::{CrossDefectMatrix, EvalReport, ExperimentKind, ReportFormat};
pub use train::{LabeledSet, Optimizer, TrainConfig};
