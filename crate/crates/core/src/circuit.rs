//! The four-array analog inference path.
//!
//! Pixels are encoded as row voltages `p / 16 * read_voltage`, a bias row is
//! appended at `bias_voltage`, and each array's rectified comparator outputs
//! (again with a bias entry appended) drive the next array directly.

use serde::{Deserialize, Serialize};

use crate::crossbar::{map_weights_to_array, CrossbarArray, LAYER_DIMS, NUM_LAYERS};
use crate::defect::{apply_defects, DefectMask, DefectSpec};
use crate::digits::{MAX_INTENSITY, PIXELS};
use crate::error::{Error, Result};
use crate::mlp::{argmax, MlpParams, MlpSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputEncoding {
    /// Row voltage for a full-intensity pixel (V).
    pub read_voltage: f64,
    /// Voltage driving every bias row (V).
    pub bias_voltage: f64,
}

impl Default for InputEncoding {
    fn default() -> Self {
        Self {
            read_voltage: 1.0,
            bias_voltage: 1.0,
        }
    }
}

impl InputEncoding {
    /// Both voltages multiplied by `c`.
    pub fn scaled(self, c: f64) -> Self {
        Self {
            read_voltage: self.read_voltage * c,
            bias_voltage: self.bias_voltage * c,
        }
    }

    /// Layer-0 row voltages for an image, bias row last.
    pub fn encode(&self, pixels: &[u8]) -> Result<Vec<f64>> {
        if pixels.len() != PIXELS {
            return Err(Error::shape("pixel vector", PIXELS, pixels.len()));
        }
        if let Some(p) = pixels.iter().find(|&&p| p > MAX_INTENSITY) {
            return Err(Error::Domain {
                what: "pixel intensity",
                value: f64::from(*p),
                min: 0.0,
                max: f64::from(MAX_INTENSITY),
            });
        }
        let mut v: Vec<f64> = pixels
            .iter()
            .map(|&p| f64::from(p) / f64::from(MAX_INTENSITY) * self.read_voltage)
            .collect();
        v.push(self.bias_voltage);
        Ok(v)
    }
}

/// Rectified output voltages of the last array, one per digit class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageVector(Vec<f64>);

impl VoltageVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "output voltages must be non-negative".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest voltage (lowest index on ties).
    pub fn prediction(&self) -> usize {
        argmax(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub voltages: VoltageVector,
    pub prediction: usize,
}

/// Four crossbars implementing the 64-50-20-8-10 network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    arrays: Vec<CrossbarArray>,
    #[serde(default)]
    encoding: InputEncoding,
}

impl Circuit {
    pub fn new(arrays: Vec<CrossbarArray>, encoding: InputEncoding) -> Result<Self> {
        if arrays.len() != NUM_LAYERS {
            return Err(Error::shape("circuit arrays", NUM_LAYERS, arrays.len()));
        }
        for (k, a) in arrays.iter().enumerate() {
            if a.dims() != LAYER_DIMS[k] || a.layer_index() != k {
                return Err(Error::shape(
                    "circuit array",
                    format!("layer {k}: {:?}", LAYER_DIMS[k]),
                    format!("layer {}: {:?}", a.layer_index(), a.dims()),
                ));
            }
        }
        Ok(Self { arrays, encoding })
    }

    /// Maps a trained baseline network onto crossbars.
    pub fn from_params(params: &MlpParams) -> Result<Self> {
        if params.spec() != &MlpSpec::baseline() {
            return Err(Error::InvalidArgument(format!(
                "circuit needs the 64-50-20-8-10 network, got {}",
                params.spec()
            )));
        }
        let arrays = params
            .export_crossbar_weights()
            .iter()
            .enumerate()
            .map(|(k, w)| map_weights_to_array(w, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arrays, InputEncoding::default())
    }

    pub fn with_encoding(mut self, encoding: InputEncoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn encoding(&self) -> InputEncoding {
        self.encoding
    }

    pub fn arrays(&self) -> &[CrossbarArray] {
        &self.arrays
    }

    pub fn array(&self, layer: usize) -> &CrossbarArray {
        &self.arrays[layer]
    }

    /// A copy of the circuit with `defect` injected, plus the realised mask.
    pub fn with_defect(&self, defect: &DefectSpec) -> Result<(Circuit, DefectMask)> {
        let layer = defect.layer_index;
        let mask = defect.mask(LAYER_DIMS[layer])?;
        let mut out = self.clone();
        out.arrays[layer] = apply_defects(&self.arrays[layer], &mask, defect.stuck_mode)?;
        Ok((out, mask))
    }

    /// Rectified outputs of every array for layer-0 row voltages `v_in`
    /// (bias entry included). Element `k` is the output of array `k`.
    pub fn trace_voltages(&self, v_in: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut outputs = Vec::with_capacity(NUM_LAYERS);
        let mut cur = v_in.to_vec();
        for (k, array) in self.arrays.iter().enumerate() {
            let out = array.output_voltages(&cur, true)?;
            if k + 1 < NUM_LAYERS {
                cur = out.clone();
                cur.push(self.encoding.bias_voltage);
            }
            outputs.push(out);
        }
        Ok(outputs)
    }

    /// Row voltages entering array `layer` for an image.
    pub fn layer_inputs(&self, pixels: &[u8], layer: usize) -> Result<Vec<f64>> {
        let v0 = self.encoding.encode(pixels)?;
        if layer == 0 {
            return Ok(v0);
        }
        let trace = self.trace_voltages(&v0)?;
        let mut v = trace[layer - 1].clone();
        v.push(self.encoding.bias_voltage);
        Ok(v)
    }

    pub fn forward_voltages(&self, v_in: &[f64]) -> Result<Inference> {
        let out = self
            .trace_voltages(v_in)?
            .pop()
            .expect("circuit has four layers");
        let voltages = VoltageVector::new(out)?;
        let prediction = voltages.prediction();
        Ok(Inference {
            voltages,
            prediction,
        })
    }

    /// Fully analog inference on one image.
    pub fn forward_inference(&self, pixels: &[u8]) -> Result<Inference> {
        let v_in = self.encoding.encode(pixels)?;
        self.forward_voltages(&v_in)
    }
}
