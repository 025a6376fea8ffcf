//! Fully connected ReLU networks with a softmax head.
//!
//! Weight matrices are stored `n_in x n_out` (row = input), so a layer
//! computes `z_i = sum_j x_j * W[j][i] + b_i`, the same orientation as a
//! crossbar array.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Probability floor used when evaluating `-ln(p)`.
pub const LOSS_EPSILON: f64 = 1e-12;

pub const WEIGHT_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_width: usize,
    pub hidden_widths: Vec<usize>,
    pub output_width: usize,
}

impl MlpSpec {
    pub fn new(input_width: usize, hidden_widths: Vec<usize>, output_width: usize) -> Self {
        Self {
            input_width,
            hidden_widths,
            output_width,
        }
    }

    /// The 64-50-20-8-10 classifier whose weights configure the crossbars.
    pub fn baseline() -> Self {
        Self::new(64, vec![50, 20, 8], 10)
    }

    /// A 10-in, 10-out corrective network with the given hidden widths.
    pub fn corrector(hidden_widths: &[usize]) -> Self {
        Self::new(10, hidden_widths.to_vec(), 10)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_widths.len() + 2);
        w.push(self.input_width);
        w.extend_from_slice(&self.hidden_widths);
        w.push(self.output_width);
        w
    }

    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        self.widths().windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths().iter().any(|&w| w == 0) {
            return Err(Error::Config(format!("zero-width layer in {self}")));
        }
        Ok(())
    }
}

/// Tunable parameter count: weights plus biases of every layer.
pub fn param_count(spec: &MlpSpec) -> usize {
    spec.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
}

impl fmt::Display for MlpSpec {
    /// Hidden widths in the `MLP(a, b)` / `MLP(a,)` notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hidden_widths.as_slice() {
            [] => write!(f, "MLP()"),
            [one] => write!(f, "MLP({one},)"),
            many => {
                let parts: Vec<String> = many.iter().map(|w| w.to_string()).collect();
                write!(f, "MLP({})", parts.join(","))
            }
        }
    }
}

impl FromStr for MlpSpec {
    type Err = Error;

    /// Parses corrector names such as `MLP(10,10)` or `MLP(6,)`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix("MLP(")
            .or_else(|| compact.strip_prefix("mlp("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Config(format!("bad architecture name '{s}'")))?;
        let hidden = inner
            .split(',')
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad width '{p}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = MlpSpec::corrector(&hidden);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Complexity {
    Large,
    Medium,
    Small,
    Tiny,
}

/// One rung of the corrective-architecture ladder.
#[derive(Debug, Clone, Copy)]
pub struct LadderEntry {
    pub hidden: &'static [usize],
    pub params: usize,
    pub complexity: Complexity,
}

impl LadderEntry {
    pub fn spec(&self) -> MlpSpec {
        MlpSpec::corrector(self.hidden)
    }
}

/// Corrective architectures from largest to smallest, with their published
/// parameter counts.
pub const CORRECTOR_LADDER: [LadderEntry; 11] = [
    LadderEntry { hidden: &[100, 200], params: 23_310, complexity: Complexity::Large },
    LadderEntry { hidden: &[32, 64], params: 3_114, complexity: Complexity::Large },
    LadderEntry { hidden: &[32, 32], params: 1_738, complexity: Complexity::Medium },
    LadderEntry { hidden: &[16, 32], params: 1_050, complexity: Complexity::Medium },
    LadderEntry { hidden: &[16, 16], params: 618, complexity: Complexity::Medium },
    LadderEntry { hidden: &[12, 12], params: 418, complexity: Complexity::Medium },
    LadderEntry { hidden: &[10, 10], params: 330, complexity: Complexity::Small },
    LadderEntry { hidden: &[10], params: 220, complexity: Complexity::Small },
    LadderEntry { hidden: &[6, 6], params: 178, complexity: Complexity::Small },
    LadderEntry { hidden: &[6], params: 136, complexity: Complexity::Small },
    LadderEntry { hidden: &[1], params: 31, complexity: Complexity::Tiny },
];

/// Looks up a ladder architecture by name, e.g. `"MLP(10,10)"`.
pub fn ladder_entry(name: &str) -> Result<LadderEntry> {
    let spec: MlpSpec = name.parse()?;
    CORRECTOR_LADDER
        .iter()
        .copied()
        .find(|e| e.hidden == spec.hidden_widths.as_slice())
        .ok_or_else(|| Error::Config(format!("'{name}' is not a ladder architecture")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn n_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_out(&self) -> usize {
        self.weights.cols()
    }

    /// `out = x W + b`.
    #[inline]
    fn affine_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.weights.row(j)) {
                *o += xj * w;
            }
        }
    }
}

/// Trained (or freshly initialised) network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    spec: MlpSpec,
    layers: Vec<DenseLayer>,
}

impl MlpParams {
    pub fn zeros(spec: &MlpSpec) -> Self {
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(i, o)| DenseLayer {
                weights: Matrix::zeros(i, o),
                bias: vec![0.0; o],
            })
            .collect();
        Self {
            spec: spec.clone(),
            layers,
        }
    }

    /// Fan-in scaled uniform initialisation `U(-sqrt(6/n_in), sqrt(6/n_in))`,
    /// zero biases.
    pub fn init<R: Rng + ?Sized>(spec: &MlpSpec, rng: &mut R) -> Self {
        let mut p = Self::zeros(spec);
        for layer in &mut p.layers {
            let limit = (6.0 / layer.n_in() as f64).sqrt();
            for w in layer.weights.as_mut_slice() {
                *w = rng.gen_range(-limit..limit);
            }
        }
        p
    }

    pub fn from_layers(spec: MlpSpec, layers: Vec<DenseLayer>) -> Result<Self> {
        let shapes = spec.layer_shapes();
        if shapes.len() != layers.len() {
            return Err(Error::shape("layer count", shapes.len(), layers.len()));
        }
        for (k, ((i, o), l)) in shapes.iter().zip(&layers).enumerate() {
            if l.weights.shape() != (*i, *o) || l.bias.len() != *o {
                return Err(Error::shape(
                    "dense layer",
                    format!("layer {k}: {i}x{o} + {o}"),
                    format!("{:?} + {}", l.weights.shape(), l.bias.len()),
                ));
            }
            if l.weights.as_slice().iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite value in layer {k}")));
            }
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Visits every parameter in a fixed order: per layer, weights then bias.
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for l in &mut self.layers {
            l.weights.as_mut_slice().iter_mut().for_each(&mut f);
            l.bias.iter_mut().for_each(&mut f);
        }
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_width {
            return Err(Error::shape("network input", self.spec.input_width, x.len()));
        }
        Ok(())
    }

    /// Pre-softmax outputs.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.n_out()];
            layer.affine_into(&cur, &mut next);
            if k != last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Class probabilities.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.logits(x).map(|z| softmax(&z))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.logits(x).map(|z| argmax(&z))
    }

    /// Per-layer weight matrices with the bias folded in as an extra last
    /// row, i.e. `(n_in + 1) x n_out`, ready for crossbar mapping.
    pub fn export_crossbar_weights(&self) -> Vec<Matrix> {
        self.layers
            .iter()
            .map(|l| {
                let mut m = Matrix::zeros(l.n_in() + 1, l.n_out());
                for j in 0..l.n_in() {
                    for i in 0..l.n_out() {
                        m.set(j, i, l.weights.get(j, i));
                    }
                }
                for (i, &b) in l.bias.iter().enumerate() {
                    m.set(l.n_in(), i, b);
                }
                m
            })
            .collect()
    }

    /// Inverse of [`export_crossbar_weights`](Self::export_crossbar_weights).
    pub fn from_crossbar_weights(spec: MlpSpec, folded: &[Matrix]) -> Result<Self> {
        let layers = folded
            .iter()
            .map(|m| {
                let n_in = m.rows().saturating_sub(1);
                let mut weights = Matrix::zeros(n_in, m.cols());
                for j in 0..n_in {
                    for i in 0..m.cols() {
                        weights.set(j, i, m.get(j, i));
                    }
                }
                DenseLayer {
                    weights,
                    bias: m.row(n_in).to_vec(),
                }
            })
            .collect();
        Self::from_layers(spec, layers)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = WeightFile::from(self);
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: WeightFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&WeightFile::from(self))?)
    }
}

/// On-disk weight file: the architecture plus flat row-major parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightFile {
    pub format_version: u32,
    pub spec: MlpSpec,
    pub layers: Vec<WeightFileLayer>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightFileLayer {
    pub n_in: usize,
    pub n_out: usize,
    /// `weights[j * n_out + i]` connects input `j` to output `i`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl From<&MlpParams> for WeightFile {
    fn from(p: &MlpParams) -> Self {
        WeightFile {
            format_version: WEIGHT_FILE_VERSION,
            spec: p.spec.clone(),
            layers: p
                .layers
                .iter()
                .map(|l| WeightFileLayer {
                    n_in: l.n_in(),
                    n_out: l.n_out(),
                    weights: l.weights.as_slice().to_vec(),
                    bias: l.bias.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<WeightFile> for MlpParams {
    type Error = Error;

    fn try_from(f: WeightFile) -> Result<Self> {
        if f.format_version != WEIGHT_FILE_VERSION {
            return Err(Error::Config(format!(
                "unsupported weight file version {}",
                f.format_version
            )));
        }
        let layers = f
            .layers
            .into_iter()
            .map(|l| {
                Ok(DenseLayer {
                    weights: Matrix::from_vec(l.n_in, l.n_out, l.weights)?,
                    bias: l.bias,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MlpParams::from_layers(f.spec, layers)
    }
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = k;
        }
    }
    best
}

/// Categorical cross-entropy against a one-hot `label`.
pub fn cross_entropy_loss(probs: &[f64], label: usize) -> Result<f64> {
    let p = *probs
        .get(label)
        .ok_or_else(|| Error::shape("label index", format!("< {}", probs.len()), label))?;
    Ok(clamped_neg_log(p))
}

/// `-ln(max(p, LOSS_EPSILON))`, propagating NaN.
#[inline]
fn clamped_neg_log(p: f64) -> f64 {
    if p.is_nan() {
        f64::NAN
    } else {
        -p.max(LOSS_EPSILON).ln()
    }
}

/// Reusable per-sample activation buffers for backprop.
pub(crate) struct Workspace {
    /// `acts[0]` is the input, `acts[k]` the post-activation output of layer `k-1`.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    pub(crate) fn new(spec: &MlpSpec) -> Self {
        let widths = spec.widths();
        Self {
            acts: widths.iter().map(|&w| vec![0.0; w]).collect(),
            deltas: widths.iter().map(|&w| vec![0.0; w]).collect(),
        }
    }
}

/// Accumulates the gradient of the cross-entropy loss of one sample into
/// `grad` (same layout as `params`) and returns the sample loss.
pub(crate) fn accumulate_gradient(
    params: &MlpParams,
    x: &[f64],
    label: usize,
    ws: &mut Workspace,
    grad: &mut MlpParams,
) -> f64 {
    let n = params.layers.len();
    ws.acts[0].copy_from_slice(x);
    for (k, layer) in params.layers.iter().enumerate() {
        let (before, after) = ws.acts.split_at_mut(k + 1);
        let out = &mut after[0];
        layer.affine_into(&before[k], out);
        if k + 1 != n {
            out.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
    let probs = softmax(&ws.acts[n]);
    let loss = clamped_neg_log(probs[label]);

    // dL/dz for softmax + cross-entropy.
    for (d, p) in ws.deltas[n].iter_mut().zip(&probs) {
        *d = *p;
    }
    ws.deltas[n][label] -= 1.0;

    for k in (0..n).rev() {
        let layer = &params.layers[k];
        let g = &mut grad.layers[k];
        let input = &ws.acts[k];
        let (lower, upper) = ws.deltas.split_at_mut(k + 1);
        let delta = &upper[0];
        for (gb, d) in g.bias.iter_mut().zip(delta) {
            *gb += d;
        }
        for (j, &xj) in input.iter().enumerate() {
            if xj != 0.0 {
                let row = &mut g.weights.as_mut_slice()[j * layer.n_out()..(j + 1) * layer.n_out()];
                for (gw, d) in row.iter_mut().zip(delta) {
                    *gw += xj * d;
                }
            }
        }
        if k > 0 {
            let prev = &mut lower[k];
            for (j, pd) in prev.iter_mut().enumerate() {
                // ReLU derivative taken as 0 at the kink.
                *pd = if input[j] > 0.0 {
                    layer.weights.row(j).iter().zip(delta).map(|(w, d)| w * d).sum()
                } else {
                    0.0
                };
            }
        }
    }
    loss
}

/// Mean loss and gradient over a batch of `(input, label)` pairs.
pub fn batch_gradient<'a>(
    params: &MlpParams,
    batch: impl IntoIterator<Item = (&'a [f64], usize)>,
) -> Result<(f64, MlpParams)> {
    let mut grad = MlpParams::zeros(&params.spec);
    let mut ws = Workspace::new(&params.spec);
    let mut total = 0.0;
    let mut count = 0usize;
    for (x, label) in batch {
        params.check_input(x)?;
        if label >= params.spec.output_width {
            return Err(Error::InvalidArgument(format!("label {label} out of range")));
        }
        total += accumulate_gradient(params, x, label, &mut ws, &mut grad);
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let scale = 1.0 / count as f64;
    grad.for_each_param_mut(|g| *g *= scale);
    Ok((total * scale, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ladder_parameter_counts() {
        for e in CORRECTOR_LADDER {
            assert_eq!(param_count(&e.spec()), e.params, "{}", e.spec());
        }
        assert_eq!(param_count(&MlpSpec::baseline()), 4528);
    }

    #[test]
    fn names_round_trip() {
        assert_eq!("MLP(10,10)".parse::<MlpSpec>().unwrap(), MlpSpec::corrector(&[10, 10]));
        assert_eq!("MLP(6,)".parse::<MlpSpec>().unwrap(), MlpSpec::corrector(&[6]));
        assert_eq!("MLP(100, 200)".parse::<MlpSpec>().unwrap().to_string(), "MLP(100,200)");
        assert_eq!(MlpSpec::corrector(&[1]).to_string(), "MLP(1,)");
        assert!("MLP(4,4)".parse::<MlpSpec>().is_ok());
        assert!(ladder_entry("MLP(4,4)").is_err());
        assert!("MLP(0,)".parse::<MlpSpec>().is_err());
        assert!("CNN(3)".parse::<MlpSpec>().is_err());
        assert_eq!(ladder_entry("MLP(1,)").unwrap().params, 31);
    }

    #[test]
    fn zero_network_is_uniform() {
        let p = MlpParams::zeros(&MlpSpec::corrector(&[10, 10]));
        let probs = p.forward(&[0.3; 10]).unwrap();
        assert!(probs.iter().all(|&q| (q - 0.1).abs() < 1e-15));
        let loss = cross_entropy_loss(&probs, 3).unwrap();
        assert!((loss - 2.302_585_092_994_046).abs() < 1e-12);
    }

    #[test]
    fn loss_edge_cases() {
        assert_eq!(cross_entropy_loss(&[0.0, 1.0], 1).unwrap(), 0.0);
        let clamped = cross_entropy_loss(&[1.0, 0.0], 1).unwrap();
        assert!((clamped - 27.631_021_115_928_547).abs() < 1e-9);
        assert!(cross_entropy_loss(&[1.0], 2).is_err());
    }

    #[test]
    fn forward_shape_error() {
        let p = MlpParams::zeros(&MlpSpec::corrector(&[4]));
        assert!(matches!(p.forward(&[0.0; 9]), Err(Error::Shape { .. })));
    }

    /// Independent oracle: explicit triple loops over `W^T x`.
    fn oracle_forward(p: &MlpParams, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        let n = p.layers().len();
        for (k, l) in p.layers().iter().enumerate() {
            let mut z = Vec::new();
            for i in 0..l.n_out() {
                let mut s = l.bias[i];
                for j in 0..l.n_in() {
                    s += l.weights.get(j, i) * h[j];
                }
                z.push(if k + 1 < n { if s > 0.0 { s } else { 0.0 } } else { s });
            }
            h = z;
        }
        let total: f64 = h.iter().map(|v| v.exp()).sum();
        h.iter().map(|v| v.exp() / total).collect()
    }

    #[test]
    fn forward_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for hidden in [&[5usize, 7][..], &[3], &[]] {
            let spec = MlpSpec::new(6, hidden.to_vec(), 4);
            let mut p = MlpParams::init(&spec, &mut rng);
            p.for_each_param_mut(|v| *v += rng.gen_range(-0.1..0.1));
            for _ in 0..20 {
                let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let a = p.forward(&x).unwrap();
                let b = oracle_forward(&p, &x);
                for (u, v) in a.iter().zip(&b) {
                    assert!((u - v).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn crossbar_export_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = MlpParams::init(&MlpSpec::baseline(), &mut rng);
        let folded = p.export_crossbar_weights();
        let shapes: Vec<_> = folded.iter().map(Matrix::shape).collect();
        assert_eq!(shapes, vec![(65, 50), (51, 20), (21, 8), (9, 10)]);
        let total: usize = folded.iter().map(|m| m.rows() * m.cols()).sum();
        assert_eq!(total, 4528);
        let back = MlpParams::from_crossbar_weights(MlpSpec::baseline(), &folded).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn weight_file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = MlpParams::init(&MlpSpec::corrector(&[6, 6]), &mut rng);
        let text = p.to_json_string().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["spec"]["hidden_widths"], serde_json::json!([6, 6]));
        let back = MlpParams::from_json_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json_string().unwrap(), text);
    }
}
