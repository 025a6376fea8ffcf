//! Differential ReRAM crossbar arrays.
//!
//! Each logical weight `w` at (row `j`, column `i`) is a pair of devices
//! `(g_plus, g_minus)`. The mapping is one-sided: the smaller member sits at
//! `G_OFF` and the larger one carries `alpha * |w|` on top of it, where
//! `alpha = (G_ON - G_OFF) / max|W|` for the layer. With a load resistance of
//! `1 / alpha` the comparator output `R_load * (I+ - I-)` is exactly the
//! software pre-activation.

use serde::{Deserialize, Serialize};

use crate::device::{Conductance, G_OFF, G_ON};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Logical array shapes `(rows incl. bias, columns)` for the four layers of
/// the 64-50-20-8-10 network.
pub const LAYER_DIMS: [(usize, usize); 4] = [(65, 50), (51, 20), (21, 8), (9, 10)];

/// Number of crossbar layers in the circuit.
pub const NUM_LAYERS: usize = LAYER_DIMS.len();

/// Total logical pairs across the four arrays.
pub fn total_pairs() -> usize {
    LAYER_DIMS.iter().map(|(r, c)| r * c).sum()
}

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// One differential device pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReRamPair {
    pub g_plus: Conductance,
    pub g_minus: Conductance,
}

impl ReRamPair {
    pub fn differential(&self) -> f64 {
        self.g_plus.siemens() - self.g_minus.siemens()
    }
}

/// One layer's crossbar: an `n_rows x n_cols` grid of differential pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ArraySnapshot", try_from = "ArraySnapshot")]
pub struct CrossbarArray {
    n_rows: usize,
    n_cols: usize,
    g_plus: Vec<f64>,
    g_minus: Vec<f64>,
    layer_index: usize,
    row_scale: f64,
    load_resistance: f64,
}

/// JSON layout of an array. Conductances are flat row-major arrays in
/// siemens, `g[j * n_cols + i]` being row `j`, logical column `i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArraySnapshot {
    pub format_version: u32,
    pub layer_index: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_scale: f64,
    pub load_resistance: f64,
    pub g_plus: Vec<f64>,
    pub g_minus: Vec<f64>,
}

impl From<CrossbarArray> for ArraySnapshot {
    fn from(a: CrossbarArray) -> Self {
        ArraySnapshot {
            format_version: SNAPSHOT_FORMAT_VERSION,
            layer_index: a.layer_index,
            n_rows: a.n_rows,
            n_cols: a.n_cols,
            row_scale: a.row_scale,
            load_resistance: a.load_resistance,
            g_plus: a.g_plus,
            g_minus: a.g_minus,
        }
    }
}

impl TryFrom<ArraySnapshot> for CrossbarArray {
    type Error = Error;

    fn try_from(s: ArraySnapshot) -> Result<Self> {
        if s.format_version != SNAPSHOT_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported array snapshot version {}",
                s.format_version
            )));
        }
        if !(s.row_scale > 0.0) {
            return Err(Error::InvalidArgument("row_scale must be positive".into()));
        }
        CrossbarArray::from_conductances(
            s.n_rows,
            s.n_cols,
            s.g_plus,
            s.g_minus,
            s.layer_index,
            s.load_resistance,
        )
        .map(|mut a| {
            a.row_scale = s.row_scale;
            a
        })
    }
}

impl CrossbarArray {
    /// Builds an array from raw conductances (row-major, siemens).
    pub fn from_conductances(
        n_rows: usize,
        n_cols: usize,
        g_plus: Vec<f64>,
        g_minus: Vec<f64>,
        layer_index: usize,
        load_resistance: f64,
    ) -> Result<Self> {
        let n = n_rows * n_cols;
        if g_plus.len() != n || g_minus.len() != n {
            return Err(Error::shape(
                "crossbar conductances",
                format!("{n} values per polarity"),
                format!("{} / {}", g_plus.len(), g_minus.len()),
            ));
        }
        if layer_index >= NUM_LAYERS {
            return Err(Error::InvalidArgument(format!(
                "layer index {layer_index} out of range"
            )));
        }
        if !(load_resistance > 0.0 && load_resistance.is_finite()) {
            return Err(Error::InvalidArgument(
                "load resistance must be positive and finite".into(),
            ));
        }
        for &g in g_plus.iter().chain(&g_minus) {
            Conductance::new(g)?;
        }
        Ok(Self {
            n_rows,
            n_cols,
            g_plus,
            g_minus,
            layer_index,
            row_scale: 1.0 / load_resistance,
            load_resistance,
        })
    }

    /// Maps a weight matrix of any shape (bias row included) onto pairs.
    pub fn from_weights(weights: &Matrix, layer_index: usize) -> Result<Self> {
        if layer_index >= NUM_LAYERS {
            return Err(Error::InvalidArgument(format!(
                "layer index {layer_index} out of range"
            )));
        }
        if weights.as_slice().iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("non-finite weight".into()));
        }
        let max_abs = weights.max_abs();
        if max_abs == 0.0 {
            return Err(Error::Degenerate(format!(
                "layer {layer_index} weight matrix is all zero"
            )));
        }
        let alpha = (G_ON - G_OFF) / max_abs;
        let (g_plus, g_minus) = weights
            .as_slice()
            .iter()
            .map(|&w| {
                let on = (G_OFF + alpha * w.abs()).min(G_ON);
                if w >= 0.0 {
                    (on, G_OFF)
                } else {
                    (G_OFF, on)
                }
            })
            .unzip();
        Ok(Self {
            n_rows: weights.rows(),
            n_cols: weights.cols(),
            g_plus,
            g_minus,
            layer_index,
            row_scale: alpha,
            load_resistance: 1.0 / alpha,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn pair_count(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn layer_index(&self) -> usize {
        self.layer_index
    }

    /// Weight-to-conductance scale `alpha` (S per unit weight).
    pub fn row_scale(&self) -> f64 {
        self.row_scale
    }

    pub fn load_resistance(&self) -> f64 {
        self.load_resistance
    }

    pub fn pair(&self, row: usize, col: usize) -> ReRamPair {
        let k = row * self.n_cols + col;
        ReRamPair {
            g_plus: Conductance::new(self.g_plus[k]).expect("validated on construction"),
            g_minus: Conductance::new(self.g_minus[k]).expect("validated on construction"),
        }
    }

    pub(crate) fn set_pair(&mut self, row: usize, col: usize, g: Conductance) {
        let k = row * self.n_cols + col;
        self.g_plus[k] = g.siemens();
        self.g_minus[k] = g.siemens();
    }

    pub fn g_plus(&self) -> &[f64] {
        &self.g_plus
    }

    pub fn g_minus(&self) -> &[f64] {
        &self.g_minus
    }

    /// Logical weight realised by the cell at (`row`, `col`).
    pub fn effective_weight(&self, row: usize, col: usize) -> f64 {
        let k = row * self.n_cols + col;
        self.load_resistance * (self.g_plus[k] - self.g_minus[k])
    }

    /// Logical weights realised by the whole array.
    pub fn effective_weights(&self) -> Matrix {
        let data = self
            .g_plus
            .iter()
            .zip(&self.g_minus)
            .map(|(p, m)| self.load_resistance * (p - m))
            .collect();
        Matrix::from_vec(self.n_rows, self.n_cols, data).expect("dims consistent")
    }

    fn check_input(&self, v_in: &[f64]) -> Result<()> {
        if v_in.len() != self.n_rows {
            return Err(Error::shape(
                "crossbar input voltages",
                self.n_rows,
                v_in.len(),
            ));
        }
        Ok(())
    }

    /// Branch currents `(I+, I-)` of every logical column.
    pub fn column_currents(&self, v_in: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_input(v_in)?;
        let mut plus = vec![0.0; self.n_cols];
        let mut minus = vec![0.0; self.n_cols];
        for (j, &v) in v_in.iter().enumerate() {
            let base = j * self.n_cols;
            for i in 0..self.n_cols {
                plus[i] += v * self.g_plus[base + i];
                minus[i] += v * self.g_minus[base + i];
            }
        }
        Ok((plus, minus))
    }

    /// Comparator outputs of every logical column.
    ///
    /// The differential current is accumulated cell by cell as
    /// `v * (g+ - g-)`, which equals `I+ - I-` and makes a stuck pair
    /// contribute exactly zero whatever its stuck conductance.
    pub fn output_voltages(&self, v_in: &[f64], rectify: bool) -> Result<Vec<f64>> {
        self.check_input(v_in)?;
        let mut diff = vec![0.0; self.n_cols];
        for (j, &v) in v_in.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let base = j * self.n_cols;
            let plus = &self.g_plus[base..base + self.n_cols];
            let minus = &self.g_minus[base..base + self.n_cols];
            for ((d, p), m) in diff.iter_mut().zip(plus).zip(minus) {
                *d += v * (p - m);
            }
        }
        Ok(diff
            .into_iter()
            .map(|d| column_voltage_from_diff(d, self.load_resistance, rectify))
            .collect())
    }

    /// Per-cell contributions `v_j * (g+ - g-) * R_load` to each column's
    /// output, before rectification.
    pub fn cell_contributions(&self, v_in: &[f64]) -> Result<Matrix> {
        self.check_input(v_in)?;
        let mut out = Matrix::zeros(self.n_rows, self.n_cols);
        for (j, &v) in v_in.iter().enumerate() {
            for i in 0..self.n_cols {
                let k = j * self.n_cols + i;
                out.set(j, i, v * (self.g_plus[k] - self.g_minus[k]) * self.load_resistance);
            }
        }
        Ok(out)
    }
}

/// Linear comparator: `R_load * (I+ - I-)`, optionally rectified.
pub fn column_voltage(i_plus: f64, i_minus: f64, load_resistance: f64, rectify: bool) -> f64 {
    column_voltage_from_diff(i_plus - i_minus, load_resistance, rectify)
}

#[inline]
fn column_voltage_from_diff(diff: f64, load_resistance: f64, rectify: bool) -> f64 {
    debug_assert!(load_resistance > 0.0);
    let v = load_resistance * diff;
    if rectify {
        v.max(0.0)
    } else {
        v
    }
}

/// Maps trained weights (bias row last) onto the array for `layer_index`,
/// checking the shape against the network's layer dimensions.
pub fn map_weights_to_array(weights: &Matrix, layer_index: usize) -> Result<CrossbarArray> {
    let expected = *LAYER_DIMS.get(layer_index).ok_or_else(|| {
        Error::InvalidArgument(format!("layer index {layer_index} out of range"))
    })?;
    if weights.shape() != expected {
        return Err(Error::shape(
            "layer weight matrix",
            format!("{}x{}", expected.0, expected.1),
            format!("{}x{}", weights.rows(), weights.cols()),
        ));
    }
    CrossbarArray::from_weights(weights, layer_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> CrossbarArray {
        CrossbarArray::from_conductances(2, 1, vec![1e-3, 5e-4], vec![2e-4, 5e-4], 0, 1e3)
            .unwrap()
    }

    #[test]
    fn dims_and_pair_totals() {
        assert_eq!(total_pairs(), 4528);
        assert_eq!(LAYER_DIMS[0].0 * LAYER_DIMS[0].1, 3250);
    }

    #[test]
    fn zero_weight_maps_to_balanced_off_pair() {
        let w = Matrix::from_rows(&[vec![0.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let a = CrossbarArray::from_weights(&w, 0).unwrap();
        let p = a.pair(0, 0);
        assert_eq!(p.g_plus.siemens(), G_OFF);
        assert_eq!(p.g_minus.siemens(), G_OFF);
        assert_eq!(p.differential(), 0.0);
    }

    #[test]
    fn max_weight_maps_to_full_on() {
        let w = Matrix::from_rows(&[vec![0.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let a = CrossbarArray::from_weights(&w, 0).unwrap();
        let p = a.pair(0, 1);
        assert_eq!(p.g_plus.siemens(), G_ON);
        assert_eq!(p.g_minus.siemens(), G_OFF);
        assert!((a.effective_weight(0, 1) - 2.0).abs() < 1e-12);
        let n = a.pair(1, 0);
        assert!(n.differential() < 0.0);
    }

    #[test]
    fn all_zero_weights_are_degenerate() {
        let w = Matrix::zeros(3, 2);
        assert!(matches!(
            CrossbarArray::from_weights(&w, 1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn layer_shape_is_checked() {
        let w = Matrix::from_vec(9, 10, vec![0.1; 90]).unwrap();
        assert!(map_weights_to_array(&w, 3).is_ok());
        assert!(matches!(
            map_weights_to_array(&w, 2),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn toy_column_currents() {
        let (p, m) = toy().column_currents(&[1.0, 2.0]).unwrap();
        assert!((p[0] - 2.0e-3).abs() < 1e-15);
        assert!((m[0] - 1.2e-3).abs() < 1e-15);
        assert!(toy().column_currents(&[1.0]).is_err());
    }

    #[test]
    fn zero_input_gives_zero_current() {
        let (p, m) = toy().column_currents(&[0.0, 0.0]).unwrap();
        assert_eq!((p[0], m[0]), (0.0, 0.0));
    }

    #[test]
    fn single_row_single_column_current() {
        let (p, m) = toy().column_currents(&[1.0, 0.0]).unwrap();
        assert_eq!((p[0], m[0]), (1e-3, 2e-4));
    }

    #[test]
    fn comparator_examples() {
        assert_eq!(column_voltage(3e-4, 3e-4, 1e3, false), 0.0);
        assert_eq!(column_voltage(1e-4, 3e-4, 1e3, true), 0.0);
        assert!((column_voltage(2.0e-3, 1.2e-3, 1e3, false) - 0.8).abs() < 1e-12);
        let v = toy().output_voltages(&[1.0, 2.0], false).unwrap();
        assert!((v[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn contributions_zero_for_zero_input() {
        let c = toy().cell_contributions(&[0.0, 0.0]).unwrap();
        assert!(c.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn snapshot_json_round_trip() {
        let w = Matrix::from_rows(&[vec![0.3, -0.2], vec![-1.0, 0.5]]).unwrap();
        let a = CrossbarArray::from_weights(&w, 2).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["g_plus"].as_array().unwrap().len(), 4);
        let back: CrossbarArray = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn snapshot_rejects_out_of_range_conductance() {
        let json = r#"{"format_version":1,"layer_index":0,"n_rows":1,"n_cols":1,
            "row_scale":1.0,"load_resistance":1.0,"g_plus":[1.0],"g_minus":[4.4e-6]}"#;
        assert!(serde_json::from_str::<CrossbarArray>(json).is_err());
    }

    fn small_array() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            (
                Just(r),
                Just(c),
                prop::collection::vec(-3.0f64..3.0, r * c),
                prop::collection::vec(0.0f64..1.0, r),
            )
        })
    }

    proptest! {
        #[test]
        fn mapping_round_trips_and_keeps_sign((r, c, w, _v) in small_array()) {
            let m = Matrix::from_vec(r, c, w.clone()).unwrap();
            prop_assume!(m.max_abs() > 0.0);
            let a = CrossbarArray::from_weights(&m, 0).unwrap();
            let floor = 1e-6 * m.max_abs();
            for j in 0..r {
                for i in 0..c {
                    let x = w[j * c + i];
                    let back = a.effective_weight(j, i);
                    prop_assert!((back - x).abs() <= 1e-9 * x.abs().max(floor));
                    let d = a.pair(j, i).differential();
                    prop_assert_eq!(d > 0.0, x > 0.0);
                    prop_assert_eq!(d < 0.0, x < 0.0);
                }
            }
        }

        #[test]
        fn contribution_columns_sum_to_comparator_output((r, c, w, v) in small_array()) {
            let m = Matrix::from_vec(r, c, w).unwrap();
            prop_assume!(m.max_abs() > 0.0);
            let a = CrossbarArray::from_weights(&m, 1).unwrap();
            let contrib = a.cell_contributions(&v).unwrap();
            let (ip, im) = a.column_currents(&v).unwrap();
            let out = a.output_voltages(&v, true).unwrap();
            for (i, s) in contrib.column_sums().into_iter().enumerate() {
                let via_currents = column_voltage(ip[i], im[i], a.load_resistance(), false);
                prop_assert!((s - via_currents).abs() <= 1e-9 * (1.0 + s.abs()));
                prop_assert!((s.max(0.0) - out[i]).abs() <= 1e-9 * (1.0 + s.abs()));
                prop_assert!(out[i] >= 0.0);
            }
        }
    }
}
