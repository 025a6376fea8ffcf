//! Spatial stuck-at defect patterns.
//!
//! Masks live on the logical cell grid of an array (bias row included).
//! Radial patterns use per-axis normalised coordinates
//! `x = (i - (n_cols-1)/2) / n_cols`, `y = (j - (n_rows-1)/2) / n_rows`,
//! so a radius of 0.5 touches all four edges of any array.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crossbar::{CrossbarArray, NUM_LAYERS};
use crate::device::Conductance;
use crate::error::{Error, Result};

pub const CIRCLE_RADII: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const RING_INNER_RADII: [f64; 4] = [0.4, 0.36, 0.32, 0.28];
pub const RING_OUTER_RADIUS: f64 = 0.5;
pub const COMPLEMENT_RADII: [f64; 4] = [0.4, 0.3, 0.2, 0.1];
/// Fraction of rows (columns) per size step for strip defects.
pub const STRIP_FRACTION_STEP: f64 = 0.1;
pub const SIZE_INDICES: [u8; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Circle,
    Ring,
    CircleComplement,
    Row,
    Column,
    Checkerboard,
}

impl DefectKind {
    pub const ALL: [DefectKind; 6] = [
        DefectKind::Circle,
        DefectKind::Ring,
        DefectKind::CircleComplement,
        DefectKind::Row,
        DefectKind::Column,
        DefectKind::Checkerboard,
    ];

    pub fn is_sized(self) -> bool {
        self != DefectKind::Checkerboard
    }

    /// Size indices simulated for this kind (`None` for the fixed pattern).
    pub fn sizes(self) -> Vec<Option<u8>> {
        if self.is_sized() {
            SIZE_INDICES.iter().map(|&s| Some(s)).collect()
        } else {
            vec![None]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DefectKind::Circle => "circle",
            DefectKind::Ring => "ring",
            DefectKind::CircleComplement => "circle_complement",
            DefectKind::Row => "row",
            DefectKind::Column => "column",
            DefectKind::Checkerboard => "checkerboard",
        }
    }
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DefectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        DefectKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::Config(format!("unknown defect kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StuckMode {
    StuckOn,
    #[default]
    StuckOff,
}

impl StuckMode {
    pub fn conductance(self) -> Conductance {
        match self {
            StuckMode::StuckOn => Conductance::ON,
            StuckMode::StuckOff => Conductance::OFF,
        }
    }
}

/// A defect pattern placed on one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefectSpec {
    pub kind: DefectKind,
    pub size_index: Option<u8>,
    pub layer_index: usize,
    #[serde(default)]
    pub stuck_mode: StuckMode,
}

impl DefectSpec {
    pub fn new(
        kind: DefectKind,
        size_index: Option<u8>,
        layer_index: usize,
        stuck_mode: StuckMode,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            size_index,
            layer_index,
            stuck_mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_index >= NUM_LAYERS {
            return Err(Error::InvalidArgument(format!(
                "layer index {} out of range",
                self.layer_index
            )));
        }
        match (self.kind.is_sized(), self.size_index) {
            (false, Some(_)) => Err(Error::InvalidArgument(
                "checkerboard defects carry no size index".into(),
            )),
            (true, None) => Err(Error::InvalidArgument(format!(
                "{} defects need a size index",
                self.kind
            ))),
            (true, Some(s)) if !(1..=4).contains(&s) => Err(Error::InvalidArgument(format!(
                "size index {s} outside 1..=4"
            ))),
            _ => Ok(()),
        }
    }

    /// Realises the mask on an array of the given dims.
    pub fn mask(&self, dims: (usize, usize)) -> Result<DefectMask> {
        self.validate()?;
        let param = match self.size_index {
            Some(s) => Some(severity_to_param(self.kind, s, dims)?),
            None => None,
        };
        Ok(match (self.kind, param) {
            (DefectKind::Circle, Some(SeverityParam::Radius(r))) => mask_circle(dims, r),
            (DefectKind::Ring, Some(SeverityParam::InnerRadius(r))) => mask_ring(dims, r),
            (DefectKind::CircleComplement, Some(SeverityParam::Radius(r))) => {
                mask_circle_complement(dims, r)
            }
            (DefectKind::Row, Some(SeverityParam::Count(k))) => mask_row(dims, k)?,
            (DefectKind::Column, Some(SeverityParam::Count(k))) => mask_column(dims, k)?,
            (DefectKind::Checkerboard, None) => mask_checkerboard(dims),
            _ => unreachable!("severity parameter matches kind"),
        })
    }
}

/// Boolean grid over logical cells; `true` marks a defective pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DefectMask {
    n_rows: usize,
    n_cols: usize,
    cells: Vec<bool>,
}

impl DefectMask {
    pub fn empty(dims: (usize, usize)) -> Self {
        Self::from_fn(dims, |_, _| false)
    }

    pub fn full(dims: (usize, usize)) -> Self {
        Self::from_fn(dims, |_, _| true)
    }

    pub fn from_fn(dims: (usize, usize), mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let (n_rows, n_cols) = dims;
        let mut cells = Vec::with_capacity(n_rows * n_cols);
        for j in 0..n_rows {
            for i in 0..n_cols {
                cells.push(f(j, i));
            }
        }
        Self {
            n_rows,
            n_cols,
            cells,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n_cols + col]
    }

    pub fn masked_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn total_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn((self.n_cols, self.n_rows), |j, i| self.get(i, j))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.dims(), other.dims(), "mask dims differ");
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn xor(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            cells: self.cells.iter().map(|c| !c).collect(),
        }
    }

    /// Writes the mask as a plain (P2) PGM image; defective cells are white.
    pub fn write_pgm(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "P2")?;
        writeln!(w, "{} {}", self.n_cols, self.n_rows)?;
        writeln!(w, "1")?;
        for j in 0..self.n_rows {
            let line: Vec<&str> = (0..self.n_cols)
                .map(|i| if self.get(j, i) { "1" } else { "0" })
                .collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Writes the mask as a headerless 0/1 CSV grid, one array row per line.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        for j in 0..self.n_rows {
            let line: Vec<&str> = (0..self.n_cols)
                .map(|i| if self.get(j, i) { "1" } else { "0" })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[inline]
fn normalized_radius_sq(dims: (usize, usize), j: usize, i: usize) -> f64 {
    let (n_rows, n_cols) = dims;
    let x = (i as f64 - (n_cols as f64 - 1.0) / 2.0) / n_cols as f64;
    let y = (j as f64 - (n_rows as f64 - 1.0) / 2.0) / n_rows as f64;
    x * x + y * y
}

/// Solid disc of radius `r` (fraction of the array width) at the centre.
pub fn mask_circle(dims: (usize, usize), r: f64) -> DefectMask {
    let r2 = r * r;
    DefectMask::from_fn(dims, |j, i| normalized_radius_sq(dims, j, i) <= r2)
}

/// Annulus between `r_inner` (exclusive) and the fixed outer radius 0.5.
pub fn mask_ring(dims: (usize, usize), r_inner: f64) -> DefectMask {
    let inner2 = r_inner * r_inner;
    let outer2 = RING_OUTER_RADIUS * RING_OUTER_RADIUS;
    DefectMask::from_fn(dims, |j, i| {
        let d2 = normalized_radius_sq(dims, j, i);
        inner2 < d2 && d2 <= outer2
    })
}

/// Everything except a functional central disc of radius `r`.
pub fn mask_circle_complement(dims: (usize, usize), r: f64) -> DefectMask {
    mask_circle(dims, r).complement()
}

fn strip_bounds(len: usize, k: usize, what: &str) -> Result<std::ops::Range<usize>> {
    if k == 0 || k > len {
        return Err(Error::InvalidArgument(format!(
            "{what} count {k} outside 1..={len}"
        )));
    }
    let start = (len - k) / 2;
    Ok(start..start + k)
}

/// `k` consecutive fully defective rows centred vertically.
pub fn mask_row(dims: (usize, usize), k: usize) -> Result<DefectMask> {
    let rows = strip_bounds(dims.0, k, "row")?;
    Ok(DefectMask::from_fn(dims, |j, _| rows.contains(&j)))
}

/// `k` consecutive fully defective columns centred horizontally.
pub fn mask_column(dims: (usize, usize), k: usize) -> Result<DefectMask> {
    let cols = strip_bounds(dims.1, k, "column")?;
    Ok(DefectMask::from_fn(dims, |_, i| cols.contains(&i)))
}

/// Alternating pattern; cell `(j, i)` is defective when `j + i` is even.
pub fn mask_checkerboard(dims: (usize, usize)) -> DefectMask {
    DefectMask::from_fn(dims, |j, i| (j + i) % 2 == 0)
}

/// Concrete geometric parameter behind a size index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeverityParam {
    Radius(f64),
    InnerRadius(f64),
    Count(usize),
}

/// Maps a size index (1..=4) to the pattern parameter for `kind` on `dims`.
///
/// Strip defects target 10/20/30/40 % of rows (columns), at least one.
pub fn severity_to_param(
    kind: DefectKind,
    size_index: u8,
    dims: (usize, usize),
) -> Result<SeverityParam> {
    if !(1..=4).contains(&size_index) {
        return Err(Error::InvalidArgument(format!(
            "size index {size_index} outside 1..=4"
        )));
    }
    let s = usize::from(size_index - 1);
    let strip = |len: usize| {
        let k = (STRIP_FRACTION_STEP * f64::from(size_index) * len as f64).round() as usize;
        k.max(1).min(len)
    };
    match kind {
        DefectKind::Circle => Ok(SeverityParam::Radius(CIRCLE_RADII[s])),
        DefectKind::Ring => Ok(SeverityParam::InnerRadius(RING_INNER_RADII[s])),
        DefectKind::CircleComplement => Ok(SeverityParam::Radius(COMPLEMENT_RADII[s])),
        DefectKind::Row => Ok(SeverityParam::Count(strip(dims.0))),
        DefectKind::Column => Ok(SeverityParam::Count(strip(dims.1))),
        DefectKind::Checkerboard => Err(Error::InvalidArgument(
            "checkerboard defects are not parametrised by size".into(),
        )),
    }
}

/// Fraction of cells under the mask.
pub fn coverage(mask: &DefectMask) -> f64 {
    if mask.total_cells() == 0 {
        return 0.0;
    }
    mask.masked_count() as f64 / mask.total_cells() as f64
}

/// Returns a copy of `array` with every masked pair stuck at the mode's
/// conductance (both members equal).
pub fn apply_defects(
    array: &CrossbarArray,
    mask: &DefectMask,
    stuck_mode: StuckMode,
) -> Result<CrossbarArray> {
    if mask.dims() != array.dims() {
        return Err(Error::shape(
            "defect mask",
            format!("{:?}", array.dims()),
            format!("{:?}", mask.dims()),
        ));
    }
    let g = stuck_mode.conductance();
    let mut out = array.clone();
    for j in 0..mask.n_rows {
        for i in 0..mask.n_cols {
            if mask.get(j, i) {
                out.set_pair(j, i, g);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::LAYER_DIMS;
    use crate::matrix::Matrix;
    use proptest::prelude::*;

    const L0: (usize, usize) = (65, 50);

    /// Independent brute-force count: explicit centre offsets in cell units.
    fn circle_count_oracle(dims: (usize, usize), r: f64) -> usize {
        let (h, w) = (dims.0 as f64, dims.1 as f64);
        let mut n = 0;
        for j in 0..dims.0 {
            for i in 0..dims.1 {
                let dx = (2.0 * i as f64 + 1.0 - w) / (2.0 * w);
                let dy = (2.0 * j as f64 + 1.0 - h) / (2.0 * h);
                if dx * dx + dy * dy <= r * r {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn zero_radius_is_empty_on_l0() {
        assert_eq!(mask_circle(L0, 0.0).masked_count(), 0);
    }

    #[test]
    fn half_radius_spans_width() {
        let dims = (40, 40);
        let m = mask_circle(dims, 0.5);
        let mid = 19;
        assert!((0..40).all(|i| m.get(mid, i)));
        assert!((0..40).all(|j| m.get(j, mid)));
        assert!(!m.get(0, 0));
    }

    #[test]
    fn circle_coverage_matches_cell_count_oracle() {
        // Frozen from the brute-force oracle on the 3250-cell L0 grid.
        let frozen = [102usize, 404, 918, 1628];
        for (r, want) in CIRCLE_RADII.iter().zip(frozen) {
            let got = mask_circle(L0, *r).masked_count();
            assert_eq!(got, circle_count_oracle(L0, *r));
            assert_eq!(got, want, "r = {r}");
        }
    }

    #[test]
    fn ring_decomposes_disc() {
        for &r in &RING_INNER_RADII {
            for &(h, w) in &LAYER_DIMS {
                let ring = mask_ring((h, w), r);
                let disc = mask_circle((h, w), r);
                assert_eq!(ring.intersection(&disc).masked_count(), 0);
                assert_eq!(ring.union(&disc), mask_circle((h, w), 0.5));
            }
        }
        assert_eq!(mask_ring(L0, 0.5).masked_count(), 0);
    }

    #[test]
    fn ring_coverage_decreases_with_inner_radius() {
        let counts: Vec<usize> = [0.28, 0.32, 0.36, 0.4]
            .iter()
            .map(|&r| mask_ring(L0, r).masked_count())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] > w[1]), "{counts:?}");
        let oracle: Vec<usize> = [0.28, 0.32, 0.36, 0.4]
            .iter()
            .map(|&r| circle_count_oracle(L0, 0.5) - circle_count_oracle(L0, r))
            .collect();
        assert_eq!(counts, oracle);
    }

    #[test]
    fn complement_laws() {
        for &r in &COMPLEMENT_RADII {
            let c = mask_circle(L0, r);
            let cc = mask_circle_complement(L0, r);
            assert_eq!(c.union(&cc), DefectMask::full(L0));
            assert_eq!(c.intersection(&cc).masked_count(), 0);
            assert!((coverage(&cc) - (1.0 - coverage(&c))).abs() < 1e-15);
        }
        assert!(coverage(&mask_circle_complement(L0, 0.1)) > 0.95);
    }

    #[test]
    fn row_masks() {
        assert_eq!(mask_row(L0, 65).unwrap(), DefectMask::full(L0));
        assert!((coverage(&mask_row(L0, 1).unwrap()) - 1.0 / 65.0).abs() < 1e-15);
        assert!(mask_row(L0, 0).is_err());
        assert!(mask_row(L0, 66).is_err());
        for &(h, w) in &LAYER_DIMS {
            for k in 1..=h {
                let m = mask_row((h, w), k).unwrap();
                let rows: Vec<usize> = (0..h).filter(|&j| m.get(j, 0)).collect();
                assert_eq!(rows.len(), k);
                assert!(rows.windows(2).all(|p| p[1] == p[0] + 1));
                assert!((0..h).all(|j| (0..w).all(|i| m.get(j, i) == m.get(j, 0))));
                let above = rows[0];
                let below = h - 1 - rows[k - 1];
                assert!(above.abs_diff(below) <= 1);
            }
        }
    }

    #[test]
    fn column_masks() {
        assert_eq!(mask_column(L0, 50).unwrap(), DefectMask::full(L0));
        let m = mask_column(L0, 4).unwrap();
        assert_eq!(m.masked_count(), 4 * 65);
        assert!((coverage(&m) - 4.0 / 50.0).abs() < 1e-15);
        for k in 1..=10 {
            assert_eq!(
                mask_column((9, 10), k).unwrap(),
                mask_row((10, 9), k).unwrap().transpose()
            );
        }
    }

    #[test]
    fn checkerboard_masks() {
        let m = mask_checkerboard(L0);
        assert_eq!(m.masked_count(), 1625);
        assert_eq!(coverage(&m), 0.5);
        let odd = mask_checkerboard((9, 9));
        assert_eq!(odd.masked_count(), 41);
        for j in 0..65 {
            for i in 0..50 {
                if m.get(j, i) {
                    if i + 1 < 50 {
                        assert!(!m.get(j, i + 1));
                    }
                    if j + 1 < 65 {
                        assert!(!m.get(j + 1, i));
                    }
                }
            }
        }
        let two = mask_checkerboard((2, 2));
        assert!(two.get(0, 0) && two.get(1, 1) && !two.get(0, 1) && !two.get(1, 0));
    }

    #[test]
    fn severity_parameters() {
        assert_eq!(
            severity_to_param(DefectKind::Circle, 2, L0).unwrap(),
            SeverityParam::Radius(0.2)
        );
        assert_eq!(
            severity_to_param(DefectKind::Ring, 4, L0).unwrap(),
            SeverityParam::InnerRadius(0.28)
        );
        assert_eq!(
            severity_to_param(DefectKind::CircleComplement, 1, L0).unwrap(),
            SeverityParam::Radius(0.4)
        );
        assert_eq!(
            severity_to_param(DefectKind::Row, 1, (21, 8)).unwrap(),
            SeverityParam::Count(2)
        );
        assert_eq!(
            severity_to_param(DefectKind::Column, 4, L0).unwrap(),
            SeverityParam::Count(20)
        );
        assert_eq!(
            severity_to_param(DefectKind::Column, 1, (21, 8)).unwrap(),
            SeverityParam::Count(1)
        );
        assert!(severity_to_param(DefectKind::Checkerboard, 1, L0).is_err());
        assert!(severity_to_param(DefectKind::Circle, 5, L0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(DefectSpec::new(DefectKind::Checkerboard, Some(1), 0, StuckMode::StuckOff).is_err());
        assert!(DefectSpec::new(DefectKind::Circle, None, 0, StuckMode::StuckOff).is_err());
        assert!(DefectSpec::new(DefectKind::Circle, Some(1), 4, StuckMode::StuckOff).is_err());
        assert!(DefectSpec::new(DefectKind::Checkerboard, None, 3, StuckMode::StuckOn).is_ok());
        let s: DefectSpec = serde_json::from_str(
            r#"{"kind":"circle_complement","size_index":2,"layer_index":1}"#,
        )
        .unwrap();
        assert_eq!(s.stuck_mode, StuckMode::StuckOff);
        assert_eq!("circle-complement".parse::<DefectKind>().unwrap(), DefectKind::CircleComplement);
    }

    #[test]
    fn apply_defects_behaviour() {
        let w = Matrix::from_rows(&[vec![0.5, -0.25, 1.0], vec![-1.0, 0.75, 0.1]]).unwrap();
        let a = CrossbarArray::from_weights(&w, 0).unwrap();
        let empty = DefectMask::empty((2, 3));
        assert_eq!(apply_defects(&a, &empty, StuckMode::StuckOff).unwrap(), a);

        let m = mask_checkerboard((2, 3));
        for mode in [StuckMode::StuckOn, StuckMode::StuckOff] {
            let d = apply_defects(&a, &m, mode).unwrap();
            for j in 0..2 {
                for i in 0..3 {
                    if m.get(j, i) {
                        let p = d.pair(j, i);
                        assert_eq!(p.g_plus, mode.conductance());
                        assert_eq!(p.g_minus, mode.conductance());
                        assert_eq!(d.effective_weight(j, i), 0.0);
                    } else {
                        assert_eq!(d.pair(j, i), a.pair(j, i));
                    }
                }
            }
            assert_eq!(apply_defects(&d, &m, mode).unwrap(), d);
        }
        let off = apply_defects(&a, &m, StuckMode::StuckOff).unwrap();
        assert_eq!(off.pair(0, 0).g_plus.siemens(), 4.4e-6);
        assert_eq!(a.pair(0, 0).g_plus.siemens(), a.g_plus()[0]);
        assert!(apply_defects(&a, &DefectMask::empty((3, 2)), StuckMode::StuckOff).is_err());
    }

    #[test]
    fn mask_exports() {
        let m = mask_checkerboard((2, 3));
        let mut pgm = Vec::new();
        m.write_pgm(&mut pgm).unwrap();
        assert_eq!(String::from_utf8(pgm).unwrap(), "P2\n3 2\n1\n1 0 1\n0 1 0\n");
        let mut csv = Vec::new();
        m.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "1,0,1\n0,1,0\n");
    }

    proptest! {
        #[test]
        fn circle_and_complement_partition_grid(h in 1usize..70, w in 1usize..70, r in 0.0f64..0.8) {
            let x = mask_circle((h, w), r).xor(&mask_circle_complement((h, w), r));
            prop_assert_eq!(x, DefectMask::full((h, w)));
        }

        #[test]
        fn circle_coverage_monotone(h in 1usize..70, w in 1usize..70, r1 in 0.0f64..0.8, r2 in 0.0f64..0.8) {
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(coverage(&mask_circle((h, w), lo)) <= coverage(&mask_circle((h, w), hi)));
            prop_assert!(coverage(&mask_ring((h, w), lo)) >= coverage(&mask_ring((h, w), hi)));
        }

        #[test]
        fn masks_are_deterministic(kind in 0usize..6, size in 1u8..=4, layer in 0usize..4) {
            let kind = DefectKind::ALL[kind];
            let size = kind.is_sized().then_some(size);
            let spec = DefectSpec::new(kind, size, layer, StuckMode::StuckOff).unwrap();
            let dims = LAYER_DIMS[layer];
            prop_assert_eq!(spec.mask(dims).unwrap(), spec.mask(dims).unwrap());
        }
    }
}
