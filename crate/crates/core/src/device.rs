//! Static ReRAM device model: filament gap to conductance.
//!
//! Only the static curve is modelled. The curve is a two-point exponential
//! `G(g) = A * exp(-g / lambda)` pinned to the stuck-on and stuck-off
//! anchors, so both anchors are reproduced exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest programmable gap (nm); the stuck-on state.
pub const GAP_MIN_NM: f64 = 0.2;
/// Largest programmable gap (nm); the stuck-off state.
pub const GAP_MAX_NM: f64 = 1.7;
/// Conductance at the smallest gap (S).
pub const G_ON: f64 = 1.8e-3;
/// Conductance at the largest gap (S).
pub const G_OFF: f64 = 4.4e-6;

/// Filament gap in nanometres, validated against the programmable range.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct GapSize(f64);

impl GapSize {
    pub fn new(nm: f64) -> Result<Self> {
        if !(GAP_MIN_NM..=GAP_MAX_NM).contains(&nm) {
            return Err(Error::Domain {
                what: "gap size (nm)",
                value: nm,
                min: GAP_MIN_NM,
                max: GAP_MAX_NM,
            });
        }
        Ok(Self(nm))
    }

    pub fn nm(self) -> f64 {
        self.0
    }
}

/// Device conductance in siemens, always within `[G_OFF, G_ON]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Conductance(f64);

impl Conductance {
    pub const ON: Conductance = Conductance(G_ON);
    pub const OFF: Conductance = Conductance(G_OFF);

    pub fn new(siemens: f64) -> Result<Self> {
        if !(G_OFF..=G_ON).contains(&siemens) {
            return Err(Error::Domain {
                what: "conductance (S)",
                value: siemens,
                min: G_OFF,
                max: G_ON,
            });
        }
        Ok(Self(siemens))
    }

    pub fn siemens(self) -> f64 {
        self.0
    }
}

/// Decay length `lambda` of the exponential fit, in nm.
pub fn decay_length_nm() -> f64 {
    (GAP_MAX_NM - GAP_MIN_NM) / (G_ON / G_OFF).ln()
}

/// Prefactor `A` of the exponential fit, in S.
pub fn prefactor() -> f64 {
    G_ON * (GAP_MIN_NM / decay_length_nm()).exp()
}

/// Conductance of a device programmed to `gap`.
///
/// Evaluated as `G_ON^(1-t) * G_OFF^t` with `t` the normalised gap, which is
/// algebraically the exponential fit and lands exactly on both anchors.
pub fn gap_to_conductance(gap: GapSize) -> Conductance {
    let t = (gap.nm() - GAP_MIN_NM) / (GAP_MAX_NM - GAP_MIN_NM);
    let g = G_ON.powf(1.0 - t) * G_OFF.powf(t);
    Conductance(g.clamp(G_OFF, G_ON))
}

/// Convenience wrapper validating a raw gap value.
pub fn conductance_at(gap_nm: f64) -> Result<Conductance> {
    GapSize::new(gap_nm).map(gap_to_conductance)
}
