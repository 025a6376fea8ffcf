//! Conductance of one ReRAM device across its gap range.
//!
//! ```bash
//! cargo run --example device_curve
//! ```

use reram_correct::device::{conductance_at, decay_length_nm, GAP_MAX_NM, GAP_MIN_NM};

fn main() -> reram_correct::Result<()> {
    println!("decay length {:.5} nm", decay_length_nm());
    println!("{:>8}  {:>12}", "gap (nm)", "G (S)");
    for k in 0..=15 {
        let gap = GAP_MIN_NM + (GAP_MAX_NM - GAP_MIN_NM) * k as f64 / 15.0;
        println!("{gap:>8.3}  {:>12.4e}", conductance_at(gap)?.siemens());
    }
    Ok(())
}
