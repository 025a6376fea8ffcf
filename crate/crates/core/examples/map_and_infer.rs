//! Trains the baseline, maps it onto four differential crossbars and runs
//! analog inference next to the software network.
//!
//! ```bash
//! cargo run --release --example map_and_infer
//! ```

use reram_correct::digits::bundled_digits;
use reram_correct::experiment::build_baseline;
use reram_correct::Circuit;

fn main() -> reram_correct::Result<()> {
    let digits = bundled_digits();
    let (params, report) = build_baseline(&digits, 1)?;
    println!("software test accuracy {:.2}%", report.test_accuracy * 100.0);

    let circuit = Circuit::from_params(&params)?;
    for a in circuit.arrays() {
        println!(
            "array {}: {}x{} pairs, load {:.1} ohm",
            a.layer_index(),
            a.n_rows(),
            a.n_cols(),
            a.load_resistance()
        );
    }

    for d in digits.iter().take(5) {
        let inf = circuit.forward_inference(&d.pixels)?;
        let volts: Vec<String> = inf.voltages.as_slice().iter().map(|v| format!("{v:.2}")).collect();
        println!(
            "image {:>4} label {} circuit {} software {}  [{}]",
            d.image_id,
            d.label,
            inf.prediction,
            params.predict(&d.normalized())?,
            volts.join(" ")
        );
    }

    let snapshot = serde_json::to_string(circuit.array(3))?;
    println!("array 3 snapshot: {} bytes of JSON", snapshot.len());
    Ok(())
}
