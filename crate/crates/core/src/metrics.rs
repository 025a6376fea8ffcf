use crate::error::{Error, Result};

/// Fraction of predictions equal to their labels.
pub fn accuracy<T: PartialEq>(predictions: &[T], labels: &[T]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::shape("accuracy inputs", labels.len(), predictions.len()));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty set".into()));
    }
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Accuracy improvement in percentage points.
pub fn delta_accuracy(a_corrected: f64, a_faulty: f64) -> f64 {
    (a_corrected - a_faulty) * 100.0
}
