use crate::measurement::RunResult;

/// Runs with a validity figure at or above this are outside the
/// first-order regime.
pub const VALIDITY_THRESHOLD: f64 = 0.05;

/// Measured pointer displacement against the first-order prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    /// `pointer_centroid - initial_centroid - predicted_shift`.
    pub centroid_error: f64,
    /// `|centroid_error / predicted_shift|`; infinite for a zero prediction
    /// with non-zero error.
    pub relative_error: f64,
    pub validity: f64,
    /// Set when `validity >= VALIDITY_THRESHOLD`.
    pub flagged: bool,
}

pub fn compare_to_prediction(result: &RunResult) -> Discrepancy {
    let centroid_error = result.pointer_centroid - result.initial_centroid - result.predicted_shift;
    let relative_error = if centroid_error == 0.0 { 0.0 } else { (centroid_error / result.predicted_shift).abs() };
    Discrepancy {
        centroid_error,
        relative_error,
        validity: result.validity,
        flagged: !(result.validity < VALIDITY_THRESHOLD),
    }
}
