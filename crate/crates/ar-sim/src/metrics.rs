//! Estimation quality metrics.

use amp_retrieval::mat::fro_norm_sq;
use amp_retrieval::{ComplexMatrix, Error, Result};

/// Normalized mean square error between two channels of equal shape:
/// `‖Ĥ/‖Ĥ‖_F − H/‖H‖_F‖_F²`.
///
/// Both inputs are normalized to the unit Frobenius sphere first, so the
/// metric is invariant to positive rescaling of either argument and ranges
/// over [0, 4] (2 for orthogonal channels).
pub fn nmse(h_hat: &ComplexMatrix, h_true: &ComplexMatrix) -> Result<f64> {
    if h_hat.rows() != h_true.rows() || h_hat.cols() != h_true.cols() {
        return Err(Error::DimMismatch {
            op: "nmse",
            expected: format!("{}x{}", h_true.rows(), h_true.cols()),
            got: format!("{}x{}", h_hat.rows(), h_hat.cols()),
        });
    }
    let n_hat = fro_norm_sq(h_hat);
    let n_true = fro_norm_sq(h_true);
    if n_hat == 0.0 || n_true == 0.0 {
        return Err(Error::Degenerate("nmse of a zero-norm channel"));
    }
    let diff = h_hat
        .scale_re(1.0 / n_hat.sqrt())
        .sub(&h_true.scale_re(1.0 / n_true.sqrt()));
    Ok(fro_norm_sq(&diff))
}
