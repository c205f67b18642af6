use super::optim::Objective;
use crate::error::{Error, Result};

/// Central-difference step used by default.
pub const GRAD_CHECK_STEP: f64 = 1e-5;

/// Compares an analytic gradient against central differences of `f`.
///
/// Returns `max_i |a_i − c_i| / (|a_i| + |c_i| + 1e-12)`.
pub fn grad_check(f: impl Fn(&[f64]) -> f64, theta: &[f64], analytic: &[f64], h: f64) -> Result<f64> {
    if analytic.len() != theta.len() {
        return Err(Error::InvalidArgument("gradient and point differ in length".into()));
    }
    let mut point = theta.to_vec();
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        point[i] = theta[i] + h;
        let up = f(&point);
        point[i] = theta[i] - h;
        let down = f(&point);
        point[i] = theta[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!("objective not finite around coordinate {i}")));
        }
        let numeric = (up - down) / (2.0 * h);
        let err = (analytic[i] - numeric).abs() / (analytic[i].abs() + numeric.abs() + 1e-12);
        worst = worst.max(err);
    }
    Ok(worst)
}

/// [`grad_check`] over the full objective of an [`Objective`].
pub fn objective_grad_check(obj: &dyn Objective, theta: &[f64], h: f64) -> Result<f64> {
    let (_, g) = obj.full_grad(theta);
    grad_check(|t| obj.full_loss(t), theta, &g, h)
}
