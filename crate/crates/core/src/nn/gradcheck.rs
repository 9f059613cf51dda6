use super::Parameters;
use crate::{Error, Result};

/// Central finite-difference gradient of `loss_fn` at `params`, one vector
/// per tensor in [`Parameters::tensors`] order.
pub fn finite_diff_grad<P, F>(mut loss_fn: F, params: &P, h: f64) -> Result<Vec<Vec<f64>>>
where
    P: Parameters + Clone,
    F: FnMut(&P) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {h}")));
    }
    let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(shapes.len());
    for (ti, &len) in shapes.iter().enumerate() {
        let mut grad = vec![0.0; len];
        for (j, g) in grad.iter_mut().enumerate() {
            let original = probe.tensors()[ti][j];
            probe.tensors_mut()[ti][j] = original + h;
            let plus = loss_fn(&probe)?;
            probe.tensors_mut()[ti][j] = original - h;
            let minus = loss_fn(&probe)?;
            probe.tensors_mut()[ti][j] = original;
            *g = (plus - minus) / (2.0 * h);
        }
        out.push(grad);
    }
    Ok(out)
}

/// Absolute differences below this scale are treated as agreement; it sits
/// well above the roundoff floor of a central difference with h = 1e-6.
const RELATIVE_ERROR_FLOOR: f64 = 1e-5;

/// `|a − n| / max(|a|, |n|, 1e-5)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
    (analytic - numeric).abs() / scale
}

/// Largest [`relative_error`] over all entries. A shape mismatch reports
/// infinity.
pub fn max_relative_error<G: Parameters + ?Sized>(analytic: &G, numeric: &[Vec<f64>]) -> f64 {
    let tensors = analytic.tensors();
    if tensors.len() != numeric.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for (a, n) in tensors.iter().zip(numeric) {
        if a.len() != n.len() {
            return f64::INFINITY;
        }
        for (&x, &y) in a.iter().zip(n) {
            let e = relative_error(x, y);
            if e.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(e);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::softmax;

    #[test]
    fn quadratic() {
        let g = finite_diff_grad(|x: &Vec<f64>| Ok(0.5 * x[0] * x[0]), &vec![3.0], 1e-6).unwrap();
        assert!((g[0][0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn constant_loss_has_zero_gradient() {
        let g = finite_diff_grad(|_: &Vec<f64>| Ok(4.2), &vec![1.0, 2.0, 3.0], 1e-6).unwrap();
        assert_eq!(g, vec![vec![0.0; 3]]);
    }

    #[test]
    fn softmax_cross_entropy_matches_closed_form() {
        let z = vec![0.2, -1.0, 1.7, 0.4];
        let target = 2;
        let loss = |z: &Vec<f64>| -> Result<f64> { Ok(-softmax(z)?[target].ln()) };
        let g = finite_diff_grad(loss, &z, 1e-6).unwrap();
        let p = softmax(&z).unwrap();
        for k in 0..4 {
            let y = if k == target { 1.0 } else { 0.0 };
            assert!((g[0][k] - (p[k] - y)).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_step() {
        assert!(finite_diff_grad(|_: &Vec<f64>| Ok(0.0), &vec![1.0], 0.0).is_err());
        assert!(finite_diff_grad(|_: &Vec<f64>| Ok(0.0), &vec![1.0], -1.0).is_err());
    }

    #[test]
    fn relative_error_detects_sign_flip() {
        assert!(relative_error(1.0, -1.0) > 1.0);
        assert_eq!(relative_error(1e-9, 0.0), 1e-4);
        assert_eq!(max_relative_error(&vec![1.0, 2.0], &[vec![1.0, 2.0]]), 0.0);
        assert_eq!(max_relative_error(&vec![1.0], &[vec![1.0, 2.0]]), f64::INFINITY);
    }
}
