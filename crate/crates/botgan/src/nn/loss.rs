//! Binary cross-entropy on logits, numerically stable form.

use crate::error::{Error, Result};

use super::sigmoid;

/// Mean binary cross-entropy of `logits` against `targets` in `[0,1]`,
/// with the sigmoid folded into the loss:
///
/// ```text
/// loss = mean_i( max(x_i, 0) - x_i*t_i + ln(1 + exp(-|x_i|)) )
/// grad_i = (sigmoid(x_i) - t_i) / n
/// ```
///
/// The returned gradient includes the `1/n` mean reduction, so feeding it
/// straight into `backward` yields gradients of the scalar mean loss.
pub fn bce_with_logits(logits: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.is_empty() {
        return Err(Error::Domain("bce_with_logits on empty input".into()));
    }
    if logits.len() != targets.len() {
        return Err(Error::Shape(format!(
            "logits length {} != targets length {}",
            logits.len(),
            targets.len()
        )));
    }
    for (i, &t) in targets.iter().enumerate() {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!(
                "target {t} at index {i} outside [0,1]"
            )));
        }
    }

    let n = logits.len() as f64;
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&x, &t) in logits.iter().zip(targets) {
        total += x.max(0.0) - x * t + (-x.abs()).exp().ln_1p();
        grad.push((sigmoid(x) - t) / n);
    }
    Ok((total / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_point() {
        let (loss, grad) = bce_with_logits(&[0.0], &[1.0]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((grad[0] - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn large_positive_logit_no_overflow() {
        let (loss, grad) = bce_with_logits(&[100.0], &[1.0]).unwrap();
        assert!(loss.is_finite());
        assert!(loss < 1e-40, "loss {loss}");
        assert!(grad[0].abs() < 1e-40);
    }

    #[test]
    fn large_negative_logit_no_nan() {
        let (loss, grad) = bce_with_logits(&[-100.0], &[1.0]).unwrap();
        assert!((loss - 100.0).abs() < 1e-9, "loss {loss}");
        assert!(grad[0].is_finite());
    }

    #[test]
    fn extreme_logits_stay_finite() {
        for &x in &[-1e3, -100.0, 0.0, 100.0, 1e3] {
            for &t in &[0.0, 0.5, 1.0] {
                let (loss, grad) = bce_with_logits(&[x], &[t]).unwrap();
                assert!(loss.is_finite(), "loss not finite at x={x}, t={t}");
                assert!(grad[0].is_finite(), "grad not finite at x={x}, t={t}");
            }
        }
    }

    #[test]
    fn empty_input_is_domain_error() {
        assert!(matches!(
            bce_with_logits(&[], &[]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn matches_naive_formula_at_moderate_logits() {
        let xs = [-3.0, -0.5, 0.2, 1.7];
        let ts = [0.0, 0.3, 0.8, 1.0];
        let (loss, _) = bce_with_logits(&xs, &ts).unwrap();
        let naive: f64 = xs
            .iter()
            .zip(&ts)
            .map(|(&x, &t)| {
                let s = 1.0 / (1.0 + (-x).exp());
                -(t * s.ln() + (1.0 - t) * (1.0 - s).ln())
            })
            .sum::<f64>()
            / xs.len() as f64;
        assert!((loss - naive).abs() < 1e-12);
    }
}
