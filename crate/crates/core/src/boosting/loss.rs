use crate::error::{Error, Result};

/// Probability clamp used inside logarithms.
pub const PROB_EPS: f64 = 1e-15;

/// Largest double below 1.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// A value on the log-odds scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LogOdds(pub f64);

impl LogOdds {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn probability(self) -> f64 {
        sigmoid(self.0)
    }
}

/// Logistic function, kept strictly inside (0, 1) for any finite input.
pub fn sigmoid(v: f64) -> f64 {
    let p = if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, ONE_BELOW)
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!(
            "length mismatch: {a} labels vs {b} values"
        )));
    }
    Ok(())
}

fn check_binary(y: f64) -> Result<()> {
    if y == 0.0 || y == 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "binary label must be 0 or 1, got {y}"
        )))
    }
}

/// Loss contribution of one observation, with `p` clamped to `[ε, 1−ε]`.
pub fn point_loss(y: f64, p: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross-entropy.
pub fn log_loss(labels: &[f64], probs: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), probs.len())?;
    if labels.is_empty() {
        return Err(Error::invalid("log-loss of an empty sample is undefined"));
    }
    let mut total = 0.0;
    for (&y, &p) in labels.iter().zip(probs) {
        check_binary(y)?;
        total += point_loss(y, p);
    }
    Ok(total / labels.len() as f64)
}

/// Constant log-odds minimizing the log-loss: `log(n_pos / n_neg)`, with the
/// positive rate clamped to `[ε, 1−ε]` so single-class input stays finite.
pub fn initial_log_odds(labels: &[f64]) -> Result<LogOdds> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot fit a prior to zero labels"));
    }
    let mut n_pos = 0usize;
    for &y in labels {
        check_binary(y)?;
        n_pos += (y == 1.0) as usize;
    }
    let n_neg = labels.len() - n_pos;
    let v = if n_pos > 0 && n_neg > 0 {
        (n_pos as f64 / n_neg as f64).ln()
    } else {
        let p = (n_pos as f64 / labels.len() as f64).clamp(PROB_EPS, 1.0 - PROB_EPS);
        (p / (1.0 - p)).ln()
    };
    Ok(LogOdds(v))
}

/// Negative log-loss gradient with respect to log-odds: observed − predicted.
pub fn pseudo_residuals(labels: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    check_lengths(labels.len(), probs.len())?;
    labels
        .iter()
        .zip(probs)
        .map(|(&y, &p)| {
            check_binary(y)?;
            Ok(y - p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_abs_diff_eq!(sigmoid(3f64.ln()), 0.75, epsilon = 1e-15);
        let tiny = sigmoid(-1000.0);
        assert!(tiny > 0.0 && tiny < 1e-300);
        let big = sigmoid(1000.0);
        assert!(big < 1.0 && big > 0.999);
        assert!(sigmoid(-1.0) < sigmoid(1.0));
    }

    #[test]
    fn log_loss_values() {
        assert!(log_loss(&[1.0], &[1.0 - PROB_EPS]).unwrap() < 1e-14);
        assert_abs_diff_eq!(
            log_loss(&[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        let v = log_loss(&[1.0, 1.0, 0.0], &[0.9, 0.8, 0.3]).unwrap();
        assert_abs_diff_eq!(v, 0.228, epsilon = 5e-4);
        assert!(log_loss(&[1.0], &[0.5, 0.5]).is_err());
        assert!(log_loss(&[], &[]).is_err());
        assert!(log_loss(&[2.0], &[0.5]).is_err());
        assert!(log_loss(&[1.0], &[0.0]).unwrap().is_finite());
    }

    #[test]
    fn prior_values() {
        assert_eq!(
            initial_log_odds(&[1.0, 1.0, 0.0, 0.0]).unwrap().value(),
            0.0
        );
        assert_abs_diff_eq!(
            initial_log_odds(&[1.0, 1.0, 1.0, 0.0]).unwrap().value(),
            3f64.ln(),
            epsilon = 1e-15
        );
        let one = initial_log_odds(&[1.0]).unwrap().value();
        assert!(one.is_finite() && one > 30.0);
        let zero = initial_log_odds(&[0.0, 0.0]).unwrap().value();
        assert!(zero.is_finite() && zero < -30.0);
        assert!(initial_log_odds(&[]).is_err());
    }

    #[test]
    fn residual_values() {
        let r = pseudo_residuals(&[1.0, 0.0, 1.0], &[0.7, 0.7, 1.0 - 1e-12]).unwrap();
        assert_abs_diff_eq!(r[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], -0.7, epsilon = 1e-15);
        assert!(r[2].abs() < 1e-11);
        assert!(pseudo_residuals(&[1.0], &[]).is_err());
    }
}
