use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationStrength {
    Negligible,
    Weak,
    Moderate,
    Strong,
    VeryStrong,
}

impl CorrelationStrength {
    /// Category of `|r|`: below 0.10 negligible, 0.10-0.39 weak, 0.40-0.69
    /// moderate, 0.70-0.89 strong, 0.90 and above very strong.
    pub fn of(r: f64) -> Self {
        let a = r.abs();
        if a < 0.10 {
            CorrelationStrength::Negligible
        } else if a < 0.40 {
            CorrelationStrength::Weak
        } else if a < 0.70 {
            CorrelationStrength::Moderate
        } else if a < 0.90 {
            CorrelationStrength::Strong
        } else {
            CorrelationStrength::VeryStrong
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CorrelationStrength::Negligible => "negligible",
            CorrelationStrength::Weak => "weak",
            CorrelationStrength::Moderate => "moderate",
            CorrelationStrength::Strong => "strong",
            CorrelationStrength::VeryStrong => "very strong",
        }
    }
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 2 {
        return Err(StatsError::Empty);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let x = [1.0, 2.0, 4.0, 7.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[1.0; 4]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn categories() {
        assert_eq!(CorrelationStrength::of(0.05), CorrelationStrength::Negligible);
        assert_eq!(CorrelationStrength::of(-0.39), CorrelationStrength::Weak);
        assert_eq!(CorrelationStrength::of(0.40), CorrelationStrength::Moderate);
        assert_eq!(CorrelationStrength::of(0.69), CorrelationStrength::Moderate);
        assert_eq!(CorrelationStrength::of(0.70), CorrelationStrength::Strong);
        assert_eq!(CorrelationStrength::of(0.95), CorrelationStrength::VeryStrong);
    }
}
