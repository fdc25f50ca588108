use rand::Rng;
use rand_distr::{Distribution as _, LogNormal, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, RankError, Result};

/// Utility distributions used to generate candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Uniform { a: f64, b: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Normal { mu: f64, sigma: f64 },
    /// Resamples a stored sample with replacement.
    Empirical { sample: Vec<f64> },
    /// `base · scale + shift`.
    ShiftedScaled {
        base: Box<Distribution>,
        scale: f64,
        shift: f64,
    },
}

impl Distribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Self::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn standard_uniform() -> Self {
        Self::Uniform { a: 0.0, b: 1.0 }
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        let d = Self::Lognormal { mu, sigma };
        d.validate()?;
        Ok(d)
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        let d = Self::Normal { mu, sigma };
        d.validate()?;
        Ok(d)
    }

    /// Stores the sample sorted ascending.
    pub fn empirical(mut sample: Vec<f64>) -> Result<Self> {
        sample.sort_by(f64::total_cmp);
        let d = Self::Empirical { sample };
        d.validate()?;
        Ok(d)
    }

    pub fn shifted_scaled(base: Distribution, scale: f64, shift: f64) -> Result<Self> {
        let d = Self::ShiftedScaled {
            base: Box::new(base),
            scale,
            shift,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be finite")))
            }
        };
        match self {
            Self::Uniform { a, b } => {
                finite(*a, "a")?;
                finite(*b, "b")?;
                if a < b {
                    Ok(())
                } else {
                    Err(invalid(format!("uniform requires a < b, got a = {a}, b = {b}")))
                }
            }
            Self::Lognormal { mu, sigma } | Self::Normal { mu, sigma } => {
                finite(*mu, "mu")?;
                if sigma.is_finite() && *sigma > 0.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("sigma must be positive, got {sigma}")))
                }
            }
            Self::Empirical { sample } => {
                if sample.is_empty() {
                    Err(invalid("empirical distribution needs a nonempty sample"))
                } else if sample.iter().any(|x| !x.is_finite()) {
                    Err(invalid("empirical sample contains non-finite values"))
                } else {
                    Ok(())
                }
            }
            Self::ShiftedScaled { base, scale, shift } => {
                finite(*scale, "scale")?;
                finite(*shift, "shift")?;
                base.validate()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Self::Normal { mu, .. } => *mu,
            Self::Empirical { sample } => sample.iter().sum::<f64>() / sample.len() as f64,
            Self::ShiftedScaled { base, scale, shift } => base.mean() * scale + shift,
        }
    }

    /// `count` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        self.sample_into(count, rng, &mut out)?;
        Ok(out)
    }

    /// Appends `count` draws to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, count: usize, rng: &mut R, out: &mut Vec<f64>) -> Result<()> {
        let bad = |e: &dyn std::fmt::Display| RankError::InvalidParameter(e.to_string());
        match self {
            Self::Uniform { a, b } => {
                let d = Uniform::new(*a, *b).map_err(|e| bad(&e))?;
                out.extend((0..count).map(|_| d.sample(rng)));
            }
            Self::Lognormal { mu, sigma } => {
                self.validate()?;
                let d = LogNormal::new(*mu, *sigma).map_err(|e| bad(&e))?;
                out.extend((0..count).map(|_| d.sample(rng)));
            }
            Self::Normal { mu, sigma } => {
                self.validate()?;
                let d = Normal::new(*mu, *sigma).map_err(|e| bad(&e))?;
                out.extend((0..count).map(|_| d.sample(rng)));
            }
            Self::Empirical { sample } => {
                self.validate()?;
                out.extend((0..count).map(|_| sample[rng.random_range(0..sample.len())]));
            }
            Self::ShiftedScaled { base, scale, shift } => {
                let start = out.len();
                base.sample_into(count, rng, out)?;
                for x in &mut out[start..] {
                    *x = *x * scale + shift;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::SeedSpec;

    #[test]
    fn uniform_support_and_mean() {
        let mut rng = SeedSpec::new(7).trial_rng(0);
        let xs = Distribution::standard_uniform().sample(1_000_000, &mut rng).unwrap();
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        // 3 standard errors of U[0,1] at 10^6 draws
        assert!((mean - 0.5).abs() < 3.0 / 12f64.sqrt() / 1000.0, "mean = {mean}");
    }

    #[test]
    fn empirical_constant() {
        let mut rng = SeedSpec::new(1).trial_rng(0);
        let xs = Distribution::empirical(vec![5.0]).unwrap().sample(10, &mut rng).unwrap();
        assert!(xs.iter().all(|&x| x == 5.0));
    }

    #[test]
    fn invalid_parameters() {
        assert!(Distribution::uniform(1.0, 1.0).is_err());
        assert!(Distribution::lognormal(0.0, 0.0).is_err());
        assert!(Distribution::normal(0.0, -1.0).is_err());
        assert!(Distribution::empirical(vec![]).is_err());
        let mut rng = SeedSpec::new(1).trial_rng(0);
        assert!(Distribution::Uniform { a: 2.0, b: 1.0 }.sample(1, &mut rng).is_err());
        assert!(Distribution::Empirical { sample: vec![] }.sample(1, &mut rng).is_err());
    }

    #[test]
    fn shifted_scaled_applies_affine_map() {
        let base = Distribution::empirical(vec![1.0]).unwrap();
        let d = Distribution::shifted_scaled(base, 2.0, 3.0).unwrap();
        let mut rng = SeedSpec::new(1).trial_rng(0);
        assert_eq!(d.sample(3, &mut rng).unwrap(), vec![5.0; 3]);
        assert_eq!(d.mean(), 5.0);
    }

    #[test]
    fn json_schema() {
        let d: Distribution = serde_json::from_str(r#"{"kind": "lognormal", "mu": 0.0, "sigma": 1.0}"#).unwrap();
        assert_eq!(d, Distribution::lognormal(0.0, 1.0).unwrap());
        let nested: Distribution = serde_json::from_str(
            r#"{"kind": "shifted_scaled", "base": {"kind": "uniform", "a": 0.0, "b": 1.0}, "scale": 2.0, "shift": -1.0}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&nested).unwrap();
        assert_eq!(serde_json::from_str::<Distribution>(&text).unwrap(), nested);
    }
}
