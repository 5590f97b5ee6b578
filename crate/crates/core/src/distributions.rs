//! Seeded random variates for the families used in size/power studies.
//!
//! Parameterizations: exponential by rate, gamma by shape and rate,
//! `chisq_ls(shift, scale)` is `scale·χ²₂ + shift`, lognormal by the mean and
//! standard deviation of the log, Weibull by shape and scale.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Gamma, LogNormal, Normal, Open01, Uniform, Weibull};
use serde::{Deserialize, Serialize};
use statrs::distribution::{self as sd, ContinuousCDF};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    ChisqLs { shift: f64, scale: f64 },
    Lognormal { meanlog: f64, sdlog: f64 },
    Weibull { shape: f64, scale: f64 },
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
    Logistic { location: f64, scale: f64 },
    Laplace { location: f64, scale: f64 },
}

pub const FAMILIES: [&str; 9] = [
    "exponential",
    "gamma",
    "chisq_ls",
    "lognormal",
    "weibull",
    "normal",
    "uniform",
    "logistic",
    "laplace",
];

impl DistributionSpec {
    /// Builds a spec from a family name and its positional parameters.
    ///
    /// An empty parameter list selects the family's default parameters.
    pub fn from_family(family: &str, params: &[f64]) -> Result<Self> {
        let family = family.trim().to_ascii_lowercase();
        let defaults: &[f64] = match family.as_str() {
            "exponential" | "exp" => &[1.0],
            "gamma" => &[2.0, 2.0],
            "chisq_ls" | "chisq" => &[0.0, 1.0],
            "lognormal" => &[0.0, 1.0],
            "weibull" => &[2.0, 1.0],
            "normal" | "logistic" | "laplace" => &[0.0, 1.0],
            "uniform" => &[0.0, 1.0],
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown family `{family}`, expected one of {}",
                    FAMILIES.join(", ")
                )))
            }
        };
        let p = if params.is_empty() { defaults } else { params };
        if p.len() != defaults.len() {
            return Err(Error::InvalidInput(format!(
                "family `{family}` takes {} parameter(s), got {}",
                defaults.len(),
                p.len()
            )));
        }
        let spec = match family.as_str() {
            "exponential" | "exp" => DistributionSpec::Exponential { rate: p[0] },
            "gamma" => DistributionSpec::Gamma { shape: p[0], rate: p[1] },
            "chisq_ls" | "chisq" => DistributionSpec::ChisqLs { shift: p[0], scale: p[1] },
            "lognormal" => DistributionSpec::Lognormal { meanlog: p[0], sdlog: p[1] },
            "weibull" => DistributionSpec::Weibull { shape: p[0], scale: p[1] },
            "normal" => DistributionSpec::Normal { mean: p[0], sd: p[1] },
            "uniform" => DistributionSpec::Uniform { low: p[0], high: p[1] },
            "logistic" => DistributionSpec::Logistic { location: p[0], scale: p[1] },
            _ => DistributionSpec::Laplace { location: p[0], scale: p[1] },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Gamma { .. } => "gamma",
            DistributionSpec::ChisqLs { .. } => "chisq_ls",
            DistributionSpec::Lognormal { .. } => "lognormal",
            DistributionSpec::Weibull { .. } => "weibull",
            DistributionSpec::Normal { .. } => "normal",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Logistic { .. } => "logistic",
            DistributionSpec::Laplace { .. } => "laplace",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            DistributionSpec::Exponential { rate } => vec![rate],
            DistributionSpec::Gamma { shape, rate } => vec![shape, rate],
            DistributionSpec::ChisqLs { shift, scale } => vec![shift, scale],
            DistributionSpec::Lognormal { meanlog, sdlog } => vec![meanlog, sdlog],
            DistributionSpec::Weibull { shape, scale } => vec![shape, scale],
            DistributionSpec::Normal { mean, sd } => vec![mean, sd],
            DistributionSpec::Uniform { low, high } => vec![low, high],
            DistributionSpec::Logistic { location, scale } | DistributionSpec::Laplace { location, scale } => {
                vec![location, scale]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(self.invalid("parameters must be finite"));
        }
        let ok = match *self {
            DistributionSpec::Exponential { rate } => rate > 0.0,
            DistributionSpec::Gamma { shape, rate } => shape > 0.0 && rate > 0.0,
            DistributionSpec::ChisqLs { scale, .. } => scale > 0.0,
            DistributionSpec::Lognormal { sdlog, .. } => sdlog > 0.0,
            DistributionSpec::Weibull { shape, scale } => shape > 0.0 && scale > 0.0,
            DistributionSpec::Normal { sd, .. } => sd > 0.0,
            DistributionSpec::Uniform { low, high } => low < high,
            DistributionSpec::Logistic { scale, .. } | DistributionSpec::Laplace { scale, .. } => scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(self.invalid("rate, shape and scale parameters must be positive"))
        }
    }

    fn invalid(&self, why: &str) -> Error {
        Error::InvalidInput(format!("{self}: {why}"))
    }

    /// Draws `count` variates from `rng`.
    pub fn sample_from<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        match *self {
            DistributionSpec::Exponential { rate } => draw(rng, Exp::new(rate).unwrap(), count),
            DistributionSpec::Gamma { shape, rate } => draw(rng, Gamma::new(shape, 1.0 / rate).unwrap(), count),
            DistributionSpec::ChisqLs { shift, scale } => draw(rng, ChiSquared::new(2.0).unwrap(), count)
                .into_iter()
                .map(|v| scale * v + shift)
                .collect(),
            DistributionSpec::Lognormal { meanlog, sdlog } => draw(rng, LogNormal::new(meanlog, sdlog).unwrap(), count),
            DistributionSpec::Weibull { shape, scale } => draw(rng, Weibull::new(scale, shape).unwrap(), count),
            DistributionSpec::Normal { mean, sd } => draw(rng, Normal::new(mean, sd).unwrap(), count),
            DistributionSpec::Uniform { low, high } => draw(rng, Uniform::new(low, high).unwrap(), count),
            DistributionSpec::Logistic { location, scale } => (0..count)
                .map(|_| {
                    let u: f64 = rng.sample(Open01);
                    location + scale * (u / (1.0 - u)).ln()
                })
                .collect(),
            DistributionSpec::Laplace { location, scale } => (0..count)
                .map(|_| {
                    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                    location - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
                })
                .collect(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionSpec::ChisqLs { shift, scale } => {
                let t = (x - shift) / scale;
                if t <= 0.0 {
                    0.0
                } else {
                    1.0 - (-t / 2.0).exp()
                }
            }
            DistributionSpec::Logistic { location, scale } => 1.0 / (1.0 + (-(x - location) / scale).exp()),
            _ => self.with_statrs(|d| d.cdf(x)),
        }
    }

    pub fn inverse_cdf(&self, prob: f64) -> f64 {
        match *self {
            DistributionSpec::ChisqLs { shift, scale } => shift - 2.0 * scale * (1.0 - prob).ln(),
            DistributionSpec::Logistic { location, scale } => location + scale * (prob / (1.0 - prob)).ln(),
            DistributionSpec::Exponential { rate } => -(1.0 - prob).ln() / rate,
            DistributionSpec::Weibull { shape, scale } => scale * (-(1.0 - prob).ln()).powf(1.0 / shape),
            _ => self.with_statrs(|d| d.inverse_cdf(prob)),
        }
    }

    fn with_statrs(&self, f: impl Fn(&dyn ContinuousCDF<f64, f64>) -> f64) -> f64 {
        match *self {
            DistributionSpec::Exponential { rate } => f(&sd::Exp::new(rate).unwrap()),
            DistributionSpec::Gamma { shape, rate } => f(&sd::Gamma::new(shape, rate).unwrap()),
            DistributionSpec::Lognormal { meanlog, sdlog } => f(&sd::LogNormal::new(meanlog, sdlog).unwrap()),
            DistributionSpec::Weibull { shape, scale } => f(&sd::Weibull::new(shape, scale).unwrap()),
            DistributionSpec::Normal { mean, sd } => f(&sd::Normal::new(mean, sd).unwrap()),
            DistributionSpec::Uniform { low, high } => f(&sd::Uniform::new(low, high).unwrap()),
            DistributionSpec::Laplace { location, scale } => f(&sd::Laplace::new(location, scale).unwrap()),
            DistributionSpec::ChisqLs { .. } | DistributionSpec::Logistic { .. } => {
                unreachable!("handled in closed form")
            }
        }
    }
}

fn draw<R: Rng + ?Sized, D: Distribution<f64>>(rng: &mut R, dist: D, count: usize) -> Vec<f64> {
    dist.sample_iter(rng).take(count).collect()
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.family(), params.join(", "))
    }
}

/// A reproducible random stream: one seed, many independent stream ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

pub fn sample(spec: &DistributionSpec, count: usize, stream: SeededStream) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    spec.validate()?;
    Ok(spec.sample_from(&mut stream.rng(), count))
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantileRow {
    pub prob: f64,
    pub empirical: f64,
    pub analytic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantileReport {
    pub spec: DistributionSpec,
    pub draws: usize,
    pub rows: Vec<QuantileRow>,
    /// Kolmogorov–Smirnov distance between the draws and the analytic CDF.
    pub ks_distance: f64,
}

pub const DEFAULT_PROBES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Compares empirical quantiles of `draws` variates with the analytic inverse CDF.
pub fn quantile_check(spec: &DistributionSpec, probes: &[f64], draws: usize, stream: SeededStream) -> Result<QuantileReport> {
    let mut values = sample(spec, draws, stream)?;
    values.sort_by(f64::total_cmp);
    let rows = probes
        .iter()
        .map(|&prob| QuantileRow {
            prob,
            empirical: crate::permutation::linear_quantile(&values, prob),
            analytic: spec.inverse_cdf(prob),
        })
        .collect();
    let len = values.len() as f64;
    let ks_distance = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = spec.cdf(v);
            (f - i as f64 / len).abs().max(((i + 1) as f64 / len - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(QuantileReport {
        spec: *spec,
        draws,
        rows,
        ks_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(spec: DistributionSpec, count: usize) -> f64 {
        let v = sample(&spec, count, SeededStream::new(2024, 0)).unwrap();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn moment_identities() {
        assert!((mean_of(DistributionSpec::Exponential { rate: 2.0 }, 1_000_000) - 0.5).abs() < 0.002);
        assert!((mean_of(DistributionSpec::ChisqLs { shift: 1.0, scale: 2.0 }, 1_000_000) - 5.0).abs() < 0.02);
        // Γ(1.5) = √π / 2.
        let gamma_1_5 = std::f64::consts::PI.sqrt() / 2.0;
        assert!((mean_of(DistributionSpec::Weibull { shape: 2.0, scale: 1.0 }, 1_000_000) - gamma_1_5).abs() < 0.003);
        assert!((mean_of(DistributionSpec::Gamma { shape: 2.0, rate: 2.0 }, 1_000_000) - 1.0).abs() < 0.005);
    }

    #[test]
    fn reproducible_and_independent_streams() {
        let spec = DistributionSpec::Lognormal { meanlog: 0.0, sdlog: 2.0 };
        let a = sample(&spec, 50, SeededStream::new(7, 3)).unwrap();
        let b = sample(&spec, 50, SeededStream::new(7, 3)).unwrap();
        let c = sample(&spec, 50, SeededStream::new(7, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn medians() {
        let s = SeededStream::new(11, 0);
        let r = quantile_check(&DistributionSpec::Exponential { rate: 1.0 }, &[0.5], 1_000_000, s).unwrap();
        assert!((r.rows[0].empirical - std::f64::consts::LN_2).abs() < 0.01);
        let r = quantile_check(&DistributionSpec::Lognormal { meanlog: 0.0, sdlog: 2.0 }, &[0.5], 1_000_000, s).unwrap();
        assert!((r.rows[0].empirical - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistributionSpec::from_family("exponential", &[0.0]).is_err());
        assert!(DistributionSpec::from_family("gamma", &[1.0]).is_err());
        assert!(DistributionSpec::from_family("cauchy", &[]).is_err());
        assert!(DistributionSpec::from_family("chisq_ls", &[-3.0, 2.0]).is_ok());
        assert!(DistributionSpec::from_family("chisq_ls", &[0.0, 0.0]).is_err());
        assert!(sample(&DistributionSpec::Normal { mean: 0.0, sd: 1.0 }, 0, SeededStream::new(1, 1)).is_err());
    }

    #[test]
    fn family_round_trip() {
        for family in FAMILIES {
            let spec = DistributionSpec::from_family(family, &[]).unwrap();
            assert_eq!(spec.family(), family);
            assert_eq!(DistributionSpec::from_family(family, &spec.params()).unwrap(), spec);
        }
    }
}
