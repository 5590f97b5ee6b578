//! Size and power studies, Monte Carlo checks of `Var̂(C)` and null quantile
//! checks.
//!
//! Replication `r` draws `X` then `Y` from the stream `(seed, r)`, so results
//! do not depend on how many worker threads run the study.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cstat;
use crate::distributions::{DistributionSpec, SeededStream};
use crate::lepage::{self, chisq2_critical, Statistic};
use crate::permutation::{self, binomial, linear_quantile, Mode, NullStatistic};
use crate::{Error, Result, TwoSample};

pub const DEFAULT_REPLICATIONS: usize = 10_000;
pub const MIN_REPLICATIONS: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_FRESH_PERMS: usize = 100_000;

/// Offset mixed into the seed for cutoff permutations so they never share a
/// stream with the data draws.
const CUTOFF_STREAM_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Permutation critical values of L0..L5 at the 5% level for continuous data.
pub const PERMUTATION_TABLE: [((usize, usize), [f64; 6]); 10] = [
    ((5, 5), [5.3345, 8.8948, 8.8948, 7.2012, 10.3906, 10.3906]),
    ((6, 5), [5.5269, 7.7793, 7.9803, 7.7727, 12.4460, 12.4467]),
    ((6, 6), [5.7692, 6.8571, 6.8571, 6.8173, 11.2084, 11.2084]),
    ((7, 5), [5.5720, 7.9068, 7.9068, 8.5803, 11.5886, 11.5886]),
    ((7, 7), [5.6541, 6.8855, 6.8855, 7.0367, 9.0802, 9.0802]),
    ((8, 5), [5.5037, 7.5440, 7.4924, 8.6301, 12.2734, 12.2084]),
    ((8, 8), [5.6775, 6.6280, 6.6280, 6.8773, 8.3711, 8.3711]),
    ((9, 5), [5.4444, 7.2574, 7.2574, 8.3956, 12.0756, 12.0756]),
    ((10, 5), [5.4468, 7.3250, 7.3355, 9.0133, 11.6773, 11.6655]),
    ((10, 10), [5.7436, 6.5719, 6.5719, 6.5545, 7.5905, 7.5905]),
];

pub fn permutation_table(m: usize, n: usize, alpha: f64) -> Result<[f64; 6]> {
    if (alpha - 0.05).abs() < 1e-12 {
        if let Some((_, row)) = PERMUTATION_TABLE.iter().find(|(key, _)| *key == (m, n)) {
            return Ok(*row);
        }
    }
    Err(Error::MissingTableEntry { m, n, alpha })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSource {
    PermutationTable,
    Asymptotic,
    FreshPermutation { perms: usize },
    /// Table when `min(m, n) <= 10`, asymptotic when `min(m, n) >= 30`,
    /// fresh permutation in between.
    Auto,
    Fixed(f64),
}

impl fmt::Display for CriticalSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalSource::PermutationTable => f.write_str("permutation_table"),
            CriticalSource::Asymptotic => f.write_str("asymptotic"),
            CriticalSource::FreshPermutation { perms } => write!(f, "fresh_permutation({perms})"),
            CriticalSource::Auto => f.write_str("auto"),
            CriticalSource::Fixed(c) => write!(f, "fixed({c})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub f_spec: DistributionSpec,
    pub g_spec: DistributionSpec,
    pub m: usize,
    pub n: usize,
    pub replications: usize,
    pub alpha: f64,
    pub critical: CriticalSource,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(f_spec: DistributionSpec, g_spec: DistributionSpec, m: usize, n: usize) -> Self {
        Self {
            f_spec,
            g_spec,
            m,
            n,
            replications: DEFAULT_REPLICATIONS,
            alpha: DEFAULT_ALPHA,
            critical: CriticalSource::Auto,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let config = |key: &str, message: String| Error::Config { key: key.into(), message };
        self.f_spec.validate()?;
        self.g_spec.validate()?;
        if self.m < TwoSample::MIN_SIZE {
            return Err(config("m", format!("must be at least 2, got {}", self.m)));
        }
        if self.n < TwoSample::MIN_SIZE {
            return Err(config("n", format!("must be at least 2, got {}", self.n)));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(config(
                "replications",
                format!("must be at least {MIN_REPLICATIONS}, got {}", self.replications),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        match self.critical {
            CriticalSource::FreshPermutation { perms: 0 } => {
                Err(config("critical", "fresh permutation needs at least one permutation".into()))
            }
            CriticalSource::Fixed(c) if c.is_nan() => Err(config("critical", "fixed cutoff is NaN".into())),
            _ => Ok(()),
        }
    }

    /// Cutoffs for L0..L5 and the source they actually came from.
    pub fn cutoffs(&self) -> Result<([f64; 6], CriticalSource)> {
        let (m, n, alpha) = (self.m, self.n, self.alpha);
        let source = match self.critical {
            CriticalSource::Auto => {
                let small = m.min(n);
                if small >= 30 {
                    CriticalSource::Asymptotic
                } else if small <= 10 && permutation_table(m, n, alpha).is_ok() {
                    CriticalSource::PermutationTable
                } else {
                    CriticalSource::FreshPermutation {
                        perms: DEFAULT_FRESH_PERMS,
                    }
                }
            }
            other => other,
        };
        let cutoffs = match source {
            CriticalSource::PermutationTable => permutation_table(m, n, alpha)?,
            CriticalSource::Asymptotic => [chisq2_critical(alpha); 6],
            CriticalSource::Fixed(c) => [c; 6],
            CriticalSource::FreshPermutation { perms } => fresh_cutoffs(m, n, alpha, perms, self.seed)?,
            CriticalSource::Auto => unreachable!("resolved above"),
        };
        Ok((cutoffs, source))
    }
}

fn fresh_cutoffs(m: usize, n: usize, alpha: f64, perms: usize, seed: u64) -> Result<[f64; 6]> {
    let mode = if binomial(m + n, n) <= perms as u128 {
        Mode::Exact { cap: perms as u64 }
    } else {
        Mode::MonteCarlo {
            replications: perms,
            seed: seed ^ CUTOFF_STREAM_SALT,
        }
    };
    let stats: Vec<NullStatistic> = Statistic::ALL.iter().map(|&s| s.into()).collect();
    let nulls = permutation::untied_nulls(m, n, &stats, mode)?;
    let mut cutoffs = [0.0; 6];
    for (slot, null) in cutoffs.iter_mut().zip(&nulls) {
        *slot = null.critical_value(alpha)?;
    }
    Ok(cutoffs)
}

#[derive(Clone, Debug, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub cutoff_source: CriticalSource,
    pub cutoffs: [f64; 6],
    pub rejections: [u64; 6],
    pub rates: [f64; 6],
    pub std_errors: [f64; 6],
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SimResult {
    pub fn rate(&self, stat: Statistic) -> f64 {
        self.rates[stat.index()]
    }

    pub fn std_error(&self, stat: Statistic) -> f64 {
        self.std_errors[stat.index()]
    }
}

pub fn run_study(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let start = Instant::now();
    let (cutoffs, cutoff_source) = config.cutoffs()?;
    let rejections = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = SeededStream::new(config.seed, r).rng();
            let x = config.f_spec.sample_from(&mut rng, config.m);
            let y = config.g_spec.sample_from(&mut rng, config.n);
            let sample = TwoSample::new(x, y).expect("validated distributions give finite draws");
            let suite = lepage::lepage_suite(&sample);
            let mut hits = [0u64; 6];
            for (hit, (&l, &cut)) in hits.iter_mut().zip(suite.statistics.iter().zip(&cutoffs)) {
                *hit = u64::from(l >= cut);
            }
            hits
        })
        .reduce(|| [0u64; 6], |a, b| std::array::from_fn(|i| a[i] + b[i]));
    let reps = config.replications as f64;
    let rates = rejections.map(|k| k as f64 / reps);
    let std_errors = rates.map(|r| (r * (1.0 - r) / reps).sqrt());
    Ok(SimResult {
        config: config.clone(),
        cutoff_source,
        cutoffs,
        rejections,
        rates,
        std_errors,
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VarCValidation {
    pub m: usize,
    pub n: usize,
    pub spec: DistributionSpec,
    pub replications: usize,
    pub mean_var_hat: f64,
    pub var0: f64,
    pub relative_error: f64,
    /// Monte Carlo standard error of `mean_var_hat`.
    pub std_error: f64,
}

/// Monte Carlo mean of `Var̂(C)` under `F = G = spec` against `Var0(C)`.
pub fn validate_var_c(m: usize, n: usize, spec: &DistributionSpec, replications: usize, seed: u64) -> Result<VarCValidation> {
    if m < TwoSample::MIN_SIZE || n < TwoSample::MIN_SIZE {
        return Err(Error::InvalidInput(format!("sample sizes must be at least 2, got m={m}, n={n}")));
    }
    if replications < 2 {
        return Err(Error::InvalidInput("at least two replications are needed".into()));
    }
    spec.validate()?;
    let draws: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = SeededStream::new(seed, r).rng();
            let x = spec.sample_from(&mut rng, m);
            let y = spec.sample_from(&mut rng, n);
            cstat::c_stat(&TwoSample::new(x, y).expect("finite draws")).var_hat
        })
        .collect();
    let reps = replications as f64;
    let mean = draws.iter().sum::<f64>() / reps;
    let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1.0);
    let var0 = cstat::var0_c(m, n)?;
    Ok(VarCValidation {
        m,
        n,
        spec: *spec,
        replications,
        mean_var_hat: mean,
        var0,
        relative_error: (mean - var0) / var0,
        std_error: (var / reps).sqrt(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantileCheckRow {
    pub prob: f64,
    pub empirical: f64,
    /// Distribution-free 95% interval from order statistics.
    pub lower: f64,
    pub upper: f64,
    pub reference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NullQuantileCheck {
    pub statistic: NullStatistic,
    pub m: usize,
    pub n: usize,
    pub spec: DistributionSpec,
    pub replications: usize,
    pub rows: Vec<QuantileCheckRow>,
}

pub const CHECK_PROBS: [f64; 3] = [0.90, 0.95, 0.99];

/// Empirical upper quantiles of a statistic under `F = G = spec`, with the
/// standard normal (for `C*`, `C*_P`) or χ²₂ (for `L0..L5`) reference.
pub fn null_quantile_check(
    statistic: NullStatistic,
    m: usize,
    n: usize,
    spec: &DistributionSpec,
    replications: usize,
    seed: u64,
) -> Result<NullQuantileCheck> {
    if m < TwoSample::MIN_SIZE || n < TwoSample::MIN_SIZE {
        return Err(Error::InvalidInput(format!("sample sizes must be at least 2, got m={m}, n={n}")));
    }
    if replications < MIN_REPLICATIONS {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_REPLICATIONS} replications are needed, got {replications}"
        )));
    }
    spec.validate()?;
    let mut values: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = SeededStream::new(seed, r).rng();
            let x = spec.sample_from(&mut rng, m);
            let y = spec.sample_from(&mut rng, n);
            statistic.extract(&lepage::lepage_suite(&TwoSample::new(x, y).expect("finite draws")))
        })
        .collect();
    values.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let reps = replications as f64;
    let rows = CHECK_PROBS
        .iter()
        .map(|&prob| {
            let half = 1.96 * (reps * prob * (1.0 - prob)).sqrt();
            let lo = ((reps * prob - half).floor().max(1.0) as usize).min(replications) - 1;
            let hi = ((reps * prob + half).ceil().max(1.0) as usize).min(replications) - 1;
            let reference = match statistic {
                NullStatistic::Lepage(_) => chisq2_critical(1.0 - prob),
                NullStatistic::CStar | NullStatistic::CStarP => normal.inverse_cdf(prob),
            };
            QuantileCheckRow {
                prob,
                empirical: linear_quantile(&values, prob),
                lower: values[lo],
                upper: values[hi],
                reference,
            }
        })
        .collect();
    Ok(NullQuantileCheck {
        statistic,
        m,
        n,
        spec: *spec,
        replications,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_half() -> DistributionSpec {
        DistributionSpec::Exponential { rate: 0.5 }
    }

    #[test]
    fn table_lookup() {
        assert_eq!(permutation_table(10, 10, 0.05).unwrap()[0], 5.7436);
        assert!(matches!(
            permutation_table(12, 12, 0.05),
            Err(Error::MissingTableEntry { .. })
        ));
        assert!(permutation_table(5, 5, 0.01).is_err());
        let msg = permutation_table(5, 10, 0.05).unwrap_err().to_string();
        assert!(msg.contains("fresh permutation"));
    }

    #[test]
    fn unreachable_cutoff_never_rejects() {
        let mut cfg = SimConfig::new(exp_half(), exp_half(), 6, 6);
        cfg.replications = 200;
        cfg.critical = CriticalSource::Fixed(f64::INFINITY);
        let res = run_study(&cfg).unwrap();
        assert_eq!(res.rates, [0.0; 6]);
        assert_eq!(res.std_errors, [0.0; 6]);
    }

    #[test]
    fn auto_policy() {
        let cfg = |m, n| SimConfig::new(exp_half(), exp_half(), m, n);
        assert_eq!(cfg(10, 10).cutoffs().unwrap().1, CriticalSource::PermutationTable);
        assert_eq!(cfg(40, 30).cutoffs().unwrap().1, CriticalSource::Asymptotic);
        assert_eq!(cfg(40, 30).cutoffs().unwrap().0, [chisq2_critical(0.05); 6]);
        assert!(matches!(
            cfg(5, 4).cutoffs().unwrap().1,
            CriticalSource::FreshPermutation { .. }
        ));
    }

    #[test]
    fn fresh_exact_matches_table_at_five_five() {
        let mut cfg = SimConfig::new(exp_half(), exp_half(), 5, 5);
        cfg.critical = CriticalSource::FreshPermutation { perms: 1000 };
        let (cut, _) = cfg.cutoffs().unwrap();
        assert!((cut[0] - 5.3345).abs() < 5e-5);
        // 8.8948 carries 4 of 252 assignments and pushes the tail past 5%.
        assert!((cut[1] - 9.9834).abs() < 5e-5);
        assert_eq!(cut[1], cut[2]);
    }

    #[test]
    fn config_validation_names_key() {
        let mut cfg = SimConfig::new(exp_half(), exp_half(), 10, 10);
        cfg.replications = 10;
        match cfg.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "replications"),
            other => panic!("unexpected {other:?}"),
        }
        cfg.replications = 100;
        cfg.alpha = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "alpha"));
    }

    #[test]
    fn study_is_reproducible() {
        let mut cfg = SimConfig::new(exp_half(), DistributionSpec::Exponential { rate: 1.5 }, 10, 10);
        cfg.replications = 300;
        cfg.seed = 99;
        let a = run_study(&cfg).unwrap();
        let b = run_study(&cfg).unwrap();
        assert_eq!(a.rejections, b.rejections);
        for i in 0..6 {
            let r = a.rates[i];
            assert!((a.std_errors[i] - (r * (1.0 - r) / 300.0).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn var_c_validation_close() {
        let spec = DistributionSpec::Logistic { location: 0.0, scale: 1.0 };
        let v = validate_var_c(10, 10, &spec, 4000, 5).unwrap();
        assert!((v.var0 - 43.4211).abs() < 5e-5);
        assert!(v.relative_error.abs() < 0.03, "{v:?}");
    }
}
