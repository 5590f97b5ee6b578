//! The six Lepage-type quadratic statistics and their χ²₂ p-values.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;

use crate::cstat::{self, CStatResult};
use crate::rank::{self, AnsariScores, Group, TwoSample};
use crate::ustat::{self, UStatResult, UVariance};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Statistic {
    L0,
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl Statistic {
    pub const ALL: [Statistic; 6] = [
        Statistic::L0,
        Statistic::L1,
        Statistic::L2,
        Statistic::L3,
        Statistic::L4,
        Statistic::L5,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["L0", "L1", "L2", "L3", "L4", "L5"][self.index()]
    }

    /// Variance used for the `U` component.
    pub fn u_variance(self) -> UVariance {
        match self {
            Statistic::L0 | Statistic::L3 => UVariance::Classical,
            Statistic::L1 | Statistic::L4 => UVariance::FlignerPolicello,
            Statistic::L2 | Statistic::L5 => UVariance::FongHuang,
        }
    }

    /// Whether the `C` component uses the empirical variance estimate.
    pub fn robust_scale(self) -> bool {
        matches!(self, Statistic::L3 | Statistic::L4 | Statistic::L5)
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown statistic `{s}`, expected one of L0..L5")))
    }
}

/// Survival function of the χ² distribution with two degrees of freedom.
pub fn chisq2_sf(value: f64) -> Result<f64> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::InvalidInput(format!(
            "chi-square statistic must be nonnegative, got {value}"
        )));
    }
    Ok((-value / 2.0).exp())
}

/// Upper-`alpha` quantile of χ²₂.
pub fn chisq2_critical(alpha: f64) -> f64 {
    -2.0 * alpha.ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LepageSuite {
    pub statistics: [f64; 6],
    pub p_asymptotic: [f64; 6],
    /// Set when a variance in the statistic's denominator was zero.
    pub degenerate: [bool; 6],
    pub u: UStatResult,
    pub c: CStatResult,
}

impl LepageSuite {
    pub fn get(&self, stat: Statistic) -> f64 {
        self.statistics[stat.index()]
    }

    pub fn p_value(&self, stat: Statistic) -> f64 {
        self.p_asymptotic[stat.index()]
    }

    fn assemble(u: UStatResult, c: CStatResult) -> Self {
        let mut statistics = [0.0; 6];
        let mut degenerate = [false; 6];
        for stat in Statistic::ALL {
            let zu = u.standardized(stat.u_variance());
            let zc = if stat.robust_scale() { c.c_star_p } else { c.c_star };
            statistics[stat.index()] = zu.squared() + zc.squared();
            degenerate[stat.index()] = zu.degenerate || zc.degenerate;
        }
        let p_asymptotic = statistics.map(|l| (-l / 2.0).exp());
        Self {
            statistics,
            p_asymptotic,
            degenerate,
            u,
            c,
        }
    }
}

pub fn lepage_suite(sample: &TwoSample) -> LepageSuite {
    let pooled = rank::pool_and_order(sample);
    SuiteEvaluator::new(&pooled).evaluate(pooled.labels())
}

/// Evaluates the suite for arbitrary labellings of one fixed pooled sample.
///
/// The pooled values (hence tie runs and scores) never change; only which
/// positions belong to `Y` does. Observed and permuted statistics go through
/// this same path so that equal configurations give bit-identical values.
#[derive(Clone, Debug)]
pub struct SuiteEvaluator {
    ties: Vec<Range<usize>>,
    scores: AnsariScores,
    m: usize,
    n: usize,
    e0_c: f64,
    var0_c: f64,
}

impl SuiteEvaluator {
    pub fn new(pooled: &rank::Pooled) -> Self {
        let (m, n) = (pooled.m(), pooled.n());
        Self::from_layout(pooled.tie_groups().to_vec(), m, n)
    }

    /// Layout of `m + n` distinct values: the continuous-data null.
    pub fn untied(m: usize, n: usize) -> Self {
        Self::from_layout((0..m + n).map(|i| i..i + 1).collect(), m, n)
    }

    fn from_layout(ties: Vec<Range<usize>>, m: usize, n: usize) -> Self {
        assert!(m >= TwoSample::MIN_SIZE && n >= TwoSample::MIN_SIZE, "sample sizes below 2");
        let scores = rank::ansari_scores(m + n, &ties).expect("tie runs come from a sorted pool");
        Self {
            ties,
            scores,
            m,
            n,
            e0_c: cstat::e0_c(m, n).expect("sizes checked above"),
            var0_c: cstat::var0_c(m, n).expect("sizes checked above"),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_total(&self) -> usize {
        self.m + self.n
    }

    pub fn scores(&self) -> &AnsariScores {
        &self.scores
    }

    /// `labels` must hold exactly `n` entries equal to `Group::Y`.
    pub fn evaluate(&self, labels: &[Group]) -> LepageSuite {
        debug_assert_eq!(labels.len(), self.n_total());
        let u = UStatResult::from_labels(&self.ties, labels, self.m, self.n);
        let c = CStatResult::from_scores(self.scores.as_slice(), labels, self.m, self.n, self.e0_c, self.var0_c);
        LepageSuite::assemble(u, c)
    }
}

/// Standardized components, recomputed through the public per-module API.
pub fn components(sample: &TwoSample, stat: Statistic) -> (crate::Standardized, crate::Standardized) {
    let zu = ustat::standardized_u(sample, stat.u_variance());
    let zc = if stat.robust_scale() {
        cstat::c_star_p(sample)
    } else {
        cstat::c_star(sample)
    };
    (zu, zc)
}
