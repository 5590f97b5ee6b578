//! Permutation null distributions by exact enumeration or seeded Monte Carlo.
//!
//! The pooled values stay fixed; only the assignment of `n` pooled positions
//! to `Y` varies. Work is split into fixed-size chunks (each Monte Carlo
//! chunk owns its own random stream), so the output does not depend on how
//! many worker threads run the chunks.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::SeededStream;
use crate::lepage::{LepageSuite, Statistic, SuiteEvaluator};
use crate::rank::{self, Group, TwoSample};
use crate::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 200_000;

/// Relative tolerance under which two statistic values are the same atom.
pub const ATOM_RTOL: f64 = 1e-9;

const EXACT_CHUNK: u64 = 4096;
const MC_CHUNK: usize = 1024;

/// Statistic whose permutation distribution is wanted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NullStatistic {
    Lepage(Statistic),
    /// Classical standardized Ansari–Bradley statistic.
    CStar,
    /// Ansari–Bradley statistic standardized by the empirical variance.
    CStarP,
}

impl NullStatistic {
    pub fn name(self) -> &'static str {
        match self {
            NullStatistic::Lepage(s) => s.name(),
            NullStatistic::CStar => "Cstar",
            NullStatistic::CStarP => "CstarP",
        }
    }

    pub fn extract(self, suite: &LepageSuite) -> f64 {
        match self {
            NullStatistic::Lepage(s) => suite.get(s),
            NullStatistic::CStar => suite.c.c_star.value,
            NullStatistic::CStarP => suite.c.c_star_p.value,
        }
    }
}

impl From<Statistic> for NullStatistic {
    fn from(s: Statistic) -> Self {
        NullStatistic::Lepage(s)
    }
}

impl fmt::Display for NullStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NullStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cstar" | "c*" => Ok(NullStatistic::CStar),
            "cstarp" | "c*p" | "cp" => Ok(NullStatistic::CStarP),
            _ => s.parse::<Statistic>().map(NullStatistic::Lepage).map_err(|_| {
                Error::InvalidInput(format!(
                    "unknown statistic `{s}`, expected L0..L5, Cstar or CstarP"
                ))
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Mode {
    /// Every one of the `binomial(N, n)` assignments, refused above `cap`.
    Exact { cap: u64 },
    MonteCarlo { replications: usize, seed: u64 },
}

impl Mode {
    pub fn exact() -> Self {
        Mode::Exact {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Mode::Exact { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PermutationNull {
    pub statistic: NullStatistic,
    pub m: usize,
    pub n: usize,
    pub mode: Mode,
    /// Statistic values sorted ascending.
    values: Vec<f64>,
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= ATOM_RTOL * a.abs().max(b.abs()))
}

impl PermutationNull {
    fn new(statistic: NullStatistic, m: usize, n: usize, mode: Mode, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            statistic,
            m,
            n,
            mode,
            values,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distinct values (merged within [`ATOM_RTOL`]) with their multiplicities.
    pub fn atoms(&self) -> Vec<(f64, usize)> {
        let mut atoms: Vec<(f64, usize)> = Vec::new();
        for &v in &self.values {
            match atoms.last_mut() {
                Some((first, count)) if approx_eq(*first, v) => *count += 1,
                _ => atoms.push((v, 1)),
            }
        }
        atoms
    }

    /// Smallest atom `t` with `#{values ≥ t} / count ≤ alpha`; `+∞` if none.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidInput("empty permutation null".into()));
        }
        let total = self.values.len() as f64;
        let mut tail = self.values.len();
        for (value, count) in self.atoms() {
            if tail as f64 / total <= alpha {
                return Ok(value);
            }
            tail -= count;
        }
        Ok(f64::INFINITY)
    }

    /// Empirical quantile with linear interpolation between order statistics.
    pub fn quantile(&self, prob: f64) -> f64 {
        linear_quantile(&self.values, prob)
    }

    /// Right-tailed p-value: exact share, or `(1 + hits) / (R + 1)` for Monte Carlo.
    pub fn p_value(&self, observed: f64) -> f64 {
        let start = self.values.partition_point(|&v| v < observed && !approx_eq(v, observed));
        let hits = self.values.len() - start;
        match self.mode {
            Mode::Exact { .. } => hits as f64 / self.values.len() as f64,
            Mode::MonteCarlo { .. } => (1 + hits) as f64 / (self.values.len() + 1) as f64,
        }
    }
}

/// Interpolated quantile of ascending-sorted data (the usual "type 7" rule).
pub fn linear_quantile(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn critical_value(null: &PermutationNull, alpha: f64) -> Result<f64> {
    null.critical_value(alpha)
}

pub fn perm_p_value(null: &PermutationNull, observed: f64) -> f64 {
    null.p_value(observed)
}

pub fn permutation_null(sample: &TwoSample, statistic: NullStatistic, mode: Mode) -> Result<PermutationNull> {
    Ok(permutation_nulls(sample, &[statistic], mode)?.remove(0))
}

/// Nulls of several statistics from one pass over the label assignments.
pub fn permutation_nulls(sample: &TwoSample, statistics: &[NullStatistic], mode: Mode) -> Result<Vec<PermutationNull>> {
    let pooled = rank::pool_and_order(sample);
    nulls_for(&SuiteEvaluator::new(&pooled), statistics, mode)
}

/// Nulls for continuous data of sizes `(m, n)`: the pooled ranks `1..=N`.
pub fn untied_nulls(m: usize, n: usize, statistics: &[NullStatistic], mode: Mode) -> Result<Vec<PermutationNull>> {
    if m < TwoSample::MIN_SIZE || n < TwoSample::MIN_SIZE {
        return Err(Error::InvalidInput(format!("sample sizes must be at least 2, got m={m}, n={n}")));
    }
    nulls_for(&SuiteEvaluator::untied(m, n), statistics, mode)
}

fn nulls_for(eval: &SuiteEvaluator, statistics: &[NullStatistic], mode: Mode) -> Result<Vec<PermutationNull>> {
    let rows: Vec<Vec<f64>> = match mode {
        Mode::Exact { cap } => enumerate(eval, statistics, cap)?,
        Mode::MonteCarlo { replications, seed } => {
            if replications == 0 {
                return Err(Error::InvalidInput("Monte Carlo mode needs at least one replication".into()));
            }
            monte_carlo(eval, statistics, replications, seed)
        }
    };
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); statistics.len()];
    for row in rows {
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(statistics
        .iter()
        .zip(columns)
        .map(|(&s, values)| PermutationNull::new(s, eval.m(), eval.n(), mode, values))
        .collect())
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut comb = Vec::with_capacity(k);
    let mut next = 0;
    for i in 0..k {
        loop {
            let with_next = binomial(n - next - 1, k - i - 1);
            if rank < with_next {
                comb.push(next);
                next += 1;
                break;
            }
            rank -= with_next;
            next += 1;
        }
    }
    comb
}

fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let Some(i) = (0..k).rev().find(|&i| comb[i] < n - k + i) else {
        return false;
    };
    comb[i] += 1;
    for j in i + 1..k {
        comb[j] = comb[j - 1] + 1;
    }
    true
}

fn labels_from(positions: &[usize], buf: &mut [Group]) {
    buf.fill(Group::X);
    for &p in positions {
        buf[p] = Group::Y;
    }
}

fn enumerate(eval: &SuiteEvaluator, statistics: &[NullStatistic], cap: u64) -> Result<Vec<Vec<f64>>> {
    let (big_n, n) = (eval.n_total(), eval.n());
    let total = binomial(big_n, n);
    if total > cap as u128 {
        return Err(Error::EnumerationCap { required: total, cap });
    }
    let total = total as u64;
    let chunks = total.div_ceil(EXACT_CHUNK);
    let rows = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let start = chunk * EXACT_CHUNK;
            let len = EXACT_CHUNK.min(total - start);
            let mut comb = unrank_combination(big_n, n, start as u128);
            let mut labels = vec![Group::X; big_n];
            let mut out = Vec::with_capacity(len as usize);
            for i in 0..len {
                if i > 0 {
                    next_combination(&mut comb, big_n);
                }
                labels_from(&comb, &mut labels);
                let suite = eval.evaluate(&labels);
                out.push(statistics.iter().map(|s| s.extract(&suite)).collect::<Vec<f64>>());
            }
            out
        })
        .collect();
    Ok(rows)
}

fn monte_carlo(eval: &SuiteEvaluator, statistics: &[NullStatistic], replications: usize, seed: u64) -> Vec<Vec<f64>> {
    let (big_n, n) = (eval.n_total(), eval.n());
    let chunks = replications.div_ceil(MC_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let len = MC_CHUNK.min(replications - chunk * MC_CHUNK);
            let mut rng = SeededStream::new(seed, chunk as u64).rng();
            let mut labels = vec![Group::X; big_n];
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let picked = rand::seq::index::sample(&mut rng, big_n, n);
                labels.fill(Group::X);
                for p in picked.iter() {
                    labels[p] = Group::Y;
                }
                let suite = eval.evaluate(&labels);
                out.push(statistics.iter().map(|s| s.extract(&suite)).collect::<Vec<f64>>());
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_of(values: Vec<f64>, mode: Mode) -> PermutationNull {
        PermutationNull::new(NullStatistic::Lepage(Statistic::L0), 2, 2, mode, values)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 5), 252);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn unrank_matches_iteration() {
        let (n, k) = (9, 4);
        let mut comb: Vec<usize> = (0..k).collect();
        let mut r = 0u128;
        loop {
            assert_eq!(unrank_combination(n, k, r), comb);
            r += 1;
            if !next_combination(&mut comb, n) {
                break;
            }
        }
        assert_eq!(r, binomial(n, k));
    }

    #[test]
    fn critical_value_rules() {
        let null = null_of((1..=20).map(f64::from).collect(), Mode::exact());
        assert_eq!(null.critical_value(0.05).unwrap(), 20.0);
        assert_eq!(null.critical_value(0.10).unwrap(), 19.0);
        assert!(null.critical_value(0.0).is_err());
        assert!(null.critical_value(1.0).is_err());

        let flat = null_of(vec![3.0; 10], Mode::exact());
        assert_eq!(flat.critical_value(0.05).unwrap(), f64::INFINITY);
        let single = null_of(vec![3.0], Mode::exact());
        assert_eq!(single.critical_value(0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn atoms_merge_rounding_noise() {
        let null = null_of(vec![1.0, 2.0, 2.0 + 1e-14, 5.0], Mode::exact());
        assert_eq!(null.atoms(), vec![(1.0, 1), (2.0, 2), (5.0, 1)]);
        assert_eq!(null.p_value(2.0 + 2e-14), 0.75);

        let null = null_of(vec![1.0, 50.0, f64::INFINITY, f64::INFINITY], Mode::exact());
        assert_eq!(null.atoms(), vec![(1.0, 1), (50.0, 1), (f64::INFINITY, 2)]);
        assert_eq!(null.p_value(50.0), 0.75);
        assert_eq!(null.p_value(f64::INFINITY), 0.5);
        assert_eq!(null.critical_value(0.5).unwrap(), f64::INFINITY);
    }

    #[test]
    fn p_values() {
        let exact = null_of(vec![1.0, 2.0, 3.0, 4.0], Mode::exact());
        assert_eq!(exact.p_value(0.5), 1.0);
        assert_eq!(exact.p_value(3.0), 0.5);
        assert_eq!(exact.p_value(9.0), 0.0);

        let mc = null_of(
            vec![0.0; 99_999],
            Mode::MonteCarlo {
                replications: 99_999,
                seed: 1,
            },
        );
        assert_eq!(mc.p_value(1.0), 1.0 / 100_000.0);
    }

    #[test]
    fn exact_size_and_table_value() {
        let nulls = untied_nulls(5, 5, &[Statistic::L0.into()], Mode::exact()).unwrap();
        assert_eq!(nulls[0].len(), 252);
        assert!((nulls[0].critical_value(0.05).unwrap() - 5.3345).abs() < 5e-5);
    }

    #[test]
    fn enumeration_cap() {
        let err = untied_nulls(10, 10, &[Statistic::L0.into()], Mode::Exact { cap: 1000 }).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { required: 184_756, cap: 1000 }));
    }

    #[test]
    fn monte_carlo_count_and_reproducibility() {
        let mode = Mode::MonteCarlo {
            replications: 2500,
            seed: 99,
        };
        let a = untied_nulls(6, 4, &[Statistic::L4.into()], mode).unwrap();
        let b = untied_nulls(6, 4, &[Statistic::L4.into()], mode).unwrap();
        assert_eq!(a[0].len(), 2500);
        assert_eq!(a[0].values(), b[0].values());
    }

    #[test]
    fn parse_statistic_ids() {
        assert_eq!("CstarP".parse::<NullStatistic>().unwrap(), NullStatistic::CStarP);
        assert_eq!("l2".parse::<NullStatistic>().unwrap(), NullStatistic::Lepage(Statistic::L2));
        assert!("foo".parse::<NullStatistic>().is_err());
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(linear_quantile(&v, 0.5), 3.0);
        assert_eq!(linear_quantile(&v, 0.95), 4.8);
        assert_eq!(linear_quantile(&v, 1.0), 5.0);
    }
}
