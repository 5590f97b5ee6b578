//! The Mann–Whitney `U` statistic on the probability scale and its variance
//! estimators.
//!
//! With placements `p` (share of `Y` above each `X`) and `q` (share of `X`
//! below each `Y`), `U = mean(p) = mean(q)` and
//!
//! ```text
//! Var0(U)   = (1/m + 1/n + 1/(mn)) / 12
//! VarFP(U)  = (1-1/m)(1/m) s²(p) + (1-1/n)(1/n) s²(q) + U(1-U)/(mn)
//! VarFH(U)  = (1-1/n)(1/m) s²(p) + (1-1/m)(1/n) s²(q) + U(1-U)/(mn)
//! ```
//!
//! where `s²` is the sample variance (divisor `m-1`, `n-1`). For `m = n` the
//! two estimators coincide term by term.

use serde::Serialize;

use crate::rank::{self, Group, TwoSample};
use crate::{Error, Result, Standardized};

/// Which variance standardizes `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum UVariance {
    Classical,
    FlignerPolicello,
    FongHuang,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UStatResult {
    pub u: f64,
    /// Null mean, always one half.
    pub e0: f64,
    pub var0: f64,
    pub var_fp: f64,
    pub var_fh: f64,
}

impl UStatResult {
    pub fn variance(&self, which: UVariance) -> f64 {
        match which {
            UVariance::Classical => self.var0,
            UVariance::FlignerPolicello => self.var_fp,
            UVariance::FongHuang => self.var_fh,
        }
    }

    pub fn standardized(&self, which: UVariance) -> Standardized {
        Standardized::new(self.u - self.e0, self.variance(which))
    }

    pub(crate) fn from_placements(p: &[f64], q: &[f64]) -> Self {
        let (m, n) = (p.len(), q.len());
        let (mf, nf) = (m as f64, n as f64);
        let u = u_from_placements(p, n);
        let vx = sample_variance(p);
        let vy = sample_variance(q);
        let bernoulli = u * (1.0 - u) / (mf * nf);
        Self {
            u,
            e0: 0.5,
            var0: null_variance(mf, nf),
            var_fp: (1.0 - 1.0 / mf) / mf * vx + (1.0 - 1.0 / nf) / nf * vy + bernoulli,
            var_fh: (1.0 - 1.0 / nf) / mf * vx + (1.0 - 1.0 / mf) / nf * vy + bernoulli,
        }
    }

    /// Computes all moments from a pooled layout and a labelling.
    pub(crate) fn from_labels(ties: &[std::ops::Range<usize>], labels: &[Group], m: usize, n: usize) -> Self {
        let (p, q) = rank::placements_by_position(ties, labels, m, n);
        Self::from_placements(&p, &q)
    }
}

// Placements are multiples of 1/(2n); summing the half-counts keeps U exact.
fn u_from_placements(p: &[f64], n: usize) -> f64 {
    let half_counts: f64 = p.iter().map(|&v| (v * (2 * n) as f64).round()).sum();
    half_counts / (2 * n * p.len()) as f64
}

fn sample_variance(v: &[f64]) -> f64 {
    let len = v.len() as f64;
    let mean = v.iter().sum::<f64>() / len;
    v.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (len - 1.0)
}

fn null_variance(m: f64, n: f64) -> f64 {
    (1.0 / m + 1.0 / n + 1.0 / (m * n)) / 12.0
}

pub fn u_stat(sample: &TwoSample) -> UStatResult {
    let pl = rank::placements(sample);
    UStatResult::from_placements(&pl.p, &pl.q)
}

/// `(1/(mn)) Σ Σ [I(x < y) + ½ I(x = y)]`.
pub fn u_statistic(sample: &TwoSample) -> f64 {
    u_stat(sample).u
}

pub fn var0_u(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "sample sizes must be positive, got m={m}, n={n}"
        )));
    }
    Ok(null_variance(m as f64, n as f64))
}

pub fn var_fp(sample: &TwoSample) -> f64 {
    u_stat(sample).var_fp
}

pub fn var_fh(sample: &TwoSample) -> f64 {
    u_stat(sample).var_fh
}

/// `(U - 1/2) / sqrt(variance)`, flagged when the chosen variance is zero.
pub fn standardized_u(sample: &TwoSample, which: UVariance) -> Standardized {
    u_stat(sample).standardized(which)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: &[f64], y: &[f64]) -> TwoSample {
        TwoSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    /// Pair counting and textbook variances, independent of the placement code.
    fn oracle(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
        let (m, n) = (x.len() as f64, y.len() as f64);
        let ind = |a: f64, b: f64| {
            if a < b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            }
        };
        let p: Vec<f64> = x.iter().map(|&xi| y.iter().map(|&yj| ind(xi, yj)).sum::<f64>() / n).collect();
        let q: Vec<f64> = y.iter().map(|&yj| x.iter().map(|&xi| ind(xi, yj)).sum::<f64>() / m).collect();
        let u: f64 = x.iter().flat_map(|&xi| y.iter().map(move |&yj| ind(xi, yj))).sum::<f64>() / (m * n);
        let var = |v: &[f64]| {
            let mu = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - mu).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
        };
        let (vx, vy) = (var(&p), var(&q));
        let fp = (m - 1.0) * n * n / (m * n).powi(2) * vx + (n - 1.0) * m * m / (m * n).powi(2) * vy + u * (1.0 - u) / (m * n);
        let fh = (n - 1.0) * n * m / (m * n).powi(2) * vx + (m - 1.0) * m * n / (m * n).powi(2) * vy + u * (1.0 - u) / (m * n);
        (u, fp, fh)
    }

    #[test]
    fn u_examples() {
        assert_eq!(u_statistic(&sample(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0])), 1.0);
        assert_eq!(u_statistic(&sample(&[1.0, 3.0], &[2.0, 4.0])), 0.75);
        assert_eq!(u_statistic(&sample(&[1.0, 4.0], &[2.0, 3.0])), 0.5);
    }

    #[test]
    fn var0_examples() {
        assert!((var0_u(10, 10).unwrap() - 0.0175).abs() < 1e-15);
        assert!((var0_u(40, 30).unwrap() - (1.0 / 40.0 + 1.0 / 30.0 + 1.0 / 1200.0) / 12.0).abs() < 1e-15);
        assert!((var0_u(40, 30).unwrap() - 0.004930555555555556).abs() < 1e-15);
        assert_eq!(var0_u(1, 1).unwrap(), 0.25);
        assert!(var0_u(0, 3).is_err());
    }

    #[test]
    fn robust_variances_small_cases() {
        let s = sample(&[1.0, 3.0], &[2.0, 4.0]);
        // p = [1, .5], q = [.5, 1], s² = 1/8 each, U(1-U)/4 = 3/64.
        assert!((var_fp(&s) - 0.109375).abs() < 1e-15);
        assert!((var_fh(&s) - 0.109375).abs() < 1e-15);

        // Complete separation: zero placement spread and U(1-U) = 0.
        let s = sample(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(var_fp(&s), 0.0);
        assert_eq!(var_fh(&s), 0.0);

        let s = sample(&[1.0, 2.0, 3.0, 4.0], &[2.5, 3.5]);
        let (_, fp, fh) = oracle(s.x(), s.y());
        assert!((var_fp(&s) - fp).abs() < 1e-15);
        assert!((var_fh(&s) - fh).abs() < 1e-15);
        assert!((fh - 0.06966145833333333).abs() < 1e-15);
        assert!((fp - 0.080078125).abs() < 1e-15);
    }

    #[test]
    fn matches_oracle_with_ties() {
        let x = [0.7, -1.6, -0.2, -1.2, -1.0, 3.4, 3.7, 0.8, 0.0, 2.0];
        let y = [1.9, 0.8, 1.1, 0.1, -0.1, 4.4, 5.5, 1.6, 4.6, 3.4];
        let s = sample(&x, &y);
        let r = u_stat(&s);
        let (u, fp, fh) = oracle(&x, &y);
        assert_eq!(r.u, u);
        assert!((r.var_fp - fp).abs() < 1e-15);
        assert!((r.var_fh - fh).abs() < 1e-15);
    }

    #[test]
    fn equal_sizes_identity() {
        let s = sample(&[0.3, 2.2, 1.7, 5.0], &[1.1, 0.2, 9.0, 3.3]);
        assert_eq!(var_fp(&s), var_fh(&s));
    }

    #[test]
    fn standardized_examples() {
        let s = sample(&[1.0, 4.0], &[2.0, 3.0]);
        assert_eq!(standardized_u(&s, UVariance::FongHuang).value, 0.0);

        let s = sample(&[1.0, 3.0], &[2.0, 4.0]);
        let z = standardized_u(&s, UVariance::FlignerPolicello);
        assert!((z.value - 0.25 / 0.109375f64.sqrt()).abs() < 1e-14);
        assert!((z.value - 0.7559289460184544).abs() < 1e-12);

        let s = sample(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        let z = standardized_u(&s, UVariance::Classical);
        assert!((z.value - 1.9639610121239315).abs() < 1e-12);
        let z = standardized_u(&s, UVariance::FongHuang);
        assert!(z.degenerate);
        assert_eq!(z.value, f64::INFINITY);
    }
}
