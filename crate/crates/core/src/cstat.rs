//! The Ansari–Bradley `C` statistic, its null moments and the empirical
//! variance estimator `Var̂(C) = σ̂² · n²(N−n) / (N(n−1))`, with `σ̂²` the
//! variance (divisor `n`) of the scores falling in `Y`.
//!
//! Null moments use the untied closed forms even when midscores are in play.

use serde::Serialize;

use crate::rank::{self, AnsariScores, Group, TwoSample};
use crate::{Error, Result, Standardized};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CStatResult {
    pub c: f64,
    pub e0: f64,
    pub var0: f64,
    pub var_hat: f64,
    pub sigma_hat_sq: f64,
    pub c_star: Standardized,
    pub c_star_p: Standardized,
}

impl CStatResult {
    pub(crate) fn from_scores(scores: &[f64], labels: &[Group], m: usize, n: usize, e0: f64, var0: f64) -> Self {
        let (c, sigma_hat_sq) = y_score_moments(scores, labels, n);
        let var_hat = inflate(sigma_hat_sq, m, n);
        Self {
            c,
            e0,
            var0,
            var_hat,
            sigma_hat_sq,
            c_star: Standardized::new(c - e0, var0),
            c_star_p: Standardized::new(c - e0, var_hat),
        }
    }
}

/// Sum and variance (divisor `n`) of the scores at `Y` positions.
fn y_score_moments(scores: &[f64], labels: &[Group], n: usize) -> (f64, f64) {
    let ys = || {
        scores
            .iter()
            .zip(labels)
            .filter(|(_, &g)| g == Group::Y)
            .map(|(&s, _)| s)
    };
    let c: f64 = ys().sum();
    let mean = c / n as f64;
    let ss: f64 = ys().map(|s| (s - mean) * (s - mean)).sum();
    (c, ss / n as f64)
}

fn inflate(sigma_hat_sq: f64, m: usize, n: usize) -> f64 {
    let (nf, big_n) = (n as f64, (m + n) as f64);
    sigma_hat_sq * nf * nf * m as f64 / (big_n * (nf - 1.0))
}

fn check_labels(scores: &AnsariScores, labels: &[Group]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n = labels.iter().filter(|&&g| g == Group::Y).count();
    Ok((labels.len() - n, n))
}

pub fn c_statistic(scores: &AnsariScores, labels: &[Group]) -> Result<f64> {
    check_labels(scores, labels)?;
    Ok(scores
        .as_slice()
        .iter()
        .zip(labels)
        .filter(|(_, &g)| g == Group::Y)
        .map(|(&s, _)| s)
        .sum())
}

/// `n(N+2)/4` for even `N`, `n(N+1)²/(4N)` for odd `N`.
pub fn e0_c(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "sample sizes must be positive, got m={m}, n={n}"
        )));
    }
    let big_n = (m + n) as f64;
    let nf = n as f64;
    Ok(if (m + n).is_multiple_of(2) {
        nf * (big_n + 2.0) / 4.0
    } else {
        nf * (big_n + 1.0) * (big_n + 1.0) / (4.0 * big_n)
    })
}

/// `mn(N²−4)/(48(N−1))` for even `N`, `mn(N+1)(N²+3)/(48N²)` for odd `N`.
pub fn var0_c(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 || m + n < 4 {
        return Err(Error::InvalidInput(format!(
            "the null variance of C needs m, n >= 1 and N >= 4, got m={m}, n={n}"
        )));
    }
    let big_n = (m + n) as f64;
    let mn = (m * n) as f64;
    Ok(if (m + n).is_multiple_of(2) {
        mn * (big_n * big_n - 4.0) / (48.0 * (big_n - 1.0))
    } else {
        mn * (big_n + 1.0) * (big_n * big_n + 3.0) / (48.0 * big_n * big_n)
    })
}

pub fn var_hat_c(scores: &AnsariScores, labels: &[Group]) -> Result<f64> {
    let (m, n) = check_labels(scores, labels)?;
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "the variance estimate needs at least 2 Y positions, got {n}"
        )));
    }
    let (_, sigma_hat_sq) = y_score_moments(scores.as_slice(), labels, n);
    Ok(inflate(sigma_hat_sq, m, n))
}

pub fn c_stat(sample: &TwoSample) -> CStatResult {
    let pooled = rank::pool_and_order(sample);
    let scores = rank::ansari_scores(sample.total(), pooled.tie_groups())
        .expect("a validated two-sample has at least 4 observations");
    let (m, n) = (sample.m(), sample.n());
    CStatResult::from_scores(
        scores.as_slice(),
        pooled.labels(),
        m,
        n,
        e0_c(m, n).expect("validated sizes"),
        var0_c(m, n).expect("validated sizes"),
    )
}

/// `(C − E0(C)) / sqrt(Var0(C))`.
pub fn c_star(sample: &TwoSample) -> Standardized {
    c_stat(sample).c_star
}

/// `(C − E0(C)) / sqrt(Var̂(C))`.
pub fn c_star_p(sample: &TwoSample) -> Standardized {
    c_stat(sample).c_star_p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::ansari_scores;
    use Group::{X, Y};

    fn sample(x: &[f64], y: &[f64]) -> TwoSample {
        TwoSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn c_examples() {
        assert_eq!(c_stat(&sample(&[1.0, 4.0], &[2.0, 3.0])).c, 4.0);
        assert_eq!(c_stat(&sample(&[2.0, 3.0], &[1.0, 4.0])).c, 2.0);

        let scores = ansari_scores(5, &[]).unwrap();
        assert_eq!(c_statistic(&scores, &[Y, Y, X, X, X]).unwrap(), 3.0);
        assert!(c_statistic(&scores, &[Y, Y, X]).is_err());
    }

    #[test]
    fn lambda_form_agrees() {
        // C = Σ_{i≤k} i λ_i + Σ_{i>k} (N+1−i) λ_i with k = floor((N+1)/2).
        let labels = [X, Y, Y, X, Y, X, X, Y, Y];
        let big_n = labels.len();
        let k = big_n.div_ceil(2);
        let lambda_form: f64 = labels
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == Y)
            .map(|(i, _)| {
                let i = i + 1;
                if i <= k {
                    i as f64
                } else {
                    (big_n + 1 - i) as f64
                }
            })
            .sum();
        let scores = ansari_scores(big_n, &[]).unwrap();
        assert_eq!(c_statistic(&scores, &labels).unwrap(), lambda_form);
    }

    #[test]
    fn null_mean() {
        assert_eq!(e0_c(5, 5).unwrap(), 15.0);
        assert!((e0_c(20, 15).unwrap() - 138.857_142_857_142_86).abs() < 1e-12);
        assert_eq!(e0_c(2, 2).unwrap(), 3.0);
        assert!(e0_c(0, 2).is_err());
    }

    #[test]
    fn null_variance() {
        assert!((var0_c(5, 5).unwrap() - 5.5556).abs() < 5e-5);
        assert!((var0_c(10, 10).unwrap() - 43.4211).abs() < 5e-5);
        assert!((var0_c(20, 15).unwrap() - 225.5510).abs() < 5e-5);
        assert!((var0_c(30, 30).unwrap() - 1142.7966).abs() < 5e-4);
        assert!((var0_c(50, 50).unwrap() - 5258.8384).abs() < 5e-4);
        assert_eq!(var0_c(2, 2).unwrap(), 1.0 / 3.0);
        assert!(var0_c(1, 2).is_err());
    }

    #[test]
    fn variance_estimate_examples() {
        let scores = ansari_scores(4, &[]).unwrap();
        // Y scores [2, 1]: σ̂² = 0.25, Var̂ = 0.25·4·2/(4·1).
        assert_eq!(var_hat_c(&scores, &[X, Y, X, Y]).unwrap(), 0.5);
        assert_eq!(var_hat_c(&scores, &[X, Y, Y, X]).unwrap(), 0.0);
        assert!(var_hat_c(&scores, &[X, X, X, Y]).is_err());
    }

    #[test]
    fn standardized_forms() {
        let s = sample(&[1.0, 4.0], &[2.0, 3.0]);
        let r = c_stat(&s);
        assert_eq!(r.e0, 3.0);
        assert!((r.c_star.value - 3f64.sqrt()).abs() < 1e-12);
        assert!(!r.c_star.degenerate);
        assert!(r.c_star_p.degenerate);
        assert_eq!(r.c_star_p.value, f64::INFINITY);

        // C equal to its null mean.
        let s = sample(&[1.0, 3.0], &[2.0, 4.0]);
        let r = c_stat(&s);
        assert_eq!(r.c, r.e0);
        assert_eq!(r.c_star.value, 0.0);
        assert_eq!(r.c_star_p.value, 0.0);
    }
}
