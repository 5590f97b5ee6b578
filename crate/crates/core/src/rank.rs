//! Pooling, ordering, Ansari–Bradley scores and placements.
//!
//! Every statistic in the crate is a function of the pooled ordering of the
//! two samples and of which pooled positions belong to `Y`. Ties are handled
//! with midscores (Ansari scores) and half weights (placements).

use std::cmp::Ordering;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Two independent samples `x` (size `m`) and `y` (size `n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TwoSample {
    /// Smallest admissible size of either sample.
    pub const MIN_SIZE: usize = 2;

    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_group("x", &x)?;
        check_group("y", &y)?;
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn total(&self) -> usize {
        self.x.len() + self.y.len()
    }

    /// The same data with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// Applies `f` to every observation of both samples.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.x.iter().copied().map(&f).collect(),
            self.y.iter().copied().map(&f).collect(),
        )
    }
}

fn check_group(group: &'static str, values: &[f64]) -> Result<()> {
    if values.len() < TwoSample::MIN_SIZE {
        return Err(Error::SampleTooSmall {
            group,
            len: values.len(),
            min: TwoSample::MIN_SIZE,
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            group,
            index,
            value,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    X,
    Y,
}

/// The pooled sample sorted ascending, with group labels and tie runs.
#[derive(Clone, Debug)]
pub struct Pooled {
    values: Vec<f64>,
    labels: Vec<Group>,
    origin: Vec<usize>,
    ties: Vec<Range<usize>>,
    m: usize,
    n: usize,
}

impl Pooled {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    /// Index of each pooled position in the concatenation `x ++ y`.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    /// Maximal runs of equal values, in order; singletons included.
    pub fn tie_groups(&self) -> &[Range<usize>] {
        &self.ties
    }

    pub fn has_ties(&self) -> bool {
        self.ties.len() < self.values.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn pool_and_order(sample: &TwoSample) -> Pooled {
    let tagged: Vec<(f64, Group)> = sample
        .x
        .iter()
        .map(|&v| (v, Group::X))
        .chain(sample.y.iter().map(|&v| (v, Group::Y)))
        .collect();

    let mut origin: Vec<usize> = (0..tagged.len()).collect();
    origin.sort_by(|&a, &b| {
        tagged[a]
            .0
            .partial_cmp(&tagged[b].0)
            .unwrap_or(Ordering::Equal)
    });

    let values: Vec<f64> = origin.iter().map(|&i| tagged[i].0).collect();
    let labels = origin.iter().map(|&i| tagged[i].1).collect();
    let ties = tie_runs(&values);

    Pooled {
        values,
        labels,
        origin,
        ties,
        m: sample.m(),
        n: sample.n(),
    }
}

fn tie_runs(sorted: &[f64]) -> Vec<Range<usize>> {
    let mut runs = Vec::with_capacity(sorted.len());
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] != sorted[start] {
            runs.push(start..i);
            start = i;
        }
    }
    runs
}

/// Ansari–Bradley scores indexed by pooled position.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsariScores(Vec<f64>);

impl AnsariScores {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the untied scores: `N(N+2)/4` for even `N`, `(N+1)²/4` for odd.
    pub fn untied_total(n_total: usize) -> f64 {
        let n = n_total as f64;
        if n_total.is_multiple_of(2) {
            n * (n + 2.0) / 4.0
        } else {
            (n + 1.0) * (n + 1.0) / 4.0
        }
    }
}

/// Score of pooled position `pos` (0-based) before tie averaging.
fn base_score(pos: usize, n_total: usize) -> f64 {
    (pos + 1).min(n_total - pos) as f64
}

/// Symmetric scores `1, 2, …, 2, 1`; each tie run gets the mean of its base scores.
pub fn ansari_scores(n_total: usize, tie_groups: &[Range<usize>]) -> Result<AnsariScores> {
    if n_total < 2 {
        return Err(Error::InvalidInput(format!(
            "Ansari scores need at least 2 positions, got {n_total}"
        )));
    }
    let mut scores: Vec<f64> = (0..n_total).map(|i| base_score(i, n_total)).collect();

    let mut expected = 0;
    for run in tie_groups {
        if run.start != expected || run.end <= run.start || run.end > n_total {
            return Err(Error::InvalidInput(format!(
                "tie groups must be consecutive runs covering 0..{n_total}, got {run:?}"
            )));
        }
        expected = run.end;
        if run.len() > 1 {
            let mid = scores[run.clone()].iter().sum::<f64>() / run.len() as f64;
            scores[run.clone()].fill(mid);
        }
    }
    if expected != n_total && !tie_groups.is_empty() {
        return Err(Error::InvalidInput(format!(
            "tie groups cover 0..{expected}, expected 0..{n_total}"
        )));
    }
    Ok(AnsariScores(scores))
}

/// Placement vectors in input order.
///
/// `p[i]` is the proportion of `y` above `x[i]`; `q[j]` the proportion of
/// `x` below `y[j]`. Equal values count one half.
#[derive(Clone, Debug, PartialEq)]
pub struct Placements {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

pub fn placements(sample: &TwoSample) -> Placements {
    let pooled = pool_and_order(sample);
    let (p_pooled, q_pooled) = placements_by_position(pooled.tie_groups(), pooled.labels(), sample.m(), sample.n());

    let m = sample.m();
    let mut p = vec![0.0; m];
    let mut q = vec![0.0; sample.n()];
    let (mut ip, mut iq) = (0, 0);
    for (pos, &orig) in pooled.origin().iter().enumerate() {
        match pooled.labels()[pos] {
            Group::X => {
                p[orig] = p_pooled[ip];
                ip += 1;
            }
            Group::Y => {
                q[orig - m] = q_pooled[iq];
                iq += 1;
            }
        }
    }
    Placements { p, q }
}

/// Placements in pooled order: `p` for the `X` positions, `q` for the `Y` positions.
pub(crate) fn placements_by_position(
    ties: &[Range<usize>],
    labels: &[Group],
    m: usize,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let counts: Vec<(usize, usize)> = ties
        .iter()
        .map(|run| {
            let ys = labels[run.clone()].iter().filter(|&&g| g == Group::Y).count();
            (run.len() - ys, ys)
        })
        .collect();

    let mut p = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(n);
    let mut x_below = 0usize;
    let mut y_above: usize = counts.iter().map(|c| c.1).sum();
    for (run, &(xs, ys)) in ties.iter().zip(&counts) {
        y_above -= ys;
        let px = (y_above as f64 + 0.5 * ys as f64) / n as f64;
        let qy = (x_below as f64 + 0.5 * xs as f64) / m as f64;
        for &g in &labels[run.clone()] {
            match g {
                Group::X => p.push(px),
                Group::Y => q.push(qy),
            }
        }
        x_below += xs;
    }
    (p, q)
}
