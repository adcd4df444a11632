//! Characteristic scores and scales.
//!
//! Three characteristic scores are obtained by iterated mean truncation:
//! `mu1` is the mean of all scores, `mu2` the mean of scores strictly above
//! `mu1`, `mu3` the mean of scores strictly above `mu2`. They split a
//! population into five classes:
//!
//! | class | range                |
//! |-------|----------------------|
//! | UP    | `s = 0`              |
//! | LP    | `0 < s <= mu1`       |
//! | FP    | `mu1 < s <= mu2`     |
//! | HP    | `mu2 < s <= mu3`     |
//! | VHP   | `s > mu3`            |
//!
//! Population B is the subpopulation strictly above `mu1`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CssError {
    #[error("characteristic scores need at least one score")]
    Empty,
    #[error("score {0} is negative or not finite")]
    InvalidScore(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateLevel {
    None,
    /// No score exceeds `mu1` (constant data); `mu2 = mu3 = mu1`.
    Mu2Undefined,
    /// No score exceeds `mu2`; `mu3 = mu2`.
    Mu3Undefined,
    /// Exactly one score exceeds `mu2`, so `mu3` is that score and VHP is empty.
    Mu3Singleton,
}

impl DegenerateLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            DegenerateLevel::None => "none",
            DegenerateLevel::Mu2Undefined => "mu2_undefined",
            DegenerateLevel::Mu3Undefined => "mu3_undefined",
            DegenerateLevel::Mu3Singleton => "mu3_singleton",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicScores {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub degenerate: DegenerateLevel,
}

impl CharacteristicScores {
    pub fn classify(&self, score: f64) -> Category {
        if score == 0.0 {
            Category::Up
        } else if score <= self.mu1 {
            Category::Lp
        } else if score <= self.mu2 {
            Category::Fp
        } else if score <= self.mu3 {
            Category::Hp
        } else {
            Category::Vhp
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Category {
    Up,
    Lp,
    Fp,
    Hp,
    Vhp,
}

impl Category {
    pub const ALL: [Category; 5] = [Category::Up, Category::Lp, Category::Fp, Category::Hp, Category::Vhp];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Up => "UP",
            Category::Lp => "LP",
            Category::Fp => "FP",
            Category::Hp => "HP",
            Category::Vhp => "VHP",
        }
    }
}

fn check_scores(scores: &[f64]) -> Result<(), CssError> {
    if scores.is_empty() {
        return Err(CssError::Empty);
    }
    match scores.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        Some(&bad) => Err(CssError::InvalidScore(bad)),
        None => Ok(()),
    }
}

/// Mean of the values strictly above `threshold` in a descending-sorted
/// slice, with the count. Sums from the largest value down.
fn mean_above(desc: &[f64], threshold: f64) -> Option<(f64, usize)> {
    let k = desc.partition_point(|&v| v > threshold);
    if k == 0 {
        return None;
    }
    let sum: f64 = desc[..k].iter().sum();
    Some((sum / k as f64, k))
}

pub fn characteristic_scores(scores: &[f64]) -> Result<CharacteristicScores, CssError> {
    check_scores(scores)?;
    let mut desc = scores.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    let mu1 = desc.iter().sum::<f64>() / desc.len() as f64;
    let Some((mu2, _)) = mean_above(&desc, mu1) else {
        return Ok(CharacteristicScores {
            mu1,
            mu2: mu1,
            mu3: mu1,
            degenerate: DegenerateLevel::Mu2Undefined,
        });
    };
    let (mu3, degenerate) = match mean_above(&desc, mu2) {
        None => (mu2, DegenerateLevel::Mu3Undefined),
        Some((m, 1)) => (m, DegenerateLevel::Mu3Singleton),
        Some((m, _)) => (m, DegenerateLevel::None),
    };
    Ok(CharacteristicScores {
        mu1,
        mu2,
        mu3,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CssPartition {
    /// Counts indexed by [`Category::index`].
    pub counts: [usize; 5],
    pub population_size: usize,
}

impl CssPartition {
    pub fn count(&self, c: Category) -> usize {
        self.counts[c.index()]
    }

    pub fn share(&self, c: Category) -> f64 {
        self.count(c) as f64 / self.population_size as f64
    }

    pub fn shares(&self) -> [f64; 5] {
        Category::ALL.map(|c| self.share(c))
    }

    /// Size of the subpopulation above `mu1`.
    pub fn above_mu1(&self) -> usize {
        self.count(Category::Fp) + self.count(Category::Hp) + self.count(Category::Vhp)
    }

    /// `{UP+LP, FP, HP+VHP}` shares of the whole population.
    pub fn triple_a(&self) -> PartitionTriple {
        let n = self.population_size;
        PartitionTriple::from_counts(
            [
                self.count(Category::Up) + self.count(Category::Lp),
                self.count(Category::Fp),
                self.count(Category::Hp) + self.count(Category::Vhp),
            ],
            n,
        )
    }
}

pub fn partition(scores: &[f64], cs: &CharacteristicScores) -> CssPartition {
    let mut counts = [0usize; 5];
    for &s in scores {
        counts[cs.classify(s).index()] += 1;
    }
    CssPartition {
        counts,
        population_size: scores.len(),
    }
}

/// Three shares of a population that sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionTriple {
    pub counts: [usize; 3],
    pub shares: [f64; 3],
}

impl PartitionTriple {
    pub fn from_counts(counts: [usize; 3], total: usize) -> Self {
        let n = total as f64;
        PartitionTriple {
            counts,
            shares: counts.map(|c| c as f64 / n),
        }
    }

    /// Triple given directly as shares (e.g. published percentages).
    pub fn from_shares(shares: [f64; 3]) -> Self {
        PartitionTriple { counts: [0; 3], shares }
    }
}

/// The above-`mu1` subpopulation and its `{FP, HP, VHP}` triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubpopulationB {
    /// `mu2` is undefined: nothing lies above `mu1`.
    Empty,
    Present { scores: Vec<f64>, triple: PartitionTriple },
}

impl SubpopulationB {
    pub fn triple(&self) -> Option<&PartitionTriple> {
        match self {
            SubpopulationB::Empty => None,
            SubpopulationB::Present { triple, .. } => Some(triple),
        }
    }

    pub fn scores(&self) -> &[f64] {
        match self {
            SubpopulationB::Empty => &[],
            SubpopulationB::Present { scores, .. } => scores,
        }
    }

    pub fn len(&self) -> usize {
        self.scores().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn subpopulation_b(scores: &[f64], cs: &CharacteristicScores) -> SubpopulationB {
    if cs.degenerate == DegenerateLevel::Mu2Undefined {
        return SubpopulationB::Empty;
    }
    let b: Vec<f64> = scores.iter().copied().filter(|&s| s > cs.mu1).collect();
    if b.is_empty() {
        return SubpopulationB::Empty;
    }
    let mut counts = [0usize; 3];
    for &s in &b {
        let slot = match cs.classify(s) {
            Category::Fp => 0,
            Category::Hp => 1,
            Category::Vhp => 2,
            Category::Up | Category::Lp => unreachable!("scores above mu1 are FP or higher"),
        };
        counts[slot] += 1;
    }
    let triple = PartitionTriple::from_counts(counts, b.len());
    SubpopulationB::Present { scores: b, triple }
}
