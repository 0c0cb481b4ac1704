//! Access structures and public parameters.
//!
//! Participants are indexed globally `1..=n`, level by level, so level `ℓ`
//! holds indices `N_{ℓ-1}+1 ..= N_ℓ` where `N_ℓ` is the prefix sum of the
//! level sizes. Levels are numbered `1..=m`, most trusted first.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::field::PrimeField;
use crate::hashing::HashBackend;
use crate::poly::{gcd, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("invalid parameters:\n{0}")]
    Invalid(ValidationReport),
    #[error("participant index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("degree profile must be non-empty, positive and non-decreasing")]
    BadProfile,
    #[error("only {available} usable monic irreducibles of degree {degree} exist, {requested} requested")]
    InsufficientIrreducibles { degree: usize, requested: u128, available: u128 },
}

/// One violated requirement on an access structure or parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoLevels,
    LevelCountMismatch { sizes: usize, thresholds: usize },
    EmptyLevel { level: usize },
    ZeroThreshold,
    ThresholdsNotIncreasing { level: usize },
    ThresholdExceedsLevel { level: usize, threshold: usize, size: usize },
    ZeroSecretDegree,
    ModuliCount { expected: usize, found: usize },
    FieldMismatch { participant: usize },
    DegenerateModulus { participant: usize },
    /// Condition (i): `m_i` must be coprime to `x^{d0}`.
    SharesFactorWithX { participant: usize },
    /// Condition (ii): `d_0 <= d_1 <= ... <= d_n`.
    DegreeOrder { participant: usize, previous: usize, degree: usize },
    /// Condition (iii): `d_0 + Σ_{i=n-t+2}^{n} d_i <= Σ_{i=1}^{t} d_i`.
    DegreeBalance { level: usize, lhs: usize, rhs: usize },
    NotPairwiseCoprime { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match *self {
            NoLevels => write!(f, "structure: at least one level is required"),
            LevelCountMismatch { sizes, thresholds } => {
                write!(f, "structure: {sizes} level sizes but {thresholds} thresholds")
            }
            EmptyLevel { level } => write!(f, "structure: level {level} is empty"),
            ZeroThreshold => write!(f, "structure: thresholds must be at least 1"),
            ThresholdsNotIncreasing { level } => {
                write!(f, "structure: threshold {} does not exceed threshold {level}", level + 1)
            }
            ThresholdExceedsLevel { level, threshold, size } => {
                write!(f, "structure: threshold t_{level}={threshold} exceeds level size {size}")
            }
            ZeroSecretDegree => write!(f, "params: d0 must be at least 1"),
            ModuliCount { expected, found } => {
                write!(f, "params: {found} moduli for {expected} participants")
            }
            FieldMismatch { participant } => {
                write!(f, "params: modulus {participant} is over a different field")
            }
            DegenerateModulus { participant } => {
                write!(f, "params: modulus {participant} has degree < 1")
            }
            SharesFactorWithX { participant } => write!(
                f,
                "condition (i): modulus {participant} has zero constant term and shares a factor with x^d0"
            ),
            DegreeOrder { participant, previous, degree } => write!(
                f,
                "condition (ii): degree {degree} of modulus {participant} is below the preceding degree {previous}"
            ),
            DegreeBalance { level, lhs, rhs } => write!(
                f,
                "condition (iii): level {level} needs d0 + top (t-1) degrees = {lhs} <= first t degrees = {rhs}"
            ),
            NotPairwiseCoprime { first, second } => {
                write!(f, "params: moduli {first} and {second} are not coprime")
            }
        }
    }
}

/// Every violation found, in discovery order. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<(), ParamsError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(ParamsError::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Level sizes `n_1..n_m` and thresholds `t_1 < ... < t_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessStructure {
    level_sizes: Vec<usize>,
    thresholds: Vec<usize>,
    prefix: Vec<usize>,
}

impl AccessStructure {
    /// Requires `1 <= t_1 < ... < t_m` and `t_ℓ <= n_ℓ` for every level.
    pub fn new(level_sizes: Vec<usize>, thresholds: Vec<usize>) -> Result<Self, ParamsError> {
        let mut report = ValidationReport::default();
        let v = &mut report.violations;
        if level_sizes.is_empty() {
            v.push(Violation::NoLevels);
        }
        if level_sizes.len() != thresholds.len() {
            v.push(Violation::LevelCountMismatch {
                sizes: level_sizes.len(),
                thresholds: thresholds.len(),
            });
        }
        for (l, &size) in level_sizes.iter().enumerate() {
            if size == 0 {
                v.push(Violation::EmptyLevel { level: l + 1 });
            }
        }
        if thresholds.first() == Some(&0) {
            v.push(Violation::ZeroThreshold);
        }
        for (l, w) in thresholds.windows(2).enumerate() {
            if w[0] >= w[1] {
                v.push(Violation::ThresholdsNotIncreasing { level: l + 1 });
            }
        }
        for (l, (&t, &size)) in thresholds.iter().zip(&level_sizes).enumerate() {
            if t > size {
                v.push(Violation::ThresholdExceedsLevel { level: l + 1, threshold: t, size });
            }
        }
        report.into_result()?;
        let prefix = std::iter::once(0)
            .chain(level_sizes.iter().scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            }))
            .collect();
        Ok(Self { level_sizes, thresholds, prefix })
    }

    /// Number of levels `m`.
    pub fn levels(&self) -> usize {
        self.level_sizes.len()
    }

    /// Total number of participants `n`.
    pub fn participants(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.thresholds
    }

    /// `t_ℓ` for `1 <= ℓ <= m`.
    pub fn threshold(&self, level: usize) -> usize {
        self.thresholds[level - 1]
    }

    /// `N_ℓ`, the number of participants in levels `1..=ℓ`; `N_0 = 0`.
    pub fn prefix(&self, level: usize) -> usize {
        self.prefix[level]
    }

    /// Level of participant `i` (1-based).
    pub fn level_of(&self, participant: usize) -> Result<usize, ParamsError> {
        self.check_index(participant)?;
        Ok(self.prefix.partition_point(|&n| n < participant))
    }

    fn check_index(&self, i: usize) -> Result<(), ParamsError> {
        let n = self.participants();
        if (1..=n).contains(&i) {
            Ok(())
        } else {
            Err(ParamsError::IndexOutOfRange { index: i, n })
        }
    }

    fn normalize_subset(&self, subset: &[usize]) -> Result<BTreeSet<usize>, ParamsError> {
        subset.iter().map(|&i| self.check_index(i).map(|_| i)).collect()
    }

    /// Smallest `ℓ` with `|subset ∩ [1, N_ℓ]| >= t_ℓ`, if any.
    pub fn min_authorized_level(&self, subset: &[usize]) -> Result<Option<usize>, ParamsError> {
        let set = self.normalize_subset(subset)?;
        Ok((1..=self.levels()).find(|&l| {
            set.range(..=self.prefix(l)).count() >= self.threshold(l)
        }))
    }

    pub fn is_authorized(&self, subset: &[usize]) -> Result<bool, ParamsError> {
        self.min_authorized_level(subset).map(|l| l.is_some())
    }
}

/// Public data of the dealer: the field, the secret degree bound `d0`
/// (so `m_0 = x^{d0}`), one modulus per participant and the hash backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub field: PrimeField,
    pub d0: usize,
    pub moduli: Vec<Poly>,
    pub hash: HashBackend,
}

impl PublicParams {
    pub fn new(field: PrimeField, d0: usize, moduli: Vec<Poly>, hash: HashBackend) -> Self {
        Self { field, d0, moduli, hash }
    }

    /// `d_i = deg m_i` for participant `i` (1-based).
    pub fn degree(&self, participant: usize) -> usize {
        self.moduli[participant - 1].degree().max(0) as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        (1..=self.moduli.len()).map(|i| self.degree(i)).collect()
    }

    pub fn modulus(&self, participant: usize) -> &Poly {
        &self.moduli[participant - 1]
    }

    /// `Σ_{i=1}^{t} d_i`, the degree bound of the level polynomial for threshold `t`.
    pub fn leading_degree_sum(&self, t: usize) -> usize {
        (1..=t).map(|i| self.degree(i)).sum()
    }

    /// `d0 / max d_i`; both spaces are uniform so this is the information rate.
    pub fn information_rate(&self) -> Ratio<usize> {
        let max = self.degrees().into_iter().max().unwrap_or(0).max(1);
        Ratio::new(self.d0, max)
    }
}

/// Checks the structure/parameter pairing, listing every violated condition.
pub fn validate_params(structure: &AccessStructure, params: &PublicParams) -> ValidationReport {
    let mut v = Vec::new();
    let n = structure.participants();
    if params.d0 == 0 {
        v.push(Violation::ZeroSecretDegree);
    }
    if params.moduli.len() != n {
        v.push(Violation::ModuliCount { expected: n, found: params.moduli.len() });
        return ValidationReport { violations: v };
    }
    let mut degenerate = false;
    for (k, m) in params.moduli.iter().enumerate() {
        let i = k + 1;
        if m.field() != params.field {
            v.push(Violation::FieldMismatch { participant: i });
            degenerate = true;
        } else if m.degree() < 1 {
            v.push(Violation::DegenerateModulus { participant: i });
            degenerate = true;
        } else if m.coeff(0) == 0 {
            v.push(Violation::SharesFactorWithX { participant: i });
        }
    }
    let degrees = params.degrees();
    let mut previous = params.d0;
    for (k, &d) in degrees.iter().enumerate() {
        if d < previous {
            v.push(Violation::DegreeOrder { participant: k + 1, previous, degree: d });
        }
        previous = d;
    }
    for l in 1..=structure.levels() {
        let t = structure.threshold(l);
        let top: usize = degrees[n + 1 - t..].iter().sum();
        let lhs = params.d0 + top;
        let rhs: usize = degrees[..t].iter().sum();
        if lhs > rhs {
            v.push(Violation::DegreeBalance { level: l, lhs, rhs });
        }
    }
    if !degenerate {
        'pairs: for a in 0..n {
            for b in a + 1..n {
                let g = gcd(&params.moduli[a], &params.moduli[b]).expect("nonzero moduli");
                if !g.is_one() {
                    v.push(Violation::NotPairwiseCoprime { first: a + 1, second: b + 1 });
                    break 'pairs;
                }
            }
        }
    }
    ValidationReport { violations: v }
}
