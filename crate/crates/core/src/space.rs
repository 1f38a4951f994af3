//! Search spaces over two-step PU pipelines.
//!
//! A [`SearchSpace`] declares the discrete candidate list for every pipeline
//! hyperparameter. The base variant has seven genes; the extended variant adds
//! the three spy genes used by Phase 1A.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::config::GeneValue;

/// A decimal in `[0, 655.35]` stored exactly as a count of hundredths.
///
/// Thresholds, spy rates, and spy tolerances are all multiples of 0.01, so
/// membership tests never compare floats.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction(u16);

impl Fraction {
    pub const ZERO: Fraction = Fraction(0);

    pub const fn from_hundredths(h: u16) -> Self {
        Fraction(h)
    }

    pub const fn hundredths(self) -> u16 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Converts a float that is within 1e-6 of a multiple of 0.01.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() || x < 0.0 {
            return None;
        }
        let scaled = x * 100.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 || rounded > u16::MAX as f64 {
            return None;
        }
        Some(Fraction(rounded as u16))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (int, frac) = (self.0 / 100, self.0 % 100);
        if frac == 0 {
            write!(f, "{int}")
        } else if frac % 10 == 0 {
            write!(f, "{int}.{}", frac / 10)
        } else {
            write!(f, "{int}.{frac:02}")
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("`{0}` is not a non-negative decimal with at most two significant decimal places")]
pub struct FractionParseError(pub String);

impl FromStr for Fraction {
    type Err = FractionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FractionParseError(s.to_string());
        let t = s.trim();
        let (int_part, frac_part) = match t.split_once('.') {
            Some((i, f)) => (i, f),
            None => (t, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let int: u32 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| err())? };
        let digits = frac_part.trim_end_matches('0');
        if digits.len() > 2 {
            return Err(err());
        }
        let frac: u32 = match digits.len() {
            0 => 0,
            1 => digits.parse::<u32>().map_err(|_| err())? * 10,
            _ => digits.parse().map_err(|_| err())?,
        };
        let total = int.checked_mul(100).and_then(|v| v.checked_add(frac)).ok_or_else(err)?;
        u16::try_from(total).map(Fraction).map_err(|_| err())
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(deserializer)?;
        Fraction::from_f64(x)
            .ok_or_else(|| serde::de::Error::custom(format!("{x} is not a multiple of 0.01")))
    }
}

/// Name of a classification algorithm, resolved against the classifier registry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassifierKey(String);

impl ClassifierKey {
    pub fn new(name: impl Into<String>) -> Self {
        ClassifierKey(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassifierKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassifierKey {
    fn from(s: &str) -> Self {
        ClassifierKey(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceVariant {
    Base,
    Extended,
}

impl SpaceVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceVariant::Base => "base",
            SpaceVariant::Extended => "extended",
        }
    }
}

impl fmt::Display for SpaceVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceVariant {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "base" | "1" => Ok(SpaceVariant::Base),
            "extended" | "2" => Ok(SpaceVariant::Extended),
            other => Err(SpaceError::UnknownVariant(other.to_string())),
        }
    }
}

/// One hyperparameter of a candidate pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gene {
    IterationCount1A,
    Threshold1A,
    Classifier1A,
    Threshold1B,
    Classifier1B,
    Flag1B,
    Classifier2,
    SpyFlag,
    SpyRate,
    SpyTolerance,
}

impl Gene {
    pub const BASE: [Gene; 7] = [
        Gene::IterationCount1A,
        Gene::Threshold1A,
        Gene::Classifier1A,
        Gene::Threshold1B,
        Gene::Classifier1B,
        Gene::Flag1B,
        Gene::Classifier2,
    ];

    pub const EXTENDED: [Gene; 10] = [
        Gene::IterationCount1A,
        Gene::Threshold1A,
        Gene::Classifier1A,
        Gene::Threshold1B,
        Gene::Classifier1B,
        Gene::Flag1B,
        Gene::Classifier2,
        Gene::SpyFlag,
        Gene::SpyRate,
        Gene::SpyTolerance,
    ];

    /// Field name used in config records and result files.
    pub fn name(self) -> &'static str {
        match self {
            Gene::IterationCount1A => "iteration_count_1a",
            Gene::Threshold1A => "threshold_1a",
            Gene::Classifier1A => "classifier_1a",
            Gene::Threshold1B => "threshold_1b",
            Gene::Classifier1B => "classifier_1b",
            Gene::Flag1B => "flag_1b",
            Gene::Classifier2 => "classifier_2",
            Gene::SpyFlag => "spy_flag",
            Gene::SpyRate => "spy_rate",
            Gene::SpyTolerance => "spy_tolerance",
        }
    }

    pub fn from_name(name: &str) -> Option<Gene> {
        Gene::EXTENDED.iter().copied().find(|g| g.name() == name)
    }

    pub fn is_spy(self) -> bool {
        matches!(self, Gene::SpyFlag | Gene::SpyRate | Gene::SpyTolerance)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("invalid search space: candidate list for `{0}` is empty")]
    EmptyList(&'static str),
    #[error("invalid search space: candidate list for `{0}` contains duplicates")]
    DuplicateCandidate(&'static str),
    #[error("invalid search space: base variant must not allow spy_flag = true")]
    SpyInBase,
    #[error("search space cardinality overflows u64")]
    Overflow,
    #[error("unknown search-space variant `{0}`")]
    UnknownVariant(String),
}

fn hundredths(values: &[u16]) -> Vec<Fraction> {
    values.iter().map(|&h| Fraction::from_hundredths(h)).collect()
}

/// 0.05, 0.10, ..., 0.50
pub fn default_thresholds() -> Vec<Fraction> {
    hundredths(&[5, 10, 15, 20, 25, 30, 35, 40, 45, 50])
}

/// 0.05, 0.10, ..., 0.35
pub fn default_spy_rates() -> Vec<Fraction> {
    hundredths(&[5, 10, 15, 20, 25, 30, 35])
}

/// 0, 0.01, ..., 0.10
pub fn default_spy_tolerances() -> Vec<Fraction> {
    hundredths(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
}

/// Candidate-value lists for every gene.
///
/// The classifier list is shared by Phases 1A, 1B and 2 and its order fixes
/// the one-hot layout of encoded configs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub variant: SpaceVariant,
    pub iteration_counts: Vec<u32>,
    pub thresholds_1a: Vec<Fraction>,
    pub thresholds_1b: Vec<Fraction>,
    pub classifiers: Vec<ClassifierKey>,
    pub flags_1b: Vec<bool>,
    pub spy_flags: Vec<bool>,
    pub spy_rates: Vec<Fraction>,
    pub spy_tolerances: Vec<Fraction>,
}

impl SearchSpace {
    pub fn base(classifiers: Vec<ClassifierKey>) -> Self {
        SearchSpace {
            variant: SpaceVariant::Base,
            iteration_counts: (1..=10).collect(),
            thresholds_1a: default_thresholds(),
            thresholds_1b: default_thresholds(),
            classifiers,
            flags_1b: vec![true, false],
            spy_flags: vec![false],
            spy_rates: default_spy_rates(),
            spy_tolerances: default_spy_tolerances(),
        }
    }

    pub fn extended(classifiers: Vec<ClassifierKey>) -> Self {
        SearchSpace {
            variant: SpaceVariant::Extended,
            spy_flags: vec![true, false],
            ..SearchSpace::base(classifiers)
        }
    }

    pub fn new(variant: SpaceVariant, classifiers: Vec<ClassifierKey>) -> Self {
        match variant {
            SpaceVariant::Base => SearchSpace::base(classifiers),
            SpaceVariant::Extended => SearchSpace::extended(classifiers),
        }
    }

    /// Genes that participate in search for this variant.
    pub fn genes(&self) -> &'static [Gene] {
        match self.variant {
            SpaceVariant::Base => &Gene::BASE,
            SpaceVariant::Extended => &Gene::EXTENDED,
        }
    }

    pub fn cardinality(&self, gene: Gene) -> usize {
        match gene {
            Gene::IterationCount1A => self.iteration_counts.len(),
            Gene::Threshold1A => self.thresholds_1a.len(),
            Gene::Classifier1A | Gene::Classifier1B | Gene::Classifier2 => self.classifiers.len(),
            Gene::Threshold1B => self.thresholds_1b.len(),
            Gene::Flag1B => self.flags_1b.len(),
            Gene::SpyFlag => self.spy_flags.len(),
            Gene::SpyRate => self.spy_rates.len(),
            Gene::SpyTolerance => self.spy_tolerances.len(),
        }
    }

    /// The `index`-th candidate of `gene`. Panics when out of range.
    pub fn value_at(&self, gene: Gene, index: usize) -> GeneValue {
        match gene {
            Gene::IterationCount1A => GeneValue::Count(self.iteration_counts[index]),
            Gene::Threshold1A => GeneValue::Fraction(self.thresholds_1a[index]),
            Gene::Threshold1B => GeneValue::Fraction(self.thresholds_1b[index]),
            Gene::Classifier1A | Gene::Classifier1B | Gene::Classifier2 => {
                GeneValue::Classifier(self.classifiers[index].clone())
            }
            Gene::Flag1B => GeneValue::Flag(self.flags_1b[index]),
            Gene::SpyFlag => GeneValue::Flag(self.spy_flags[index]),
            Gene::SpyRate => GeneValue::Fraction(self.spy_rates[index]),
            Gene::SpyTolerance => GeneValue::Fraction(self.spy_tolerances[index]),
        }
    }

    /// Position of `value` in the candidate list of `gene`.
    pub fn index_of(&self, gene: Gene, value: &GeneValue) -> Option<usize> {
        match (gene, value) {
            (Gene::IterationCount1A, GeneValue::Count(c)) => {
                self.iteration_counts.iter().position(|x| x == c)
            }
            (Gene::Threshold1A, GeneValue::Fraction(f)) => self.thresholds_1a.iter().position(|x| x == f),
            (Gene::Threshold1B, GeneValue::Fraction(f)) => self.thresholds_1b.iter().position(|x| x == f),
            (Gene::Classifier1A | Gene::Classifier1B | Gene::Classifier2, GeneValue::Classifier(k)) => {
                self.classifier_index(k)
            }
            (Gene::Flag1B, GeneValue::Flag(b)) => self.flags_1b.iter().position(|x| x == b),
            (Gene::SpyFlag, GeneValue::Flag(b)) => self.spy_flags.iter().position(|x| x == b),
            (Gene::SpyRate, GeneValue::Fraction(f)) => self.spy_rates.iter().position(|x| x == f),
            (Gene::SpyTolerance, GeneValue::Fraction(f)) => self.spy_tolerances.iter().position(|x| x == f),
            _ => None,
        }
    }

    pub fn classifier_index(&self, key: &ClassifierKey) -> Option<usize> {
        self.classifiers.iter().position(|k| k == key)
    }

    /// Checks that every candidate list is non-empty and duplicate-free.
    pub fn check(&self) -> Result<(), SpaceError> {
        for &gene in &Gene::EXTENDED {
            if self.cardinality(gene) == 0 {
                return Err(SpaceError::EmptyList(gene.name()));
            }
            let n = self.cardinality(gene);
            for i in 0..n {
                for j in (i + 1)..n {
                    if self.value_at(gene, i) == self.value_at(gene, j) {
                        return Err(SpaceError::DuplicateCandidate(gene.name()));
                    }
                }
            }
        }
        if self.variant == SpaceVariant::Base && self.spy_flags.contains(&true) {
            return Err(SpaceError::SpyInBase);
        }
        Ok(())
    }
}

/// Number of distinct candidate configurations in `space`.
///
/// The product of the list lengths of the active genes; the extended
/// variant therefore multiplies the base product by
/// `|spy_flags| * |spy_rates| * |spy_tolerances|`.
pub fn search_space_size(space: &SearchSpace) -> Result<u64, SpaceError> {
    space.check()?;
    space.genes().iter().try_fold(1u64, |acc, &g| {
        acc.checked_mul(space.cardinality(g) as u64).ok_or(SpaceError::Overflow)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(n: usize) -> Vec<ClassifierKey> {
        (0..n).map(|i| ClassifierKey::new(format!("c{i}"))).collect()
    }

    #[test]
    fn full_registry_cardinalities() {
        assert_eq!(search_space_size(&SearchSpace::base(keys(18))).unwrap(), 11_664_000);
        assert_eq!(search_space_size(&SearchSpace::extended(keys(18))).unwrap(), 1_796_256_000);
    }

    #[test]
    fn single_classifier_base_matches_enumeration() {
        let space = SearchSpace::base(keys(1));
        let mut count = 0u64;
        for _ in &space.iteration_counts {
            for _ in &space.thresholds_1a {
                for _ in &space.classifiers {
                    for _ in &space.thresholds_1b {
                        for _ in &space.classifiers {
                            for _ in &space.flags_1b {
                                for _ in &space.classifiers {
                                    count += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(count, 2_000);
        assert_eq!(search_space_size(&space).unwrap(), count);
    }

    #[test]
    fn empty_list_is_rejected() {
        let mut space = SearchSpace::base(keys(3));
        space.thresholds_1b.clear();
        assert_eq!(search_space_size(&space), Err(SpaceError::EmptyList("threshold_1b")));
        assert_eq!(search_space_size(&SearchSpace::base(vec![])), Err(SpaceError::EmptyList("classifier_1a")));
    }

    #[test]
    fn default_lists_match_declared_values() {
        let t: Vec<String> = default_thresholds().iter().map(|f| f.to_string()).collect();
        assert_eq!(t, ["0.05", "0.1", "0.15", "0.2", "0.25", "0.3", "0.35", "0.4", "0.45", "0.5"]);
        let r: Vec<String> = default_spy_rates().iter().map(|f| f.to_string()).collect();
        assert_eq!(r, ["0.05", "0.1", "0.15", "0.2", "0.25", "0.3", "0.35"]);
        let tol: Vec<String> = default_spy_tolerances().iter().map(|f| f.to_string()).collect();
        assert_eq!(tol, ["0", "0.01", "0.02", "0.03", "0.04", "0.05", "0.06", "0.07", "0.08", "0.09", "0.1"]);
    }

    #[test]
    fn fraction_parsing() {
        assert_eq!("0.25".parse::<Fraction>().unwrap(), Fraction::from_hundredths(25));
        assert_eq!("0.250".parse::<Fraction>().unwrap(), Fraction::from_hundredths(25));
        assert_eq!(".5".parse::<Fraction>().unwrap(), Fraction::from_hundredths(50));
        assert_eq!("0".parse::<Fraction>().unwrap(), Fraction::ZERO);
        assert!("0.333".parse::<Fraction>().is_err());
        assert!("-0.1".parse::<Fraction>().is_err());
        assert!("abc".parse::<Fraction>().is_err());
        assert_eq!(Fraction::from_f64(0.29), Some(Fraction::from_hundredths(29)));
        assert_eq!(Fraction::from_f64(0.333), None);
    }
}
