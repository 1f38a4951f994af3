//! Candidate pipeline configurations and their flat text records.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;
use crate::space::{ClassifierKey, Fraction, Gene, SearchSpace, SpaceVariant};

/// The value of a single gene.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GeneValue {
    Count(u32),
    Fraction(Fraction),
    Classifier(ClassifierKey),
    Flag(bool),
}

impl fmt::Display for GeneValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneValue::Count(c) => write!(f, "{c}"),
            GeneValue::Fraction(x) => write!(f, "{x}"),
            GeneValue::Classifier(k) => write!(f, "{k}"),
            GeneValue::Flag(b) => write!(f, "{b}"),
        }
    }
}

fn inert_spy_rate() -> Fraction {
    Fraction::from_hundredths(5)
}

/// One point in a search space: a complete two-step PU learning pipeline.
///
/// Spy fields are always present. Under the base variant `spy_flag` is false
/// and `spy_rate` / `spy_tolerance` are carried but never read.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidateConfig {
    pub iteration_count_1a: u32,
    pub threshold_1a: Fraction,
    pub classifier_1a: ClassifierKey,
    pub threshold_1b: Fraction,
    pub classifier_1b: ClassifierKey,
    pub flag_1b: bool,
    pub classifier_2: ClassifierKey,
    #[serde(default)]
    pub spy_flag: bool,
    #[serde(default = "inert_spy_rate")]
    pub spy_rate: Fraction,
    #[serde(default)]
    pub spy_tolerance: Fraction,
}

impl CandidateConfig {
    /// A config with inert spy fields.
    pub fn base(
        iteration_count_1a: u32,
        threshold_1a: Fraction,
        classifier_1a: impl Into<ClassifierKey>,
        threshold_1b: Fraction,
        classifier_1b: impl Into<ClassifierKey>,
        flag_1b: bool,
        classifier_2: impl Into<ClassifierKey>,
    ) -> Self {
        CandidateConfig {
            iteration_count_1a,
            threshold_1a,
            classifier_1a: classifier_1a.into(),
            threshold_1b,
            classifier_1b: classifier_1b.into(),
            flag_1b,
            classifier_2: classifier_2.into(),
            spy_flag: false,
            spy_rate: inert_spy_rate(),
            spy_tolerance: Fraction::ZERO,
        }
    }

    pub fn with_spies(mut self, spy_rate: Fraction, spy_tolerance: Fraction) -> Self {
        self.spy_flag = true;
        self.spy_rate = spy_rate;
        self.spy_tolerance = spy_tolerance;
        self
    }

    pub fn get(&self, gene: Gene) -> GeneValue {
        match gene {
            Gene::IterationCount1A => GeneValue::Count(self.iteration_count_1a),
            Gene::Threshold1A => GeneValue::Fraction(self.threshold_1a),
            Gene::Classifier1A => GeneValue::Classifier(self.classifier_1a.clone()),
            Gene::Threshold1B => GeneValue::Fraction(self.threshold_1b),
            Gene::Classifier1B => GeneValue::Classifier(self.classifier_1b.clone()),
            Gene::Flag1B => GeneValue::Flag(self.flag_1b),
            Gene::Classifier2 => GeneValue::Classifier(self.classifier_2.clone()),
            Gene::SpyFlag => GeneValue::Flag(self.spy_flag),
            Gene::SpyRate => GeneValue::Fraction(self.spy_rate),
            Gene::SpyTolerance => GeneValue::Fraction(self.spy_tolerance),
        }
    }

    /// Sets a gene; returns false (and leaves `self` unchanged) on a type mismatch.
    pub fn set(&mut self, gene: Gene, value: GeneValue) -> bool {
        match (gene, value) {
            (Gene::IterationCount1A, GeneValue::Count(c)) => self.iteration_count_1a = c,
            (Gene::Threshold1A, GeneValue::Fraction(f)) => self.threshold_1a = f,
            (Gene::Classifier1A, GeneValue::Classifier(k)) => self.classifier_1a = k,
            (Gene::Threshold1B, GeneValue::Fraction(f)) => self.threshold_1b = f,
            (Gene::Classifier1B, GeneValue::Classifier(k)) => self.classifier_1b = k,
            (Gene::Flag1B, GeneValue::Flag(b)) => self.flag_1b = b,
            (Gene::Classifier2, GeneValue::Classifier(k)) => self.classifier_2 = k,
            (Gene::SpyFlag, GeneValue::Flag(b)) => self.spy_flag = b,
            (Gene::SpyRate, GeneValue::Fraction(f)) => self.spy_rate = f,
            (Gene::SpyTolerance, GeneValue::Fraction(f)) => self.spy_tolerance = f,
            _ => return false,
        }
        true
    }

    /// Exchanges the value of `gene` between two configs.
    pub fn swap_gene(a: &mut CandidateConfig, b: &mut CandidateConfig, gene: Gene) {
        use std::mem::swap;
        match gene {
            Gene::IterationCount1A => swap(&mut a.iteration_count_1a, &mut b.iteration_count_1a),
            Gene::Threshold1A => swap(&mut a.threshold_1a, &mut b.threshold_1a),
            Gene::Classifier1A => swap(&mut a.classifier_1a, &mut b.classifier_1a),
            Gene::Threshold1B => swap(&mut a.threshold_1b, &mut b.threshold_1b),
            Gene::Classifier1B => swap(&mut a.classifier_1b, &mut b.classifier_1b),
            Gene::Flag1B => swap(&mut a.flag_1b, &mut b.flag_1b),
            Gene::Classifier2 => swap(&mut a.classifier_2, &mut b.classifier_2),
            Gene::SpyFlag => swap(&mut a.spy_flag, &mut b.spy_flag),
            Gene::SpyRate => swap(&mut a.spy_rate, &mut b.spy_rate),
            Gene::SpyTolerance => swap(&mut a.spy_tolerance, &mut b.spy_tolerance),
        }
    }

    /// Serialises to a `key = value` line per field, in declaration order.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        for gene in Gene::EXTENDED {
            out.push_str(gene.name());
            out.push_str(" = ");
            out.push_str(&self.get(gene).to_string());
            out.push('\n');
        }
        out
    }

    /// Parses a record produced by [`CandidateConfig::to_record`].
    ///
    /// Blank lines and `#` comments are ignored. The three spy fields are
    /// optional and default to their inert values.
    pub fn from_record(text: &str) -> Result<Self, RecordError> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(RecordError::Malformed { line: lineno + 1 })?;
            let key = key.trim();
            if Gene::from_name(key).is_none() {
                return Err(RecordError::UnknownField(key.to_string()));
            }
            if fields.insert(key, value.trim()).is_some() {
                return Err(RecordError::DuplicateField(key.to_string()));
            }
        }

        fn req<'a>(fields: &BTreeMap<&str, &'a str>, g: Gene) -> Result<&'a str, RecordError> {
            fields.get(g.name()).copied().ok_or(RecordError::MissingField(g.name()))
        }
        fn bad(g: Gene, v: &str) -> RecordError {
            RecordError::InvalidValue { field: g.name(), value: v.to_string() }
        }
        fn fraction(g: Gene, v: &str) -> Result<Fraction, RecordError> {
            v.parse().map_err(|_| bad(g, v))
        }
        fn flag(g: Gene, v: &str) -> Result<bool, RecordError> {
            match v.to_ascii_lowercase().as_str() {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                _ => Err(bad(g, v)),
            }
        }
        fn key(g: Gene, v: &str) -> Result<ClassifierKey, RecordError> {
            if v.is_empty() || v.chars().any(char::is_whitespace) {
                Err(bad(g, v))
            } else {
                Ok(ClassifierKey::new(v))
            }
        }

        let g = Gene::IterationCount1A;
        let count_text = req(&fields, g)?;
        let iteration_count_1a = count_text.parse().map_err(|_| bad(g, count_text))?;
        let mut config = CandidateConfig {
            iteration_count_1a,
            threshold_1a: fraction(Gene::Threshold1A, req(&fields, Gene::Threshold1A)?)?,
            classifier_1a: key(Gene::Classifier1A, req(&fields, Gene::Classifier1A)?)?,
            threshold_1b: fraction(Gene::Threshold1B, req(&fields, Gene::Threshold1B)?)?,
            classifier_1b: key(Gene::Classifier1B, req(&fields, Gene::Classifier1B)?)?,
            flag_1b: flag(Gene::Flag1B, req(&fields, Gene::Flag1B)?)?,
            classifier_2: key(Gene::Classifier2, req(&fields, Gene::Classifier2)?)?,
            spy_flag: false,
            spy_rate: inert_spy_rate(),
            spy_tolerance: Fraction::ZERO,
        };
        if let Some(v) = fields.get(Gene::SpyFlag.name()) {
            config.spy_flag = flag(Gene::SpyFlag, v)?;
        }
        if let Some(v) = fields.get(Gene::SpyRate.name()) {
            config.spy_rate = fraction(Gene::SpyRate, v)?;
        }
        if let Some(v) = fields.get(Gene::SpyTolerance.name()) {
            config.spy_tolerance = fraction(Gene::SpyTolerance, v)?;
        }
        Ok(config)
    }
}

impl fmt::Display for CandidateConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "1A[n={}, t={}, {}] 1B[{}, t={}, {}] 2[{}]",
            self.iteration_count_1a,
            self.threshold_1a,
            self.classifier_1a,
            if self.flag_1b { "on" } else { "off" },
            self.threshold_1b,
            self.classifier_1b,
            self.classifier_2
        )?;
        if self.spy_flag {
            write!(f, " spies[rate={}, tol={}]", self.spy_rate, self.spy_tolerance)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("config record is missing field `{0}`")]
    MissingField(&'static str),
    #[error("config record has invalid value `{value}` for field `{field}`")]
    InvalidValue { field: &'static str, value: String },
    #[error("config record has unknown field `{0}`")]
    UnknownField(String),
    #[error("config record repeats field `{0}`")]
    DuplicateField(String),
    #[error("config record line {line} is not of the form `key = value`")]
    Malformed { line: usize },
}

/// A field whose value is not in the space's candidate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub value: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} is not a candidate value", self.field, self.value)
    }
}

/// Checks each field for membership in its candidate list.
///
/// Spy rate and tolerance are checked under both variants; under the base
/// variant `spy_flag` must additionally be false.
pub fn validate_config(config: &CandidateConfig, space: &SearchSpace) -> Result<(), Vec<Violation>> {
    let violations: Vec<Violation> = Gene::EXTENDED
        .iter()
        .filter_map(|&gene| {
            let value = config.get(gene);
            let ok = space.index_of(gene, &value).is_some()
                && !(gene == Gene::SpyFlag
                    && space.variant == SpaceVariant::Base
                    && config.spy_flag);
            (!ok).then(|| Violation { field: gene.name(), value: value.to_string() })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Draws every active gene independently and uniformly from its list.
///
/// Inactive (spy) genes of a base space take their inert defaults.
pub fn random_config(space: &SearchSpace, rng: &mut Rng) -> CandidateConfig {
    let mut pick = |gene: Gene| space.value_at(gene, rng.random_range(0..space.cardinality(gene)));
    let mut config = CandidateConfig::base(0, Fraction::ZERO, "", Fraction::ZERO, "", false, "");
    for &gene in space.genes() {
        let value = pick(gene);
        config.set(gene, value);
    }
    if space.variant == SpaceVariant::Base {
        if !space.spy_rates.contains(&config.spy_rate) {
            config.spy_rate = space.spy_rates[0];
        }
        if !space.spy_tolerances.contains(&config.spy_tolerance) {
            config.spy_tolerance = space.spy_tolerances[0];
        }
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn space18(variant: SpaceVariant) -> SearchSpace {
        let keys = (0..18).map(|i| ClassifierKey::new(format!("k{i}"))).collect();
        SearchSpace::new(variant, keys)
    }

    fn f(h: u16) -> Fraction {
        Fraction::from_hundredths(h)
    }

    pub(crate) fn figure_one() -> CandidateConfig {
        CandidateConfig::base(5, f(25), "decision_tree", f(30), "svm", true, "deep_forest")
    }

    #[test]
    fn same_seed_same_config() {
        let space = space18(SpaceVariant::Extended);
        let a = random_config(&space, &mut rng_from_seed(99));
        let b = random_config(&space, &mut rng_from_seed(99));
        assert_eq!(a, b);
    }

    #[test]
    fn base_space_never_sets_spy_flag() {
        let space = space18(SpaceVariant::Base);
        let mut rng = rng_from_seed(3);
        for _ in 0..500 {
            let c = random_config(&space, &mut rng);
            assert!(!c.spy_flag);
            assert!(validate_config(&c, &space).is_ok());
        }
    }

    #[test]
    fn iteration_count_is_uniform() {
        let space = space18(SpaceVariant::Base);
        let mut rng = rng_from_seed(11);
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            counts[random_config(&space, &mut rng).iteration_count_1a as usize - 1] += 1;
        }
        for c in counts {
            let freq = c as f64 / 10_000.0;
            assert!((freq - 0.10).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn validation_names_offending_field() {
        let space = space18(SpaceVariant::Base);
        let mut c = random_config(&space, &mut rng_from_seed(1));
        c.threshold_1a = f(25);
        assert!(validate_config(&c, &space).is_ok());
        c.threshold_1a = f(33);
        let v = validate_config(&c, &space).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "threshold_1a");
    }

    #[test]
    fn spy_values_from_selection_table_are_valid() {
        let space = space18(SpaceVariant::Extended);
        let c = CandidateConfig::base(1, f(5), "k0", f(5), "k1", false, "k2").with_spies(f(10), f(6));
        assert!(validate_config(&c, &space).is_ok());
        let base = space18(SpaceVariant::Base);
        let v = validate_config(&c, &base).unwrap_err();
        assert_eq!(v[0].field, "spy_flag");
    }

    #[test]
    fn figure_one_round_trips() {
        let c = figure_one();
        let text = c.to_record();
        assert!(text.contains("iteration_count_1a = 5\n"));
        assert!(text.contains("threshold_1b = 0.3\n"));
        assert_eq!(CandidateConfig::from_record(&text).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<CandidateConfig>(&json).unwrap(), c);
    }

    #[test]
    fn missing_classifier_2_is_named() {
        let text: String = figure_one()
            .to_record()
            .lines()
            .filter(|l| !l.starts_with("classifier_2"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(CandidateConfig::from_record(&text), Err(RecordError::MissingField("classifier_2")));
    }

    #[test]
    fn malformed_records() {
        assert!(matches!(
            CandidateConfig::from_record("iteration_count_1a 5"),
            Err(RecordError::Malformed { line: 1 })
        ));
        let bad = figure_one().to_record().replace("threshold_1a = 0.25", "threshold_1a = abc");
        assert_eq!(
            CandidateConfig::from_record(&bad),
            Err(RecordError::InvalidValue { field: "threshold_1a", value: "abc".into() })
        );
        let extra = format!("{}colour = red\n", figure_one().to_record());
        assert_eq!(CandidateConfig::from_record(&extra), Err(RecordError::UnknownField("colour".into())));
    }

    proptest! {
        #[test]
        fn random_configs_validate_and_round_trip(seed in any::<u64>(), extended in any::<bool>()) {
            let space = space18(if extended { SpaceVariant::Extended } else { SpaceVariant::Base });
            let c = random_config(&space, &mut rng_from_seed(seed));
            prop_assert!(validate_config(&c, &space).is_ok());
            prop_assert_eq!(CandidateConfig::from_record(&c.to_record()).unwrap(), c);
        }
    }
}
