//! Real-valued encoding of configurations for the surrogate.
//!
//! Layout: numeric genes (iteration count, thresholds, spy rate / tolerance),
//! then boolean genes as 0/1, then one one-hot block per classifier gene
//! ordered by the space's classifier list.

use ndarray::Array2;
use thiserror::Error;

use crate::config::{CandidateConfig, GeneValue};
use crate::space::{ClassifierKey, Gene, SearchSpace, SpaceVariant};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("classifier `{0}` is not in the space's registry")]
    UnknownClassifier(String),
    #[error("encoding has length {got}, layout expects {expected}")]
    Length { expected: usize, got: usize },
    #[error("one-hot block for {0} does not have exactly one active slot")]
    BadOneHot(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingLayout {
    pub numeric: Vec<Gene>,
    pub boolean: Vec<Gene>,
    pub one_hot: Vec<Gene>,
    pub block_size: usize,
}

impl EncodingLayout {
    pub fn for_space(space: &SearchSpace) -> EncodingLayout {
        let mut numeric = vec![Gene::IterationCount1A, Gene::Threshold1A, Gene::Threshold1B];
        let mut boolean = vec![Gene::Flag1B];
        if space.variant == SpaceVariant::Extended {
            numeric.extend([Gene::SpyRate, Gene::SpyTolerance]);
            boolean.push(Gene::SpyFlag);
        }
        EncodingLayout {
            numeric,
            boolean,
            one_hot: vec![Gene::Classifier1A, Gene::Classifier1B, Gene::Classifier2],
            block_size: space.classifiers.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.numeric.len() + self.boolean.len() + self.one_hot.len() * self.block_size
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A configuration's feature vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedConfig {
    pub values: Vec<f64>,
}

pub fn encode_config(config: &CandidateConfig, space: &SearchSpace) -> Result<EncodedConfig, EncodeError> {
    let layout = EncodingLayout::for_space(space);
    let mut values = Vec::with_capacity(layout.len());
    for &g in &layout.numeric {
        values.push(match config.get(g) {
            GeneValue::Count(c) => c as f64,
            GeneValue::Fraction(f) => f.as_f64(),
            _ => unreachable!("numeric gene"),
        });
    }
    for &g in &layout.boolean {
        values.push(match config.get(g) {
            GeneValue::Flag(b) => b as u8 as f64,
            _ => unreachable!("boolean gene"),
        });
    }
    for &g in &layout.one_hot {
        let GeneValue::Classifier(key) = config.get(g) else { unreachable!("classifier gene") };
        let idx = space.classifier_index(&key).ok_or_else(|| EncodeError::UnknownClassifier(key.to_string()))?;
        let start = values.len();
        values.resize(start + layout.block_size, 0.0);
        values[start + idx] = 1.0;
    }
    Ok(EncodedConfig { values })
}

/// Recovers the three classifier keys from the one-hot blocks.
pub fn decode_classifiers(enc: &EncodedConfig, space: &SearchSpace) -> Result<Vec<ClassifierKey>, EncodeError> {
    let layout = EncodingLayout::for_space(space);
    if enc.values.len() != layout.len() {
        return Err(EncodeError::Length { expected: layout.len(), got: enc.values.len() });
    }
    let mut start = layout.numeric.len() + layout.boolean.len();
    let mut out = Vec::new();
    for &g in &layout.one_hot {
        let block = &enc.values[start..start + layout.block_size];
        let hot: Vec<usize> = (0..block.len()).filter(|&i| block[i] == 1.0).collect();
        if hot.len() != 1 || block.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(EncodeError::BadOneHot(g.name()));
        }
        out.push(space.classifiers[hot[0]].clone());
        start += layout.block_size;
    }
    Ok(out)
}

/// Stacks encodings into a row matrix.
pub fn encode_all(configs: &[CandidateConfig], space: &SearchSpace) -> Result<Array2<f64>, EncodeError> {
    let width = EncodingLayout::for_space(space).len();
    let mut data = Vec::with_capacity(configs.len() * width);
    for c in configs {
        data.extend(encode_config(c, space)?.values);
    }
    Ok(Array2::from_shape_vec((configs.len(), width), data).expect("rows have layout width"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::full_registry;
    use crate::config::random_config;
    use crate::rng::rng_from_seed;

    #[test]
    fn lengths_with_full_registry() {
        let base = SearchSpace::base(full_registry());
        let ext = SearchSpace::extended(full_registry());
        let mut rng = rng_from_seed(0);
        assert_eq!(encode_config(&random_config(&base, &mut rng), &base).unwrap().values.len(), 58);
        assert_eq!(encode_config(&random_config(&ext, &mut rng), &ext).unwrap().values.len(), 61);
        assert_eq!(EncodingLayout::for_space(&base).len(), 4 + 3 * 18);
    }

    #[test]
    fn classifier_2_swap_changes_two_coordinates_and_decodes() {
        let space = SearchSpace::base(full_registry());
        let mut rng = rng_from_seed(4);
        for _ in 0..50 {
            let a = random_config(&space, &mut rng);
            let mut b = a.clone();
            let other = space.classifiers.iter().find(|k| **k != a.classifier_2).unwrap().clone();
            b.classifier_2 = other;
            let (ea, eb) = (encode_config(&a, &space).unwrap(), encode_config(&b, &space).unwrap());
            let diff = ea.values.iter().zip(&eb.values).filter(|(x, y)| x != y).count();
            assert_eq!(diff, 2);
            assert_eq!(
                decode_classifiers(&ea, &space).unwrap(),
                vec![a.classifier_1a.clone(), a.classifier_1b.clone(), a.classifier_2.clone()]
            );
        }
    }
}
