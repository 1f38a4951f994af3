//! Fully labelled and positive-unlabelled datasets.

use ndarray::{Array2, ArrayView2, Axis};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("feature matrix has {rows} rows but {labels} labels were given")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("dataset has no instances")]
    Empty,
    #[error("dataset needs at least one instance of each class")]
    SingleClass,
    #[error("instance {0} is labelled positive but its true class is negative")]
    LabelledNegative(usize),
    #[error("PU dataset needs at least one labelled positive and one unlabelled instance")]
    MissingAnnotation,
    #[error("expected {expected} column names, got {got}")]
    NamesMismatch { expected: usize, got: usize },
}

fn check_finite(features: &ArrayView2<f64>) -> Result<(), DataError> {
    for ((row, col), v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(DataError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// A binary classification dataset (`true` = positive class).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<bool>,
    names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<bool>) -> Result<Self, DataError> {
        if features.nrows() != labels.len() {
            return Err(DataError::LengthMismatch { rows: features.nrows(), labels: labels.len() });
        }
        if labels.is_empty() {
            return Err(DataError::Empty);
        }
        check_finite(&features.view())?;
        Ok(Dataset { features, labels, names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, DataError> {
        if names.len() != self.features.ncols() {
            return Err(DataError::NamesMismatch { expected: self.features.ncols(), got: names.len() });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn positive_fraction(&self) -> f64 {
        self.n_positive() as f64 / self.n_instances() as f64
    }

    /// At least one instance of each class, as required for nested CV.
    pub fn require_both_classes(&self) -> Result<(), DataError> {
        let pos = self.n_positive();
        if pos == 0 || pos == self.n_instances() {
            Err(DataError::SingleClass)
        } else {
            Ok(())
        }
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
        }
    }
}

/// Features plus the labelled/unlabelled annotation `s`.
///
/// `y_true` is only present for datasets engineered from labelled data; code
/// that drives model selection works on [`PuDataset::blind`] copies.
#[derive(Clone, Debug, PartialEq)]
pub struct PuDataset {
    features: Array2<f64>,
    s: Vec<bool>,
    y_true: Option<Vec<bool>>,
}

impl PuDataset {
    pub fn new(features: Array2<f64>, s: Vec<bool>, y_true: Option<Vec<bool>>) -> Result<Self, DataError> {
        if features.nrows() != s.len() {
            return Err(DataError::LengthMismatch { rows: features.nrows(), labels: s.len() });
        }
        if let Some(y) = &y_true {
            if y.len() != s.len() {
                return Err(DataError::LengthMismatch { rows: features.nrows(), labels: y.len() });
            }
            if let Some(i) = s.iter().zip(y).position(|(&si, &yi)| si && !yi) {
                return Err(DataError::LabelledNegative(i));
            }
        }
        let labelled = s.iter().filter(|&&x| x).count();
        if labelled == 0 || labelled == s.len() {
            return Err(DataError::MissingAnnotation);
        }
        check_finite(&features.view())?;
        Ok(PuDataset { features, s, y_true })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn s(&self) -> &[bool] {
        &self.s
    }

    pub fn y_true(&self) -> Option<&[bool]> {
        self.y_true.as_deref()
    }

    pub fn n_instances(&self) -> usize {
        self.s.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn labelled_indices(&self) -> Vec<usize> {
        (0..self.s.len()).filter(|&i| self.s[i]).collect()
    }

    pub fn unlabelled_indices(&self) -> Vec<usize> {
        (0..self.s.len()).filter(|&i| !self.s[i]).collect()
    }

    /// A copy without the hidden true classes.
    pub fn blind(&self) -> PuDataset {
        PuDataset { features: self.features.clone(), s: self.s.clone(), y_true: None }
    }

    pub fn subset(&self, rows: &[usize]) -> Result<PuDataset, DataError> {
        PuDataset::new(
            self.features.select(Axis(0), rows),
            rows.iter().map(|&i| self.s[i]).collect(),
            self.y_true.as_ref().map(|y| rows.iter().map(|&i| y[i]).collect()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dataset_invariants() {
        assert!(matches!(
            Dataset::new(array![[1.0], [2.0]], vec![true]),
            Err(DataError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Dataset::new(array![[1.0], [f64::NAN]], vec![true, false]),
            Err(DataError::NonFinite { row: 1, col: 0 })
        ));
        let d = Dataset::new(array![[1.0], [2.0]], vec![true, true]).unwrap();
        assert_eq!(d.require_both_classes(), Err(DataError::SingleClass));
    }

    #[test]
    fn pu_invariants() {
        let x = array![[0.0], [1.0], [2.0]];
        assert_eq!(
            PuDataset::new(x.clone(), vec![true, false, false], Some(vec![false, false, true])),
            Err(DataError::LabelledNegative(0))
        );
        assert_eq!(PuDataset::new(x.clone(), vec![false; 3], None), Err(DataError::MissingAnnotation));
        let pu = PuDataset::new(x, vec![true, false, false], Some(vec![true, true, false])).unwrap();
        assert_eq!(pu.labelled_indices(), vec![0]);
        assert_eq!(pu.unlabelled_indices(), vec![1, 2]);
        assert!(pu.blind().y_true().is_none());
    }
}
