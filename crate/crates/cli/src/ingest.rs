use std::fmt;
use std::io::Read;
use std::path::Path;

use autopu::{Dataset, PuDataset};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Error,
    ImputeMean,
}

/// Instance count, feature count and positive share of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub n_instances: usize,
    pub n_features: usize,
    pub positive_percent: f64,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} & {} & {:.2}%", self.n_instances, self.n_features, self.positive_percent)
    }
}

pub fn report(d: &Dataset) -> IngestReport {
    IngestReport {
        n_instances: d.n_instances(),
        n_features: d.n_features(),
        positive_percent: 100.0 * d.positive_fraction(),
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim().to_ascii_lowercase().as_str(), "" | "na" | "nan" | "?" | "null")
}

fn parse_label(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "1" | "1.0" | "true" | "yes" | "pos" | "positive" => Some(true),
        "0" | "0.0" | "-1" | "false" | "no" | "neg" | "negative" => Some(false),
        _ => None,
    }
}

/// Reads a CSV with a header row: numeric features plus one binary label column.
pub fn read_dataset(reader: impl Read, label_column: &str, policy: MissingPolicy) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::Ingest(e.to_string()))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| CliError::Ingest(format!("no column named `{label_column}`")))?;
    let names: Vec<String> = headers.iter().enumerate().filter(|(i, _)| *i != label_idx).map(|(_, h)| h.to_string()).collect();
    let d = names.len();
    if d == 0 {
        return Err(CliError::Ingest("no feature columns".into()));
    }
    let mut cells: Vec<Option<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Ingest(e.to_string()))?;
        let line = row + 1;
        if rec.len() != headers.len() {
            return Err(CliError::Ingest(format!("row {line} has {} cells, header has {}", rec.len(), headers.len())));
        }
        let label = &rec[label_idx];
        labels.push(parse_label(label).ok_or_else(|| {
            CliError::Ingest(format!("row {line}, column `{label_column}`: label `{label}` is not binary"))
        })?);
        for (j, cell) in rec.iter().enumerate().filter(|(j, _)| *j != label_idx) {
            if is_missing(cell) {
                if policy == MissingPolicy::Error {
                    return Err(CliError::Ingest(format!("row {line}, column `{}`: missing value", &headers[j])));
                }
                cells.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::Ingest(format!("row {line}, column `{}`: `{cell}` is not numeric", &headers[j]))
                })?;
                if !v.is_finite() {
                    return Err(CliError::Ingest(format!("row {line}, column `{}`: non-finite value", &headers[j])));
                }
                cells.push(Some(v));
            }
        }
    }
    let n = labels.len();
    let mut means = vec![0.0; d];
    for (j, mean) in means.iter_mut().enumerate() {
        let observed: Vec<f64> = (0..n).filter_map(|i| cells[i * d + j]).collect();
        if observed.is_empty() && n > 0 {
            return Err(CliError::Ingest(format!("column `{}` has no observed values", names[j])));
        }
        *mean = observed.iter().sum::<f64>() / observed.len().max(1) as f64;
    }
    let x = Array2::from_shape_fn((n, d), |(i, j)| cells[i * d + j].unwrap_or(means[j]));
    let ds = Dataset::new(x, labels).and_then(|ds| ds.with_names(names)).map_err(|e| CliError::Ingest(e.to_string()))?;
    ds.require_both_classes().map_err(|e| CliError::Ingest(e.to_string()))?;
    Ok(ds)
}

pub fn ingest_csv(path: &Path, label_column: &str, policy: MissingPolicy) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
    read_dataset(file, label_column, policy)
}

/// Writes features, the `s` annotation and the hidden true class.
pub fn write_pu_csv(pu: &PuDataset, names: &[String], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut header: Vec<String> = names.to_vec();
    header.extend(["s".to_string(), "y_true".to_string()]);
    w.write_record(&header).map_err(|e| CliError::Runtime(e.to_string()))?;
    let x = pu.features();
    for i in 0..pu.n_instances() {
        let mut rec: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(u8::from(pu.s()[i]).to_string());
        rec.push(pu.y_true().map_or(String::new(), |y| u8::from(y[i]).to_string()));
        w.write_record(&rec).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_cell_named() {
        let csv = "a,b,y\n1,2,1\n3,,0\n";
        let err = read_dataset(csv.as_bytes(), "y", MissingPolicy::Error).unwrap_err();
        assert!(err.to_string().contains("row 2, column `b`"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn impute_mean_keeps_observed_mean() {
        let csv = "a,b,y\n1,2,1\n3,,0\n5,7,0\n";
        let d = read_dataset(csv.as_bytes(), "y", MissingPolicy::ImputeMean).unwrap();
        let col = d.features().column(1).to_vec();
        assert_eq!(col, vec![2.0, 4.5, 7.0]);
        assert_eq!(col.iter().sum::<f64>() / 3.0, 4.5);
    }

    #[test]
    fn non_binary_label() {
        let csv = "a,y\n1,1\n2,2\n";
        assert!(read_dataset(csv.as_bytes(), "y", MissingPolicy::Error).is_err());
    }

    #[test]
    fn report_format() {
        let mut csv = String::from("f1,f2,f3,f4,f5,f6,f7,f8,f9,label\n");
        for i in 0..354 {
            csv.push_str(&format!("{i},1,2,3,4,5,6,7,8,{}\n", u8::from(i < 38)));
        }
        let d = read_dataset(csv.as_bytes(), "label", MissingPolicy::Error).unwrap();
        assert_eq!(report(&d).to_string(), "354 & 9 & 10.73%");
    }
}
