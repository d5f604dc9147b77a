use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

/// Per-column min-max scaling. A constant column maps to 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
}

impl ColumnScale {
    pub fn fit(column: impl IntoIterator<Item = f64>) -> ColumnScale {
        let (min, max) = column
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        ColumnScale { min, max }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.max > self.min {
            ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// Class index per row; `names[k]` is the label of class `k`.
    Classes { labels: Vec<usize>, names: Vec<String> },
    /// Target vector per row.
    Values(Vec<Vec<f64>>),
}

/// Immutable table of features and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    targets: Targets,
    scaling: Vec<ColumnScale>,
}

fn check_rectangular(features: &[Vec<f64>]) -> Result<usize> {
    let width = features.first().map_or(0, Vec::len);
    if let Some(i) = features.iter().position(|r| r.len() != width) {
        return Err(Error::Dataset(format!(
            "row {i} has {} features, expected {width}",
            features[i].len()
        )));
    }
    Ok(width)
}

impl Dataset {
    /// Regression data used as given, without scaling.
    pub fn regression(features: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Dataset> {
        if features.len() != targets.len() {
            return Err(Error::Dataset(format!(
                "{} feature rows for {} target rows",
                features.len(),
                targets.len()
            )));
        }
        check_rectangular(&features)?;
        check_rectangular(&targets)?;
        if features.iter().chain(&targets).flatten().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite value".into()));
        }
        Ok(Dataset {
            features,
            targets: Targets::Values(targets),
            scaling: Vec::new(),
        })
    }

    /// Classification data used as given, without scaling.
    pub fn classification(features: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Dataset> {
        if features.len() != labels.len() {
            return Err(Error::Dataset(format!(
                "{} feature rows for {} labels",
                features.len(),
                labels.len()
            )));
        }
        check_rectangular(&features)?;
        if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Dataset(format!("label {l} outside {n_classes} classes")));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite value".into()));
        }
        Ok(Dataset {
            features,
            targets: Targets::Classes {
                labels,
                names: (0..n_classes).map(|k| k.to_string()).collect(),
            },
            scaling: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        match self.features.first() {
            Some(r) => r.len(),
            None => self.scaling.len(),
        }
    }

    /// Output count a genome needs: classes, or the target dimension.
    pub fn n_targets(&self) -> usize {
        match &self.targets {
            Targets::Classes { names, .. } => names.len(),
            Targets::Values(v) => v.first().map_or(0, Vec::len),
        }
    }

    pub fn task(&self) -> Task {
        match self.targets {
            Targets::Classes { .. } => Task::Classification,
            Targets::Values(_) => Task::Regression,
        }
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    /// Empty when the features are used unscaled.
    pub fn scaling(&self) -> &[ColumnScale] {
        &self.scaling
    }

    /// Maps a raw feature row the same way the stored rows were mapped.
    pub fn scale_row(&self, raw: &[f64]) -> Vec<f64> {
        if self.scaling.is_empty() {
            return raw.to_vec();
        }
        raw.iter().zip(&self.scaling).map(|(v, s)| s.apply(*v)).collect()
    }

    pub fn load_csv(path: impl AsRef<Path>, task: Task) -> Result<Dataset> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Dataset(format!("cannot open {}: {e}", path.display())))?;
        Dataset::read_csv(file, task).map_err(|e| match e {
            Error::Dataset(m) => Error::Dataset(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Header row first; the last column is the target. Rows are numbered
    /// by file line.
    pub fn read_csv<R: Read>(reader: R, task: Task) -> Result<Dataset> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = csv.headers()?.clone();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::Dataset("empty file".into()));
        }
        if header.len() < 2 {
            return Err(Error::Dataset("need at least one feature column and a target column".into()));
        }
        let width = header.len();
        let mut raw = Vec::new();
        let mut targets = Vec::new();
        for record in csv.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != width {
                return Err(Error::Dataset(format!(
                    "row {line} has {} fields, expected {width}",
                    record.len()
                )));
            }
            let mut row = Vec::with_capacity(width - 1);
            for (c, field) in record.iter().take(width - 1).enumerate() {
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => row.push(v),
                    _ => {
                        return Err(Error::Dataset(format!(
                            "row {line}, column `{}`: non-numeric feature {field:?}",
                            &header[c]
                        )))
                    }
                }
            }
            raw.push(row);
            targets.push((line, record[width - 1].to_string()));
        }
        if raw.is_empty() {
            return Err(Error::Dataset("no data rows".into()));
        }

        let scaling: Vec<ColumnScale> = (0..width - 1)
            .map(|c| ColumnScale::fit(raw.iter().map(|r| r[c])))
            .collect();
        let features = raw
            .iter()
            .map(|r| r.iter().zip(&scaling).map(|(v, s)| s.apply(*v)).collect())
            .collect();
        let targets = match task {
            Task::Classification => {
                let mut index = HashMap::new();
                let mut names = Vec::new();
                let labels = targets
                    .into_iter()
                    .map(|(_, name)| {
                        *index.entry(name.clone()).or_insert_with(|| {
                            names.push(name);
                            names.len() - 1
                        })
                    })
                    .collect();
                Targets::Classes { labels, names }
            }
            Task::Regression => Targets::Values(
                targets
                    .into_iter()
                    .map(|(line, v)| match v.parse::<f64>() {
                        Ok(t) if t.is_finite() => Ok(vec![t]),
                        _ => Err(Error::Dataset(format!("row {line}: non-numeric target {v:?}"))),
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Dataset {
            features,
            targets,
            scaling,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, task: Task) -> Result<Dataset> {
        Dataset::read_csv(text.as_bytes(), task)
    }

    #[test]
    fn constant_column_scales_to_half() {
        let d = read("a,b,y\n1,3,0\n1,5,1\n1,4,0\n", Task::Classification).unwrap();
        assert!(d.features().iter().all(|r| r[0] == 0.5));
        let b: Vec<f64> = d.features().iter().map(|r| r[1]).collect();
        assert_eq!(b, vec![0.0, 1.0, 0.5]);
        assert_eq!(d.scale_row(&[7.0, 4.5]), vec![0.5, 0.75]);
    }

    #[test]
    fn labels_in_first_appearance_order() {
        let d = read("x,label\n0,b\n1,a\n2,b\n", Task::Classification).unwrap();
        match d.targets() {
            Targets::Classes { labels, names } => {
                assert_eq!(labels, &vec![0, 1, 0]);
                assert_eq!(names, &vec!["b".to_string(), "a".to_string()]);
            }
            _ => panic!("expected classes"),
        }
        assert_eq!(d.n_targets(), 2);
        assert_eq!(d.n_features(), 1);
    }

    #[test]
    fn ragged_row_names_line() {
        let e = read("x,y,t\n1,2,3\n4,5\n", Task::Regression).unwrap_err();
        assert!(e.to_string().contains("row 3"), "{e}");
    }

    #[test]
    fn non_numeric_feature() {
        let e = read("x,t\n1,0\nfoo,1\n", Task::Classification).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("row 3") && msg.contains("`x`"), "{msg}");
        assert!(read("x,t\n,1\n", Task::Regression).is_err());
        assert!(read("x,t\n1,abc\n", Task::Regression).is_err());
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(read("", Task::Regression).is_err());
        assert!(read("x,t\n", Task::Regression).is_err());
        assert!(read("t\n1\n", Task::Regression).is_err());
    }

    #[test]
    fn regression_targets_unscaled() {
        let d = read("x,t\n0,10\n2,-4.5\n", Task::Regression).unwrap();
        assert_eq!(d.targets(), &Targets::Values(vec![vec![10.0], vec![-4.5]]));
        assert_eq!(d.task(), Task::Regression);
    }

    #[test]
    fn direct_constructors_validate() {
        assert!(Dataset::regression(vec![vec![1.0]], vec![]).is_err());
        assert!(Dataset::regression(vec![vec![1.0], vec![1.0, 2.0]], vec![vec![0.0], vec![0.0]]).is_err());
        assert!(Dataset::classification(vec![vec![1.0]], vec![2], 2).is_err());
        let d = Dataset::classification(vec![vec![1.0]], vec![1], 2).unwrap();
        assert_eq!(d.scale_row(&[3.0]), vec![3.0]);
    }
}
