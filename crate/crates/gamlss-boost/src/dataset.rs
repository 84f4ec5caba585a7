use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Response vector plus covariate matrix in column-major layout.
///
/// Covariates are stored one `Vec` per column so base-learner fits can walk a
/// single contiguous slice. No standardization of any kind is applied; if the
/// response or covariates live on extreme scales that is visible to the fit
/// (and to the step-length search intervals), which is intentional.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    y: Vec<T>,
    columns: Vec<Vec<T>>,
    names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    /// Validates and wraps raw data. Requires `n >= 2`, finite entries,
    /// per-column length `n` and unique covariate names.
    pub fn new(y: Vec<T>, columns: Vec<Vec<T>>, names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::DegenerateData("need at least two observations"));
        }
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                what: "covariate names",
                expected: columns.len(),
                found: names.len(),
            });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "response",
                index,
            });
        }
        for (j, column) in columns.iter().enumerate() {
            if column.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "covariate column",
                    expected: n,
                    found: column.len(),
                });
            }
            if let Some(index) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "covariate",
                    index: j * n + index,
                });
            }
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::usage(format!("duplicate covariate name `{name}`")));
            }
        }
        Ok(Dataset { y, columns, names })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of covariates.
    pub fn num_covariates(&self) -> usize {
        self.columns.len()
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Row subset in the given order (used for cross-validation splits).
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::usage("subset needs at least two rows"));
        }
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.n()) {
            return Err(Error::usage(format!("row index {bad} out of range")));
        }
        let y = rows.iter().map(|&i| self.y[i]).collect();
        let columns = self
            .columns
            .iter()
            .map(|col| rows.iter().map(|&i| col[i]).collect())
            .collect();
        Dataset::new(y, columns, self.names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset<f64> {
        Dataset::new(
            vec![1.0, 2.0, 3.0],
            vec![vec![0.0, 1.0, 2.0], vec![5.0, 5.0, 5.0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn accepts_valid_data() {
        let d = toy();
        assert_eq!(d.n(), 3);
        assert_eq!(d.num_covariates(), 2);
        assert_eq!(d.column(1), &[5.0, 5.0, 5.0]);
    }

    #[test]
    fn rejects_single_observation() {
        let err = Dataset::new(vec![1.0], vec![vec![0.0]], vec!["a".into()]).unwrap_err();
        assert!(matches!(err, Error::DegenerateData(_)));
    }

    #[test]
    fn rejects_ragged_columns() {
        let err = Dataset::new(
            vec![1.0, 2.0],
            vec![vec![0.0, 1.0, 2.0]],
            vec!["a".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = Dataset::new(
            vec![1.0, f64::NAN],
            vec![vec![0.0, 1.0]],
            vec!["a".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { context: "response", .. }));
    }

    #[test]
    fn rejects_duplicate_names() {
        let err = Dataset::new(
            vec![1.0, 2.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec!["a".into(), "a".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn subset_picks_rows_in_order() {
        let d = toy();
        let s = d.subset(&[2, 0]).unwrap();
        assert_eq!(s.y(), &[3.0, 1.0]);
        assert_eq!(s.column(0), &[2.0, 0.0]);
    }
}
