use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Design matrix (no intercept column) and response.
///
/// Predictors are stored column-major so each coordinate update reads one
/// contiguous column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    predictors: DMatrix<f64>,
    response: Vec<f64>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(predictors: DMatrix<f64>, response: Vec<f64>) -> Result<Self> {
        let names = (1..=predictors.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(predictors, response, names)
    }

    pub fn with_names(predictors: DMatrix<f64>, response: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::InvalidData("dataset needs at least one observation".into()));
        }
        if predictors.nrows() != n {
            return Err(Error::InvalidData(format!(
                "response has {n} rows but predictors have {}",
                predictors.nrows()
            )));
        }
        if names.len() != predictors.ncols() {
            return Err(Error::InvalidData("one name per predictor column required".into()));
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("response entry {i} is not finite")));
        }
        if let Some(k) = predictors.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "predictor entry (row {}, column {}) is not finite",
                k % n,
                k / n
            )));
        }
        Ok(Self { predictors, response, names })
    }

    /// Build from row-major predictor rows.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidData("rows have differing lengths".into()));
        }
        let x = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(x, response)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn d(&self) -> usize {
        self.predictors.ncols()
    }

    pub fn predictors(&self) -> &DMatrix<f64> {
        &self.predictors
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.predictors.as_slice()[j * n..(j + 1) * n]
    }

    /// `y_i - intercept - x_i' slopes`.
    pub fn residuals(&self, intercept: f64, slopes: &[f64]) -> Vec<f64> {
        assert_eq!(slopes.len(), self.d());
        let mut r: Vec<f64> = self.response.iter().map(|y| y - intercept).collect();
        for (j, &b) in slopes.iter().enumerate() {
            if b != 0.0 {
                for (ri, xij) in r.iter_mut().zip(self.column(j)) {
                    *ri -= xij * b;
                }
            }
        }
        r
    }

    /// Rows selected by `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let x = DMatrix::from_fn(idx.len(), self.d(), |i, j| self.predictors[(idx[i], j)]);
        let y = idx.iter().map(|&i| self.response[i]).collect();
        Dataset { predictors: x, response: y, names: self.names.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_and_nonfinite() {
        let x = DMatrix::from_element(3, 2, 1.0);
        assert!(Dataset::new(x.clone(), vec![1.0, 2.0]).is_err());
        assert!(Dataset::new(x.clone(), vec![1.0, f64::NAN, 2.0]).is_err());
        let mut bad = x.clone();
        bad[(1, 1)] = f64::INFINITY;
        assert!(Dataset::new(bad, vec![1.0; 3]).is_err());
        assert!(Dataset::new(DMatrix::zeros(0, 0), vec![]).is_err());
        assert!(Dataset::new(x, vec![0.0; 3]).is_ok());
    }

    #[test]
    fn columns_and_residuals() {
        let data = Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], vec![10.0, 20.0]).unwrap();
        assert_eq!(data.column(0), &[1.0, 3.0]);
        assert_eq!(data.column(1), &[2.0, 4.0]);
        assert_eq!(data.residuals(1.0, &[1.0, 2.0]), vec![10.0 - 1.0 - 1.0 - 4.0, 20.0 - 1.0 - 3.0 - 8.0]);
        let s = data.subset(&[1]);
        assert_eq!(s.response(), &[20.0]);
        assert_eq!(s.column(1), &[4.0]);
    }
}
