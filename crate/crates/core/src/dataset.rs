use crate::error::{Axis, Error, Result};

/// An `n x m` binary matrix. Row and column ids are 1-based at the API
/// boundary; storage is a dense row-major bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryDataset {
    /// All-zero dataset.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDataset { rows, cols });
        }
        Ok(BinaryDataset {
            rows,
            cols,
            bits: vec![false; rows * cols],
        })
    }

    /// Builds a dataset from per-row lists of 1-based column ids holding a one.
    pub fn from_rows<R, I>(cols: usize, rows: R) -> Result<Self>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
        let mut data = BinaryDataset::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            for &j in row {
                data.set(i + 1, j, true)?;
            }
        }
        Ok(data)
    }

    /// Builds a dataset from a dense 0/1 matrix, one inner vector per row.
    pub fn from_dense(matrix: &[Vec<u8>]) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        let mut data = BinaryDataset::zeros(rows, cols)?;
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimMismatch {
                    left: (rows, cols),
                    right: (i + 1, row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                data.bits[i * cols + j] = v != 0;
            }
        }
        Ok(data)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn check_bounds(&self, row: usize, col: usize) -> Result<()> {
        check_id(Axis::Row, row, self.rows)?;
        check_id(Axis::Col, col, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> Result<bool> {
        self.check_bounds(row, col)?;
        Ok(self.bits[(row - 1) * self.cols + (col - 1)])
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) -> Result<()> {
        self.check_bounds(row, col)?;
        self.bits[(row - 1) * self.cols + (col - 1)] = value;
        Ok(())
    }

    /// Row-major cell access by zero-based flat index.
    pub(crate) fn cell(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// 1-based column ids holding a one in `row`.
    pub fn row_ones(&self, row: usize) -> Vec<usize> {
        let start = (row - 1) * self.cols;
        (0..self.cols)
            .filter(|&j| self.bits[start + j])
            .map(|j| j + 1)
            .collect()
    }
}

pub(crate) fn check_id(axis: Axis, id: usize, bound: usize) -> Result<()> {
    if id == 0 {
        return Err(Error::ZeroId);
    }
    if id > bound {
        return Err(Error::OutOfBounds { axis, id, bound });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_dimensions() {
        assert!(matches!(
            BinaryDataset::zeros(0, 3),
            Err(Error::EmptyDataset { .. })
        ));
        assert!(BinaryDataset::from_rows(0, vec![vec![]]).is_err());
    }

    #[test]
    fn ids_are_one_based() {
        let d = BinaryDataset::from_rows(3, vec![vec![1, 3], vec![]]).unwrap();
        assert!(d.get(1, 1).unwrap());
        assert!(!d.get(1, 2).unwrap());
        assert!(d.get(1, 3).unwrap());
        assert!(matches!(d.get(0, 1), Err(Error::ZeroId)));
        assert!(matches!(
            d.get(3, 1),
            Err(Error::OutOfBounds {
                axis: Axis::Row,
                id: 3,
                bound: 2
            })
        ));
        assert_eq!(d.row_ones(1), vec![1, 3]);
        assert_eq!(d.count_ones(), 2);
    }

    #[test]
    fn dense_rows_must_be_rectangular() {
        assert!(BinaryDataset::from_dense(&[vec![1, 0], vec![1]]).is_err());
        let d = BinaryDataset::from_dense(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(d.dims(), (2, 2));
        assert_eq!(d.count_ones(), 2);
    }
}
