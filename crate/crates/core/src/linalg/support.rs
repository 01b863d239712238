use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A set of matrix positions, stored as a dense column-major mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
}

impl SupportSet {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self { rows, cols, mask: vec![false; rows * cols] }
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self { rows, cols, mask: vec![true; rows * cols] }
    }

    /// Build from explicit `(row, col)` pairs; out-of-range or repeated pairs are rejected.
    pub fn from_indices<I>(rows: usize, cols: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut s = Self::empty(rows, cols);
        for (i, j) in indices {
            if i >= rows || j >= cols {
                return Err(Error::InvalidArgument(format!(
                    "index ({i}, {j}) outside a {rows}x{cols} support"
                )));
            }
            let slot = &mut s.mask[j * rows + i];
            if *slot {
                return Err(Error::InvalidArgument(format!("duplicate support index ({i}, {j})")));
            }
            *slot = true;
        }
        Ok(s)
    }

    /// Positions where `m` is nonzero.
    pub fn from_nonzeros(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            mask: m.as_slice().iter().map(|&x| x != 0.0).collect(),
        }
    }

    /// Each entry included independently with probability `rho`.
    pub fn bernoulli<R: Rng + ?Sized>(rows: usize, cols: usize, rho: f64, rng: &mut R) -> Self {
        let mask = (0..rows * cols).map(|_| rng.random::<f64>() < rho).collect();
        Self { rows, cols, mask }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.rows + i]
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// `|Ω| / (rows·cols)`.
    pub fn density(&self) -> f64 {
        if self.mask.is_empty() {
            0.0
        } else {
            self.len() as f64 / self.mask.len() as f64
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    /// Positions in column-major order.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| (k % self.rows, k / self.rows))
            .collect()
    }

    /// Column-major mask, aligned with `Matrix::as_slice`.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// 0/1 indicator matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_iterator(
            self.rows,
            self.cols,
            self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }),
        )
    }

    pub(crate) fn check_shape(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows != rows || self.cols != cols {
            return Err(Error::DimensionMismatch(format!(
                "support is {}x{}, matrix is {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(SupportSet::from_indices(2, 2, [(0, 0), (0, 0)]).is_err());
        assert!(SupportSet::from_indices(2, 2, [(2, 0)]).is_err());
        let s = SupportSet::from_indices(2, 3, [(1, 2), (0, 0)]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.indices(), vec![(0, 0), (1, 2)]);
        assert!(s.contains(1, 2) && !s.contains(1, 1));
    }

    #[test]
    fn complement_partitions() {
        let s = SupportSet::from_indices(3, 3, [(0, 1), (2, 2)]).unwrap();
        let c = s.complement();
        assert_eq!(s.len() + c.len(), 9);
        assert!(s.mask().iter().zip(c.mask()).all(|(a, b)| a != b));
        assert!((s.density() - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn nonzero_support_round_trips_indicator() {
        let s = SupportSet::from_indices(3, 2, [(1, 0), (2, 1)]).unwrap();
        assert_eq!(SupportSet::from_nonzeros(&s.to_matrix()), s);
    }
}
