//! Functions on cell spaces, stored as dense value vectors.

use crate::error::{Error, Result};
use crate::space::CellSet;

/// A real-valued function on the cells of a space.
///
/// Values are finite by construction; loaders reject NaN and infinities.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFn {
    values: Vec<f64>,
}

impl CellFn {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Model(format!("non-finite value {v} at cell {i}")));
            }
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// Indicator of a cell set on a space of n cells.
    pub fn indicator(set: &CellSet, n: usize) -> Self {
        let mut values = vec![0.0; n];
        for i in set.iter() {
            values[i as usize] = 1.0;
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: u32) -> f64 {
        self.values[i as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise scaling by a finite factor.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| lambda * v).collect())
    }

    /// Pointwise shift by a finite constant.
    pub fn shifted(&self, k: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v + k).collect())
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// True when every value is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values() {
        assert!(CellFn::new(vec![1.0, f64::NAN]).is_err());
        assert!(CellFn::new(vec![f64::INFINITY]).is_err());
        assert!(CellFn::new(vec![1.0, -2.5]).is_ok());
    }

    #[test]
    fn indicator_marks_exactly_the_set() {
        let s = CellSet::from_indices(vec![1, 3]);
        let f = CellFn::indicator(&s, 5);
        assert_eq!(f.values(), &[0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn scaling_rejects_overflow() {
        let f = CellFn::new(vec![1e308]).unwrap();
        assert!(f.scaled(10.0).is_err());
        assert_eq!(f.scaled(0.5).unwrap().values(), &[0.5e308]);
    }
}
