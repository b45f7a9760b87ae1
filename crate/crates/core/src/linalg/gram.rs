use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::{Error, Result};

/// Running `HᵀH`, `Hᵀy` and sample count over a stream of row batches.
#[derive(Debug, Clone, PartialEq)]
pub struct GramState {
    gram: Array2<f64>,
    moment: Array1<f64>,
    count: usize,
}

impl GramState {
    pub fn new(dim: usize) -> Self {
        Self {
            gram: Array2::zeros((dim, dim)),
            moment: Array1::zeros(dim),
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.moment.len()
    }

    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    pub fn moment(&self) -> &Array1<f64> {
        &self.moment
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Add `batchᵀ·batch` and `batchᵀ·targets`.
    ///
    /// The batch product is formed separately and then added, so splitting
    /// work across partial states and merging them in row order reproduces
    /// sequential accumulation bit for bit.
    pub fn accumulate(&mut self, batch: ArrayView2<f64>, targets: ArrayView1<f64>) -> Result<()> {
        let partial = Self::from_batch(batch, targets, self.dim())?;
        self.merge(&partial)
    }

    /// A fresh state holding a single batch.
    pub fn from_batch(
        batch: ArrayView2<f64>,
        targets: ArrayView1<f64>,
        dim: usize,
    ) -> Result<Self> {
        if batch.ncols() != dim {
            return Err(Error::shape("gram_accumulate columns", dim, batch.ncols()));
        }
        if targets.len() != batch.nrows() {
            return Err(Error::shape(
                "gram_accumulate targets",
                batch.nrows(),
                targets.len(),
            ));
        }
        Ok(Self {
            gram: batch.t().dot(&batch),
            moment: batch.t().dot(&targets),
            count: batch.nrows(),
        })
    }

    /// Elementwise sum of two states over disjoint rows.
    pub fn merge(&mut self, other: &GramState) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::shape("gram merge", self.dim(), other.dim()));
        }
        self.gram += &other.gram;
        self.moment += &other.moment;
        self.count += other.count;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, s, Array};

    #[test]
    fn identity_batch() {
        let mut st = GramState::new(2);
        st.accumulate(array![[1.0, 0.0], [0.0, 1.0]].view(), array![3.0, 4.0].view())
            .unwrap();
        assert_eq!(st.gram(), &Array2::eye(2));
        assert_eq!(st.moment(), &array![3.0, 4.0]);
        assert_eq!(st.count(), 2);
    }

    #[test]
    fn hand_multiplied_batch() {
        let mut st = GramState::new(2);
        st.accumulate(array![[1.0, 2.0], [3.0, 4.0]].view(), array![1.0, 1.0].view())
            .unwrap();
        assert_eq!(st.gram(), &array![[10.0, 14.0], [14.0, 20.0]]);
        assert_eq!(st.moment(), &array![4.0, 6.0]);
    }

    #[test]
    fn one_call_equals_two_halves() {
        let b = Array::from_shape_fn((10, 3), |(i, j)| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let t = Array::from_shape_fn(10, |i| i as f64 * 0.25);
        let mut whole = GramState::new(3);
        whole.accumulate(b.view(), t.view()).unwrap();
        let mut halves = GramState::new(3);
        halves
            .accumulate(b.slice(s![..5, ..]), t.slice(s![..5]))
            .unwrap();
        halves
            .accumulate(b.slice(s![5.., ..]), t.slice(s![5..]))
            .unwrap();
        assert_eq!(whole.gram(), halves.gram());
        assert_eq!(whole.moment(), halves.moment());
        assert_eq!(halves.count(), 10);
    }

    #[test]
    fn shape_errors() {
        let mut st = GramState::new(3);
        let err = st
            .accumulate(Array2::zeros((2, 2)).view(), Array1::zeros(2).view())
            .unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
        let err = st
            .accumulate(Array2::zeros((2, 3)).view(), Array1::zeros(3).view())
            .unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
        assert!(st.merge(&GramState::new(4)).is_err());
    }
}
