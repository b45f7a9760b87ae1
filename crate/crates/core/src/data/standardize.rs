use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::{Error, Result};

/// Per-feature affine map to zero mean and unit (population) deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
    /// Features that were constant on the fitting data; their deviation is 1.
    pub constant: Vec<bool>,
}

impl StandardizationParams {
    pub fn fit(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyData("cannot standardize zero rows"));
        }
        let mean = x.mean_axis(Axis(0)).expect("nonempty");
        let mut std = x.std_axis(Axis(0), 0.0);
        let mut constant = vec![false; std.len()];
        for ((s, m), flag) in std.iter_mut().zip(&mean).zip(&mut constant) {
            if !(*s > 1e-12 * m.abs().max(1.0)) {
                *s = 1.0;
                *flag = true;
            }
        }
        Ok(Self { mean, std, constant })
    }

    /// Identity map for `d` features.
    pub fn identity(d: usize) -> Self {
        Self {
            mean: Array1::zeros(d),
            std: Array1::ones(d),
            constant: vec![false; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn has_constant(&self) -> bool {
        self.constant.iter().any(|&c| c)
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        Ok((&x - &self.mean) / &self.std)
    }

    pub fn unapply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(x)?;
        Ok(&x * &self.std + &self.mean)
    }

    fn check(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::shape("standardization columns", self.dim(), x.ncols()));
        }
        Ok(())
    }
}
