use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

use super::HiddenLayer;
use crate::batch;
use crate::linalg::{spd_solve, GramState};
use crate::{Error, Result};

/// Stream `X` through the hidden layer in row batches and accumulate `HᵀH`, `Hᵀy`.
pub fn accumulate_gram(
    layer: &HiddenLayer,
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    batch_rows: usize,
) -> Result<GramState> {
    if x.nrows() != y.len() {
        return Err(Error::shape("training targets", x.nrows(), y.len()));
    }
    if x.ncols() != layer.input_dim() {
        return Err(Error::shape("training input columns", layer.input_dim(), x.ncols()));
    }
    let dim = layer.width();
    let mut state = GramState::new(dim);
    batch::map_fold(
        x.nrows(),
        batch_rows,
        |r| {
            let h = layer.transform(x.slice(s![r.clone(), ..]))?;
            GramState::from_batch(h.view(), y.slice(s![r]), dim)
        },
        |_, partial| state.merge(&partial),
    )?;
    Ok(state)
}

/// A trained single-output ELM.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    layer: HiddenLayer,
    beta: Array1<f64>,
    gamma: f64,
    p: Array2<f64>,
}

impl ElmModel {
    /// Solve `(HᵀH + γI)β = Hᵀy` over row batches of at most `batch_rows`.
    pub fn train(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        layer: HiddenLayer,
        gamma: f64,
        batch_rows: usize,
    ) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyData("cannot train on zero samples"));
        }
        let state = accumulate_gram(&layer, x, y, batch_rows)?;
        Self::from_gram(layer, &state, gamma)
    }

    /// Finish training from an already accumulated Gram state.
    pub fn from_gram(layer: HiddenLayer, state: &GramState, gamma: f64) -> Result<Self> {
        if state.dim() != layer.width() {
            return Err(Error::shape("gram dimension", layer.width(), state.dim()));
        }
        if state.count() == 0 {
            return Err(Error::EmptyData("cannot train on zero samples"));
        }
        let (beta, p) = spd_solve(state, gamma)?;
        Ok(Self { layer, beta, gamma, p })
    }

    pub fn from_parts(layer: HiddenLayer, beta: Array1<f64>, gamma: f64, p: Array2<f64>) -> Result<Self> {
        let l = layer.width();
        if beta.len() != l {
            return Err(Error::shape("output weights", l, beta.len()));
        }
        if p.dim() != (l, l) {
            return Err(Error::shape("inverse system matrix", format!("{l}x{l}"), format!("{}x{}", p.nrows(), p.ncols())));
        }
        Ok(Self { layer, beta, gamma, p })
    }

    pub fn layer(&self) -> &HiddenLayer {
        &self.layer
    }

    pub fn beta(&self) -> &Array1<f64> {
        &self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(HᵀH + γI)⁻¹` from training.
    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn hidden(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.layer.transform(x)
    }

    pub fn predict(&self, x: ArrayView2<f64>, batch_rows: usize) -> Result<Array1<f64>> {
        if x.ncols() != self.layer.input_dim() {
            return Err(Error::shape("prediction input columns", self.layer.input_dim(), x.ncols()));
        }
        let mut out = Array1::zeros(x.nrows());
        batch::map_fold(
            x.nrows(),
            batch_rows,
            |r| Ok(self.layer.transform(x.slice(s![r, ..]))?.dot(&self.beta)),
            |r, yhat| {
                out.slice_mut(s![r]).assign(&yhat);
                Ok(())
            },
        )?;
        Ok(out)
    }
}
