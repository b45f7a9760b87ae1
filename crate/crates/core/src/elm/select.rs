use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ElmModel, HiddenLayer};
use crate::batch;
use crate::linalg::{GramState, SpdFactor};
use crate::{Error, Result, DEFAULT_BATCH_ROWS};

/// Validation errors within this relative distance of the minimum count as
/// tied; absorbs rounding differences between grid points.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Outcome of a γ grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSelection {
    pub gamma: f64,
    pub grid: Vec<f64>,
    /// Validation MSE per grid point; `inf` where the system was singular.
    pub val_mse: Vec<f64>,
}

/// Pick γ from `grid` by validation MSE on a seeded hold-out split.
/// Ties go to the largest γ.
pub fn select_gamma(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    layer: &HiddenLayer,
    grid: &[f64],
    val_fraction: f64,
    seed: u64,
) -> Result<GammaSelection> {
    validate(x, y, layer, grid, val_fraction, seed, DEFAULT_BATCH_ROWS).map(|(s, _)| s)
}

/// Select γ and train on all rows with it.
///
/// The fit and validation Gram states are merged for the final solve, so
/// the data passes through the hidden layer only once.
pub fn fit_validated(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    layer: HiddenLayer,
    grid: &[f64],
    val_fraction: f64,
    seed: u64,
    batch_rows: usize,
) -> Result<(ElmModel, GammaSelection)> {
    let (selection, full) = validate(x, y, &layer, grid, val_fraction, seed, batch_rows)?;
    let model = ElmModel::from_gram(layer, &full, selection.gamma)?;
    Ok((model, selection))
}

fn split_rows(n: usize, val_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::Config(format!("validation fraction must lie in (0, 1), got {val_fraction}")));
    }
    let n_fit = ((n as f64) * (1.0 - val_fraction) + 1e-9).floor() as usize;
    if n_fit == 0 || n_fit >= n {
        return Err(Error::Config(format!(
            "validation split of {n} samples at fraction {val_fraction} leaves an empty side"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fit = perm[..n_fit].to_vec();
    let mut val = perm[n_fit..].to_vec();
    fit.sort_unstable();
    val.sort_unstable();
    Ok((fit, val))
}

fn validate(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    layer: &HiddenLayer,
    grid: &[f64],
    val_fraction: f64,
    seed: u64,
    batch_rows: usize,
) -> Result<(GammaSelection, GramState)> {
    if grid.is_empty() {
        return Err(Error::Config("γ grid is empty".into()));
    }
    if let Some(g) = grid.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::Config(format!("γ grid values must be positive and finite, got {g}")));
    }
    if x.nrows() != y.len() {
        return Err(Error::shape("training targets", x.nrows(), y.len()));
    }
    if x.ncols() != layer.input_dim() {
        return Err(Error::shape("training input columns", layer.input_dim(), x.ncols()));
    }
    let (fit_rows, val_rows) = split_rows(x.nrows(), val_fraction, seed)?;
    let dim = layer.width();

    let gather = |rows: &[usize]| -> Result<(Array2<f64>, Array1<f64>)> {
        Ok((layer.transform(x.select(Axis(0), rows).view())?, y.select(Axis(0), rows)))
    };

    let mut fit_gram = GramState::new(dim);
    batch::map_fold(
        fit_rows.len(),
        batch_rows,
        |r| {
            let (h, t) = gather(&fit_rows[r])?;
            GramState::from_batch(h.view(), t.view(), dim)
        },
        |_, partial| fit_gram.merge(&partial),
    )?;

    // One column of candidate weights per grid point; singular systems get
    // zero weights and are marked invalid.
    let mut betas = Array2::<f64>::zeros((dim, grid.len()));
    let mut solvable = vec![true; grid.len()];
    let mut first_err = None;
    for (k, &g) in grid.iter().enumerate() {
        match SpdFactor::new(fit_gram.gram().view(), g).and_then(|f| f.solve(fit_gram.moment().view())) {
            Ok(b) => betas.column_mut(k).assign(&b),
            Err(e) => {
                solvable[k] = false;
                first_err.get_or_insert(e);
            }
        }
    }
    if !solvable.iter().any(|&s| s) {
        return Err(first_err.expect("at least one grid point"));
    }

    let mut sse = vec![0.0; grid.len()];
    let mut val_gram = GramState::new(dim);
    batch::map_fold(
        val_rows.len(),
        batch_rows,
        |r| {
            let (h, t) = gather(&val_rows[r])?;
            let preds = h.dot(&betas);
            let errs: Vec<f64> = preds
                .axis_iter(Axis(1))
                .map(|col| col.iter().zip(&t).map(|(p, v)| (p - v) * (p - v)).sum())
                .collect();
            Ok((GramState::from_batch(h.view(), t.view(), dim)?, errs))
        },
        |_, (partial, errs)| {
            for (acc, e) in sse.iter_mut().zip(errs) {
                *acc += e;
            }
            val_gram.merge(&partial)
        },
    )?;

    let n_val = val_rows.len() as f64;
    let val_mse: Vec<f64> = sse
        .iter()
        .zip(&solvable)
        .map(|(&s, &ok)| if ok { s / n_val } else { f64::INFINITY })
        .collect();
    let best = val_mse.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma = grid
        .iter()
        .zip(&val_mse)
        .filter(|(_, &m)| m <= best * (1.0 + TIE_TOLERANCE))
        .map(|(&g, _)| g)
        .fold(f64::NEG_INFINITY, f64::max);

    fit_gram.merge(&val_gram)?;
    Ok((
        GammaSelection {
            gamma,
            grid: grid.to_vec(),
            val_mse,
        },
        fit_gram,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elm::parse_specs;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn layer(d: usize) -> HiddenLayer {
        HiddenLayer::new(d, &parse_specs("linear:1,tanh:10").unwrap(), 3).unwrap()
    }

    fn log_grid(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|k| 10f64.powi(k)).collect()
    }

    #[test]
    fn singleton_grid() {
        let x = Array2::from_shape_fn((30, 1), |(i, _)| i as f64 / 30.0);
        let y = x.column(0).mapv(|v| v * v);
        let s = select_gamma(x.view(), y.view(), &layer(1), &[0.37], 0.3, 1).unwrap();
        assert_eq!(s.gamma, 0.37);
        assert_eq!(s.val_mse.len(), 1);
    }

    #[test]
    fn pure_noise_favors_maximum_shrinkage() {
        // A single draw can land anywhere on a nearly flat curve, so the claim
        // is checked on the validation curve averaged over draws.
        let grid = log_grid(-6, 6);
        let mut mean = vec![0.0; grid.len()];
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_simple_fn((400, 1), || rng.random::<f64>() * 2.0 - 1.0);
            let y = Array1::from_shape_simple_fn(400, || StandardNormal.sample(&mut rng));
            let s = select_gamma(x.view(), y.view(), &layer(1), &grid, 0.25, seed).unwrap();
            for (m, v) in mean.iter_mut().zip(&s.val_mse) {
                *m += v / 40.0;
            }
        }
        let argmin = (0..grid.len()).min_by(|&a, &b| mean[a].total_cmp(&mean[b])).unwrap();
        assert_eq!(grid[argmin], 1e6);
    }

    #[test]
    fn exact_ties_go_to_largest_gamma() {
        // Zero targets give zero error for every γ.
        let x = Array2::from_shape_fn((40, 1), |(i, _)| i as f64 / 40.0);
        let y = Array1::zeros(40);
        let s = select_gamma(x.view(), y.view(), &layer(1), &[1e-3, 1.0, 10.0], 0.25, 0).unwrap();
        assert_eq!(s.gamma, 10.0);
    }

    #[test]
    fn smooth_data_prefers_small_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Array2::from_shape_simple_fn((500, 1), || rng.random::<f64>() * 3.0 - 1.5);
        let y = x.column(0).mapv(|v| (2.0 * v).sin() + 0.3 * v)
            + Array1::from_shape_simple_fn(500, || { let e: f64 = StandardNormal.sample(&mut rng); 0.01 * e });
        let grid = log_grid(-6, 6);
        let s = select_gamma(x.view(), y.view(), &layer(1), &grid, 0.25, 4).unwrap();
        // The minimum sits at the left edge or inside the grid, never at the right.
        let argmin = (0..grid.len()).min_by(|&a, &b| s.val_mse[a].total_cmp(&s.val_mse[b])).unwrap();
        assert!(argmin < grid.len() - 1);
        assert!(s.gamma < 1.0);
        assert!(s.val_mse[grid.len() - 1] > 100.0 * s.val_mse[argmin]);
    }

    #[test]
    fn validated_model_matches_direct_training() {
        let x = Array2::from_shape_fn((90, 2), |(i, j)| ((i * (j + 3)) % 17) as f64 / 17.0);
        let y = x.map_axis(Axis(1), |r| r[0] - r[1] * r[1]);
        let (m, sel) = fit_validated(x.view(), y.view(), layer(2), &log_grid(-4, 2), 0.2, 8, 16).unwrap();
        let direct = ElmModel::train(x.view(), y.view(), layer(2), sel.gamma, 90).unwrap();
        let diff = (m.beta() - direct.beta()).mapv(f64::abs).sum() / direct.beta().mapv(f64::abs).sum();
        assert!(diff < 1e-9);
    }

    #[test]
    fn degenerate_configuration() {
        let x = Array2::<f64>::zeros((5, 1));
        let y = Array1::<f64>::zeros(5);
        assert!(matches!(select_gamma(x.view(), y.view(), &layer(1), &[], 0.2, 0), Err(Error::Config(_))));
        assert!(matches!(select_gamma(x.view(), y.view(), &layer(1), &[1.0], 0.0, 0), Err(Error::Config(_))));
        assert!(matches!(select_gamma(x.view(), y.view(), &layer(1), &[1.0], 0.9, 0), Err(Error::Config(_))));
        assert!(matches!(select_gamma(x.view(), y.view(), &layer(1), &[-1.0], 0.5, 0), Err(Error::Config(_))));
        let single = Array2::<f64>::zeros((1, 1));
        assert!(select_gamma(single.view(), Array1::zeros(1).view(), &layer(1), &[1.0], 0.5, 0).is_err());
    }

    #[test]
    fn split_is_seeded_partition() {
        let (a, b) = split_rows(50, 0.3, 5).unwrap();
        assert_eq!(a.len(), 35);
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert_eq!(split_rows(50, 0.3, 5).unwrap(), (a, b));
    }
}
