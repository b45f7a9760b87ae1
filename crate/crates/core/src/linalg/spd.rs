use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::{symmetrize, GramState};
use crate::{Error, Result};

/// Cholesky factor `L` of `gram + γI`, with `L·Lᵀ = gram + γI`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    lower: Array2<f64>,
    gamma: f64,
}

impl SpdFactor {
    pub fn new(gram: ArrayView2<f64>, gamma: f64) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(Error::shape("spd factor", format!("{n}x{n}"), format!("{n}x{}", gram.ncols())));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("regularization must be finite and >= 0, got {gamma}")));
        }
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut diag = gram[[j, j]] + gamma;
            for k in 0..j {
                diag -= l[[j, k]] * l[[j, k]];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::Singular { pivot: j, value: diag });
            }
            let d = diag.sqrt();
            l[[j, j]] = d;
            for i in (j + 1)..n {
                let mut v = gram[[i, j]];
                let (ri, rj) = (l.row(i), l.row(j));
                for k in 0..j {
                    v -= ri[k] * rj[k];
                }
                l[[i, j]] = v / d;
            }
        }
        Ok(Self { lower: l, gamma })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.lower
    }

    /// `L·Lᵀ`, i.e. the factored matrix.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.lower.dot(&self.lower.t())
    }

    /// Solve `(gram + γI)·x = b` by forward then backward substitution.
    pub fn solve(&self, b: ArrayView1<f64>) -> Result<Array1<f64>> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::shape("spd solve rhs", n, b.len()));
        }
        let l = &self.lower;
        let mut z = b.to_owned();
        for i in 0..n {
            let mut v = z[i];
            for k in 0..i {
                v -= l[[i, k]] * z[k];
            }
            z[i] = v / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut v = z[i];
            for k in (i + 1)..n {
                v -= l[[k, i]] * z[k];
            }
            z[i] = v / l[[i, i]];
        }
        Ok(z)
    }

    /// `(gram + γI)⁻¹ = L⁻ᵀ·L⁻¹`, symmetrized.
    pub fn inverse(&self) -> Array2<f64> {
        let n = self.dim();
        let l = &self.lower;
        // Column-by-column inversion of the lower triangle.
        let mut inv = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            inv[[j, j]] = 1.0 / l[[j, j]];
            for i in (j + 1)..n {
                let mut v = 0.0;
                for k in j..i {
                    v -= l[[i, k]] * inv[[k, j]];
                }
                inv[[i, j]] = v / l[[i, i]];
            }
        }
        symmetrize(inv.t().dot(&inv).view())
    }
}

/// Ridge solution of the accumulated normal equations.
///
/// Returns `β` with `(gram + γI)β = moment` and `P = (gram + γI)⁻¹`.
pub fn spd_solve(state: &GramState, gamma: f64) -> Result<(Array1<f64>, Array2<f64>)> {
    let factor = SpdFactor::new(state.gram().view(), gamma)?;
    let beta = factor.solve(state.moment().view())?;
    Ok((beta, factor.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array};
    use proptest::prelude::*;

    fn state_from_batch(batch: Array2<f64>, targets: Array1<f64>) -> GramState {
        let mut st = GramState::new(batch.ncols());
        st.accumulate(batch.view(), targets.view()).unwrap();
        st
    }

    #[test]
    fn diagonal_system() {
        let st = state_from_batch(Array2::eye(2), array![2.0, 4.0]);
        let (beta, p) = spd_solve(&st, 1.0).unwrap();
        assert!((beta - array![1.0, 2.0]).iter().all(|e| e.abs() < 1e-15));
        assert!((p - Array2::<f64>::eye(2) * 0.5).iter().all(|e| e.abs() < 1e-15));
    }

    #[test]
    fn two_by_two_hand_elimination() {
        let f = SpdFactor::new(array![[4.0, 2.0], [2.0, 3.0]].view(), 0.0).unwrap();
        let beta = f.solve(array![1.0, 1.0].view()).unwrap();
        assert!((beta[0] - 0.125).abs() < 1e-15);
        assert!((beta[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn huge_ridge_shrinks_to_zero() {
        let b = Array::from_shape_fn((20, 4), |(i, j)| ((i + 2 * j) % 7) as f64 / 7.0);
        let t = Array::from_shape_fn(20, |i| (i % 3) as f64);
        let st = state_from_batch(b, t);
        let (beta, _) = spd_solve(&st, 1e12).unwrap();
        assert!(beta.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn singular_reports_pivot() {
        let f = SpdFactor::new(array![[1.0, 1.0], [1.0, 1.0]].view(), 0.0);
        match f {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(matches!(
            SpdFactor::new(array![[-1.0]].view(), 0.0),
            Err(Error::Singular { pivot: 0, .. })
        ));
    }

    #[test]
    fn negative_gamma_rejected() {
        assert!(matches!(
            SpdFactor::new(Array2::eye(2).view(), -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn factor_reconstructs_input() {
        let a = array![[5.0, 1.0, 0.5], [1.0, 4.0, -0.3], [0.5, -0.3, 3.0]];
        let f = SpdFactor::new(a.view(), 0.25).unwrap();
        let target = &a + &(Array2::<f64>::eye(3) * 0.25);
        let rec = f.reconstruct();
        let rel = (&rec - &target).iter().map(|v| v.abs()).fold(0.0, f64::max)
            / target.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(rel < 1e-10);
    }

    /// SPD matrix `Q·diag(λ)·Qᵀ` with eigenvalues spread between 1 and `cond`.
    fn spd_with_condition(n: usize, cond: f64, seed: u64) -> Array2<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Gram-Schmidt on a random matrix gives an orthogonal Q.
        let mut q = Array2::<f64>::from_shape_fn((n, n), |_| rng.random::<f64>() - 0.5);
        for j in 0..n {
            for k in 0..j {
                let d = q.column(j).dot(&q.column(k));
                let ck = q.column(k).to_owned();
                q.column_mut(j).scaled_add(-d, &ck);
            }
            let norm = q.column(j).dot(&q.column(j)).sqrt();
            q.column_mut(j).mapv_inplace(|v| v / norm);
        }
        let lambda = Array1::from_shape_fn(n, |i| cond.powf(i as f64 / (n - 1) as f64));
        let scaled = &q * &lambda;
        symmetrize(scaled.dot(&q.t()).view())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn inverse_is_accurate(seed in 0u64..1000, n in 2usize..12, log_cond in 0.0f64..8.0) {
            let a = spd_with_condition(n, 10f64.powf(log_cond), seed);
            let p = SpdFactor::new(a.view(), 0.0).unwrap().inverse();
            let resid = a.dot(&p) - Array2::<f64>::eye(n);
            let max = resid.iter().map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert!(max < 1e-8, "max |AP - I| = {max:e}");
            prop_assert_eq!(&p, &p.t());
        }
    }
}
