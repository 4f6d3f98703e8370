use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{argmax, Classifier, WeightMatrix};
use crate::error::{invalid, Error, Result};
use crate::types::{ActionId, ContextVector};

#[derive(Debug, Clone)]
struct Posterior {
    precision: DMatrix<f64>,
    // precision-weighted mean: prior term plus Σ r x / σ²
    moment: DVector<f64>,
    mean: DVector<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl Posterior {
    fn refresh(&mut self) -> Result<&Cholesky<f64, Dyn>> {
        if self.chol.is_none() {
            let c = Cholesky::new(self.precision.clone()).ok_or_else(|| {
                Error::Numerical("Thompson precision matrix is not positive definite".into())
            })?;
            self.mean = c.solve(&self.moment);
            self.chol = Some(c);
        }
        Ok(self.chol.as_ref().unwrap())
    }
}

/// Gaussian Thompson sampling with one Bayesian linear regression per action.
#[derive(Debug, Clone)]
pub struct ThompsonState {
    arms: Vec<Posterior>,
    prior_variance: f64,
    noise_variance: f64,
    m: usize,
}

impl ThompsonState {
    pub fn new(n: usize, m: usize, prior_variance: f64, noise_variance: f64) -> Result<Self> {
        Self::with_prior_means(&WeightMatrix::zeros(n, m), prior_variance, noise_variance)
    }

    /// Prior `N(w_a, ν² I)` per action, centred on the given weight rows.
    pub fn with_prior_means(
        means: &WeightMatrix,
        prior_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let (n, m) = (means.n_actions(), means.dim());
        if n == 0 || m == 0 {
            return invalid("Thompson sampling needs at least one action and one feature");
        }
        if !(prior_variance > 0.0 && noise_variance > 0.0) {
            return invalid("prior and noise variances must be positive");
        }
        let arms = (0..n)
            .map(|a| {
                let mean = DVector::from_column_slice(means.row(a));
                Posterior {
                    precision: DMatrix::identity(m, m) / prior_variance,
                    moment: &mean / prior_variance,
                    mean,
                    chol: None,
                }
            })
            .collect();
        Ok(Self {
            arms,
            prior_variance,
            noise_variance,
            m,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.arms.len()
    }

    pub fn prior_variance(&self) -> f64 {
        self.prior_variance
    }

    pub fn precision(&self, a: ActionId) -> &DMatrix<f64> {
        &self.arms[a.0].precision
    }

    pub fn posterior_mean(&mut self, a: ActionId) -> Result<&DVector<f64>> {
        let arm = &mut self.arms[a.0];
        arm.refresh()?;
        Ok(&arm.mean)
    }

    pub fn means(&mut self) -> Result<WeightMatrix> {
        let mut data = Vec::with_capacity(self.arms.len() * self.m);
        for arm in &mut self.arms {
            arm.refresh()?;
            data.extend(arm.mean.iter());
        }
        WeightMatrix::from_rows(self.arms.len(), self.m, data)
    }

    fn check(&self, x: &ContextVector) -> Result<DVector<f64>> {
        if x.dim() != self.m {
            return invalid(format!(
                "context has dimension {}, Thompson expects {}",
                x.dim(),
                self.m
            ));
        }
        Ok(DVector::from_column_slice(x.values()))
    }

    /// Samples `ŵ_a ~ N(μ_a, P_a⁻¹)` per action and returns `argmax ŵ_a·x`.
    ///
    /// With `P = L Lᵀ`, `ŵ = μ + L⁻ᵀ z` has covariance `P⁻¹`.
    pub fn select<R: Rng + ?Sized>(&mut self, x: &ContextVector, rng: &mut R) -> Result<ActionId> {
        let xv = self.check(x)?;
        let m = self.m;
        let mut scores = Vec::with_capacity(self.arms.len());
        for arm in &mut self.arms {
            let upper = arm.refresh()?.l().transpose();
            let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
            let noise = upper
                .solve_upper_triangular(&z)
                .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
            scores.push((&arm.mean + noise).dot(&xv));
        }
        Ok(ActionId(argmax(&scores)))
    }

    /// Conjugate update: `P_a += x xᵀ / σ²`, moment `+= r x / σ²`.
    pub fn update(&mut self, x: &ContextVector, a: ActionId, reward: f64) -> Result<()> {
        let xv = self.check(x)?;
        let s2 = self.noise_variance;
        let arm = self
            .arms
            .get_mut(a.0)
            .ok_or_else(|| Error::Validation(format!("action {a} out of range")))?;
        if xv.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        arm.precision.ger(1.0 / s2, &xv, &xv, 1.0);
        arm.moment.axpy(reward / s2, &xv, 1.0);
        arm.chol = None;
        Ok(())
    }
}

impl Classifier for ThompsonState {
    fn predict(&self, x: &ContextVector) -> ActionId {
        let mut scratch = self.clone();
        match scratch.means() {
            Ok(w) => ActionId(argmax(&w.scores(x.values()))),
            Err(_) => ActionId(0),
        }
    }
}
