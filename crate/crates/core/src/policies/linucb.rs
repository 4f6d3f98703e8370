use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{argmax, Classifier, WeightMatrix};
use crate::error::{invalid, Error, Result};
use crate::types::{ActionId, ContextVector};

#[derive(Debug, Clone)]
struct Arm {
    design: DMatrix<f64>,
    response: DVector<f64>,
    // factor of `design`, dropped on every update and rebuilt on demand
    chol: Option<Cholesky<f64, Dyn>>,
}

impl Arm {
    fn new(m: usize) -> Self {
        Self {
            design: DMatrix::identity(m, m),
            response: DVector::zeros(m),
            chol: None,
        }
    }

    fn factor(&mut self) -> Result<&Cholesky<f64, Dyn>> {
        if self.chol.is_none() {
            let c = Cholesky::new(self.design.clone()).ok_or_else(|| {
                Error::Numerical("LinUCB design matrix is not positive definite".into())
            })?;
            self.chol = Some(c);
        }
        Ok(self.chol.as_ref().unwrap())
    }
}

/// Per-action ridge regression with an upper-confidence exploration bonus.
#[derive(Debug, Clone)]
pub struct LinUcbState {
    arms: Vec<Arm>,
    alpha: f64,
    m: usize,
}

impl LinUcbState {
    pub fn new(n: usize, m: usize, alpha: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return invalid("LinUCB needs at least one action and one feature");
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return invalid(format!("alpha must be non-negative, got {alpha}"));
        }
        Ok(Self {
            arms: (0..n).map(|_| Arm::new(m)).collect(),
            alpha,
            m,
        })
    }

    /// Starts each arm's estimate at the matching weight row (`A = I`, `b = w_a`).
    pub fn warm_start(weights: &WeightMatrix, alpha: f64) -> Result<Self> {
        let mut state = Self::new(weights.n_actions(), weights.dim(), alpha)?;
        for (a, arm) in state.arms.iter_mut().enumerate() {
            arm.response = DVector::from_column_slice(weights.row(a));
        }
        Ok(state)
    }

    pub fn n_actions(&self) -> usize {
        self.arms.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn design(&self, a: ActionId) -> &DMatrix<f64> {
        &self.arms[a.0].design
    }

    pub fn response(&self, a: ActionId) -> &DVector<f64> {
        &self.arms[a.0].response
    }

    fn check(&self, x: &ContextVector) -> Result<DVector<f64>> {
        if x.dim() != self.m {
            return invalid(format!(
                "context has dimension {}, LinUCB expects {}",
                x.dim(),
                self.m
            ));
        }
        Ok(DVector::from_column_slice(x.values()))
    }

    /// `(θ_a·x + α·sqrt(xᵀA⁻¹x))` for every arm.
    pub fn upper_bounds(&mut self, x: &ContextVector) -> Result<Vec<f64>> {
        let xv = self.check(x)?;
        let alpha = self.alpha;
        let mut out = Vec::with_capacity(self.arms.len());
        for arm in &mut self.arms {
            let response = arm.response.clone();
            let chol = arm.factor()?;
            let theta = chol.solve(&response);
            let ainv_x = chol.solve(&xv);
            let width = xv.dot(&ainv_x).max(0.0).sqrt();
            out.push(theta.dot(&xv) + alpha * width);
        }
        Ok(out)
    }

    /// Posterior-mean weights `θ_a = A_a⁻¹ b_a`, one row per arm.
    pub fn means(&mut self) -> Result<WeightMatrix> {
        let m = self.m;
        let mut data = Vec::with_capacity(self.arms.len() * m);
        for arm in &mut self.arms {
            let response = arm.response.clone();
            let theta = arm.factor()?.solve(&response);
            data.extend(theta.iter());
        }
        WeightMatrix::from_rows(self.arms.len(), m, data)
    }

    pub fn select(&mut self, x: &ContextVector) -> Result<ActionId> {
        Ok(ActionId(argmax(&self.upper_bounds(x)?)))
    }

    /// `A_a += x xᵀ`, `b_a += r x`; other arms are untouched.
    pub fn update(&mut self, x: &ContextVector, a: ActionId, reward: f64) -> Result<()> {
        let xv = self.check(x)?;
        let arm = self
            .arms
            .get_mut(a.0)
            .ok_or_else(|| Error::Validation(format!("action {a} out of range")))?;
        arm.design.ger(1.0, &xv, &xv, 1.0);
        arm.response.axpy(reward, &xv, 1.0);
        arm.chol = None;
        Ok(())
    }
}

/// Greedy on the current ridge estimates; used for held-out evaluation.
impl Classifier for LinUcbState {
    fn predict(&self, x: &ContextVector) -> ActionId {
        let mut scratch = self.clone();
        match scratch.means() {
            Ok(w) => ActionId(argmax(&w.scores(x.values()))),
            Err(_) => ActionId(0),
        }
    }
}
