//! Thin adapter over the `levenberg-marquardt` crate for dynamically sized
//! problems.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn};

/// A least-squares model `r(p)` with its Jacobian `∂r/∂p`.
pub trait Residuals {
    fn residuals(&self, p: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Clone, Debug)]
pub struct LsqOutcome {
    pub params: DVector<f64>,
    /// Sum of squared residuals at `params`.
    pub cost: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Adapter<'a, R: Residuals> {
    model: &'a R,
    p: DVector<f64>,
}

impl<R: Residuals> LeastSquaresProblem<f64, Dyn, Dyn> for Adapter<'_, R> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.p.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.p.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = self.model.residuals(&self.p);
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let j = self.model.jacobian(&self.p);
        j.iter().all(|v| v.is_finite()).then_some(j)
    }
}

/// Minimise `‖r(p)‖²` from `p0`.
pub fn minimize<R: Residuals>(model: &R, p0: DVector<f64>) -> LsqOutcome {
    let (done, report) = LevenbergMarquardt::new().with_patience(200).minimize(Adapter { model, p: p0 });
    let params = done.p;
    let r = model.residuals(&params);
    let cost = if r.iter().all(|v| v.is_finite()) { r.norm_squared() } else { f64::INFINITY };
    LsqOutcome {
        params,
        cost,
        converged: report.termination.was_successful(),
        evaluations: report.number_of_evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl Residuals for Line {
        fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
            DVector::from_iterator(self.x.len(), self.x.iter().zip(&self.y).map(|(x, y)| p[0] * (p[1] * x).exp() - y))
        }
        fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_fn(self.x.len(), 2, |r, c| {
                let e = (p[1] * self.x[r]).exp();
                if c == 0 {
                    e
                } else {
                    p[0] * self.x[r] * e
                }
            })
        }
    }

    #[test]
    fn recovers_exponential() {
        let x: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let y = x.iter().map(|x| 2.5 * (-0.7 * x).exp()).collect();
        let out = minimize(&Line { x, y }, DVector::from_vec(vec![1.0, -0.1]));
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] + 0.7).abs() < 1e-8);
    }
}
