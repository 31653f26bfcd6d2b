use super::point::PrimalDualPoint;
use super::steps::{StepRule, StepState};
use crate::error::{check_dim, Result};
use crate::problems::{SaddleProblem, Vector};

/// Result of one iteration: `u^{i+1}` and the over-relaxed `x̄^{i+1}`.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub next: PrimalDualPoint,
    pub x_bar: Vector,
}

/// One NL-PDHGM iteration:
///
/// ```text
/// x^{i+1} = prox_{τ_i G}(x^i - τ_i ∇K(x^i)^* y^i)
/// x̄^{i+1} = x^{i+1} + ω_i (x^{i+1} - x^i)
/// y^{i+1} = prox_{σ_{i+1} F*}(y^i + σ_{i+1} K(x̄^{i+1}))
/// ```
pub fn nlpdhgm_step<P: SaddleProblem + ?Sized>(
    problem: &P,
    u: &PrimalDualPoint,
    state: &StepState,
) -> Result<StepOutput> {
    check_dim("primal iterate", problem.primal_dim(), u.x.len())?;
    check_dim("dual iterate", problem.dual_dim(), u.y.len())?;
    state.validate_steps()?;

    let grad = problem.apply_dk_adjoint(&u.x, &u.y)?;
    check_dim("adjoint derivative", problem.primal_dim(), grad.len())?;
    let x_next = problem.prox_g(state.tau, &(&u.x - grad * state.tau))?;
    check_dim("primal prox", problem.primal_dim(), x_next.len())?;

    let x_bar = &x_next + (&x_next - &u.x) * state.omega;
    let k_bar = problem.apply_k(&x_bar)?;
    check_dim("K", problem.dual_dim(), k_bar.len())?;
    let y_next = problem.prox_fstar(state.sigma, &(&u.y + k_bar * state.sigma))?;
    check_dim("dual prox", problem.dual_dim(), y_next.len())?;

    Ok(StepOutput {
        next: PrimalDualPoint::new(x_next, y_next),
        x_bar,
    })
}

/// A running iteration: owns the current point and step state.
#[derive(Clone, Debug)]
pub struct Iterate<'a, P: ?Sized> {
    problem: &'a P,
    rule: StepRule,
    point: PrimalDualPoint,
    state: StepState,
}

impl<'a, P: SaddleProblem + ?Sized> Iterate<'a, P> {
    pub fn new(problem: &'a P, rule: StepRule, start: PrimalDualPoint) -> Result<Self> {
        check_dim("primal start", problem.primal_dim(), start.x.len())?;
        check_dim("dual start", problem.dual_dim(), start.y.len())?;
        Ok(Self {
            problem,
            rule,
            point: start,
            state: rule.initial_state()?,
        })
    }

    /// Advance by one iteration and return `x̄^{i+1}`.
    pub fn step(&mut self) -> Result<Vector> {
        let out = nlpdhgm_step(self.problem, &self.point, &self.state)?;
        self.point = out.next;
        self.state = self.rule.advance(&self.state);
        Ok(out.x_bar)
    }

    /// Advance `n` iterations.
    pub fn run(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    pub fn point(&self) -> &PrimalDualPoint {
        &self.point
    }

    pub fn state(&self) -> &StepState {
        &self.state
    }

    pub fn iter(&self) -> usize {
        self.state.iter
    }

    pub fn into_point(self) -> PrimalDualPoint {
        self.point
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::problems::ComplexToyProblem;
    use approx::assert_relative_eq;

    /// `K(x) = A x + b` with quadratic or zero `G`, `F*`.
    struct Affine {
        a: nalgebra::DMatrix<f64>,
        b: Vector,
        quadratic: bool,
    }

    impl SaddleProblem for Affine {
        fn primal_dim(&self) -> usize {
            self.a.ncols()
        }
        fn dual_dim(&self) -> usize {
            self.a.nrows()
        }
        fn apply_k(&self, x: &Vector) -> Result<Vector> {
            Ok(&self.a * x + &self.b)
        }
        fn apply_dk(&self, _x: &Vector, h: &Vector) -> Result<Vector> {
            Ok(&self.a * h)
        }
        fn apply_dk_adjoint(&self, _x: &Vector, w: &Vector) -> Result<Vector> {
            Ok(self.a.transpose() * w)
        }
        fn prox_g(&self, tau: f64, v: &Vector) -> Result<Vector> {
            Ok(if self.quadratic {
                v / (1.0 + tau)
            } else {
                v.clone()
            })
        }
        fn prox_fstar(&self, sigma: f64, v: &Vector) -> Result<Vector> {
            Ok(if self.quadratic {
                v / (1.0 + sigma)
            } else {
                v.clone()
            })
        }
    }

    fn state(tau: f64, sigma: f64, omega: f64) -> StepState {
        StepState {
            iter: 0,
            tau,
            sigma,
            sigma_prev: sigma,
            omega,
            phi: 1.0 / tau,
            psi: 1.0 / (sigma * omega),
            eta: 1.0,
        }
    }

    #[test]
    fn toy_single_step_matches_hand_computation() {
        let p = ComplexToyProblem::new((1.0, 0.0), 0.1).unwrap();
        let u = PrimalDualPoint::new(Vector::from_column_slice(&[1.0, 0.0]), Vector::zeros(2));
        let out = nlpdhgm_step(&p, &u, &state(0.1, 0.1, 1.0)).unwrap();
        assert_relative_eq!(
            out.next.x,
            Vector::from_column_slice(&[0.99, 0.0]),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            out.x_bar,
            Vector::from_column_slice(&[0.98, 0.0]),
            epsilon = 1e-15
        );
        assert_relative_eq!(out.next.y[0], -0.002 / 1.1, epsilon = 1e-15);
        assert_eq!(out.next.y[1], 0.0);
    }

    #[test]
    fn zero_derivative_gives_explicit_dual_ascent() {
        let p = Affine {
            a: nalgebra::DMatrix::zeros(2, 3),
            b: Vector::from_column_slice(&[0.5, -2.0]),
            quadratic: false,
        };
        let u = PrimalDualPoint::new(
            Vector::from_column_slice(&[1.0, 2.0, 3.0]),
            Vector::from_column_slice(&[0.1, 0.2]),
        );
        let out = nlpdhgm_step(&p, &u, &state(0.3, 0.7, 1.0)).unwrap();
        assert_eq!(out.next.x, u.x);
        assert_relative_eq!(out.next.y, &u.y + &p.b * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn identity_operator_matches_literal_transcription() {
        let p = Affine {
            a: nalgebra::DMatrix::identity(3, 3),
            b: Vector::zeros(3),
            quadratic: true,
        };
        let x0 = [0.4, -1.2, 2.0];
        let y0 = [0.3, 0.1, -0.5];
        let (tau, sigma, omega) = (0.2, 0.6, 0.8);
        let out = nlpdhgm_step(
            &p,
            &PrimalDualPoint::new(
                Vector::from_column_slice(&x0),
                Vector::from_column_slice(&y0),
            ),
            &state(tau, sigma, omega),
        )
        .unwrap();
        for k in 0..3 {
            let x1 = (x0[k] - tau * y0[k]) / (1.0 + tau);
            let xb = x1 + omega * (x1 - x0[k]);
            let y1 = (y0[k] + sigma * xb) / (1.0 + sigma);
            assert_relative_eq!(out.next.x[k], x1, epsilon = 1e-15);
            assert_relative_eq!(out.x_bar[k], xb, epsilon = 1e-15);
            assert_relative_eq!(out.next.y[k], y1, epsilon = 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = ComplexToyProblem::new((1.0, 0.0), 0.1).unwrap();
        let u = PrimalDualPoint::new(Vector::zeros(3), Vector::zeros(2));
        assert!(matches!(
            nlpdhgm_step(&p, &u, &state(0.1, 0.1, 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn iterate_tracks_state() {
        let p = ComplexToyProblem::new((2.0, 0.0), 0.1).unwrap();
        let start = PrimalDualPoint::new(Vector::from_column_slice(&[1.0, 0.5]), Vector::zeros(2));
        let mut it = Iterate::new(&p, StepRule::accelerated(0.25, 0.5, 0.5), start).unwrap();
        it.run(5).unwrap();
        assert_eq!(it.iter(), 5);
        assert!(it.state().tau < 0.25);
    }
}
