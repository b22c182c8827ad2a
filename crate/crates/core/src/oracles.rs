//! Problems with closed-form value functions and optimal policies.
//!
//! * [`example_one`]: two actions `{−1, 1}`, killing rate `2 + a`, no
//!   running reward. The optimal policy is the bang-bang `sgn(x)`.
//! * [`example_two`]: actions in `[−1, 1]`, killing rate `4a + 9/2`, a
//!   running cost on the positive half-line. The optimum is again `sgn(x)`.
//! * [`manufactured_problem`]: a single action and constant coefficients;
//!   the value is smooth and used for convergence-order studies.
//!
//! In the first two examples the value is only C¹ at the origin, so
//! pointwise checks of the HJB equation exclude `x = 0`.

use std::sync::Arc;

use crate::problem::{ActionSpace, CoefficientField, ControlProblem, Domain, StateFn};

pub type DerivativesFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub struct OracleProblem {
    pub name: &'static str,
    pub problem: ControlProblem,
    pub exact_value: StateFn,
    /// `(V', V'')` of the exact value; one-sided limits from the right at
    /// the kink.
    pub exact_derivatives: DerivativesFn,
    pub optimal_policy: StateFn,
}

impl std::fmt::Debug for OracleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleProblem")
            .field("name", &self.name)
            .field("problem", &self.problem)
            .finish_non_exhaustive()
    }
}

/// `sgn` with `sgn(0) = 1`.
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn unit_interval() -> Domain {
    Domain::new(-1.0, 1.0).expect("(-1, 1) is a valid domain")
}

pub fn example_one() -> OracleProblem {
    let s6 = 6f64.sqrt();
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let value = move |x: f64| {
        if x >= 0.0 {
            -(s6 * x).sinh()
        } else {
            -s3 * (s2 * x).sinh()
        }
    };
    let derivatives = move |x: f64| {
        if x >= 0.0 {
            (-s6 * (s6 * x).cosh(), -6.0 * (s6 * x).sinh())
        } else {
            (-s3 * s2 * (s2 * x).cosh(), -s3 * 2.0 * (s2 * x).sinh())
        }
    };
    let problem = ControlProblem::new(
        unit_interval(),
        ActionSpace::finite(vec![-1.0, 1.0]).expect("valid action set"),
        CoefficientField::new(
            |_, _| 1.0,
            |_, _| 0.0,
            |_, a| 2.0 + a,
            |_, _| 0.0,
            value,
        ),
        1.0,
        1.0,
    )
    .expect("valid problem");
    OracleProblem {
        name: "example1",
        problem,
        exact_value: Arc::new(value),
        exact_derivatives: Arc::new(derivatives),
        optimal_policy: Arc::new(sign),
    }
}

/// The running reward is `−(13/2)·sinh(2·max(x, 0))`, a cost on the
/// positive half-line. With unit volatility this makes `V̂` solve the HJB
/// equation with the supremum attained at `sgn(x)`.
pub fn example_two() -> OracleProblem {
    let value = |x: f64| {
        if x >= 0.0 {
            -(2.0 * x).sinh()
        } else {
            -2.0 * x.sinh()
        }
    };
    let derivatives = |x: f64| {
        if x >= 0.0 {
            (-2.0 * (2.0 * x).cosh(), -4.0 * (2.0 * x).sinh())
        } else {
            (-2.0 * x.cosh(), -2.0 * x.sinh())
        }
    };
    let problem = ControlProblem::new(
        unit_interval(),
        ActionSpace::interval(-1.0, 1.0).expect("valid action set"),
        CoefficientField::new(
            |_, _| 1.0,
            |_, _| 0.0,
            |_, a| 4.0 * a + 4.5,
            |x, _| -6.5 * (2.0 * x.max(0.0)).sinh(),
            value,
        ),
        1.0,
        0.5,
    )
    .expect("valid problem");
    OracleProblem {
        name: "example2",
        problem,
        exact_value: Arc::new(value),
        exact_derivatives: Arc::new(derivatives),
        optimal_policy: Arc::new(sign),
    }
}

/// `½·2·V'' − V + 1 = 0` on `(−1, 1)` with zero boundary data.
pub fn manufactured_problem() -> OracleProblem {
    let c1 = 1f64.cosh();
    let problem = ControlProblem::new(
        unit_interval(),
        ActionSpace::finite(vec![0.0]).expect("valid action set"),
        CoefficientField::new(
            |_, _| 2f64.sqrt(),
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 1.0,
            |_| 0.0,
        ),
        1.0,
        1.0,
    )
    .expect("valid problem");
    OracleProblem {
        name: "manufactured",
        problem,
        exact_value: Arc::new(move |x| 1.0 - x.cosh() / c1),
        exact_derivatives: Arc::new(move |x| (-x.sinh() / c1, -x.cosh() / c1)),
        optimal_policy: Arc::new(|_| 0.0),
    }
}

/// Looks an oracle up by its CLI name.
pub fn by_name(name: &str) -> Option<OracleProblem> {
    match name {
        "example1" => Some(example_one()),
        "example2" => Some(example_two()),
        "manufactured" => Some(manufactured_problem()),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["example1", "example2", "manufactured"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{apply_generator, validate_problem};

    fn samples() -> impl Iterator<Item = f64> {
        (0..=200)
            .map(|k| -0.995 + 1.99 * k as f64 / 200.0)
            .filter(|x| x.abs() > 1e-9)
    }

    #[test]
    fn example_one_values() {
        let o = example_one();
        assert_eq!((o.exact_value)(1.0), -(6f64.sqrt().sinh()));
        assert_eq!((o.exact_value)(0.0), 0.0);
        let g = o.problem.boundary_payoff(-1.0).unwrap();
        assert!((g - 3f64.sqrt() * 2f64.sqrt().sinh()).abs() < 1e-14);
    }

    #[test]
    fn example_one_second_derivative_by_finite_differences() {
        let o = example_one();
        let h = 1e-4;
        for x in [-0.5f64, 0.5] {
            let v = |y| (o.exact_value)(y);
            let fd = (v(x - h) - 2.0 * v(x) + v(x + h)) / (h * h);
            let factor = if x > 0.0 { 6.0 } else { 2.0 };
            assert!((fd - factor * v(x)).abs() < 1e-5 * (1.0 + v(x).abs()), "x = {x}");
        }
    }

    #[test]
    fn example_one_generator_vanishes_on_optimal_action() {
        let o = example_one();
        let x = 0.5;
        let v = (o.exact_value)(x);
        let out = apply_generator(&o.problem, x, 1.0, v, 0.0, 6.0 * v).unwrap();
        assert!(out.abs() < 1e-14);
    }

    #[test]
    fn example_two_values() {
        let o = example_two();
        assert_eq!((o.exact_value)(-1.0), 2.0 * 1f64.sinh());
        assert_eq!((o.problem.coeffs.running_reward)(-0.5, 0.3), 0.0);
        for x in [-0.3, 0.3] {
            assert_eq!(sign((o.exact_value)(x)), -sign(x));
        }
        assert!(validate_problem(&o.problem, 41, 21).passed);
    }

    #[test]
    fn manufactured_values() {
        let o = manufactured_problem();
        assert!((o.exact_value)(1.0).abs() < 1e-15);
        assert!((o.exact_value)(-1.0).abs() < 1e-15);
        assert!(((o.exact_value)(0.0) - (1.0 - 1.0 / 1f64.cosh())).abs() < 1e-15);
        let x = 0.5;
        let (_, d2) = (o.exact_derivatives)(x);
        let v = (o.exact_value)(x);
        assert!((0.5 * 2.0 * d2 - v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_data_agrees_with_exact_value() {
        for o in [example_one(), example_two(), manufactured_problem()] {
            for x in [-1.0, 1.0] {
                let g = o.problem.boundary_payoff(x).unwrap();
                assert!((g - (o.exact_value)(x)).abs() < 1e-14, "{}", o.name);
            }
        }
    }

    #[test]
    fn optimal_action_solves_linear_equation() {
        for o in [example_one(), example_two(), manufactured_problem()] {
            for x in samples() {
                let a = (o.optimal_policy)(x);
                let (d1, d2) = (o.exact_derivatives)(x);
                let v = (o.exact_value)(x);
                let lv = apply_generator(&o.problem, x, a, v, d1, d2).unwrap();
                let f = (o.problem.coeffs.running_reward)(x, a);
                assert!((lv + f).abs() < 1e-12 * (1.0 + f.abs() + v.abs() * 8.0), "{} at {x}", o.name);
            }
        }
    }

    #[test]
    fn hjb_dominance_over_actions() {
        for o in [example_one(), example_two(), manufactured_problem()] {
            let actions = o.problem.actions.candidates(401);
            for x in samples() {
                let (d1, d2) = (o.exact_derivatives)(x);
                let v = (o.exact_value)(x);
                let tol = 1e-12 * (1.0 + v.abs() * 10.0);
                for &a in &actions {
                    let lv = apply_generator(&o.problem, x, a, v, d1, d2).unwrap();
                    let f = (o.problem.coeffs.running_reward)(x, a);
                    assert!(lv + f <= tol, "{} at x = {x}, a = {a}: {}", o.name, lv + f);
                }
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        for name in NAMES {
            assert_eq!(by_name(name).unwrap().name, name);
        }
        assert!(by_name("example3").is_none());
    }
}
