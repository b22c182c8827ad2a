//! Payoff of a fixed Markov policy, computed as the solution of the
//! policy-frozen boundary-value problem `L^π V + f(·, π) = 0`, `V = g` on
//! the boundary.

use crate::error::Result;
use crate::grid::{assemble_operator, solve_tridiagonal, GridFunction, GridPolicy};
use crate::problem::ControlProblem;

/// Solves for the payoff of `pol`. Boundary entries are exactly `g(l)` and
/// `g(r)`.
pub fn evaluate_policy(p: &ControlProblem, pol: &GridPolicy) -> Result<GridFunction> {
    pol.check_against(p)?;
    let grid = *pol.grid();
    let sys = assemble_operator(p, pol)?;
    let interior = solve_tridiagonal(&sys)?;
    let mut values = Vec::with_capacity(grid.n_nodes());
    values.push(p.boundary_payoff(grid.node(0))?);
    values.extend(interior);
    values.push(p.boundary_payoff(grid.node(grid.n_cells()))?);
    GridFunction::new(grid, values)
}

/// Largest interior `|L^π V + f(·, π)|` using the upwind discrete generator.
pub fn lemma_residual(p: &ControlProblem, pol: &GridPolicy, v: &GridFunction) -> Result<f64> {
    let grid = v.grid();
    let mut worst = 0.0f64;
    for i in 1..grid.n_cells() {
        let a = pol.actions()[i];
        let x = grid.node(i);
        let c = p.local(x, a).map_err(|e| e.at_node(i, a))?;
        let d = v.difference_derivatives(i);
        let r = 0.5 * c.sigma * c.sigma * d.second + c.mu * d.upwind(c.mu) - c.alpha * v.values()[i]
            + c.running_reward;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::oracles::{example_one, manufactured_problem};
    use crate::problem::{ActionSpace, CoefficientField, Domain};
    use proptest::prelude::*;

    fn sup_error(v: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
        v.grid()
            .nodes()
            .zip(v.values())
            .fold(0.0, |m, (x, y)| m.max((y - exact(x)).abs()))
    }

    #[test]
    fn zero_data_gives_zero_payoff() {
        let p = ControlProblem::new(
            Domain::new(-1.0, 1.0).unwrap(),
            ActionSpace::interval(-1.0, 1.0).unwrap(),
            CoefficientField::new(|x, a| 1.0 + a * a + x, |_, a| a, |_, a| 1.0 + a, |_, _| 0.0, |_| 0.0),
            0.5,
            0.0,
        )
        .unwrap();
        let grid = Grid::new(p.domain, 50).unwrap();
        for pol in [
            GridPolicy::constant(grid, -1.0),
            GridPolicy::from_fn(grid, |x| if x >= 0.0 { 1.0 } else { -0.5 }),
        ] {
            let v = evaluate_policy(&p, &pol).unwrap();
            assert!(v.values().iter().all(|&y| y == 0.0));
        }
    }

    #[test]
    fn rejects_inadmissible_policy() {
        let o = example_one();
        let grid = Grid::new(o.problem.domain, 10).unwrap();
        assert!(evaluate_policy(&o.problem, &GridPolicy::constant(grid, 0.0)).is_err());
    }

    #[test]
    fn manufactured_payoff_matches_cosh_profile() {
        let o = manufactured_problem();
        let grid = Grid::new(o.problem.domain, 400).unwrap();
        let v = evaluate_policy(&o.problem, &GridPolicy::constant(grid, 0.0)).unwrap();
        assert!(sup_error(&v, |x| (o.exact_value)(x)) < 1e-5);
        assert_eq!(v.values()[0], 0.0);
        assert_eq!(v.values()[400], 0.0);
    }

    #[test]
    fn example_one_sign_policy_converges_to_closed_form() {
        let o = example_one();
        let errs: Vec<f64> = [100, 200, 400]
            .iter()
            .map(|&n| {
                let grid = Grid::new(o.problem.domain, n).unwrap();
                let pol = GridPolicy::from_fn(grid, |x| (o.optimal_policy)(x));
                let v = evaluate_policy(&o.problem, &pol).unwrap();
                assert_eq!(v.values()[0], o.problem.boundary_payoff(-1.0).unwrap());
                assert_eq!(v.values()[n], o.problem.boundary_payoff(1.0).unwrap());
                sup_error(&v, |x| (o.exact_value)(x))
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-3);
    }

    #[test]
    fn lemma_residual_is_tiny_after_solve() {
        let o = example_one();
        let grid = Grid::new(o.problem.domain, 2000).unwrap();
        let pol = GridPolicy::from_fn(grid, |x| (o.optimal_policy)(x));
        let v = evaluate_policy(&o.problem, &pol).unwrap();
        let r = lemma_residual(&o.problem, &pol, &v).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    fn random_problem(f0: f64, f1: f64, g0: f64, shift: f64) -> ControlProblem {
        ControlProblem::new(
            Domain::new(-1.0, 2.0).unwrap(),
            ActionSpace::interval(-1.0, 1.0).unwrap(),
            CoefficientField::new(
                |x, a| 0.5 + 0.25 * (x * a).abs(),
                |x, a| a - 0.5 * x,
                |_, a| 0.3 + a * a,
                move |x, a| f0 + f1 * (x - a).abs() + shift * (x * x),
                move |x| g0 * (1.0 + x * x),
            ),
            0.5,
            0.0,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn non_negative_data_gives_non_negative_payoff(
            f0 in 0.0f64..2.0, f1 in 0.0f64..2.0, g0 in 0.0f64..2.0, n in 3usize..80, a in -1.0f64..1.0,
        ) {
            let p = random_problem(f0, f1, g0, 0.0);
            let grid = Grid::new(p.domain, n).unwrap();
            let v = evaluate_policy(&p, &GridPolicy::from_fn(grid, |x| if x > 0.5 { a } else { -a })).unwrap();
            prop_assert!(v.values().iter().all(|&y| y >= 0.0));
        }

        #[test]
        fn payoff_is_monotone_in_running_reward(
            f0 in -2.0f64..2.0, f1 in 0.0f64..2.0, g0 in -2.0f64..2.0, bump in 0.0f64..3.0, n in 3usize..80,
        ) {
            let grid = Grid::new(Domain::new(-1.0, 2.0).unwrap(), n).unwrap();
            let pol = GridPolicy::from_fn(grid, |x| (0.7 * x).clamp(-1.0, 1.0));
            let lo = evaluate_policy(&random_problem(f0, f1, g0, 0.0), &pol).unwrap();
            let hi = evaluate_policy(&random_problem(f0, f1, g0, bump), &pol).unwrap();
            for (a, b) in lo.values().iter().zip(hi.values()) {
                prop_assert!(*b >= *a - 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn residual_after_solve_is_within_tolerance(
            f0 in 0.0f64..5.0, f1 in 0.0f64..5.0, g0 in -3.0f64..3.0, n in 3usize..500,
        ) {
            let p = random_problem(f0, f1, g0, 0.0);
            let grid = Grid::new(p.domain, n).unwrap();
            let pol = GridPolicy::from_fn(grid, |x| if x < 0.3 { -1.0 } else { 0.25 });
            let v = evaluate_policy(&p, &pol).unwrap();
            let f_norm = f0 + f1 * 3.0;
            prop_assert!(lemma_residual(&p, &pol, &v).unwrap() <= 1e-8 * (1.0 + f_norm));
        }
    }
}
