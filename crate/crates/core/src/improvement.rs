//! The improvement step: at every interior node pick an action maximising
//! `a ↦ L^a V(x) + f(x, a)` over a finite candidate set, and report the
//! achieved maxima as the HJB residual field.
//!
//! The objective uses the same upwind differences as
//! [`assemble_operator`](crate::grid::assemble_operator), so at a discrete
//! fixed point the residual vanishes up to round-off and every improvement
//! step is monotone.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{Derivatives, GridFunction, GridPolicy};
use crate::problem::ControlProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementResult {
    /// The improved policy; boundary entries copy their interior neighbour.
    pub policy: GridPolicy,
    /// Achieved maxima at interior nodes, zero on the boundary.
    pub residual: GridFunction,
    pub max_residual: f64,
}

/// `L^a V(x_i) + f(x_i, a)` with the upwind side chosen by the sign of
/// `mu(x_i, a)`.
pub fn objective(p: &ControlProblem, x: f64, a: f64, v: f64, d: &Derivatives) -> Result<f64> {
    let c = p.local(x, a)?;
    Ok(0.5 * c.sigma * c.sigma * d.second + c.mu * d.upwind(c.mu) - c.alpha * v + c.running_reward)
}

/// Pointwise maximisation of the improvement objective.
///
/// Interval action spaces are sampled at `n_actions` equally spaced points
/// including both endpoints; finite sets are searched in full. Ties go to
/// the smallest action. Nodes are processed in parallel, each
/// independently, so the result does not depend on scheduling.
pub fn improve_policy(p: &ControlProblem, v: &GridFunction, n_actions: usize) -> Result<ImprovementResult> {
    let grid = *v.grid();
    grid.check_domain(&p.domain)?;
    let candidates = p.actions.candidates(n_actions);
    let n = grid.n_cells();

    let best: Vec<(f64, f64)> = (1..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let d = v.difference_derivatives(i);
            let vi = v.values()[i];
            let mut arg = candidates[0];
            let mut max = objective(p, x, arg, vi, &d).map_err(|e| e.at_node(i, arg))?;
            for &a in &candidates[1..] {
                let val = objective(p, x, a, vi, &d).map_err(|e| e.at_node(i, a))?;
                if val > max {
                    max = val;
                    arg = a;
                }
            }
            Ok((arg, max))
        })
        .collect::<Result<_>>()?;

    let mut actions = Vec::with_capacity(n + 1);
    let mut residual = Vec::with_capacity(n + 1);
    actions.push(best[0].0);
    residual.push(0.0);
    for &(a, r) in &best {
        actions.push(a);
        residual.push(r);
    }
    actions.push(best[best.len() - 1].0);
    residual.push(0.0);

    let max_residual = best.iter().fold(0.0f64, |m, &(_, r)| m.max(r.abs()));
    Ok(ImprovementResult {
        policy: GridPolicy::new(grid, actions)?,
        residual: GridFunction::new(grid, residual)?,
        max_residual,
    })
}

/// The sup-norm of the HJB residual; identical to
/// `improve_policy(..).max_residual`.
pub fn hjb_residual(p: &ControlProblem, v: &GridFunction, n_actions: usize) -> Result<f64> {
    Ok(improve_policy(p, v, n_actions)?.max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::evaluate_policy;
    use crate::grid::Grid;
    use crate::oracles::{example_one, example_two, manufactured_problem};
    use crate::problem::{ActionSpace, CoefficientField, Domain};
    use proptest::prelude::*;

    fn exact_on_grid(n: usize, exact: &(dyn Fn(f64) -> f64 + Send + Sync), d: Domain) -> GridFunction {
        GridFunction::from_fn(Grid::new(d, n).unwrap(), exact).unwrap()
    }

    #[test]
    fn example_two_argmax_is_sign_of_x() {
        let o = example_two();
        let v = exact_on_grid(400, &*o.exact_value, o.problem.domain);
        let res = improve_policy(&o.problem, &v, 201).unwrap();
        let grid = v.grid();
        for i in 1..400 {
            let x = grid.node(i);
            if x.abs() >= 2.0 * grid.spacing() {
                assert_eq!(res.policy.actions()[i], x.signum(), "x = {x}");
            }
        }
    }

    #[test]
    fn example_two_objective_matches_closed_form_for_positive_x() {
        // With V'' = 4V for x > 0 the objective in a is
        // sinh(2x)·(4a + 9/2 − 2) − (13/2)·sinh(2x), up to O(h²).
        let o = example_two();
        let grid = Grid::new(o.problem.domain, 1000).unwrap();
        let v = GridFunction::from_fn(grid, |x| (o.exact_value)(x)).unwrap();
        let i = 800;
        let x = grid.node(i);
        let d = v.difference_derivatives(i);
        for a in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            let got = objective(&o.problem, x, a, v.values()[i], &d).unwrap();
            let s = (2.0 * x).sinh();
            let want = s * (4.0 * a + 4.5 - 2.0) - 6.5 * s;
            assert!((got - want).abs() < 1e-4, "a = {a}: {got} vs {want}");
        }
    }

    #[test]
    fn example_two_residual_vanishes_for_negative_x() {
        let o = example_two();
        let v = exact_on_grid(1000, &*o.exact_value, o.problem.domain);
        let res = improve_policy(&o.problem, &v, 201).unwrap();
        let i = 250;
        assert_eq!(res.policy.actions()[i], -1.0);
        assert!(res.residual.values()[i].abs() < 1e-4);
    }

    #[test]
    fn degenerate_objective_picks_smallest_action() {
        let p = ControlProblem::new(
            Domain::new(-1.0, 1.0).unwrap(),
            ActionSpace::interval(-2.0, 3.0).unwrap(),
            CoefficientField::new(|_, a| 1.0 + a * a, |_, a| a, |_, a| 1.0 + a * a, |_, _| 0.0, |_| 0.0),
            0.5,
            0.0,
        )
        .unwrap();
        let v = GridFunction::from_fn(Grid::new(p.domain, 16).unwrap(), |_| 0.0).unwrap();
        let res = improve_policy(&p, &v, 11).unwrap();
        assert!(res.policy.actions().iter().all(|&a| a == -2.0));
        assert_eq!(res.max_residual, 0.0);
    }

    #[test]
    fn example_one_recovers_sign_policy() {
        let o = example_one();
        for n in [100, 400] {
            let v = exact_on_grid(n, &*o.exact_value, o.problem.domain);
            let res = improve_policy(&o.problem, &v, 2).unwrap();
            let grid = v.grid();
            for i in 1..n {
                let x = grid.node(i);
                if x.abs() >= 2.0 * grid.spacing() {
                    assert_eq!(res.policy.actions()[i], x.signum());
                }
            }
        }
    }

    #[test]
    fn residual_of_zero_with_constant_reward() {
        let c = 2.5;
        let p = ControlProblem::new(
            Domain::new(0.0, 1.0).unwrap(),
            ActionSpace::finite(vec![-1.0, 1.0]).unwrap(),
            CoefficientField::new(|_, _| 1.0, |_, a| a, |_, _| 1.0, move |_, _| c, |_| 0.0),
            0.5,
            0.0,
        )
        .unwrap();
        let v = GridFunction::from_fn(Grid::new(p.domain, 10).unwrap(), |_| 0.0).unwrap();
        assert_eq!(hjb_residual(&p, &v, 2).unwrap(), c);
    }

    #[test]
    fn single_action_residual_is_solver_roundoff() {
        let o = manufactured_problem();
        let grid = Grid::new(o.problem.domain, 500).unwrap();
        let v = evaluate_policy(&o.problem, &GridPolicy::constant(grid, 0.0)).unwrap();
        let r = hjb_residual(&o.problem, &v, 5).unwrap();
        assert!(r <= 1e-8 * 2.0, "{r}");
    }

    #[test]
    fn example_one_residual_shrinks_with_refinement() {
        let o = example_one();
        let away_from_kink = |n: usize| {
            let grid = Grid::new(o.problem.domain, n).unwrap();
            let pol = GridPolicy::from_fn(grid, |x| (o.optimal_policy)(x));
            let v = evaluate_policy(&o.problem, &pol).unwrap();
            let res = improve_policy(&o.problem, &v, 2).unwrap();
            (1..n)
                .filter(|&i| grid.node(i).abs() > 0.1)
                .fold(0.0f64, |m, i| m.max(res.residual.values()[i].abs()))
        };
        assert!(away_from_kink(400) < 1e-8);
        assert!(away_from_kink(1600) < 1e-7);
    }

    fn random_problem(k: [f64; 6]) -> ControlProblem {
        ControlProblem::new(
            Domain::new(-1.0, 1.0).unwrap(),
            ActionSpace::interval(-1.0, 1.0).unwrap(),
            CoefficientField::new(
                move |x, a| 0.4 + k[0] * (a - x).abs(),
                move |x, a| k[1] * a + k[2] * x,
                move |_, a| 0.2 + k[3] * a * a,
                move |x, a| k[4] * (x + a).abs(),
                move |x| k[5] * x * x,
            ),
            0.4,
            0.2,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn argmax_dominates_every_candidate(
            k in proptest::array::uniform6(0.0f64..2.0), n_actions in 2usize..12, n in 3usize..40,
        ) {
            let p = random_problem(k);
            let grid = Grid::new(p.domain, n).unwrap();
            let v = GridFunction::from_fn(grid, |x| (3.0 * x).sin() + k[5]).unwrap();
            let res = improve_policy(&p, &v, n_actions).unwrap();
            let again = improve_policy(&p, &v, n_actions).unwrap();
            prop_assert_eq!(&res, &again);
            for i in 1..n {
                let d = v.difference_derivatives(i);
                let best = res.residual.values()[i];
                prop_assert_eq!(objective(&p, grid.node(i), res.policy.actions()[i], v.values()[i], &d).unwrap(), best);
                for a in p.actions.candidates(n_actions) {
                    prop_assert!(best >= objective(&p, grid.node(i), a, v.values()[i], &d).unwrap());
                }
            }
        }

        #[test]
        fn refining_action_grid_never_lowers_nodal_maxima(
            k in proptest::array::uniform6(0.0f64..2.0), m in 1usize..8, n in 3usize..40,
        ) {
            // Candidates for 2m+1 points contain those for m+1 points.
            let p = random_problem(k);
            let grid = Grid::new(p.domain, n).unwrap();
            let v = GridFunction::from_fn(grid, |x| x.cos() - 0.5).unwrap();
            let coarse = improve_policy(&p, &v, m + 1).unwrap();
            let fine = improve_policy(&p, &v, 2 * m + 1).unwrap();
            for i in 1..n {
                prop_assert!(fine.residual.values()[i] >= coarse.residual.values()[i]);
            }
        }
    }
}
