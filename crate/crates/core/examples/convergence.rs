//! Grid refinement on a problem with a known smooth solution. The sup error
//! should drop by about four each time the grid is halved.

use pia::oracles::manufactured_problem;
use pia::{evaluate_policy, Grid, GridPolicy};

fn main() -> pia::Result<()> {
    let o = manufactured_problem();
    let mut previous: Option<f64> = None;
    println!("{:>6}  {:>11}  {:>6}", "cells", "sup error", "ratio");
    for n in [125, 250, 500, 1000, 2000] {
        let grid = Grid::new(o.problem.domain, n)?;
        let v = evaluate_policy(&o.problem, &GridPolicy::constant(grid, 0.0))?;
        let err = grid
            .nodes()
            .zip(v.values())
            .map(|(x, y)| (y - (o.exact_value)(x)).abs())
            .fold(0.0, f64::max);
        match previous {
            Some(p) => println!("{n:>6}  {err:>11.3e}  {:>6.3}", p / err),
            None => println!("{n:>6}  {err:>11.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
