//! Finite action set {-1, 1} with a kinked value function.
//!
//! Starting from the everywhere-left policy, policy improvement lands on the
//! sign policy after a handful of sweeps.

use pia::oracles::example_one;
use pia::{run_pia, Grid, GridPolicy, PiaConfig};

fn main() -> pia::Result<()> {
    let o = example_one();
    let grid = Grid::new(o.problem.domain, 2000)?;
    let report = run_pia(&o.problem, &GridPolicy::constant(grid, -1.0), &PiaConfig::default())?;

    println!("iter  max_residual  policy_change  monotone");
    for r in &report.iterations {
        println!(
            "{:>4}  {:>12.3e}  {:>13}  {}",
            r.index, r.max_residual, r.policy_change_sup, r.monotone
        );
    }
    println!("termination: {}", report.termination.as_str());

    let v = &report.final_value;
    let err = v
        .grid()
        .nodes()
        .zip(v.values())
        .map(|(x, y)| (y - (o.exact_value)(x)).abs())
        .fold(0.0, f64::max);
    println!("sup |V - exact| = {err:.3e}");
    for x in [-0.75, -0.25, 0.25, 0.75] {
        println!("  x = {x:>5}: V = {:.6}, a = {}", v.sample(x)?, report.final_policy.nearest(x));
    }
    Ok(())
}
