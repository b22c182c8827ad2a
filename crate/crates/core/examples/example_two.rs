//! Interval action set [-1, 1]. The running reward is large on the right
//! half, which pushes the optimal action to the boundary of the action set.

use pia::oracles::example_two;
use pia::{run_pia, Grid, GridPolicy, PiaConfig};

fn main() -> pia::Result<()> {
    let o = example_two();
    let grid = Grid::new(o.problem.domain, 2000)?;
    let cfg = PiaConfig {
        residual_tol: 1e-3 * 6.5 * 2f64.sinh(),
        n_actions: 201,
        ..PiaConfig::default()
    };
    let report = run_pia(&o.problem, &GridPolicy::constant(grid, 0.0), &cfg)?;

    for r in &report.iterations {
        println!("iter {:>2}: residual {:.3e}, V in [{:.4}, {:.4}]", r.index, r.max_residual, r.value_min, r.value_max);
    }
    println!("{} after {} iterations", report.termination.as_str(), report.iterations.len());

    for x in [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9] {
        let v = report.final_value.sample(x)?;
        println!(
            "x = {x:>4}: V = {v:>9.5} (exact {:>9.5}), a = {:>5.2}",
            (o.exact_value)(x),
            report.final_policy.nearest(x)
        );
    }
    Ok(())
}
