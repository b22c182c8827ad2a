//! Load a problem file, validate it and solve. Pass a path to use your own
//! file; by default the bundled `problems/harvest.toml` is used.
//!
//!     cargo run --example custom_problem -- path/to/problem.toml

use std::path::PathBuf;

use pia::spec_file::ProblemSpecFile;
use pia::{run_pia, validate_problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/problems/harvest.toml"));
    let loaded = ProblemSpecFile::from_path(&path)?.build()?;

    let check = validate_problem(&loaded.problem, 201, 41);
    if !check.passed {
        for v in &check.violations {
            eprintln!("{v:?}");
        }
        return Err("problem failed validation".into());
    }

    let report = run_pia(&loaded.problem, &loaded.initial_policy, &loaded.pia)?;
    println!("{} after {} iterations", report.termination.as_str(), report.iterations.len());
    let grid = report.final_value.grid();
    let stride = grid.n_cells() / 10;
    for i in (0..=grid.n_cells()).step_by(stride) {
        println!(
            "x = {:>6.3}  V = {:>8.5}  a = {:>6.3}",
            grid.node(i),
            report.final_value.values()[i],
            report.final_policy.actions()[i]
        );
    }
    Ok(())
}
