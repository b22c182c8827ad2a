//! Uniform grids, grid-sampled functions and policies, and the monotone
//! finite-difference discretisation of the policy-frozen generator.
//!
//! The second derivative uses central differences; the drift uses upwind
//! one-sided differences chosen by the sign of `mu`. Together with a
//! non-negative killing rate this makes every assembled system an M-matrix,
//! so its inverse is entrywise non-negative.

use crate::error::{Error, Result};
use crate::problem::{ControlProblem, Domain};

/// Uniform grid with nodes `x_i = left + i·h`, `i = 0..=n_cells`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    domain: Domain,
    n_cells: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(domain: Domain, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidConfig(format!(
                "a grid needs at least 2 cells, got {n_cells}"
            )));
        }
        Ok(Self {
            domain,
            n_cells,
            spacing: domain.width() / n_cells as f64,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Node `i`. Endpoints are returned exactly, and interior nodes are
    /// computed from the endpoints directly so that a symmetric domain with
    /// an even cell count places a node exactly at zero.
    pub fn node(&self, i: usize) -> f64 {
        let (l, r) = (self.domain.left(), self.domain.right());
        if i == 0 {
            l
        } else if i >= self.n_cells {
            r
        } else {
            let n = self.n_cells as f64;
            (l * (self.n_cells - i) as f64 + r * i as f64) / n
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(|i| self.node(i))
    }

    /// Index of the node closest to `x` (ties go to the left node).
    pub fn nearest_node(&self, x: f64) -> usize {
        let s = (x - self.domain.left()) / self.spacing;
        if s <= 0.0 {
            return 0;
        }
        let i = s.floor() as usize;
        if i >= self.n_cells {
            return self.n_cells;
        }
        if s - i as f64 > 0.5 {
            i + 1
        } else {
            i
        }
    }

    /// Errors unless this grid lives on `domain`.
    pub fn check_domain(&self, domain: &Domain) -> Result<()> {
        if self.domain != *domain {
            return Err(Error::GridMismatch(format!(
                "grid domain ({}, {}) differs from problem domain ({}, {})",
                self.domain.left(),
                self.domain.right(),
                domain.left(),
                domain.right()
            )));
        }
        Ok(())
    }
}

/// Values of a function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::GridMismatch(format!(
                "value at node {i} is not finite"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linear interpolation between the bracketing nodes; exact at nodes.
    pub fn sample(&self, x: f64) -> Result<f64> {
        let d = self.grid.domain;
        if !d.contains_closed(x) {
            return Err(Error::OutOfDomain {
                x,
                left: d.left(),
                right: d.right(),
            });
        }
        let s = (x - d.left()) / self.grid.spacing;
        let i = (s.floor() as usize).min(self.grid.n_cells - 1);
        let (x0, x1) = (self.grid.node(i), self.grid.node(i + 1));
        if x == x0 {
            return Ok(self.values[i]);
        }
        if x == x1 {
            return Ok(self.values[i + 1]);
        }
        let w = (x - x0) / (x1 - x0);
        Ok(self.values[i] + w * (self.values[i + 1] - self.values[i]))
    }

    /// Finite differences at interior node `i`.
    pub fn difference_derivatives(&self, i: usize) -> Derivatives {
        assert!(
            i >= 1 && i < self.grid.n_cells,
            "difference_derivatives needs an interior node, got {i}"
        );
        let h = self.grid.spacing;
        let v = &self.values;
        let (back, mid, fwd) = (v[i - 1], v[i], v[i + 1]);
        Derivatives {
            forward: (fwd - mid) / h,
            backward: (mid - back) / h,
            second: ((back - mid) + (fwd - mid)) / (h * h),
        }
    }
}

/// One-sided first differences and the central second difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub forward: f64,
    pub backward: f64,
    pub second: f64,
}

impl Derivatives {
    /// The first difference on the upwind side for drift `mu`.
    pub fn upwind(&self, mu: f64) -> f64 {
        if mu >= 0.0 {
            self.forward
        } else {
            self.backward
        }
    }
}

/// A Markov policy sampled at the nodes of a grid. Boundary entries are
/// carried along but never used by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPolicy {
    grid: Grid,
    actions: Vec<f64>,
}

impl GridPolicy {
    pub fn new(grid: Grid, actions: Vec<f64>) -> Result<Self> {
        if actions.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "expected {} actions, got {}",
                grid.n_nodes(),
                actions.len()
            )));
        }
        Ok(Self { grid, actions })
    }

    pub fn constant(grid: Grid, a: f64) -> Self {
        Self {
            grid,
            actions: vec![a; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            actions: grid.nodes().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    /// Action of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> f64 {
        self.actions[self.grid.nearest_node(x)]
    }

    /// Errors unless the policy lives on a grid over the problem's domain
    /// and every entry is an admissible action.
    pub fn check_against(&self, p: &ControlProblem) -> Result<()> {
        self.grid.check_domain(&p.domain)?;
        for (node, &action) in self.actions.iter().enumerate() {
            if !p.actions.contains(action) {
                return Err(Error::ActionOutOfSpace { node, action });
            }
        }
        Ok(())
    }

    /// Largest change of action over interior nodes.
    pub fn interior_change_sup(&self, other: &GridPolicy) -> f64 {
        let n = self.grid.n_cells;
        (1..n).fold(0.0, |m, i| m.max((self.actions[i] - other.actions[i]).abs()))
    }
}

/// Tridiagonal system over the interior unknowns `x_1 .. x_{n-1}`.
///
/// All four arrays have the same length `m = n_cells - 1`; `sub[0]` and
/// `sup[m - 1]` are zero because the Dirichlet data has been moved into
/// `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A·u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s += self.sub[i] * u[i - 1];
                }
                if i + 1 < m {
                    s += self.sup[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// True when the rows have positive diagonal, non-positive
    /// off-diagonals and weak diagonal dominance.
    pub fn is_m_matrix(&self) -> bool {
        (0..self.len()).all(|i| {
            self.diag[i] > 0.0
                && self.sub[i] <= 0.0
                && self.sup[i] <= 0.0
                && self.diag[i] >= self.sub[i].abs() + self.sup[i].abs()
        })
    }
}

/// Assembles `−L^π V = f(·, π)` over the interior nodes, with the boundary
/// payoff folded into the right-hand side.
pub fn assemble_operator(p: &ControlProblem, pol: &GridPolicy) -> Result<TridiagonalSystem> {
    let grid = pol.grid();
    grid.check_domain(&p.domain)?;
    let n = grid.n_cells();
    let m = n - 1;
    let h = grid.spacing();
    let g_left = p.boundary_payoff(grid.node(0))?;
    let g_right = p.boundary_payoff(grid.node(n))?;

    let mut sys = TridiagonalSystem {
        sub: vec![0.0; m],
        diag: vec![0.0; m],
        sup: vec![0.0; m],
        rhs: vec![0.0; m],
    };
    for row in 0..m {
        let node = row + 1;
        let a = pol.actions()[node];
        let x = grid.node(node);
        let c = p.local(x, a).map_err(|e| e.at_node(node, a))?;
        let (lower, diag, upper) = stencil(c.sigma, c.mu, c.alpha, h);
        sys.diag[row] = diag;
        sys.rhs[row] = c.running_reward;
        if row == 0 {
            sys.rhs[row] -= lower * g_left;
        } else {
            sys.sub[row] = lower;
        }
        if row == m - 1 {
            sys.rhs[row] -= upper * g_right;
        } else {
            sys.sup[row] = upper;
        }
    }
    Ok(sys)
}

/// `(lower, diag, upper)` coefficients of one row of `−L^a`.
fn stencil(sigma: f64, mu: f64, alpha: f64, h: f64) -> (f64, f64, f64) {
    let diffusion = 0.5 * sigma * sigma / (h * h);
    let drift = mu.abs() / h;
    if mu >= 0.0 {
        (-diffusion, 2.0 * diffusion + drift + alpha, -diffusion - drift)
    } else {
        (-diffusion - drift, 2.0 * diffusion + drift + alpha, -diffusion)
    }
}

/// Thomas algorithm. Every pivot must stay positive, which holds for the
/// M-matrices produced by [`assemble_operator`]; anything else is reported
/// as [`Error::PivotBreakdown`].
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let m = sys.len();
    if sys.sub.len() != m || sys.sup.len() != m || sys.rhs.len() != m {
        return Err(Error::GridMismatch(
            "tridiagonal bands have different lengths".into(),
        ));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut pivot = sys.diag[0];
    if !(pivot > 0.0) {
        return Err(Error::PivotBreakdown { row: 0, pivot });
    }
    c[0] = sys.sup[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for i in 1..m {
        pivot = sys.diag[i] - sys.sub[i] * c[i - 1];
        if !(pivot > 0.0) {
            return Err(Error::PivotBreakdown { row: i, pivot });
        }
        c[i] = sys.sup[i] / pivot;
        d[i] = (sys.rhs[i] - sys.sub[i] * d[i - 1]) / pivot;
    }
    let mut u = d;
    for i in (0..m - 1).rev() {
        u[i] -= c[i] * u[i + 1];
    }
    Ok(u)
}
