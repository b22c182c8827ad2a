//! Monte Carlo estimation of payoffs by Euler–Maruyama simulation of the
//! killed controlled diffusion, and the joint-law construction showing
//! that `(X, control)` pairs with equal marginals can differ in law.
//!
//! Every path `j` draws from its own ChaCha stream `(seed, j)`, so results
//! are bit-identical regardless of how paths are spread across threads.
//! Reductions run sequentially in path order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridPolicy;
use crate::problem::ControlProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Time step.
    pub step: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Paths still alive at this time are truncated.
    pub t_max: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.t_max.is_finite() && self.t_max > self.step) {
            return Err(Error::InvalidConfig(format!(
                "t_max ({}) must be finite and exceed step ({})",
                self.t_max, self.step
            )));
        }
        if self.n_paths < 1 {
            return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
        }
        Ok(())
    }

    fn path_rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    /// Fraction of paths still alive at `t_max`.
    pub truncated_fraction: f64,
}

/// Sample mean and standard error `s/√n`; zero error for a single sample.
fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

struct PathOutcome {
    payoff: f64,
    truncated: bool,
}

fn simulate_path(p: &ControlProblem, pol: &GridPolicy, x0: f64, cfg: &SimConfig, path: usize) -> Result<PathOutcome> {
    let (l, r) = (p.domain.left(), p.domain.right());
    if x0 <= l || x0 >= r {
        let payoff = p.boundary_payoff(if x0 <= l { l } else { r })?;
        return Ok(PathOutcome { payoff, truncated: false });
    }
    let mut rng = cfg.path_rng(path);
    let h = cfg.step;
    let sqrt_h = h.sqrt();
    let n_steps = (cfg.t_max / h).ceil() as usize;

    let mut x = x0;
    let mut discount = 1.0;
    let mut reward = 0.0;
    for k in 0..n_steps {
        let a = pol.nearest(x);
        let c = p.local(x, a).map_err(|e| Error::AtPath {
            path,
            time: k as f64 * h,
            source: Box::new(e),
        })?;
        reward += discount * c.running_reward * h;
        discount *= (-c.alpha * h).exp();
        let xi: f64 = StandardNormal.sample(&mut rng);
        x += c.mu * h + c.sigma * sqrt_h * xi;
        if x < l || x > r {
            let exit = if x < l { l } else { r };
            let g = p.boundary_payoff(exit).map_err(|e| Error::AtPath {
                path,
                time: (k + 1) as f64 * h,
                source: Box::new(e),
            })?;
            reward += discount * g;
            return Ok(PathOutcome { payoff: reward, truncated: false });
        }
    }
    Ok(PathOutcome { payoff: reward, truncated: true })
}

/// Estimates the payoff of `pol` started at `x0`.
///
/// The policy is read at the grid node nearest to the current state. A
/// path that leaves `[l, r]` is stopped at the crossed endpoint and
/// collects the discounted boundary payoff there; exits are detected at
/// step boundaries only, which biases the estimate by `O(√step)`.
pub fn simulate_payoff(p: &ControlProblem, pol: &GridPolicy, x0: f64, cfg: &SimConfig) -> Result<PayoffEstimate> {
    cfg.validate()?;
    pol.check_against(p)?;
    if !p.domain.contains_closed(x0) {
        return Err(Error::OutOfDomain {
            x: x0,
            left: p.domain.left(),
            right: p.domain.right(),
        });
    }
    let outcomes: Vec<PathOutcome> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|j| simulate_path(p, pol, x0, cfg, j))
        .collect::<Result<_>>()?;
    let payoffs: Vec<f64> = outcomes.iter().map(|o| o.payoff).collect();
    let truncated = outcomes.iter().filter(|o| o.truncated).count();
    let (mean, std_error) = mean_and_std_error(&payoffs);
    Ok(PayoffEstimate {
        mean,
        std_error,
        n_paths: cfg.n_paths,
        truncated_fraction: truncated as f64 / cfg.n_paths as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// `X = W` and control `sgn(W)`.
    Pi,
    /// `X = ∫ sgn(W) dW` and control `sgn(W)`.
    Sigma,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Pi => "PiConstruction",
            Construction::Sigma => "SigmaConstruction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLawEstimate {
    pub construction: Construction,
    pub t: f64,
    /// Empirical `P(X_t > 0, control_t = −1)`.
    pub prob_estimate: f64,
    pub std_error: f64,
}

/// Terminal samples of both constructions, driven by the same Brownian
/// paths.
#[derive(Debug, Clone, PartialEq)]
pub struct TanakaSamples {
    pub t: f64,
    /// `W_t`, which is also `X_t` of the Π construction.
    pub brownian: Vec<f64>,
    /// `X_t` of the Σ construction.
    pub tanaka: Vec<f64>,
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Simulates `W` as a Gaussian random walk and the discrete stochastic
/// integral `X_{k+1} = X_k + sgn(W_k)(W_{k+1} − W_k)` up to time `t`.
pub fn tanaka_samples(t: f64, cfg: &SimConfig) -> Result<TanakaSamples> {
    cfg.validate()?;
    if !(t > 0.0 && t <= cfg.t_max) {
        return Err(Error::InvalidConfig(format!(
            "t = {t} must lie in (0, t_max = {}]",
            cfg.t_max
        )));
    }
    let n_steps = ((t / cfg.step).round() as usize).max(1);
    let dt = t / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let pairs: Vec<(f64, f64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|j| {
            let mut rng = cfg.path_rng(j);
            let (mut w, mut x) = (0.0f64, 0.0f64);
            for _ in 0..n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let dw = sqrt_dt * z;
                x += sgn(w) * dw;
                w += dw;
            }
            (w, x)
        })
        .collect();
    let (brownian, tanaka) = pairs.into_iter().unzip();
    Ok(TanakaSamples { t, brownian, tanaka })
}

impl TanakaSamples {
    fn estimate(&self, construction: Construction, state: &[f64]) -> JointLawEstimate {
        let hits = state
            .iter()
            .zip(&self.brownian)
            .filter(|(x, w)| **x > 0.0 && sgn(**w) == -1.0)
            .count();
        let n = state.len() as f64;
        let p = hits as f64 / n;
        JointLawEstimate {
            construction,
            t: self.t,
            prob_estimate: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        }
    }

    pub fn joint_law(&self) -> (JointLawEstimate, JointLawEstimate) {
        (
            self.estimate(Construction::Pi, &self.brownian),
            self.estimate(Construction::Sigma, &self.tanaka),
        )
    }

    /// Two-sample Kolmogorov–Smirnov statistic between the `X_t` marginals.
    pub fn marginal_ks(&self) -> f64 {
        ks_statistic(&self.brownian, &self.tanaka)
    }
}

/// Estimates `P(X_t > 0, control_t = −1)` for both constructions.
pub fn tanaka_joint_law(t: f64, cfg: &SimConfig) -> Result<(JointLawEstimate, JointLawEstimate)> {
    Ok(tanaka_samples(t, cfg)?.joint_law())
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value `c(α)·√((n+m)/(n·m))` with
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(n: usize, m: usize, level: f64) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}
