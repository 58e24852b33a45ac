//! Mixing experiments on static, double, and regenerating environments.
//!
//! Every experiment is a deterministic function of its [`ExperimentConfig`]:
//! work items (replicates, environments, start vertices) draw from their own
//! [`RngStream`], run in parallel, and are reduced in index order.

use std::sync::Arc;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::degrees::DegreeSequence;
use crate::rng::RngStream;
use crate::stationary;
use crate::{Error, Result};

mod annealed;
mod double_cutoff;
mod joint;
mod marginal;
pub mod report;
mod static_cutoff;
pub mod theory;
mod weight_lln;

pub use annealed::annealed_check;
pub use double_cutoff::{double_cutoff_sweep, double_sweep_values};
pub use joint::{joint_estimate, joint_trichotomy_curve};
pub use marginal::{marginal_mc_crosscheck, marginal_trichotomy_curve, CrossCheck};
pub use report::{ExperimentReport, Metadata, ReportRow};
pub use static_cutoff::static_cutoff_profile;
pub use theory::{theory_curves, TheoryCurve, TheoryValue};
pub use weight_lln::{path_weight_lln, WeightLln};

/// Default cap on scalar multiply-adds per run.
pub const DEFAULT_BUDGET: f64 = 5e10;
/// Start vertices are enumerated exhaustively up to this `n`.
pub const EXHAUSTIVE_LIMIT: usize = 2000;
pub const DEFAULT_START_SAMPLE: usize = 32;
/// Grid points this close to a jump of the limit curve are flagged.
pub const JUMP_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StartVertices {
    /// Exhaustive when `n <= EXHAUSTIVE_LIMIT`, otherwise a sample of
    /// `DEFAULT_START_SAMPLE`.
    Auto,
    All,
    Sample(usize),
    Explicit(Vec<usize>),
}

impl StartVertices {
    /// The chosen vertices (sorted for samples) and a mode label.
    pub fn resolve(&self, n: usize, rng: RngStream) -> Result<(Vec<usize>, &'static str)> {
        let sample = |k: usize| {
            let mut v = index::sample(&mut rng.rng(), n, k.min(n)).into_vec();
            v.sort_unstable();
            v
        };
        Ok(match self {
            StartVertices::Auto if n <= EXHAUSTIVE_LIMIT => ((0..n).collect(), "exhaustive"),
            StartVertices::Auto => (sample(DEFAULT_START_SAMPLE), "sampled"),
            StartVertices::All => ((0..n).collect(), "exhaustive"),
            StartVertices::Sample(0) => return Err(Error::BadValue("start sample size 0".into())),
            StartVertices::Sample(k) if *k >= n => ((0..n).collect(), "exhaustive"),
            StartVertices::Sample(k) => (sample(*k), "sampled"),
            StartVertices::Explicit(v) => {
                if v.is_empty() || v.iter().any(|&x| x >= n) {
                    return Err(Error::BadValue(format!("start vertices {v:?} invalid for n = {n}")));
                }
                (v.clone(), "explicit")
            }
        })
    }
}

/// Time axis of the marginal experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeScale {
    /// `t = floor(beta / alpha)`
    Regeneration,
    /// `t = floor(beta * T_ent)`
    Entropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Zero,
    Infinite,
    General,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Zero => "gamma=0",
            Regime::Infinite => "gamma=inf",
            Regime::General => "general",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seq: Arc<DegreeSequence>,
    pub alpha: f64,
    pub beta_grid: Vec<f64>,
    pub s_grid: Vec<usize>,
    pub env_samples: usize,
    /// Independent base configurations `sigma`.
    pub replicates: usize,
    pub start_vertices: StartVertices,
    pub root_seed: u64,
    pub time_scale: TimeScale,
    /// Replicates used to estimate `q` when a theory curve needs it.
    pub q_replicates: usize,
    pub tol: f64,
    pub max_iters: Option<usize>,
    pub budget: f64,
    /// `gamma_hat` below this selects the gamma = 0 curve.
    pub gamma_low: f64,
    /// `gamma_hat` above this selects the gamma = infinity curve.
    pub gamma_high: f64,
    /// Half-width of the excluded window around `T_ent` in the double sweep.
    pub window_eps: f64,
}

impl ExperimentConfig {
    pub fn new(seq: Arc<DegreeSequence>) -> Self {
        Self {
            seq,
            alpha: 0.01,
            beta_grid: vec![0.5, 1.0, 2.0],
            s_grid: vec![0],
            env_samples: 10,
            replicates: 1,
            start_vertices: StartVertices::Auto,
            root_seed: 0,
            time_scale: TimeScale::Regeneration,
            q_replicates: 20,
            tol: stationary::DEFAULT_TOL,
            max_iters: None,
            budget: DEFAULT_BUDGET,
            gamma_low: 0.2,
            gamma_high: 5.0,
            window_eps: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::BadValue(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if self.beta_grid.is_empty() || self.beta_grid.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(Error::BadValue("beta grid must be nonempty and nonnegative".into()));
        }
        if !is_sorted(&self.beta_grid) || !is_sorted(&self.s_grid) {
            return Err(Error::BadValue("grids must be sorted".into()));
        }
        if self.s_grid.is_empty() {
            return Err(Error::BadValue("s grid must be nonempty".into()));
        }
        if self.env_samples == 0 || self.replicates == 0 {
            return Err(Error::BadValue("env_samples and replicates must be positive".into()));
        }
        if !(self.tol > 0.0) || !(self.budget > 0.0) {
            return Err(Error::BadValue("tol and budget must be positive".into()));
        }
        Ok(())
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
            .unwrap_or_else(|| stationary::default_max_iters(&self.seq))
    }

    pub fn gamma_hat(&self) -> f64 {
        self.alpha * self.seq.entropic_scale().t_ent
    }

    pub fn regime(&self) -> Regime {
        let g = self.gamma_hat();
        if g < self.gamma_low {
            Regime::Zero
        } else if g > self.gamma_high {
            Regime::Infinite
        } else {
            Regime::General
        }
    }

    /// `floor(beta / alpha)`.
    pub fn regeneration_steps(&self, beta: f64) -> usize {
        (beta / self.alpha).floor() as usize
    }

    pub(crate) fn root(&self) -> RngStream {
        RngStream::root(self.root_seed)
    }

    /// Stream of the base configuration of replicate `r`.
    pub(crate) fn sigma_stream(&self, r: usize) -> RngStream {
        self.root().derive(&[STREAM_SIGMA, r as u64])
    }

    /// Stream of the `e`-th fresh environment of replicate `r`.
    pub(crate) fn eta_stream(&self, r: usize, e: usize) -> RngStream {
        self.root().derive(&[STREAM_ETA, r as u64, e as u64])
    }

    pub(crate) fn starts(&self, r: usize) -> Result<(Vec<usize>, &'static str)> {
        self.start_vertices
            .resolve(self.seq.n(), self.root().derive(&[STREAM_START, r as u64]))
    }

    pub(crate) fn base_meta(&self, experiment: &str) -> Metadata {
        let scale = self.seq.entropic_scale();
        Metadata {
            experiment: experiment.to_string(),
            model: self.seq.model().to_string(),
            n: self.seq.n(),
            m: self.seq.m(),
            delta: self.seq.delta(),
            entropy: scale.h,
            t_ent: scale.t_ent,
            root_seed: self.root_seed,
            replicates: self.replicates,
            env_samples: self.env_samples,
            ..Metadata::default()
        }
    }
}

pub(crate) const STREAM_SIGMA: u64 = 1;
pub(crate) const STREAM_ETA: u64 = 2;
pub(crate) const STREAM_START: u64 = 3;
pub(crate) const STREAM_Q: u64 = 4;
pub(crate) const STREAM_SCHEDULE: u64 = 5;

fn is_sorted<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

/// `|beta - 1| < JUMP_MARGIN`, plus `|beta - gamma_hat| < JUMP_MARGIN` when a
/// `gamma_hat` applies.
pub(crate) fn near_jump(beta: f64, gamma_hat: Option<f64>) -> bool {
    (beta - 1.0).abs() < JUMP_MARGIN || gamma_hat.is_some_and(|g| (beta - g).abs() < JUMP_MARGIN)
}

/// `|beta - gamma_hat| < JUMP_MARGIN`.
pub(crate) fn near_gamma(beta: f64, gamma_hat: f64) -> bool {
    (beta - gamma_hat).abs() < JUMP_MARGIN
}

/// Runs `f` over `0..count` in parallel, returning results in index order.
pub(crate) fn par_indexed<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).into_par_iter().map(f).collect()
}

/// Mean and standard error over replicate values.
pub(crate) fn summarize(vals: &[f64]) -> (f64, f64) {
    stationary::mean_se(vals)
}

pub(crate) fn check_budget(required: f64, cap: f64) -> Result<()> {
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }
    Ok(())
}

/// Keeps successful replicates, counting those whose stationary solve did not
/// converge. Other errors propagate; if nothing succeeded the first
/// `NotConverged` is returned.
pub(crate) fn gather<T>(results: Vec<Result<T>>) -> Result<(Vec<T>, usize)> {
    let mut ok = Vec::with_capacity(results.len());
    let mut first_failure = None;
    let mut failed = 0;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e @ Error::NotConverged { .. }) => {
                failed += 1;
                first_failure.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    match first_failure {
        Some(e) if ok.is_empty() => Err(e),
        _ => Ok((ok, failed)),
    }
}

/// Stationary law of `k` started from `mu_in` with the configured tolerance.
pub(crate) fn solve_pi(cfg: &ExperimentConfig, k: &crate::TransitionKernel) -> Result<crate::Distribution> {
    stationary::stationary_distribution(k, &cfg.seq.mu_in(), cfg.tol, cfg.max_iters()).map(|s| s.pi)
}

/// A single start vertex for replicate `r`: explicit lists are cycled, other
/// modes draw uniformly.
pub(crate) fn single_start(cfg: &ExperimentConfig, r: usize) -> Result<usize> {
    use rand::Rng;
    let n = cfg.seq.n();
    match &cfg.start_vertices {
        StartVertices::Explicit(v) => {
            let x = *v
                .get(r % v.len().max(1))
                .ok_or_else(|| Error::BadValue("empty start list".into()))?;
            if x >= n {
                return Err(Error::BadValue(format!("start vertex {x} outside [0, {n})")));
            }
            Ok(x)
        }
        _ => Ok(cfg.root().derive(&[STREAM_START, r as u64]).rng().random_range(0..n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::ModelKind;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::new(Arc::new(DegreeSequence::regular(ModelKind::Dcm, 100, 3).unwrap()))
    }

    #[test]
    fn validation() {
        let mut c = cfg();
        assert!(c.validate().is_ok());
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.beta_grid = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.beta_grid.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn regimes() {
        let mut c = cfg();
        let t = c.seq.entropic_scale().t_ent;
        c.alpha = 0.1 / t;
        assert_eq!(c.regime(), Regime::Zero);
        c.alpha = 6.0 / t;
        assert_eq!(c.regime(), Regime::Infinite);
        c.alpha = 1.0 / t;
        assert_eq!(c.regime(), Regime::General);
    }

    #[test]
    fn start_resolution() {
        let s = RngStream::root(1);
        assert_eq!(StartVertices::Auto.resolve(10, s).unwrap().0.len(), 10);
        let (v, mode) = StartVertices::Auto.resolve(5000, s).unwrap();
        assert_eq!((v.len(), mode), (DEFAULT_START_SAMPLE, "sampled"));
        assert_eq!(v, StartVertices::Auto.resolve(5000, s).unwrap().0);
        assert!(StartVertices::Explicit(vec![10]).resolve(10, s).is_err());
        assert_eq!(StartVertices::Sample(20).resolve(10, s).unwrap().1, "exhaustive");
    }

    #[test]
    fn jump_flags() {
        assert!(near_jump(1.05, None));
        assert!(!near_jump(1.5, None));
        assert!(near_jump(1.5, Some(1.45)));
    }
}
