//! Stationary distributions, widespread diagnostics, and the gap `q`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::degrees::DegreeSequence;
use crate::dist::{tv_slices, Distribution};
use crate::rng::RngStream;
use crate::sampler;
use crate::walk::TransitionKernel;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// `200 * ceil(T_ent)`.
pub fn default_max_iters(seq: &DegreeSequence) -> usize {
    200 * seq.entropic_scale().t_ent.ceil().max(1.0) as usize
}

#[derive(Debug, Clone)]
pub struct Stationary {
    pub pi: Distribution,
    pub iterations: usize,
    /// `||pi P - pi||_TV`, recomputed from the returned vector.
    pub residual: f64,
}

/// Power iteration from `start` with two-step Cesaro averaging.
///
/// With iterates `v_k = start P^k`, the candidate is `(v_k + v_{k+1}) / 2`;
/// its residual is `||v_{k+2} - v_k||_1 / 4`, so each round costs one kernel
/// application. Averaging neutralizes period-2 oscillation.
pub fn stationary_distribution(
    k: &TransitionKernel,
    start: &Distribution,
    tol: f64,
    max_iters: usize,
) -> Result<Stationary> {
    let n = k.n();
    if start.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: start.len(),
        });
    }
    let mut v0 = start.probs().to_vec();
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    k.apply(&v0, &mut v1);
    let mut best = (f64::INFINITY, Vec::new());
    for iter in 1..=max_iters {
        k.apply(&v1, &mut v2);
        let residual = 0.5 * tv_slices(&v2, &v0);
        if residual <= tol || iter == max_iters {
            let avg = average(&v0, &v1);
            let mut next = vec![0.0; n];
            k.apply(&avg, &mut next);
            let verified = tv_slices(&next, &avg);
            if verified <= tol {
                return Ok(Stationary {
                    pi: Distribution::from_raw(avg),
                    iterations: iter,
                    residual: verified,
                });
            }
            if verified < best.0 {
                best = (verified, avg);
            }
            if iter == max_iters {
                break;
            }
        }
        // rotate v0 <- v1 <- v2
        std::mem::swap(&mut v0, &mut v1);
        std::mem::swap(&mut v1, &mut v2);
    }
    Err(Error::NotConverged {
        residual: best.0,
        iterations: max_iters,
        best: Box::new(Distribution::from_raw(best.1)),
    })
}

fn average(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut avg: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    let mass: f64 = avg.iter().sum();
    avg.iter_mut().for_each(|p| *p /= mass);
    avg
}

/// Stationary law of the walk on a sampled configuration, started from `mu_in`
/// with the default tolerance and iteration cap.
pub fn stationary_of(k: &TransitionKernel, seq: &DegreeSequence) -> Result<Stationary> {
    stationary_distribution(k, &seq.mu_in(), DEFAULT_TOL, default_max_iters(seq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidespreadStats {
    /// `n * sum_z pi(z)^2`
    pub l2_stat: f64,
    /// `n * max_z pi(z)`
    pub max_stat: f64,
}

pub fn widespread_stats(pi: &Distribution) -> WidespreadStats {
    let n = pi.len() as f64;
    let p = pi.probs();
    WidespreadStats {
        l2_stat: n * p.iter().map(|x| x * x).sum::<f64>(),
        max_stat: n * p.iter().copied().fold(0.0, f64::max),
    }
}

/// One row of the per-replicate diagnostic report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub replicate: usize,
    pub seed: u64,
    pub iterations: usize,
    pub residual: f64,
    pub l2_stat: f64,
    pub max_stat: f64,
    pub tv_to_mu_in: f64,
    pub converged: bool,
    pub scc_count: usize,
}

pub const DIAGNOSTIC_HEADER: &str = "replicate,seed,iterations,residual,l2_stat,max_stat,tv_to_mu_in";

impl DiagnosticRow {
    pub fn csv_line(&self) -> String {
        use crate::experiments::report::fmt_sig12 as f;
        format!(
            "{},{},{},{},{},{},{}",
            self.replicate,
            self.seed,
            self.iterations,
            f(self.residual),
            f(self.l2_stat),
            f(self.max_stat),
            f(self.tv_to_mu_in)
        )
    }
}

/// Samples `replicates` configurations on streams `rng.substream(r)` and
/// solves for each stationary law. Non-converged replicates report the best
/// iterate with `converged = false` and an SCC count.
pub fn diagnostics(
    seq: &Arc<DegreeSequence>,
    replicates: usize,
    rng: RngStream,
    tol: f64,
    max_iters: usize,
) -> Vec<DiagnosticRow> {
    let mu = seq.mu_in();
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let stream = rng.substream(r as u64);
            let g = sampler::sample(seq, stream);
            let k = TransitionKernel::from_digraph(&g);
            let (pi, iterations, residual, converged) = match stationary_distribution(&k, &mu, tol, max_iters) {
                Ok(st) => (st.pi, st.iterations, st.residual, true),
                Err(Error::NotConverged {
                    residual,
                    iterations,
                    best,
                }) => (*best, iterations, residual, false),
                Err(e) => unreachable!("lengths agree: {e}"),
            };
            let w = widespread_stats(&pi);
            DiagnosticRow {
                replicate: r,
                seed: stream.stream_index,
                iterations,
                residual,
                l2_stat: w.l2_stat,
                max_stat: w.max_stat,
                tv_to_mu_in: tv_slices(pi.probs(), mu.probs()),
                converged,
                scc_count: if converged { 0 } else { g.scc().count },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QEstimate {
    pub q_hat: f64,
    pub std_err: f64,
    pub used: usize,
    pub failed: usize,
}

/// Mean and standard error of `||pi_sigma - mu_in||_TV` over independent
/// configurations. Replicates whose stationary solve fails are skipped.
pub fn estimate_q(
    seq: &Arc<DegreeSequence>,
    replicates: usize,
    rng: RngStream,
    tol: f64,
    max_iters: usize,
) -> Result<QEstimate> {
    if replicates < 2 {
        return Err(Error::BadValue("estimate_q needs at least 2 replicates".into()));
    }
    let rows = diagnostics(seq, replicates, rng, tol, max_iters);
    let vals: Vec<f64> = rows.iter().filter(|r| r.converged).map(|r| r.tv_to_mu_in).collect();
    if vals.is_empty() {
        return Err(Error::AllReplicatesFailed { replicates });
    }
    let (mean, se) = mean_se(&vals);
    Ok(QEstimate {
        q_hat: mean,
        std_err: se,
        used: vals.len(),
        failed: replicates - vals.len(),
    })
}

/// Sample mean and standard error (zero for a single value), summed in order.
pub fn mean_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
