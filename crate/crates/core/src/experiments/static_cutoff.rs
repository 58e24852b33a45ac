use std::time::Instant;

use super::report::{ExperimentReport, ReportRow};
use super::theory::static_theta;
use super::{check_budget, gather, near_jump, par_indexed, solve_pi, summarize, ExperimentConfig};
use crate::sampler;
use crate::walk::{TransitionKernel, WalkState};
use crate::Result;

struct Replicate {
    max: Vec<f64>,
    min: Vec<f64>,
    renormalizations: usize,
}

/// Worst-case distance to stationarity `max_x ||P_sigma^t(x, .) - pi_sigma||_TV`
/// at `t = floor(beta * T_ent)`, one fresh configuration per replicate.
pub fn static_cutoff_profile(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let scale = cfg.seq.entropic_scale();
    let steps: Vec<usize> = cfg.beta_grid.iter().map(|&b| scale.steps(b)).collect();
    let (starts0, mode) = cfg.starts(0)?;
    let t_max = *steps.last().unwrap_or(&0) as f64;
    check_budget(
        cfg.replicates as f64 * starts0.len() as f64 * t_max * cfg.seq.m() as f64,
        cfg.budget,
    )?;

    let results = par_indexed(cfg.replicates, |r| -> Result<Replicate> {
        let g = sampler::sample(&cfg.seq, cfg.sigma_stream(r));
        let k = TransitionKernel::from_digraph(&g);
        let pi = solve_pi(cfg, &k)?;
        let (starts, _) = cfg.starts(r)?;
        let per_start = par_indexed(starts.len(), |i| {
            let mut w = WalkState::point(k.n(), starts[i]);
            let mut done = 0;
            let tvs: Vec<f64> = steps
                .iter()
                .map(|&t| {
                    w.advance(&k, t - done);
                    done = t;
                    w.tv_to(pi.probs())
                })
                .collect();
            (tvs, w.renormalizations())
        });
        let fold = |f: fn(f64, f64) -> f64, init: f64| -> Vec<f64> {
            (0..steps.len())
                .map(|j| per_start.iter().map(|(v, _)| v[j]).fold(init, f))
                .collect()
        };
        Ok(Replicate {
            max: fold(f64::max, 0.0),
            min: fold(f64::min, 1.0),
            renormalizations: per_start.iter().map(|(_, c)| c).sum(),
        })
    });
    let (reps, failed) = gather(results)?;

    let mut meta = cfg.base_meta("static-cutoff");
    let mut rows = Vec::with_capacity(steps.len());
    let mut lower = Vec::with_capacity(steps.len());
    for (j, &beta) in cfg.beta_grid.iter().enumerate() {
        let (mean, se) = summarize(&reps.iter().map(|r| r.max[j]).collect::<Vec<_>>());
        lower.push(summarize(&reps.iter().map(|r| r.min[j]).collect::<Vec<_>>()).0);
        let flagged = near_jump(beta, None);
        if flagged {
            meta.flagged.push(beta);
        }
        rows.push(ReportRow {
            abscissa: beta,
            estimate: mean.clamp(0.0, 1.0),
            std_err: se,
            theory: static_theta(beta),
            n_effective: reps.len(),
            flagged,
        });
    }
    meta.start_mode = mode.to_string();
    meta.start_count = starts0.len();
    meta.lower_envelope = Some(lower);
    meta.not_converged = failed;
    meta.renormalizations = reps.iter().map(|r| r.renormalizations).sum();
    meta.extra.insert("steps".into(), serde_json::json!(steps));
    meta.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentReport { rows, meta })
}
