use std::time::Instant;

use super::report::{ExperimentReport, ReportRow};
use super::{check_budget, gather, par_indexed, solve_pi, summarize, ExperimentConfig, JUMP_MARGIN};
use crate::dist::Distribution;
use crate::sampler;
use crate::walk::{TransitionKernel, WalkState};
use crate::{Error, Result};

/// `TV(Q^{s,t}(x, .), pi_eta)` for every `s` in the sorted `s_grid` (outer
/// index) and every start (inner index).
pub fn double_sweep_values(
    k_sigma: &TransitionKernel,
    k_eta: &TransitionKernel,
    pi_eta: &Distribution,
    starts: &[usize],
    s_grid: &[usize],
    t: usize,
) -> Result<Vec<Vec<f64>>> {
    k_eta.check_len(k_sigma.n())?;
    k_eta.check_len(pi_eta.len())?;
    if s_grid.iter().any(|&s| s > t) || s_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::BadRange(format!(
            "s grid {s_grid:?} must be sorted within [0, {t}]"
        )));
    }
    if let Some(&x) = starts.iter().find(|&&x| x >= k_sigma.n()) {
        return Err(Error::BadRange(format!("start {x} outside [0, {})", k_sigma.n())));
    }
    let per_start = par_indexed(starts.len(), |i| {
        let mut head = WalkState::point(k_sigma.n(), starts[i]);
        let mut done = 0;
        s_grid
            .iter()
            .map(|&s| {
                head.advance(k_sigma, s - done);
                done = s;
                let mut tail = head.clone();
                tail.advance(k_eta, t - s);
                tail.tv_to(pi_eta.probs())
            })
            .collect::<Vec<f64>>()
    });
    Ok((0..s_grid.len())
        .map(|j| per_start.iter().map(|v| v[j]).collect())
        .collect())
}

/// Sweep of the switch time `s` at fixed `t = floor(beta * T_ent)`: one pair of
/// independent configurations per replicate; rows report the mean over
/// replicates of the max over starts, the metadata the matching min.
pub fn double_cutoff_sweep(cfg: &ExperimentConfig, beta: f64) -> Result<ExperimentReport> {
    cfg.validate()?;
    if !(beta >= 0.0) {
        return Err(Error::BadRange(format!("beta = {beta}")));
    }
    let clock = Instant::now();
    let scale = cfg.seq.entropic_scale();
    let t = scale.steps(beta);
    if let Some(&s) = cfg.s_grid.iter().find(|&&s| s > t) {
        return Err(Error::BadRange(format!("switch time {s} exceeds t = {t}")));
    }
    let (starts0, mode) = cfg.starts(0)?;
    check_budget(
        cfg.replicates as f64 * starts0.len() as f64 * (cfg.s_grid.len() * t) as f64 * cfg.seq.m() as f64,
        cfg.budget,
    )?;

    let results = par_indexed(cfg.replicates, |r| -> Result<Vec<Vec<f64>>> {
        let k_sigma = TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, cfg.sigma_stream(r)));
        let k_eta = TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, cfg.eta_stream(r, 0)));
        let pi_eta = solve_pi(cfg, &k_eta)?;
        let (starts, _) = cfg.starts(r)?;
        double_sweep_values(&k_sigma, &k_eta, &pi_eta, &starts, &cfg.s_grid, t)
    });
    let (reps, failed) = gather(results)?;

    let t_ent = scale.t_ent;
    let eps = cfg.window_eps;
    let mut meta = cfg.base_meta("double-cutoff");
    let mut rows = Vec::with_capacity(cfg.s_grid.len());
    let mut lower = Vec::with_capacity(cfg.s_grid.len());
    let (mut global_min, mut global_max) = (1.0f64, 0.0f64);
    for (j, &s) in cfg.s_grid.iter().enumerate() {
        let maxes: Vec<f64> = reps.iter().map(|r| r[j].iter().copied().fold(0.0, f64::max)).collect();
        let mins: Vec<f64> = reps.iter().map(|r| r[j].iter().copied().fold(1.0, f64::min)).collect();
        global_max = maxes.iter().copied().fold(global_max, f64::max);
        global_min = mins.iter().copied().fold(global_min, f64::min);
        let (mean, se) = summarize(&maxes);
        lower.push(summarize(&mins).0);
        let sf = s as f64;
        // limit profile: 1 below the cutoff, 0 on I(eps, beta), unknown elsewhere
        let inside = sf <= (1.0 - eps) * t_ent || (sf >= (1.0 + eps) * t_ent && sf <= (beta - eps) * t_ent);
        let theory = if beta < 1.0 {
            1.0
        } else if inside {
            0.0
        } else {
            f64::NAN
        };
        let flagged = (beta - 1.0).abs() < JUMP_MARGIN || theory.is_nan();
        if flagged {
            meta.flagged.push(sf);
        }
        rows.push(ReportRow {
            abscissa: sf,
            estimate: mean.clamp(0.0, 1.0),
            std_err: se,
            theory,
            n_effective: reps.len(),
            flagged,
        });
    }
    meta.start_mode = mode.to_string();
    meta.start_count = starts0.len();
    meta.lower_envelope = Some(lower);
    meta.not_converged = failed;
    meta.extra.insert("beta".into(), serde_json::json!(beta));
    meta.extra.insert("t".into(), serde_json::json!(t));
    meta.extra.insert("min_over_all".into(), serde_json::json!(global_min));
    meta.extra.insert("max_over_all".into(), serde_json::json!(global_max));
    meta.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentReport { rows, meta })
}
