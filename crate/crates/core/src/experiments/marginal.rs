use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::report::{ExperimentReport, ReportRow};
use super::theory::TheoryCurve;
use super::{
    check_budget, near_gamma, near_jump, par_indexed, single_start, summarize, ExperimentConfig, Regime, TimeScale,
    STREAM_Q, STREAM_SCHEDULE,
};
use crate::dist::tv_slices;
use crate::sampler;
use crate::stationary::estimate_q;
use crate::walk::{TransitionKernel, WalkState};
use crate::{Error, Result};

const CHUNK: usize = 64;

fn marginal_curve(regime: Regime) -> TheoryCurve {
    match regime {
        Regime::Zero => TheoryCurve::MarginalGamma0,
        Regime::Infinite => TheoryCurve::MarginalGammainf,
        Regime::General => TheoryCurve::MarginalGeneral,
    }
}

/// Marginal distance to `mu_in` at `t = floor(beta / alpha)` (or
/// `floor(beta * T_ent)` on the entropic scale), evaluated as
/// `(1-a)^t ||P_sigma^t(x, .) - mu_in||_TV` per configuration and start.
/// Rows hold the mean over replicates of the max over starts.
pub fn marginal_trichotomy_curve(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let scale = cfg.seq.entropic_scale();
    let steps: Vec<usize> = cfg
        .beta_grid
        .iter()
        .map(|&b| match cfg.time_scale {
            TimeScale::Regeneration => cfg.regeneration_steps(b),
            TimeScale::Entropic => scale.steps(b),
        })
        .collect();
    let (starts0, mode) = cfg.starts(0)?;
    check_budget(
        cfg.replicates as f64 * starts0.len() as f64 * *steps.last().unwrap_or(&0) as f64 * cfg.seq.m() as f64,
        cfg.budget,
    )?;
    let mu = cfg.seq.mu_in();

    let reps = par_indexed(cfg.replicates, |r| -> Result<(Vec<Vec<f64>>, usize)> {
        let k = TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, cfg.sigma_stream(r)));
        let (starts, _) = cfg.starts(r)?;
        let per_start = par_indexed(starts.len(), |i| {
            let mut w = WalkState::point(k.n(), starts[i]);
            let mut done = 0;
            let vals: Vec<f64> = steps
                .iter()
                .map(|&t| {
                    w.advance(&k, t - done);
                    done = t;
                    (1.0 - cfg.alpha).powi(t as i32) * w.tv_to(mu.probs())
                })
                .collect();
            (vals, w.renormalizations())
        });
        let renorm = per_start.iter().map(|p| p.1).sum();
        Ok((per_start.into_iter().map(|p| p.0).collect(), renorm))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let gamma_hat = cfg.gamma_hat();
    let regime = cfg.regime();
    let needs_q = cfg.time_scale == TimeScale::Entropic || regime != Regime::Infinite;
    let q = if needs_q {
        Some(estimate_q(
            &cfg.seq,
            cfg.q_replicates.max(2),
            cfg.root().derive(&[STREAM_Q]),
            cfg.tol,
            cfg.max_iters(),
        )?)
    } else {
        None
    };
    let q_hat = q.as_ref().map_or(0.0, |q| q.q_hat);

    let mut meta = cfg.base_meta("marginal");
    let mut rows = Vec::with_capacity(steps.len());
    let mut lower = Vec::with_capacity(steps.len());
    for (j, &beta) in cfg.beta_grid.iter().enumerate() {
        let maxes: Vec<f64> = reps
            .iter()
            .map(|(v, _)| v.iter().map(|s| s[j]).fold(0.0, f64::max))
            .collect();
        let mins: Vec<f64> = reps
            .iter()
            .map(|(v, _)| v.iter().map(|s| s[j]).fold(1.0, f64::min))
            .collect();
        let (mean, se) = summarize(&maxes);
        lower.push(summarize(&mins).0);
        let (theory, flagged) = match cfg.time_scale {
            TimeScale::Entropic => {
                let v = if beta > 0.0 {
                    TheoryCurve::StaticPhi.eval(beta, 0.0, q_hat)?.value
                } else {
                    1.0
                };
                (v, near_jump(beta, None))
            }
            TimeScale::Regeneration if beta > 0.0 => {
                let v = marginal_curve(regime).eval(beta, gamma_hat, q_hat)?;
                (
                    v.value,
                    v.at_jump || (regime == Regime::General && near_gamma(beta, gamma_hat)),
                )
            }
            // t = 0: the distance is 1 - mu_in(x) for the chosen starts
            TimeScale::Regeneration => (1.0, false),
        };
        if flagged {
            meta.flagged.push(beta);
        }
        rows.push(ReportRow {
            abscissa: beta,
            estimate: mean.clamp(0.0, 1.0),
            std_err: se,
            theory,
            n_effective: reps.len(),
            flagged,
        });
    }
    meta.alpha = Some(cfg.alpha);
    meta.gamma_hat = Some(gamma_hat);
    meta.regime = Some(regime.label().to_string());
    meta.q_hat = q.as_ref().map(|q| q.q_hat);
    meta.q_std_err = q.as_ref().map(|q| q.std_err);
    meta.not_converged = q.as_ref().map_or(0, |q| q.failed);
    meta.start_mode = mode.to_string();
    meta.start_count = starts0.len();
    meta.lower_envelope = Some(lower);
    meta.renormalizations = reps.iter().map(|r| r.1).sum();
    meta.extra.insert(
        "time_scale".into(),
        serde_json::json!(match cfg.time_scale {
            TimeScale::Regeneration => "regeneration",
            TimeScale::Entropic => "entropic",
        }),
    );
    meta.extra.insert("steps".into(), serde_json::json!(steps));
    meta.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentReport { rows, meta })
}

/// Output of [`marginal_mc_crosscheck`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    /// `TV(mean sampled law, mu_in)`.
    pub estimate: f64,
    /// `1/2 sum_y sd_y / sqrt(K)` over the `K` sampled laws.
    pub std_err: f64,
    /// `(1-a)^t ||P_sigma^t(x, .) - mu_in||_TV` for the same configuration and start.
    pub reference: f64,
    pub mean_regenerations: f64,
}

/// Direct Monte-Carlo law of the regenerating walk after `t` steps from the
/// first replicate's configuration and start. Each sample draws a schedule of
/// Bernoulli(alpha) regenerations; a regeneration swaps in a fresh
/// configuration before the step is taken.
pub fn marginal_mc_crosscheck(cfg: &ExperimentConfig, t: usize, schedule_samples: usize) -> Result<CrossCheck> {
    cfg.validate()?;
    if t == 0 || schedule_samples == 0 {
        return Err(Error::BadRange(
            "crosscheck needs t >= 1 and at least one sample".into(),
        ));
    }
    let m = cfg.seq.m() as f64;
    check_budget(schedule_samples as f64 * t as f64 * m * (1.0 + cfg.alpha), cfg.budget)?;
    let n = cfg.seq.n();
    let k_sigma = TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, cfg.sigma_stream(0)));
    let x = single_start(cfg, 0)?;
    let mu = cfg.seq.mu_in();
    let root = cfg.root();

    let one = |k: usize| {
        let mut rng = root.derive(&[STREAM_SCHEDULE, k as u64]).rng();
        let mut w = WalkState::point(n, x);
        let mut env: Option<TransitionKernel> = None;
        let mut regenerations = 0u64;
        for _ in 0..t {
            if rng.random_bool(cfg.alpha) {
                regenerations += 1;
                let stream = root.derive(&[STREAM_SCHEDULE, k as u64, regenerations]);
                env = Some(TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, stream)));
            }
            w.step(env.as_ref().unwrap_or(&k_sigma));
        }
        (w.into_distribution().into_vec(), regenerations)
    };

    let mut sum = vec![0.0; n];
    let mut sumsq = vec![0.0; n];
    let mut regen_total = 0u64;
    for chunk_start in (0..schedule_samples).step_by(CHUNK) {
        let len = CHUNK.min(schedule_samples - chunk_start);
        for (law, regen) in par_indexed(len, |i| one(chunk_start + i)) {
            regen_total += regen;
            for ((s, q), p) in sum.iter_mut().zip(sumsq.iter_mut()).zip(&law) {
                *s += p;
                *q += p * p;
            }
        }
    }
    let kf = schedule_samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / kf).collect();
    let std_err = if schedule_samples > 1 {
        let spread: f64 = mean
            .iter()
            .zip(&sumsq)
            .map(|(a, q)| ((q - kf * a * a) / (kf - 1.0)).max(0.0).sqrt())
            .sum();
        0.5 * spread / kf.sqrt()
    } else {
        0.0
    };
    let mut w = WalkState::point(n, x);
    w.advance(&k_sigma, t);
    Ok(CrossCheck {
        estimate: tv_slices(&mean, mu.probs()),
        std_err,
        reference: (1.0 - cfg.alpha).powi(t as i32) * w.tv_to(mu.probs()),
        mean_regenerations: regen_total as f64 / kf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::DegreeSequence;
    use crate::experiments::StartVertices;
    use std::sync::Arc;

    fn mixed(n: usize) -> Arc<DegreeSequence> {
        let out: Vec<u32> = (0..n).map(|i| if i % 2 == 0 { 2 } else { 3 }).collect();
        let inn: Vec<u32> = (0..n).map(|i| if i % 2 == 0 { 3 } else { 2 }).collect();
        Arc::new(DegreeSequence::dcm(out, inn).unwrap())
    }

    #[test]
    fn zero_horizon_is_one_minus_mu() {
        let seq = mixed(40);
        let mut cfg = ExperimentConfig::new(seq.clone());
        cfg.beta_grid = vec![0.0];
        cfg.start_vertices = StartVertices::Explicit(vec![3]);
        cfg.q_replicates = 2;
        let rep = marginal_trichotomy_curve(&cfg).unwrap();
        assert!((rep.rows[0].estimate - (1.0 - seq.mu_in().probs()[3])).abs() < 1e-12);
    }

    #[test]
    fn no_regeneration_matches_reference() {
        let mut cfg = ExperimentConfig::new(mixed(200));
        cfg.alpha = 1e-12;
        let cc = marginal_mc_crosscheck(&cfg, 4, 3).unwrap();
        assert_eq!(cc.mean_regenerations, 0.0);
        assert_eq!(cc.std_err, 0.0);
        assert!((cc.estimate - cc.reference).abs() < 1e-9);
    }

    #[test]
    fn rejects_zero_horizon() {
        let cfg = ExperimentConfig::new(mixed(20));
        assert!(matches!(marginal_mc_crosscheck(&cfg, 0, 5), Err(Error::BadRange(_))));
    }
}
