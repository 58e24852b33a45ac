use std::time::Instant;

use super::report::{ExperimentReport, ReportRow};
use super::theory::TheoryCurve;
use super::{
    check_budget, gather, near_gamma, par_indexed, single_start, solve_pi, summarize, ExperimentConfig, Regime,
};
use crate::dist::Distribution;
use crate::sampler;
use crate::walk::{bhat_row, TransitionKernel};
use crate::Result;

/// Finite-horizon estimate of the joint distance at horizon `t` from the
/// decomposition
/// `D = 1/2 [(1-a)^t + mean_eta sum_y |c_B Bhat(eta, y) - c_pi pi_eta(y)|]`
/// with `c_B = a t (1-a)^{t-1}`, `c_pi = (1-a)^t + c_B`.
///
/// Returns `1` at `t = 0` and the per-environment half sums otherwise, so the
/// estimate is `(1-a)^t / 2 + mean(values)`.
pub fn joint_estimate(
    alpha: f64,
    t: usize,
    x: usize,
    k_sigma: &TransitionKernel,
    envs: &[(TransitionKernel, Distribution)],
) -> Result<(f64, Vec<f64>)> {
    if t == 0 {
        return Ok((1.0, Vec::new()));
    }
    let stay = (1.0 - alpha).powi(t as i32);
    let c_b = alpha * t as f64 * (1.0 - alpha).powi(t as i32 - 1);
    let c_pi = stay + c_b;
    let vals = envs
        .iter()
        .map(|(k_eta, pi_eta)| {
            let b = bhat_row(x, t, k_sigma, k_eta)?;
            Ok(0.5
                * b.probs()
                    .iter()
                    .zip(pi_eta.probs())
                    .map(|(bv, pv)| (c_b * bv - c_pi * pv).abs())
                    .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(((0.5 * stay + mean).clamp(0.0, 1.0), vals))
}

pub(crate) fn joint_curve(regime: Regime) -> TheoryCurve {
    match regime {
        Regime::Zero => TheoryCurve::JointGamma0,
        Regime::Infinite => TheoryCurve::JointGammainf,
        Regime::General => TheoryCurve::JointGeneral,
    }
}

/// Joint-chain distance profile at `t = floor(beta / alpha)`, one
/// configuration and start per replicate, `env_samples` fresh environments
/// shared across the beta grid.
pub fn joint_trichotomy_curve(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let steps: Vec<usize> = cfg.beta_grid.iter().map(|&b| cfg.regeneration_steps(b)).collect();
    let total_t: usize = steps.iter().sum();
    check_budget(
        2.0 * total_t as f64 * cfg.seq.m() as f64 * (cfg.env_samples * cfg.replicates) as f64,
        cfg.budget,
    )?;

    let results = par_indexed(cfg.replicates, |r| -> Result<Vec<(f64, Vec<f64>)>> {
        let k_sigma = TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, cfg.sigma_stream(r)));
        let x = single_start(cfg, r)?;
        let envs = par_indexed(cfg.env_samples, |e| -> Result<(TransitionKernel, Distribution)> {
            let k = TransitionKernel::from_digraph(&sampler::sample(&cfg.seq, cfg.eta_stream(r, e)));
            let pi = solve_pi(cfg, &k)?;
            Ok((k, pi))
        });
        let (envs, _) = gather(envs)?;
        let per_beta = par_indexed(steps.len(), |j| joint_estimate(cfg.alpha, steps[j], x, &k_sigma, &envs));
        per_beta.into_iter().collect()
    });
    let (reps, failed) = gather(results)?;

    let gamma_hat = cfg.gamma_hat();
    let regime = cfg.regime();
    let curve = joint_curve(regime);
    let mut meta = cfg.base_meta("joint");
    let mut rows = Vec::with_capacity(steps.len());
    for (j, &beta) in cfg.beta_grid.iter().enumerate() {
        let estimates: Vec<f64> = reps.iter().map(|r| r[j].0).collect();
        let (mean, mut se) = summarize(&estimates);
        if reps.len() == 1 {
            se = summarize(&reps[0][j].1).1;
        }
        let n_eff = reps.iter().map(|r| r[j].1.len().max(1)).sum();
        let (theory, at_jump) = if beta > 0.0 {
            let v = curve.eval(beta, gamma_hat, 0.0)?;
            (v.value, v.at_jump)
        } else {
            (1.0, false)
        };
        let flagged = at_jump || (regime == Regime::General && near_gamma(beta, gamma_hat));
        if flagged {
            meta.flagged.push(beta);
        }
        rows.push(ReportRow {
            abscissa: beta,
            estimate: mean.clamp(0.0, 1.0),
            std_err: se,
            theory,
            n_effective: n_eff,
            flagged,
        });
    }
    meta.alpha = Some(cfg.alpha);
    meta.gamma_hat = Some(gamma_hat);
    meta.regime = Some(regime.label().to_string());
    meta.start_mode = match cfg.start_vertices {
        super::StartVertices::Explicit(_) => "explicit",
        _ => "sampled",
    }
    .to_string();
    meta.start_count = 1;
    meta.not_converged = failed;
    meta.extra.insert("steps".into(), serde_json::json!(steps));
    meta.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentReport { rows, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::{DegreeSequence, ModelKind};
    use std::sync::Arc;

    #[test]
    fn zero_horizon_is_one() {
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 50, 3).unwrap());
        let mut cfg = ExperimentConfig::new(seq);
        cfg.alpha = 0.5;
        cfg.beta_grid = vec![0.2, 1.0];
        cfg.env_samples = 3;
        let rep = joint_trichotomy_curve(&cfg).unwrap();
        assert_eq!(rep.rows[0].estimate, 1.0);
        assert!(rep.rows[1].estimate < 1.0);
        assert_eq!(rep.rows[1].n_effective, 3);
    }

    #[test]
    fn large_beta_is_small() {
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 400, 3).unwrap());
        let mut cfg = ExperimentConfig::new(seq);
        cfg.alpha = 0.2;
        cfg.beta_grid = vec![8.0];
        cfg.env_samples = 4;
        let rep = joint_trichotomy_curve(&cfg).unwrap();
        assert!(
            rep.rows[0].estimate <= 0.01 + 3.0 * rep.rows[0].std_err,
            "{:?}",
            rep.rows[0]
        );
    }
}
