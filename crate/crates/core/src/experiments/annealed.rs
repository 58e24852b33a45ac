use std::sync::Arc;
use std::time::Instant;

use super::report::{ExperimentReport, Metadata, ReportRow};
use super::{par_indexed, StartVertices, JUMP_MARGIN, STREAM_ETA, STREAM_START};
use crate::degrees::DegreeSequence;
use crate::dist::tv_slices;
use crate::rng::RngStream;
use crate::sampler;
use crate::walk::{TransitionKernel, WalkState};
use crate::{Error, Result};

/// `max_x TV(mean_eta P_eta^t(x, .), mu_in)` for each `t` in `t_grid`.
///
/// `std_err` is the Monte-Carlo envelope `1/2 sum_y sd_y / sqrt(K)` of the
/// maximizing start; `theory` is 0.
pub fn annealed_check(
    seq: &Arc<DegreeSequence>,
    t_grid: &[usize],
    env_samples: usize,
    start_vertices: &StartVertices,
    rng: RngStream,
) -> Result<ExperimentReport> {
    if t_grid.is_empty() || t_grid.contains(&0) || t_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::BadRange(format!(
            "t grid {t_grid:?} must be sorted and positive"
        )));
    }
    if env_samples == 0 {
        return Err(Error::BadValue("env_samples must be positive".into()));
    }
    let clock = Instant::now();
    let n = seq.n();
    let (starts, mode) = start_vertices.resolve(n, rng.derive(&[STREAM_START]))?;
    let kernels = par_indexed(env_samples, |e| {
        TransitionKernel::from_digraph(&sampler::sample(seq, rng.derive(&[STREAM_ETA, e as u64])))
    });
    let mu = seq.mu_in();
    let kf = env_samples as f64;

    // per start: (tv, envelope) for each t
    let per_start = par_indexed(starts.len(), |i| {
        let mut sum = vec![vec![0.0; n]; t_grid.len()];
        let mut sumsq = vec![vec![0.0; n]; t_grid.len()];
        for k in &kernels {
            let mut w = WalkState::point(n, starts[i]);
            let mut done = 0;
            for (j, &t) in t_grid.iter().enumerate() {
                w.advance(k, t - done);
                done = t;
                for ((s, q), p) in sum[j].iter_mut().zip(sumsq[j].iter_mut()).zip(w.probs()) {
                    *s += p;
                    *q += p * p;
                }
            }
        }
        (0..t_grid.len())
            .map(|j| {
                let mean: Vec<f64> = sum[j].iter().map(|s| s / kf).collect();
                let env = if env_samples > 1 {
                    let spread: f64 = mean
                        .iter()
                        .zip(&sumsq[j])
                        .map(|(a, q)| ((q - kf * a * a) / (kf - 1.0)).max(0.0).sqrt())
                        .sum();
                    0.5 * spread / kf.sqrt()
                } else {
                    0.0
                };
                (tv_slices(&mean, mu.probs()), env)
            })
            .collect::<Vec<(f64, f64)>>()
    });

    let scale = seq.entropic_scale();
    let mut meta = Metadata {
        experiment: "annealed".into(),
        model: seq.model().to_string(),
        n,
        m: seq.m(),
        delta: seq.delta(),
        entropy: scale.h,
        t_ent: scale.t_ent,
        root_seed: rng.root_seed,
        start_mode: mode.to_string(),
        start_count: starts.len(),
        replicates: 1,
        env_samples,
        ..Metadata::default()
    };
    let rows = t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (tv, env) =
                per_start
                    .iter()
                    .map(|v| v[j])
                    .fold((0.0f64, 0.0f64), |best, cur| if cur.0 > best.0 { cur } else { best });
            let flagged = (t as f64 / scale.t_ent - 1.0).abs() < JUMP_MARGIN;
            if flagged {
                meta.flagged.push(t as f64);
            }
            ReportRow {
                abscissa: t as f64,
                estimate: tv,
                std_err: env,
                theory: 0.0,
                n_effective: env_samples,
                flagged,
            }
        })
        .collect();
    meta.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentReport { rows, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::ModelKind;

    #[test]
    fn single_environment_is_quenched() {
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 60, 3).unwrap());
        let rng = RngStream::root(4);
        let rep = annealed_check(&seq, &[2, 5], 1, &StartVertices::Explicit(vec![7]), rng).unwrap();
        let k = TransitionKernel::from_digraph(&sampler::sample(&seq, rng.derive(&[STREAM_ETA, 0])));
        let direct = tv_slices(crate::walk::propagate_point(7, &k, 5).probs(), seq.mu_in().probs());
        assert!((rep.rows[1].estimate - direct).abs() < 1e-12);
        assert_eq!(rep.rows[1].std_err, 0.0);
    }

    #[test]
    fn rejects_zero_time() {
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 10, 2).unwrap());
        assert!(annealed_check(&seq, &[0, 1], 2, &StartVertices::All, RngStream::root(0)).is_err());
    }
}
