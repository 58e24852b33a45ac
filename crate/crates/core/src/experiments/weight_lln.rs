use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::{par_indexed, STREAM_ETA, STREAM_SCHEDULE, STREAM_SIGMA};
use crate::degrees::DegreeSequence;
use crate::rng::RngStream;
use crate::sampler;
use crate::walk::{path_log_weight, sample_trajectory, TransitionKernel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightLln {
    /// Fraction of paths with `-log w / (H t)` in `[1 - eps, 1 + eps]`.
    pub frac_in_window: f64,
    /// Mean of `-log w / t`.
    pub mean_rate: f64,
    pub entropy: f64,
    pub samples: usize,
}

/// Samples one pair of configurations and `traj_samples` paths switching at
/// `s`, from uniform starts, and summarizes their weights against `H t`.
pub fn path_weight_lln(
    seq: &Arc<DegreeSequence>,
    s: usize,
    t: usize,
    traj_samples: usize,
    eps: f64,
    rng: RngStream,
) -> Result<WeightLln> {
    if t == 0 || s > t {
        return Err(Error::BadRange(format!(
            "need 0 <= s <= t and t >= 1, got s = {s}, t = {t}"
        )));
    }
    if traj_samples == 0 || !(eps > 0.0) {
        return Err(Error::BadValue("traj_samples and eps must be positive".into()));
    }
    let g_sigma = sampler::sample(seq, rng.derive(&[STREAM_SIGMA]));
    let g_eta = sampler::sample(seq, rng.derive(&[STREAM_ETA]));
    let k_sigma = TransitionKernel::from_digraph(&g_sigma);
    let k_eta = TransitionKernel::from_digraph(&g_eta);
    let h = seq.entropic_scale().h;
    let n = seq.n();
    let rates = par_indexed(traj_samples, |i| -> Result<f64> {
        let mut r = rng.derive(&[STREAM_SCHEDULE, i as u64]).rng();
        let x = r.random_range(0..n);
        let traj = sample_trajectory(x, s, t, &g_sigma, &g_eta, &mut r)?;
        Ok(-path_log_weight(&traj, &k_sigma, &k_eta)? / t as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let hits = rates.iter().filter(|&&r| h > 0.0 && (r / h - 1.0).abs() <= eps).count();
    Ok(WeightLln {
        frac_in_window: hits as f64 / traj_samples as f64,
        mean_rate: rates.iter().sum::<f64>() / traj_samples as f64,
        entropy: h,
        samples: traj_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::ModelKind;

    #[test]
    fn regular_rate_is_exact() {
        // large n keeps paths clear of the O(1) multi-edges, which merge weights
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 100_000, 3).unwrap());
        let out = path_weight_lln(&seq, 2, 6, 200, 0.1, RngStream::root(9)).unwrap();
        assert_eq!(out.frac_in_window, 1.0);
        assert!((out.mean_rate - 3f64.ln()).abs() < 1e-12);

        let small = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 300, 3).unwrap());
        let out = path_weight_lln(&small, 2, 6, 400, 0.1, RngStream::root(9)).unwrap();
        assert!(out.frac_in_window >= 0.95);
    }

    #[test]
    fn bad_range() {
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 10, 2).unwrap());
        assert!(matches!(
            path_weight_lln(&seq, 5, 3, 10, 0.1, RngStream::root(0)),
            Err(Error::BadRange(_))
        ));
    }
}
