//! Probability vectors over `[n]` and total variation distance.

use std::io::Write;

use crate::{Error, Result};

/// Absolute tolerance on the total mass of a [`Distribution`].
pub const MASS_TOL: f64 = 1e-9;

/// A probability vector: nonnegative entries summing to 1 within [`MASS_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(Self { probs })
    }

    /// Rescales a nonnegative vector with positive mass to sum to 1.
    pub(crate) fn normalized(mut probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        debug_assert!(total > 0.0);
        probs.iter_mut().for_each(|p| *p /= total);
        Self { probs }
    }

    /// Wraps a vector the caller has already checked.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= MASS_TOL);
        Self { probs }
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[x] = 1.0;
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Writes `vertex,prob` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "vertex,prob")?;
        for (v, p) in self.probs.iter().enumerate() {
            writeln!(w, "{v},{}", crate::experiments::report::fmt_sig12(*p))?;
        }
        Ok(())
    }
}

/// `1/2 * sum_y |a(y) - b(y)|`.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(tv_slices(a.probs(), b.probs()))
}

pub(crate) fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let l1: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    (0.5 * l1).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        let a = d(&[0.7, 0.3]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((tv_distance(&a, &d(&[0.4, 0.6])).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            tv_distance(&a, &Distribution::uniform(3)),
            Err(Error::LengthMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(Distribution::new(vec![]).is_err());
        assert!(Distribution::new(vec![0.5, 0.4]).is_err());
        assert!(Distribution::new(vec![1.2, -0.2]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        d(&[0.25, 0.75]).write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "vertex,prob\n0,0.25\n1,0.75\n");
    }

    fn prob_vec(n: usize) -> impl Strategy<Value = Distribution> {
        prop::collection::vec(0.0f64..1.0, n)
            .prop_filter("positive mass", |v| v.iter().sum::<f64>() > 1e-3)
            .prop_map(Distribution::normalized)
    }

    proptest! {
        #[test]
        fn tv_is_a_metric((a, b, c) in (1usize..20).prop_flat_map(|n| (prob_vec(n), prob_vec(n), prob_vec(n)))) {
            let ab = tv_distance(&a, &b).unwrap();
            let ba = tv_distance(&b, &a).unwrap();
            let ac = tv_distance(&a, &c).unwrap();
            let cb = tv_distance(&c, &b).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab <= ac + cb + 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
            if ab == 0.0 {
                prop_assert!(a.probs().iter().zip(b.probs()).all(|(x, y)| (x - y).abs() < 1e-12));
            }
        }

        #[test]
        fn tv_positive_part((a, b) in (1usize..30).prop_flat_map(|n| (prob_vec(n), prob_vec(n)))) {
            let pos: f64 = a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).max(0.0)).sum();
            prop_assert!((tv_distance(&a, &b).unwrap() - pos).abs() < 1e-12);
        }
    }
}
