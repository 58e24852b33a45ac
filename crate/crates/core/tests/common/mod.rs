//! Dense reference computations shared by the oracle and acceptance targets.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use mixlab::sampler::{self, Digraph};
use mixlab::{DegreeSequence, RngStream, TransitionKernel};
use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn dense(k: &TransitionKernel) -> DMatrix<f64> {
    let n = k.n();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        let (cols, vals) = k.row(x);
        for (&y, &v) in cols.iter().zip(vals) {
            m[(x, y as usize)] = v;
        }
    }
    m
}

pub fn row_of(m: &DMatrix<f64>, x: usize) -> Vec<f64> {
    m.row(x).iter().copied().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(1/t) sum_{s=1..t} (P_sigma^{s-1} P_eta^{t-s})(x, .)` from full matrix powers.
pub fn naive_bhat(x: usize, t: usize, ks: &TransitionKernel, ke: &TransitionKernel) -> Vec<f64> {
    let (ps, pe) = (dense(ks), dense(ke));
    let n = ks.n();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for s in 1..=t {
        acc += ps.pow((s - 1) as u32) * pe.pow((t - s) as u32);
    }
    row_of(&(acc / t as f64), x)
}

/// Solves `pi (P - I) = 0`, `sum pi = 1` by replacing one equation with the
/// normalization.
pub fn dense_stationary(k: &TransitionKernel) -> Vec<f64> {
    let n = k.n();
    let mut a = dense(k).transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("irreducible chain").iter().copied().collect()
}

/// A strongly connected sample from `seq`, scanning seeds upward from `seed`.
pub fn strongly_connected(seq: &Arc<DegreeSequence>, seed: u64) -> Digraph {
    (seed..seed + 1000)
        .map(|s| sampler::sample(seq, RngStream::root(s)))
        .find(Digraph::strongly_connected)
        .expect("a strongly connected sample")
}

/// Graph identity: sorted out-rows.
pub fn graph_key(g: &Digraph) -> Vec<Vec<u32>> {
    (0..g.n())
        .map(|x| {
            let mut r = g.out_edges(x).to_vec();
            r.sort_unstable();
            r
        })
        .collect()
}

/// Chi-square goodness of fit of the DCM sampler on `out = in = (2, 2, 2)`
/// against the law induced by all `6!` matchings. Returns the p-value.
pub fn dcm_matching_pvalue(samples: usize, seed: u64) -> f64 {
    let seq = Arc::new(DegreeSequence::dcm(vec![2, 2, 2], vec![2, 2, 2]).unwrap());
    let mut exact: HashMap<Vec<Vec<u32>>, f64> = HashMap::new();
    let mut perm: Vec<u32> = (0..6).collect();
    permutations(&mut perm, 0, &mut |p| {
        let key: Vec<Vec<u32>> = (0..3)
            .map(|x| {
                let mut r = vec![p[2 * x] / 2, p[2 * x + 1] / 2];
                r.sort_unstable();
                r
            })
            .collect();
        *exact.entry(key).or_default() += 1.0 / 720.0;
    });
    let mut counts: HashMap<Vec<Vec<u32>>, f64> = HashMap::new();
    let root = RngStream::root(seed);
    for i in 0..samples {
        let g = sampler::sample(&seq, root.substream(i as u64));
        *counts.entry(graph_key(&g)).or_default() += 1.0;
    }
    assert!(
        counts.keys().all(|k| exact.contains_key(k)),
        "sampler produced an impossible graph"
    );
    let stat: f64 = exact
        .iter()
        .map(|(k, p)| {
            let e = p * samples as f64;
            let o = counts.get(k).copied().unwrap_or(0.0);
            (o - e).powi(2) / e
        })
        .sum();
    let df = (exact.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

fn permutations(v: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Largest standardized deviation of endpoint frequencies of sampled
/// trajectories from `Q^{s,t}(x, .)`.
pub fn trajectory_max_z(x: usize, s: usize, t: usize, gs: &Digraph, ge: &Digraph, samples: usize, seed: u64) -> f64 {
    use mixlab::walk::{double_row, sample_trajectory};
    let ks = TransitionKernel::from_digraph(gs);
    let ke = TransitionKernel::from_digraph(ge);
    let q = double_row(x, s, t, &ks, &ke).unwrap();
    let mut rng = RngStream::root(seed).rng();
    let mut counts = vec![0usize; gs.n()];
    for _ in 0..samples {
        counts[sample_trajectory(x, s, t, gs, ge, &mut rng).unwrap().last()] += 1;
    }
    q.probs()
        .iter()
        .zip(&counts)
        .map(|(&p, &c)| {
            let f = c as f64 / samples as f64;
            if p == 0.0 {
                if c == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (f - p).abs() / (p * (1.0 - p) / samples as f64).sqrt().max(1e-300)
            }
        })
        .fold(0.0, f64::max)
}
