//! Transition kernels and exact propagation of walk laws.
//!
//! Distributions are row vectors propagated on the left (`mu -> mu P`). A
//! point mass stays in a sparse representation until its support grows past
//! `n / 8`, so short walks on large graphs cost only what they touch.

use rand::Rng;

use crate::dist::{tv_slices, Distribution, MASS_TOL};
use crate::rng::RngStream;
use crate::sampler::Digraph;
use crate::{Error, Result};

/// Row-stochastic `P(x, y) = #(x -> y) / d_x^+` in compressed sparse rows,
/// columns sorted, multi-edges merged.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl TransitionKernel {
    pub fn from_digraph(g: &Digraph) -> Self {
        let n = g.n();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(g.seq().m() as usize);
        let mut vals = Vec::with_capacity(g.seq().m() as usize);
        let mut row = Vec::new();
        offsets.push(0);
        for x in 0..n {
            row.clear();
            row.extend_from_slice(g.out_edges(x));
            row.sort_unstable();
            // integer counts over the integer degree: each row sums to d/d exactly
            let d = row.len() as f64;
            let mut i = 0;
            while i < row.len() {
                let y = row[i];
                let run = row[i..].iter().take_while(|&&z| z == y).count();
                cols.push(y);
                vals.push(run as f64 / d);
                i += run;
            }
            offsets.push(cols.len());
        }
        Self { offsets, cols, vals }
    }

    /// Builds a kernel from explicit rows of `(column, weight)`; rows are
    /// sorted and must each sum to 1 within `1e-12`.
    pub fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (x, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(y, _)| y);
            let total: f64 = row.iter().map(|&(_, p)| p).sum();
            if (total - 1.0).abs() > 1e-12
                || row.iter().any(|&(y, p)| y as usize >= n || !(p > 0.0))
                || row.windows(2).any(|w| w[0].0 == w[1].0)
            {
                return Err(Error::BadValue(format!("row {x} is not a stochastic row")));
            }
            for (y, p) in row {
                cols.push(y);
                vals.push(p);
            }
            offsets.push(cols.len());
        }
        Ok(Self { offsets, cols, vals })
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Sparse row `x` as parallel slices of columns and probabilities.
    pub fn row(&self, x: usize) -> (&[u32], &[f64]) {
        let r = self.offsets[x]..self.offsets[x + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        let (cols, vals) = self.row(x);
        cols.binary_search(&(y as u32)).map_or(0.0, |i| vals[i])
    }

    /// `dst = src P`, dense.
    pub fn apply(&self, src: &[f64], dst: &mut [f64]) {
        dst.fill(0.0);
        for (x, &p) in src.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(x);
            for (&y, &v) in cols.iter().zip(vals) {
                dst[y as usize] += p * v;
            }
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: len,
            });
        }
        Ok(())
    }
}

/// A walk law being pushed through one or more kernels.
#[derive(Debug, Clone)]
pub struct WalkState {
    cur: Vec<f64>,
    buf: Vec<f64>,
    // nonzero indices while sparse; `buf` is all zero in sparse mode
    support: Option<Vec<u32>>,
    mark: Vec<bool>,
    renormalizations: usize,
}

impl WalkState {
    pub fn point(n: usize, x: usize) -> Self {
        let mut cur = vec![0.0; n];
        cur[x] = 1.0;
        Self {
            cur,
            buf: vec![0.0; n],
            support: Some(vec![x as u32]),
            mark: vec![false; n],
            renormalizations: 0,
        }
    }

    pub fn from_distribution(d: &Distribution) -> Self {
        let n = d.len();
        Self {
            cur: d.probs().to_vec(),
            buf: vec![0.0; n],
            support: None,
            mark: Vec::new(),
            renormalizations: 0,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.cur
    }

    /// Drift corrections applied so far.
    pub fn renormalizations(&self) -> usize {
        self.renormalizations
    }

    pub fn into_distribution(self) -> Distribution {
        Distribution::from_raw(self.cur)
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::from_raw(self.cur.clone())
    }

    pub fn step(&mut self, k: &TransitionKernel) {
        debug_assert_eq!(k.n(), self.cur.len());
        let n = self.cur.len();
        match self.support.take() {
            Some(support) => {
                let mut next = Vec::with_capacity(support.len() * 3);
                for &x in &support {
                    let p = self.cur[x as usize];
                    let (cols, vals) = k.row(x as usize);
                    for (&y, &v) in cols.iter().zip(vals) {
                        let yu = y as usize;
                        if !self.mark[yu] {
                            self.mark[yu] = true;
                            next.push(y);
                        }
                        self.buf[yu] += p * v;
                    }
                }
                for &x in &support {
                    self.cur[x as usize] = 0.0;
                }
                std::mem::swap(&mut self.cur, &mut self.buf);
                for &y in &next {
                    self.mark[y as usize] = false;
                }
                let mass: f64 = next.iter().map(|&y| self.cur[y as usize]).sum();
                if (mass - 1.0).abs() > MASS_TOL {
                    next.iter().for_each(|&y| self.cur[y as usize] /= mass);
                    self.renormalizations += 1;
                }
                if next.len() <= n / 8 {
                    self.support = Some(next);
                } else {
                    self.mark = Vec::new();
                }
            }
            None => {
                k.apply(&self.cur, &mut self.buf);
                std::mem::swap(&mut self.cur, &mut self.buf);
                let mass: f64 = self.cur.iter().sum();
                if (mass - 1.0).abs() > MASS_TOL {
                    self.cur.iter_mut().for_each(|p| *p /= mass);
                    self.renormalizations += 1;
                }
            }
        }
    }

    /// `||self - target||_TV` via the positive part, touching only the
    /// support while sparse.
    pub fn tv_to(&self, target: &[f64]) -> f64 {
        debug_assert_eq!(target.len(), self.cur.len());
        match &self.support {
            Some(sup) => sup
                .iter()
                .map(|&y| (self.cur[y as usize] - target[y as usize]).max(0.0))
                .sum::<f64>()
                .clamp(0.0, 1.0),
            None => tv_slices(&self.cur, target),
        }
    }

    pub fn advance(&mut self, k: &TransitionKernel, steps: usize) {
        for _ in 0..steps {
            self.step(k);
        }
    }
}

/// `dist P^steps`.
pub fn propagate(dist: &Distribution, k: &TransitionKernel, steps: usize) -> Result<Distribution> {
    k.check_len(dist.len())?;
    let mut w = WalkState::from_distribution(dist);
    w.advance(k, steps);
    Ok(w.into_distribution())
}

/// `delta_x P^steps`.
pub fn propagate_point(x: usize, k: &TransitionKernel, steps: usize) -> Distribution {
    let mut w = WalkState::point(k.n(), x);
    w.advance(k, steps);
    w.into_distribution()
}

/// `Q^{s,t}(x, .) = delta_x P_sigma^s P_eta^{t-s}`.
pub fn double_row(
    x: usize,
    s: usize,
    t: usize,
    k_sigma: &TransitionKernel,
    k_eta: &TransitionKernel,
) -> Result<Distribution> {
    if s > t {
        return Err(Error::BadRange(format!("switch time {s} exceeds horizon {t}")));
    }
    check_pair(x, k_sigma, k_eta)?;
    let mut w = WalkState::point(k_sigma.n(), x);
    w.advance(k_sigma, s);
    w.advance(k_eta, t - s);
    Ok(w.into_distribution())
}

fn check_pair(x: usize, a: &TransitionKernel, b: &TransitionKernel) -> Result<()> {
    b.check_len(a.n())?;
    if x >= a.n() {
        return Err(Error::BadRange(format!("vertex {x} outside [0, {})", a.n())));
    }
    Ok(())
}

/// Time-averaged double-environment law
/// `(1/t) sum_{s=1..t} delta_x P_sigma^{s-1} P_eta^{t-s}`.
///
/// Both factors advance forward in `s`, so the accumulator
/// `a_s = a_{s-1} P_eta + delta_x P_sigma^{s-1}` reaches the full sum after
/// `t` rounds with O(n) memory and `2t` kernel applications.
pub fn bhat_row(x: usize, t: usize, k_sigma: &TransitionKernel, k_eta: &TransitionKernel) -> Result<Distribution> {
    if t == 0 {
        return Err(Error::BadRange("bhat_row needs t >= 1".into()));
    }
    check_pair(x, k_sigma, k_eta)?;
    let n = k_sigma.n();
    let mut u = WalkState::point(n, x);
    let mut acc = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for s in 1..=t {
        if s > 1 {
            k_eta.apply(&acc, &mut scratch);
            std::mem::swap(&mut acc, &mut scratch);
            u.step(k_sigma);
        }
        add_state(&mut acc, &u);
    }
    let inv = 1.0 / t as f64;
    acc.iter_mut().for_each(|p| *p *= inv);
    let mass: f64 = acc.iter().sum();
    if (mass - 1.0).abs() > MASS_TOL {
        acc.iter_mut().for_each(|p| *p /= mass);
    }
    Ok(Distribution::from_raw(acc))
}

fn add_state(acc: &mut [f64], u: &WalkState) {
    match &u.support {
        Some(sup) => sup.iter().for_each(|&y| acc[y as usize] += u.cur[y as usize]),
        None => acc.iter_mut().zip(&u.cur).for_each(|(a, p)| *a += p),
    }
}

/// A sampled walk path, with the step at which the environment switches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<u32>,
    /// Steps `1..=s` follow the first environment; `None` when the whole path
    /// stays in it.
    pub switch_time: Option<usize>,
}

impl Trajectory {
    /// Number of steps `t`.
    pub fn len(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn last(&self) -> usize {
        *self.states.last().expect("trajectory has a start") as usize
    }
}

/// `s` uniform out-edge steps in `g_sigma`, then `t - s` in `g_eta`, starting
/// at `x`. Multi-edges are drawn with their multiplicity.
pub fn sample_trajectory(
    x: usize,
    s: usize,
    t: usize,
    g_sigma: &Digraph,
    g_eta: &Digraph,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    if s > t {
        return Err(Error::BadRange(format!("switch time {s} exceeds horizon {t}")));
    }
    if x >= g_sigma.n() || g_eta.n() != g_sigma.n() {
        return Err(Error::BadRange(format!("vertex {x} or graph sizes inconsistent")));
    }
    let mut states = Vec::with_capacity(t + 1);
    states.push(x as u32);
    let mut cur = x;
    for step in 1..=t {
        let g = if step <= s { g_sigma } else { g_eta };
        let row = g.out_edges(cur);
        cur = row[rng.random_range(0..row.len())] as usize;
        states.push(cur as u32);
    }
    Ok(Trajectory {
        states,
        switch_time: (s < t).then_some(s),
    })
}

/// Convenience wrapper drawing from a fresh generator on `rng`.
pub fn sample_trajectory_stream(
    x: usize,
    s: usize,
    t: usize,
    g_sigma: &Digraph,
    g_eta: &Digraph,
    rng: RngStream,
) -> Result<Trajectory> {
    sample_trajectory(x, s, t, g_sigma, g_eta, &mut rng.rng())
}

/// `log w(p) = sum_{j<s} log P_sigma(v_j, v_{j+1}) + sum_{s<=i<t} log P_eta(v_i, v_{i+1})`.
pub fn path_log_weight(traj: &Trajectory, k_sigma: &TransitionKernel, k_eta: &TransitionKernel) -> Result<f64> {
    let s = traj.switch_time.unwrap_or(traj.len());
    traj.states
        .windows(2)
        .enumerate()
        .map(|(j, w)| {
            let k = if j < s { k_sigma } else { k_eta };
            let (from, to) = (w[0] as usize, w[1] as usize);
            match k.entry(from, to) {
                p if p > 0.0 => Ok(p.ln()),
                _ => Err(Error::ImpossibleStep { step: j, from, to }),
            }
        })
        .sum()
}
