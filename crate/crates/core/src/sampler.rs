//! Uniform configuration sampling for DCM and OCM, plus structural checks.

use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::degrees::{DegreeSequence, ModelKind};
use crate::rng::RngStream;
use crate::{Error, Result};

/// One sampled configuration: for every vertex the multiset of heads its
/// out-edges point to, stored as compressed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    seq: Arc<DegreeSequence>,
    offsets: Vec<usize>,
    heads: Vec<u32>,
    stream: RngStream,
}

/// Compact serialized form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DigraphDoc {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub model: ModelKind,
    pub out_edges: Vec<Vec<u32>>,
}

/// Tails matched to a uniform permutation of the head slots.
pub fn sample_dcm(seq: &Arc<DegreeSequence>, rng: RngStream) -> Result<Digraph> {
    let Some(ins) = seq.in_degrees() else {
        return Err(Error::ModelMismatch {
            expected: ModelKind::Dcm,
            got: seq.model(),
        });
    };
    let mut heads = Vec::with_capacity(seq.m() as usize);
    for (y, &d) in ins.iter().enumerate() {
        heads.extend(std::iter::repeat_n(y as u32, d as usize));
    }
    heads.shuffle(&mut rng.rng());
    Ok(Digraph {
        seq: Arc::clone(seq),
        offsets: offsets_of(seq.out_degrees()),
        heads,
        stream: rng,
    })
}

/// Every vertex independently picks a uniform `d_x^+`-subset of `[n]`.
pub fn sample_ocm(seq: &Arc<DegreeSequence>, rng: RngStream) -> Result<Digraph> {
    if seq.model() != ModelKind::Ocm {
        return Err(Error::ModelMismatch {
            expected: ModelKind::Ocm,
            got: seq.model(),
        });
    }
    let n = seq.n();
    let mut r = rng.rng();
    let mut heads = Vec::with_capacity(seq.m() as usize);
    for &d in seq.out_degrees() {
        heads.extend(index::sample(&mut r, n, d as usize).iter().map(|y| y as u32));
    }
    Ok(Digraph {
        seq: Arc::clone(seq),
        offsets: offsets_of(seq.out_degrees()),
        heads,
        stream: rng,
    })
}

/// Dispatches on the sequence's model.
pub fn sample(seq: &Arc<DegreeSequence>, rng: RngStream) -> Digraph {
    match seq.model() {
        ModelKind::Dcm => sample_dcm(seq, rng),
        ModelKind::Ocm => sample_ocm(seq, rng),
    }
    .expect("model checked by dispatch")
}

/// Resamples on `rng.substream(k)`, `k = 0, 1, ...`, until the configuration
/// is simple. Returns `None` after `max_tries` rejections.
pub fn sample_simple(seq: &Arc<DegreeSequence>, rng: RngStream, max_tries: usize) -> Option<Digraph> {
    (0..max_tries as u64)
        .map(|k| sample(seq, rng.substream(k)))
        .find(Digraph::is_simple)
}

fn offsets_of(degrees: &[u32]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(degrees.len() + 1);
    offsets.push(0);
    let mut acc = 0usize;
    for &d in degrees {
        acc += d as usize;
        offsets.push(acc);
    }
    offsets
}

impl Digraph {
    pub fn seq(&self) -> &Arc<DegreeSequence> {
        &self.seq
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn model(&self) -> ModelKind {
        self.seq.model()
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    /// Heads of the out-edges of `x`, with multiplicity.
    pub fn out_edges(&self, x: usize) -> &[u32] {
        &self.heads[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        (0..self.n()).flat_map(move |x| self.out_edges(x).iter().map(move |&y| (x, y)))
    }

    /// No self-loops and no repeated `(x, y)` pair.
    pub fn is_simple(&self) -> bool {
        let mut row = Vec::new();
        (0..self.n()).all(|x| {
            row.clear();
            row.extend_from_slice(self.out_edges(x));
            row.sort_unstable();
            row.iter().all(|&y| y as usize != x) && row.windows(2).all(|w| w[0] != w[1])
        })
    }

    /// Strongly connected component label of every vertex.
    pub fn scc(&self) -> SccReport {
        tarjan(self)
    }

    pub fn strongly_connected(&self) -> bool {
        self.scc().count == 1
    }

    /// The same configuration with vertex `x` renamed `perm[x]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Digraph> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut rows = vec![Vec::new(); n];
        for x in 0..n {
            rows[perm[x]] = self.out_edges(x).iter().map(|&y| perm[y as usize] as u32).collect();
        }
        Self::from_doc(DigraphDoc {
            seed: self.stream.root_seed,
            stream: self.stream.stream_index,
            model: self.model(),
            out_edges: rows,
        })
    }

    pub fn to_doc(&self) -> DigraphDoc {
        DigraphDoc {
            seed: self.stream.root_seed,
            stream: self.stream.stream_index,
            model: self.model(),
            out_edges: (0..self.n()).map(|x| self.out_edges(x).to_vec()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("digraph serializes")
    }

    /// Rebuilds a digraph, re-deriving and validating its degree sequence.
    pub fn from_doc(doc: DigraphDoc) -> Result<Digraph> {
        let n = doc.out_edges.len();
        if let Some(&y) = doc.out_edges.iter().flatten().find(|&&y| y as usize >= n) {
            return Err(Error::InvalidDigraph(format!("head {y} out of range for n = {n}")));
        }
        let out: Vec<u32> = doc.out_edges.iter().map(|r| r.len() as u32).collect();
        let seq = match doc.model {
            ModelKind::Dcm => {
                let mut ins = vec![0u32; n];
                doc.out_edges.iter().flatten().for_each(|&y| ins[y as usize] += 1);
                DegreeSequence::dcm(out, ins)?
            }
            ModelKind::Ocm => {
                for (x, row) in doc.out_edges.iter().enumerate() {
                    let mut r = row.clone();
                    r.sort_unstable();
                    if r.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::InvalidDigraph(format!("repeated head in row {x}")));
                    }
                }
                DegreeSequence::ocm(out)?
            }
        };
        Ok(Digraph {
            offsets: offsets_of(seq.out_degrees()),
            seq: Arc::new(seq),
            heads: doc.out_edges.into_iter().flatten().collect(),
            stream: RngStream::new(doc.seed, doc.stream),
        })
    }

    pub fn from_json(s: &str) -> Result<Digraph> {
        Self::from_doc(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccReport {
    /// Component label per vertex, in Tarjan completion order.
    pub labels: Vec<u32>,
    pub count: usize,
    /// Components with no edge leaving them.
    pub closed: usize,
}

// Iterative Tarjan.
fn tarjan(g: &Digraph) -> SccReport {
    const UNSEEN: u32 = u32::MAX;
    let n = g.n();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut labels = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next = 0u32;
    let mut count = 0u32;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root as u32, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let vu = v as usize;
            if *pos == 0 && index[vu] == UNSEEN {
                index[vu] = next;
                low[vu] = next;
                next += 1;
                stack.push(v);
                on_stack[vu] = true;
            }
            let row = g.out_edges(vu);
            if let Some(&w) = row.get(*pos) {
                *pos += 1;
                let wu = w as usize;
                if index[wu] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[wu] {
                    low[vu] = low[vu].min(index[wu]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let pu = parent as usize;
                low[pu] = low[pu].min(low[vu]);
            }
            if low[vu] == index[vu] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    labels[w as usize] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }

    let mut leaves = vec![false; count as usize];
    for (x, y) in g.edges() {
        if labels[x] != labels[y as usize] {
            leaves[labels[x] as usize] = true;
        }
    }
    SccReport {
        labels,
        count: count as usize,
        closed: leaves.iter().filter(|&&l| !l).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejection_yields_simple() {
        let seq = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 40, 2).unwrap());
        let g = sample_simple(&seq, RngStream::root(5), 200).unwrap();
        assert!(g.is_simple());
        let tight = Arc::new(DegreeSequence::regular(ModelKind::Dcm, 3, 3).unwrap());
        assert!(sample_simple(&tight, RngStream::root(5), 20).is_none());
    }

    fn dg(model: ModelKind, rows: Vec<Vec<u32>>) -> Digraph {
        Digraph::from_doc(DigraphDoc {
            seed: 0,
            stream: 0,
            model,
            out_edges: rows,
        })
        .unwrap()
    }

    #[test]
    fn forced_single_vertex() {
        let seq = Arc::new(DegreeSequence::dcm(vec![2], vec![2]).unwrap());
        let g = sample_dcm(&seq, RngStream::root(1)).unwrap();
        assert_eq!(g.out_edges(0), &[0, 0]);
        assert!(!g.is_simple());
        assert!(g.strongly_connected());
    }

    #[test]
    fn dcm_degrees_hold_and_deterministic() {
        let seq = Arc::new(DegreeSequence::dcm(vec![2, 3, 4, 2, 3], vec![3, 3, 2, 4, 2]).unwrap());
        for k in 0..50 {
            let g = sample_dcm(&seq, RngStream::new(9, k)).unwrap();
            let mut ins = vec![0u32; 5];
            for (x, y) in g.edges() {
                ins[y as usize] += 1;
                let _ = x;
            }
            assert_eq!(ins, seq.in_degrees().unwrap());
            for x in 0..5 {
                assert_eq!(g.out_edges(x).len() as u32, seq.out_degree(x));
            }
        }
        let seq = Arc::new(DegreeSequence::dcm(vec![2, 2], vec![2, 2]).unwrap());
        let a = sample_dcm(&seq, RngStream::root(42)).unwrap();
        let b = sample_dcm(&seq, RngStream::root(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_mismatch() {
        let ocm = Arc::new(DegreeSequence::ocm(vec![2, 2]).unwrap());
        let dcm = Arc::new(DegreeSequence::dcm(vec![2, 2], vec![2, 2]).unwrap());
        assert!(matches!(
            sample_dcm(&ocm, RngStream::root(0)),
            Err(Error::ModelMismatch { .. })
        ));
        assert!(matches!(
            sample_ocm(&dcm, RngStream::root(0)),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn ocm_forced_and_injective() {
        let seq = Arc::new(DegreeSequence::ocm(vec![2, 2]).unwrap());
        let g = sample_ocm(&seq, RngStream::root(3)).unwrap();
        for x in 0..2 {
            let mut r = g.out_edges(x).to_vec();
            r.sort();
            assert_eq!(r, vec![0, 1]);
        }
        let seq = Arc::new(DegreeSequence::ocm(vec![3, 5, 2, 4, 6, 2]).unwrap());
        for k in 0..100 {
            let g = sample_ocm(&seq, RngStream::new(5, k)).unwrap();
            for x in 0..6 {
                let mut r = g.out_edges(x).to_vec();
                r.sort();
                r.dedup();
                assert_eq!(r.len() as u32, seq.out_degree(x));
            }
        }
    }

    #[test]
    fn simplicity() {
        let multi = dg(ModelKind::Dcm, vec![vec![1, 1], vec![0, 0]]);
        assert!(!multi.is_simple());
        let chords = dg(ModelKind::Dcm, vec![vec![1, 2], vec![2, 3], vec![3, 0], vec![0, 1]]);
        assert!(chords.is_simple());
    }

    #[test]
    fn connectivity() {
        assert!(dg(ModelKind::Dcm, vec![vec![0, 0]]).strongly_connected());
        assert!(dg(ModelKind::Dcm, vec![vec![0, 1], vec![1, 0]]).strongly_connected());
        let split = dg(ModelKind::Dcm, vec![vec![1, 1], vec![0, 0], vec![3, 3], vec![2, 2]]);
        let rep = split.scc();
        assert!(!split.strongly_connected());
        assert_eq!((rep.count, rep.closed), (2, 2));
        // 0 and 1 feed the closed pair {2, 3}
        let funnel = dg(ModelKind::Ocm, vec![vec![1, 2], vec![0, 3], vec![2, 3], vec![3, 2]]);
        let rep = funnel.scc();
        assert_eq!((rep.count, rep.closed), (2, 1));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let seq = Arc::new(DegreeSequence::dcm(vec![2, 3, 2], vec![3, 2, 2]).unwrap());
        let g = sample_dcm(&seq, RngStream::new(11, 2)).unwrap();
        let back = Digraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(Digraph::from_json(r#"{"seed":0,"model":"ocm","out_edges":[[0,0],[0,1]]}"#).is_err());
        assert!(Digraph::from_json(r#"{"seed":0,"model":"dcm","out_edges":[[0,5],[0,1]]}"#).is_err());
        assert!(Digraph::from_json(r#"{"seed":0,"model":"dcm","out_edges":[[0],[1,1,0]]}"#).is_err());
    }

    #[test]
    fn relabel_preserves_structure() {
        let seq = Arc::new(DegreeSequence::dcm(vec![2, 3, 2], vec![3, 2, 2]).unwrap());
        let g = sample_dcm(&seq, RngStream::new(1, 1)).unwrap();
        let h = g.relabeled(&[2, 0, 1]).unwrap();
        for x in 0..3 {
            let mut a: Vec<usize> = g.out_edges(x).iter().map(|&y| [2, 0, 1][y as usize]).collect();
            let mut b: Vec<usize> = h.out_edges([2, 0, 1][x]).iter().map(|&y| y as usize).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}
