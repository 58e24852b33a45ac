//! Degree sequences for the two random digraph models.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::{Error, Result};

/// Above this maximum degree a warning is logged; bounded degrees are assumed
/// throughout but no hard cap is enforced.
pub const DELTA_WARN: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Directed configuration model: in- and out-degrees prescribed.
    #[serde(alias = "DCM")]
    Dcm,
    /// Out-configuration model: out-degrees prescribed, heads chosen injectively.
    #[serde(alias = "OCM")]
    Ocm,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Dcm => f.write_str("dcm"),
            ModelKind::Ocm => f.write_str("ocm"),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dcm" => Ok(ModelKind::Dcm),
            "ocm" => Ok(ModelKind::Ocm),
            other => Err(Error::BadValue(format!("unknown model {other:?}"))),
        }
    }
}

/// A validated degree sequence. Construct through [`DegreeSequence::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    model: ModelKind,
    out_degrees: Vec<u32>,
    in_degrees: Option<Vec<u32>>,
    m: u64,
    delta: u32,
}

/// On-disk form of a degree sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeSequenceDoc {
    pub model: ModelKind,
    pub out_degrees: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_degrees: Option<Vec<u32>>,
}

impl DegreeSequence {
    /// Validates the degree data for `model`.
    ///
    /// `in_degrees` must be given for DCM and omitted for OCM. Every degree
    /// must be at least 2; DCM sums must agree; OCM out-degrees cannot exceed n.
    pub fn new(model: ModelKind, out_degrees: Vec<u32>, in_degrees: Option<Vec<u32>>) -> Result<Self> {
        let n = out_degrees.len();
        if n == 0 {
            return Err(Error::LengthMismatch { expected: 1, got: 0 });
        }
        match (model, &in_degrees) {
            (ModelKind::Dcm, None) => return Err(Error::MissingRequired("in_degrees")),
            (ModelKind::Ocm, Some(_)) => return Err(Error::BadValue("in_degrees must be omitted for ocm".into())),
            (ModelKind::Dcm, Some(ins)) if ins.len() != n => {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: ins.len(),
                })
            }
            _ => {}
        }

        let all = out_degrees
            .iter()
            .enumerate()
            .chain(in_degrees.iter().flat_map(|v| v.iter().enumerate()));
        let mut delta = 0;
        for (vertex, &degree) in all {
            if degree < 2 {
                return Err(Error::DegreeTooSmall { vertex, degree });
            }
            delta = delta.max(degree);
        }

        let m: u64 = out_degrees.iter().map(|&d| u64::from(d)).sum();
        match &in_degrees {
            Some(ins) => {
                let in_sum: u64 = ins.iter().map(|&d| u64::from(d)).sum();
                if in_sum != m {
                    return Err(Error::MismatchedSums { out_sum: m, in_sum });
                }
            }
            None => {
                if let Some((vertex, &degree)) = out_degrees.iter().enumerate().find(|(_, &d)| d as usize > n) {
                    return Err(Error::DegreeTooLarge { vertex, degree, n });
                }
            }
        }
        if delta > DELTA_WARN {
            log::warn!("maximum degree {delta} exceeds {DELTA_WARN}; bounded-degree asymptotics may not apply");
        }

        Ok(Self {
            model,
            out_degrees,
            in_degrees,
            m,
            delta,
        })
    }

    pub fn dcm(out_degrees: Vec<u32>, in_degrees: Vec<u32>) -> Result<Self> {
        Self::new(ModelKind::Dcm, out_degrees, Some(in_degrees))
    }

    pub fn ocm(out_degrees: Vec<u32>) -> Result<Self> {
        Self::new(ModelKind::Ocm, out_degrees, None)
    }

    /// d-regular sequence on n vertices (Eulerian for DCM).
    pub fn regular(model: ModelKind, n: usize, d: u32) -> Result<Self> {
        let out = vec![d; n];
        let ins = (model == ModelKind::Dcm).then(|| out.clone());
        Self::new(model, out, ins)
    }

    pub fn from_doc(doc: DegreeSequenceDoc) -> Result<Self> {
        Self::new(doc.model, doc.out_degrees, doc.in_degrees)
    }

    pub fn to_doc(&self) -> DegreeSequenceDoc {
        DegreeSequenceDoc {
            model: self.model,
            out_degrees: self.out_degrees.clone(),
            in_degrees: self.in_degrees.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn n(&self) -> usize {
        self.out_degrees.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn out_degrees(&self) -> &[u32] {
        &self.out_degrees
    }

    pub fn in_degrees(&self) -> Option<&[u32]> {
        self.in_degrees.as_deref()
    }

    pub fn out_degree(&self, x: usize) -> u32 {
        self.out_degrees[x]
    }

    /// True when every vertex has equal in- and out-degree. Always false for
    /// OCM, whose in-degrees are random.
    pub fn is_eulerian(&self) -> bool {
        self.in_degrees.as_ref().is_some_and(|ins| ins == &self.out_degrees)
    }

    /// The in-degree law: `d_x^- / m` for DCM, uniform for OCM.
    pub fn mu_in(&self) -> Distribution {
        let n = self.n();
        let probs = match &self.in_degrees {
            Some(ins) => {
                let m = self.m as f64;
                ins.iter().map(|&d| f64::from(d) / m).collect()
            }
            None => vec![1.0 / n as f64; n],
        };
        Distribution::normalized(probs)
    }

    pub fn entropic_scale(&self) -> EntropicScale {
        let mu = self.mu_in();
        let h: f64 = mu
            .probs()
            .iter()
            .zip(&self.out_degrees)
            .map(|(&p, &d)| p * f64::from(d).ln())
            .sum();
        EntropicScale {
            h,
            t_ent: (self.n() as f64).ln() / h,
        }
    }
}

/// Entropy `H` (nats) of the walk's out-degree choices and the entropic time
/// `T_ent = log(n) / H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropicScale {
    pub h: f64,
    pub t_ent: f64,
}

impl EntropicScale {
    /// `floor(beta * T_ent)`.
    pub fn steps(&self, beta: f64) -> usize {
        (beta * self.t_ent).floor() as usize
    }
}
