//! Self-describing JSON instance files.
//!
//! ```json
//! {"kind": "channel", "dims": [2, 3], "values": [0.5, 0.5, 0, 0, 0.5, 0.5]}
//! ```
//!
//! `values` is the flat row-major array. Axis order per kind: `joint3` is
//! `(Y, X, Z)`, `joint2` is `(rows, columns)`, `channel` is `(input, output)`,
//! `prob_vector` has one axis and `samples` has shape `(n, 2)` holding
//! `(x, y)` index pairs. Optional `labels` hold one list of symbol names per
//! axis (not allowed for `samples`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{Channel, Joint2, Joint3, ProbVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Joint3,
    Joint2,
    Channel,
    ProbVector,
    Samples,
}

impl InstanceKind {
    fn rank(self) -> usize {
        match self {
            InstanceKind::Joint3 => 3,
            InstanceKind::ProbVector => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Joint3 => "joint3",
            InstanceKind::Joint2 => "joint2",
            InstanceKind::Channel => "channel",
            InstanceKind::ProbVector => "prob_vector",
            InstanceKind::Samples => "samples",
        }
    }
}

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: InstanceKind,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<String>>>,
}

/// A validated instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Joint3(Joint3),
    Joint2(Joint2),
    Channel(Channel),
    ProbVector(ProbVector),
    Samples(Vec<(usize, usize)>),
}

fn field(what: &'static str, index: usize, reason: impl Into<String>) -> Error {
    Error::InvalidEntry {
        what,
        index,
        reason: reason.into(),
    }
}

/// Rewrites constructor errors so they name the `values` field.
fn in_values(e: Error) -> Error {
    match e {
        Error::InvalidEntry { what, index, reason } => field("values", index, format!("{what}: {reason}")),
        Error::NotNormalized { what, sum } => field("values", 0, format!("{what} sums to {sum}, not 1")),
        other => other,
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    pub fn validate(self) -> Result<Instance> {
        let kind = self.kind;
        if self.dims.len() != kind.rank() {
            return Err(field(
                "dims",
                self.dims.len().min(kind.rank()),
                format!("{} needs {} dims, found {}", kind.name(), kind.rank(), self.dims.len()),
            ));
        }
        if let Some(i) = self.dims.iter().position(|&d| d == 0) {
            return Err(field("dims", i, "axis cardinality must be >= 1"));
        }
        if kind == InstanceKind::Samples && self.dims[1] != 2 {
            return Err(field("dims", 1, "samples must have shape [n, 2]"));
        }
        let expected: usize = self.dims.iter().product();
        if self.values.len() != expected {
            return Err(field(
                "values",
                self.values.len().min(expected),
                format!("expected {expected} values from dims {:?}, found {}", self.dims, self.values.len()),
            ));
        }
        if let Some(labels) = &self.labels {
            if kind == InstanceKind::Samples {
                return Err(field("labels", 0, "samples take no labels"));
            }
            if labels.len() != self.dims.len() {
                return Err(field("labels", labels.len().min(self.dims.len()), "one label list per axis required"));
            }
            for (axis, (l, &d)) in labels.iter().zip(&self.dims).enumerate() {
                if l.len() != d {
                    return Err(field("labels", axis, format!("axis {axis} has {d} symbols, found {} labels", l.len())));
                }
            }
        }
        let d = &self.dims;
        let labels = self.labels;
        Ok(match kind {
            InstanceKind::Joint3 => {
                let mut j = Joint3::new([d[0], d[1], d[2]], self.values).map_err(in_values)?;
                if let Some(mut l) = labels {
                    let (z, x, y) = (l.pop().unwrap(), l.pop().unwrap(), l.pop().unwrap());
                    j = j.with_labels([y, x, z])?;
                }
                Instance::Joint3(j)
            }
            InstanceKind::Joint2 => Instance::Joint2(Joint2::new(d[0], d[1], self.values).map_err(in_values)?),
            InstanceKind::Channel => {
                let mut c = Channel::from_flat(d[0], d[1], self.values).map_err(in_values)?;
                if let Some(mut l) = labels {
                    let (o, i) = (l.pop().unwrap(), l.pop().unwrap());
                    c = c.with_input_labels(i)?.with_output_labels(o)?;
                }
                Instance::Channel(c)
            }
            InstanceKind::ProbVector => Instance::ProbVector(ProbVector::new(self.values).map_err(in_values)?),
            InstanceKind::Samples => {
                let mut pairs = Vec::with_capacity(d[0]);
                for (i, v) in self.values.iter().enumerate() {
                    if !(v.is_finite() && *v >= 0.0 && v.fract() == 0.0) {
                        return Err(field("values", i, format!("sample symbol must be a nonnegative integer, found {v}")));
                    }
                }
                for p in self.values.chunks(2) {
                    pairs.push((p[0] as usize, p[1] as usize));
                }
                Instance::Samples(pairs)
            }
        })
    }
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self> {
        InstanceFile::from_json(text)?.validate()
    }

    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Joint3(_) => InstanceKind::Joint3,
            Instance::Joint2(_) => InstanceKind::Joint2,
            Instance::Channel(_) => InstanceKind::Channel,
            Instance::ProbVector(_) => InstanceKind::ProbVector,
            Instance::Samples(_) => InstanceKind::Samples,
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        match self {
            Instance::Joint3(j) => InstanceFile {
                kind: InstanceKind::Joint3,
                dims: j.dims().to_vec(),
                values: j.as_flat().to_vec(),
                labels: Some(vec![
                    j.labels(crate::prob::Axis::Y).to_vec(),
                    j.labels(crate::prob::Axis::X).to_vec(),
                    j.labels(crate::prob::Axis::Z).to_vec(),
                ]),
            },
            Instance::Joint2(j) => InstanceFile {
                kind: InstanceKind::Joint2,
                dims: vec![j.n_rows(), j.n_cols()],
                values: j.as_flat().to_vec(),
                labels: None,
            },
            Instance::Channel(c) => InstanceFile {
                kind: InstanceKind::Channel,
                dims: vec![c.n_inputs(), c.n_outputs()],
                values: c.as_flat().to_vec(),
                labels: Some(vec![c.input_labels().to_vec(), c.output_labels().to_vec()]),
            },
            Instance::ProbVector(p) => InstanceFile {
                kind: InstanceKind::ProbVector,
                dims: vec![p.len()],
                values: p.as_slice().to_vec(),
                labels: None,
            },
            Instance::Samples(s) => InstanceFile {
                kind: InstanceKind::Samples,
                dims: vec![s.len(), 2],
                values: s.iter().flat_map(|&(x, y)| [x as f64, y as f64]).collect(),
                labels: None,
            },
        }
    }

    fn mismatch(&self, wanted: InstanceKind) -> Error {
        Error::InvalidConfig(format!("expected a {} instance, found {}", wanted.name(), self.kind().name()))
    }

    pub fn into_joint3(self) -> Result<Joint3> {
        match self {
            Instance::Joint3(j) => Ok(j),
            other => Err(other.mismatch(InstanceKind::Joint3)),
        }
    }

    /// A `joint2` as is, or the `(X, Y)` pair marginal of a `joint3`.
    pub fn into_joint2(self) -> Result<Joint2> {
        match self {
            Instance::Joint2(j) => Ok(j),
            Instance::Joint3(j) => Ok(j.pair(crate::prob::Axis::X, crate::prob::Axis::Y)),
            other => Err(other.mismatch(InstanceKind::Joint2)),
        }
    }

    pub fn into_channel(self) -> Result<Channel> {
        match self {
            Instance::Channel(c) => Ok(c),
            other => Err(other.mismatch(InstanceKind::Channel)),
        }
    }

    pub fn into_prob_vector(self) -> Result<ProbVector> {
        match self {
            Instance::ProbVector(p) => Ok(p),
            other => Err(other.mismatch(InstanceKind::ProbVector)),
        }
    }

    pub fn into_samples(self) -> Result<Vec<(usize, usize)>> {
        match self {
            Instance::Samples(s) => Ok(s),
            other => Err(other.mismatch(InstanceKind::Samples)),
        }
    }
}
