//! Finite-alphabet probability objects.
//!
//! All constructors validate their input: entries must be finite and
//! nonnegative, and every distribution (or channel row) must sum to one
//! within [`NORMALIZATION_TOL`]. Inputs off by more than rounding noise are
//! rescaled to sum to one.

mod info;

pub use info::{conditional_kl, entropy, kl_divergence, mutual_information};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Absolute tolerance on normalization and row-stochasticity.
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn validate_and_normalize(what: &'static str, values: &mut [f64]) -> Result<()> {
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidEntry {
                what,
                index,
                reason: format!("non-finite value {v}"),
            });
        }
        if v < 0.0 {
            return Err(Error::InvalidEntry {
                what,
                index,
                reason: format!("negative probability {v}"),
            });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { what, sum });
    }
    // Rounding-level deviations are left alone so that re-validating a
    // distribution never changes its bits.
    if (sum - 1.0).abs() > 1e-12 {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_labels(context: &'static str, labels: &[String], n: usize) -> Result<()> {
    check_dim(context, n, labels.len())
}

/// A probability distribution on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProbVectorRepr")]
pub struct ProbVector {
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct ProbVectorRepr {
    probs: Vec<f64>,
}

impl TryFrom<ProbVectorRepr> for ProbVector {
    type Error = Error;
    fn try_from(r: ProbVectorRepr) -> Result<Self> {
        ProbVector::new(r.probs)
    }
}

impl ProbVector {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("probability vector"));
        }
        validate_and_normalize("probability vector", &mut probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution on an empty alphabet");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on symbol `k`.
    pub fn point(n: usize, k: usize) -> Self {
        assert!(k < n);
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.probs
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    /// Unchecked constructor for vectors produced by this crate's own
    /// arithmetic (already nonnegative and normalized).
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        Self { probs }
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// A row-stochastic matrix: row `i` is the output distribution given input `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    n_in: usize,
    n_out: usize,
    data: Vec<f64>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    rows: Vec<Vec<f64>>,
    #[serde(default)]
    input_labels: Option<Vec<String>>,
    #[serde(default)]
    output_labels: Option<Vec<String>>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        let mut c = Channel::new(r.rows)?;
        if let Some(l) = r.input_labels {
            c = c.with_input_labels(l)?;
        }
        if let Some(l) = r.output_labels {
            c = c.with_output_labels(l)?;
        }
        Ok(c)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        ChannelRepr {
            rows: c.rows().map(<[f64]>::to_vec).collect(),
            input_labels: Some(c.input_labels),
            output_labels: Some(c.output_labels),
        }
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_in = rows.len();
        if n_in == 0 {
            return Err(Error::Empty("channel"));
        }
        let n_out = rows[0].len();
        let mut data = Vec::with_capacity(n_in * n_out);
        for row in &rows {
            check_dim("channel row length", n_out, row.len())?;
            data.extend_from_slice(row);
        }
        Self::from_flat(n_in, n_out, data)
    }

    /// Builds a channel from a row-major `n_in × n_out` buffer.
    pub fn from_flat(n_in: usize, n_out: usize, mut data: Vec<f64>) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::Empty("channel"));
        }
        check_dim("channel entries", n_in * n_out, data.len())?;
        for (x, row) in data.chunks_mut(n_out).enumerate() {
            validate_and_normalize("channel row", row).map_err(|e| match e {
                Error::InvalidEntry { what, index, reason } => Error::InvalidEntry {
                    what,
                    index: x * n_out + index,
                    reason,
                },
                Error::NotNormalized { sum, .. } => Error::InvalidEntry {
                    what: "channel row",
                    index: x,
                    reason: format!("row sums to {sum}"),
                },
                other => other,
            })?;
        }
        Ok(Self {
            n_in,
            n_out,
            data,
            input_labels: default_labels(n_in),
            output_labels: default_labels(n_out),
        })
    }

    pub(crate) fn from_rows_unchecked(n_in: usize, n_out: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_in * n_out);
        Self {
            n_in,
            n_out,
            data,
            input_labels: default_labels(n_in),
            output_labels: default_labels(n_out),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::from_rows_unchecked(n, n, data)
    }

    /// Every input is mapped to the same output distribution `q`.
    pub fn constant(n_in: usize, q: &ProbVector) -> Self {
        let data = (0..n_in).flat_map(|_| q.as_slice().iter().copied()).collect();
        Self::from_rows_unchecked(n_in, q.len(), data)
    }

    /// Binary symmetric erasure channel `{0,1} -> {0,1,e}`.
    pub fn erasure(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
            .map(|c| c.with_output_labels(vec!["0".into(), "1".into(), "e".into()]).unwrap())
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        Self::new(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])
    }

    pub fn with_input_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_labels("channel input labels", &labels, self.n_in)?;
        self.input_labels = labels;
        Ok(self)
    }

    pub fn with_output_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_labels("channel output labels", &labels, self.n_out)?;
        self.output_labels = labels;
        Ok(self)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_in
    }

    pub fn n_outputs(&self) -> usize {
        self.n_out
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.n_out..(x + 1) * self.n_out]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks(self.n_out)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * self.n_out + y]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn row_vector(&self, x: usize) -> ProbVector {
        ProbVector::from_normalized(self.row(x).to_vec())
    }

    /// Output distribution when the input is drawn from `prior`.
    pub fn push_forward(&self, prior: &ProbVector) -> Result<ProbVector> {
        check_dim("push_forward prior", self.n_in, prior.len())?;
        let mut out = vec![0.0; self.n_out];
        for (x, row) in self.rows().enumerate() {
            let px = prior[x];
            if px == 0.0 {
                continue;
            }
            for (o, &k) in out.iter_mut().zip(row) {
                *o += px * k;
            }
        }
        Ok(ProbVector::from_normalized(out))
    }

    /// Largest absolute entrywise difference to another channel of the same shape.
    pub fn max_abs_diff(&self, other: &Channel) -> f64 {
        assert_eq!((self.n_in, self.n_out), (other.n_in, other.n_out));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `d ∘ e`: first apply the encoder `e` (X → Z), then the decoder `d` (Z → Y).
pub fn compose(d: &Channel, e: &Channel) -> Result<Channel> {
    check_dim("compose inner alphabet", e.n_outputs(), d.n_inputs())?;
    let (nx, ny) = (e.n_inputs(), d.n_outputs());
    let mut data = vec![0.0; nx * ny];
    for x in 0..nx {
        let out = &mut data[x * ny..(x + 1) * ny];
        for (z, &w) in e.row(x).iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (o, &dy) in out.iter_mut().zip(d.row(z)) {
                *o += w * dy;
            }
        }
    }
    let mut c = Channel::from_rows_unchecked(nx, ny, data);
    c.input_labels = e.input_labels.clone();
    c.output_labels = d.output_labels.clone();
    Ok(c)
}

/// A joint distribution over a pair of finite alphabets, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint2 {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

impl Joint2 {
    pub fn new(rows: usize, cols: usize, mut p: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("joint distribution"));
        }
        check_dim("joint entries", rows * cols, p.len())?;
        validate_and_normalize("joint distribution", &mut p)?;
        Ok(Self { rows, cols, p })
    }

    /// `p(x, y) = π(x) κ(y|x)`, rows indexed by the channel input.
    pub fn from_prior_channel(pi: &ProbVector, kappa: &Channel) -> Result<Self> {
        check_dim("prior vs channel inputs", kappa.n_inputs(), pi.len())?;
        let (nx, ny) = (kappa.n_inputs(), kappa.n_outputs());
        let mut p = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            p.extend(kappa.row(x).iter().map(|&k| pi[x] * k));
        }
        Ok(Self { rows: nx, cols: ny, p })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.p[r * self.cols + c]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.p
    }

    pub fn row_marginal(&self) -> ProbVector {
        ProbVector::from_normalized(self.p.chunks(self.cols).map(|r| r.iter().sum()).collect())
    }

    pub fn col_marginal(&self) -> ProbVector {
        let mut m = vec![0.0; self.cols];
        for row in self.p.chunks(self.cols) {
            for (o, &v) in m.iter_mut().zip(row) {
                *o += v;
            }
        }
        ProbVector::from_normalized(m)
    }

    pub fn transpose(&self) -> Self {
        let mut p = vec![0.0; self.p.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                p[c * self.rows + r] = self.get(r, c);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            p,
        }
    }

    /// Channel from the row alphabet to the column alphabet. Rows with zero
    /// marginal mass get the uniform distribution.
    pub fn conditional(&self) -> Channel {
        let mut data = Vec::with_capacity(self.p.len());
        for row in self.p.chunks(self.cols) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                data.extend(row.iter().map(|v| v / s));
            } else {
                data.extend(std::iter::repeat_n(1.0 / self.cols as f64, self.cols));
            }
        }
        Channel::from_rows_unchecked(self.rows, self.cols, data)
    }

    /// Mutual information between the two axes, in bits.
    pub fn mutual_information(&self) -> f64 {
        mutual_information(self)
    }

    /// `H(col | row)` in bits.
    pub fn conditional_entropy(&self) -> f64 {
        (entropy(&self.p) - self.row_marginal().entropy()).max(0.0)
    }
}

/// Axis of a [`Joint3`]; storage order is `(Y, X, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Y,
    X,
    Z,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::Y => 0,
            Axis::X => 1,
            Axis::Z => 2,
        }
    }
}

/// Joint distribution of `(Y, X, Z)` stored as a dense `|Y|×|X|×|Z|` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Joint3Repr", into = "Joint3Repr")]
pub struct Joint3 {
    dims: [usize; 3],
    p: Vec<f64>,
    labels: [Vec<String>; 3],
}

#[derive(Serialize, Deserialize)]
struct Joint3Repr {
    dims: [usize; 3],
    p: Vec<f64>,
    #[serde(default)]
    labels: Option<[Vec<String>; 3]>,
}

impl TryFrom<Joint3Repr> for Joint3 {
    type Error = Error;
    fn try_from(r: Joint3Repr) -> Result<Self> {
        let j = Joint3::new(r.dims, r.p)?;
        match r.labels {
            Some(l) => j.with_labels(l),
            None => Ok(j),
        }
    }
}

impl From<Joint3> for Joint3Repr {
    fn from(j: Joint3) -> Self {
        Joint3Repr {
            dims: j.dims,
            p: j.p,
            labels: Some(j.labels),
        }
    }
}

impl Joint3 {
    pub fn new(dims: [usize; 3], mut p: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Empty("joint distribution axis"));
        }
        check_dim("joint3 entries", dims.iter().product(), p.len())?;
        validate_and_normalize("joint3", &mut p)?;
        Ok(Self {
            dims,
            p,
            labels: dims.map(default_labels),
        })
    }

    pub(crate) fn from_unchecked(dims: [usize; 3], p: Vec<f64>) -> Self {
        Self {
            dims,
            p,
            labels: dims.map(default_labels),
        }
    }

    /// Builds `P(y,x,z)` from a function of the three indices.
    pub fn from_fn(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut p = Vec::with_capacity(dims.iter().product());
        for y in 0..dims[0] {
            for x in 0..dims[1] {
                for z in 0..dims[2] {
                    p.push(f(y, x, z));
                }
            }
        }
        Self::new(dims, p)
    }

    /// `P(y,x,z) = P_Y(y) P_{X|Y}(x|y) P_{Z|X}(z|x)`: a Markov chain `Y - X - Z`.
    pub fn from_chain(py: &ProbVector, x_given_y: &Channel, z_given_x: &Channel) -> Result<Self> {
        check_dim("chain P_Y vs P_X|Y", x_given_y.n_inputs(), py.len())?;
        check_dim("chain P_X|Y vs P_Z|X", z_given_x.n_inputs(), x_given_y.n_outputs())?;
        let dims = [py.len(), x_given_y.n_outputs(), z_given_x.n_outputs()];
        let j = Self::from_fn(dims, |y, x, z| py[y] * x_given_y.get(y, x) * z_given_x.get(x, z))?;
        j.with_labels([
            x_given_y.input_labels().to_vec(),
            x_given_y.output_labels().to_vec(),
            z_given_x.output_labels().to_vec(),
        ])
    }

    /// `Q0(y,x,z) = P(x,y) e(z|x)` with the pair joint given as rows X, columns Y.
    pub fn from_pair_and_encoder(pxy: &Joint2, e: &Channel) -> Result<Self> {
        check_dim("encoder inputs vs joint rows", pxy.n_rows(), e.n_inputs())?;
        let dims = [pxy.n_cols(), pxy.n_rows(), e.n_outputs()];
        let mut p = Vec::with_capacity(dims.iter().product());
        for y in 0..dims[0] {
            for x in 0..dims[1] {
                let pxy_v = pxy.get(x, y);
                p.extend(e.row(x).iter().map(|&w| pxy_v * w));
            }
        }
        Ok(Self::from_unchecked(dims, p))
    }

    pub fn with_labels(mut self, labels: [Vec<String>; 3]) -> Result<Self> {
        for (k, l) in labels.iter().enumerate() {
            check_labels("joint3 labels", l, self.dims[k])?;
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, axis: Axis) -> usize {
        self.dims[axis.index()]
    }

    pub fn labels(&self, axis: Axis) -> &[String] {
        &self.labels[axis.index()]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.p
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, z: usize) -> f64 {
        self.p[(y * self.dims[1] + x) * self.dims[2] + z]
    }

    /// Marginal over the axes flagged in `keep`, flattened in `(Y, X, Z)` order.
    fn marginal_flat(&self, keep: [bool; 3]) -> Vec<f64> {
        let kd = [0, 1, 2].map(|k| if keep[k] { self.dims[k] } else { 1 });
        let mut out = vec![0.0; kd.iter().product()];
        for y in 0..self.dims[0] {
            for x in 0..self.dims[1] {
                for z in 0..self.dims[2] {
                    let idx = [y, x, z];
                    let i = [0, 1, 2].map(|k| if keep[k] { idx[k] } else { 0 });
                    out[(i[0] * kd[1] + i[1]) * kd[2] + i[2]] += self.get(y, x, z);
                }
            }
        }
        out
    }

    fn keep_mask(axes: &[Axis]) -> [bool; 3] {
        let mut keep = [false; 3];
        for a in axes {
            keep[a.index()] = true;
        }
        keep
    }

    pub fn marginal(&self, axis: Axis) -> ProbVector {
        ProbVector::from_normalized(self.marginal_flat(Self::keep_mask(&[axis])))
    }

    /// Pair marginal with `a` as the row axis and `b` as the column axis.
    pub fn pair(&self, a: Axis, b: Axis) -> Joint2 {
        assert_ne!(a, b);
        let flat = self.marginal_flat(Self::keep_mask(&[a, b]));
        let j = Joint2 {
            rows: self.dim(a),
            cols: self.dim(b),
            p: flat,
        };
        // `marginal_flat` orders kept axes by storage order.
        if a.index() < b.index() {
            j
        } else {
            Joint2 {
                rows: j.cols,
                cols: j.rows,
                p: j.p,
            }
            .transpose()
        }
    }

    /// Channel `P_{Y|axis}` from `axis` to `Y`; zero-mass inputs get uniform rows.
    pub fn y_given(&self, axis: Axis) -> Channel {
        assert_ne!(axis, Axis::Y);
        let mut c = self.pair(axis, Axis::Y).conditional();
        c.input_labels = self.labels(axis).to_vec();
        c.output_labels = self.labels(Axis::Y).to_vec();
        c
    }

    /// Joint entropy of the given subset of axes, in bits.
    pub fn entropy_of(&self, axes: &[Axis]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        entropy(&self.marginal_flat(Self::keep_mask(axes)))
    }

    /// `I(A;B)` between two disjoint sets of axes, in bits.
    pub fn mi(&self, a: &[Axis], b: &[Axis]) -> f64 {
        let ab: Vec<Axis> = a.iter().chain(b).copied().collect();
        (self.entropy_of(a) + self.entropy_of(b) - self.entropy_of(&ab)).max(0.0)
    }

    /// `I(A;B | C)` for single axes, in bits.
    pub fn cmi(&self, a: Axis, b: Axis, c: Axis) -> f64 {
        (self.entropy_of(&[a, c]) + self.entropy_of(&[b, c])
            - self.entropy_of(&[a, b, c])
            - self.entropy_of(&[c]))
        .max(0.0)
    }

    /// `H(A | C)` for single axes, in bits.
    pub fn conditional_entropy(&self, a: Axis, c: Axis) -> f64 {
        (self.entropy_of(&[a, c]) - self.entropy_of(&[c])).max(0.0)
    }

    /// Exchanges the roles of `X` and `Z`.
    pub fn swap_xz(&self) -> Self {
        let [ny, nx, nz] = self.dims;
        let mut p = vec![0.0; self.p.len()];
        for y in 0..ny {
            for x in 0..nx {
                for z in 0..nz {
                    p[(y * nz + z) * nx + x] = self.get(y, x, z);
                }
            }
        }
        Self {
            dims: [ny, nz, nx],
            p,
            labels: [
                self.labels[0].clone(),
                self.labels[2].clone(),
                self.labels[1].clone(),
            ],
        }
    }
}
