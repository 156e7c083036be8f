//! Monte Carlo estimators of the empirical VDB and VIB objectives for
//! discrete encoder/decoder pairs.
//!
//! For data `(x_i, y_i)` and samples `z_ij ~ e(·|x_i)`:
//!
//! ```text
//! VDB = (1/N) Σ_i [ -log2((1/M) Σ_j d(y_i|z_ij)) + β KL(e(·|x_i) ‖ r) ]
//! VIB = (1/N) Σ_i [ -(1/M) Σ_j log2 d(y_i|z_ij)  + β KL(e(·|x_i) ‖ r) ]
//! ```
//!
//! By Jensen VIB ≥ VDB sample for sample, with equality at `M = 1`.
//!
//! Sampling is counter based: the uniform behind `z_ij` in batch `b` is read
//! from a ChaCha8 stream keyed by the seed at stream `b` and word position
//! determined by `(i, j)`, so both estimators, every `M` and every execution
//! mode see the same draws. These are evaluation-only estimators; no
//! gradients are formed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::prob::{kl_divergence, Channel, ProbVector};

/// Reference marginal `r(z)` of the rate term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    #[default]
    Uniform,
    /// `Σ_x p̂(x) e(·|x)` under the empirical distribution of `x` in the data.
    EncoderMarginal,
    Explicit(ProbVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// `M`, encoder samples per data point.
    pub m_samples: usize,
    /// `N`, data points per batch.
    pub batch: usize,
    pub beta: f64,
    pub reference: Reference,
    pub seed: u64,
    /// Number of batches aggregated by [`paired_objective_report`].
    pub batches: usize,
    pub exec: Exec,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            m_samples: 1,
            batch: 64,
            beta: 0.0,
            reference: Reference::Uniform,
            seed: 0,
            batches: 10_000,
            exec: Exec::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_samples == 0 {
            return Err(Error::InvalidConfig("m_samples must be >= 1".into()));
        }
        if self.batch == 0 {
            return Err(Error::InvalidConfig("batch must be >= 1".into()));
        }
        if self.batches == 0 {
            return Err(Error::InvalidConfig("batches must be >= 1".into()));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConfig(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// One row of the paired comparison; all values in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub m: usize,
    pub mean_vdb: f64,
    pub mean_vib: f64,
    /// Mean over batches of `vib - vdb`.
    pub jensen_gap: f64,
    pub se_vdb: f64,
    pub se_vib: f64,
    pub se_gap: f64,
    /// Mean over batches of the shared `β KL(e ‖ r)` term.
    pub beta_term: f64,
}

/// Per-batch values of both estimators for one `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BatchValue {
    vdb: f64,
    vib: f64,
    beta_term: f64,
}

struct Setup<'a> {
    data: &'a [(usize, usize)],
    e: &'a Channel,
    d: &'a Channel,
    /// `β KL(e(·|x) ‖ r)` per input symbol.
    penalty: Vec<f64>,
    cdf: Vec<Vec<f64>>,
}

impl<'a> Setup<'a> {
    fn new(data: &'a [(usize, usize)], e: &'a Channel, d: &'a Channel, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::Empty("data"));
        }
        crate::error::check_dim("encoder outputs vs decoder inputs", e.n_outputs(), d.n_inputs())?;
        for (i, &(x, y)) in data.iter().enumerate() {
            if x >= e.n_inputs() {
                return Err(Error::InvalidEntry {
                    what: "data x symbol",
                    index: i,
                    reason: format!("{x} >= |X| = {}", e.n_inputs()),
                });
            }
            if y >= d.n_outputs() {
                return Err(Error::InvalidEntry {
                    what: "data y symbol",
                    index: i,
                    reason: format!("{y} >= |Y| = {}", d.n_outputs()),
                });
            }
        }
        let nz = e.n_outputs();
        let r = match &cfg.reference {
            Reference::Uniform => vec![1.0 / nz as f64; nz],
            Reference::EncoderMarginal => {
                let mut r = vec![0.0; nz];
                for &(x, _) in data {
                    for (o, &v) in r.iter_mut().zip(e.row(x)) {
                        *o += v / data.len() as f64;
                    }
                }
                r
            }
            Reference::Explicit(r) => {
                crate::error::check_dim("reference vs encoder outputs", nz, r.len())?;
                r.as_slice().to_vec()
            }
        };
        let penalty = e
            .rows()
            .map(|row| if cfg.beta > 0.0 { cfg.beta * kl_divergence(row, &r) } else { 0.0 })
            .collect();
        let cdf = e
            .rows()
            .map(|row| {
                row.iter()
                    .scan(0.0, |acc, &v| {
                        *acc += v;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { data, e, d, penalty, cdf })
    }

    fn sample(&self, x: usize, u: f64) -> usize {
        let cdf = &self.cdf[x];
        match cdf.iter().position(|&c| u < c) {
            Some(z) => z,
            // Rounding left the total below one: take the last symbol with mass.
            None => (0..cdf.len()).rev().find(|&z| self.e.get(x, z) > 0.0).unwrap_or(0),
        }
    }

    /// Both estimators on batch `b` for every `M` in `ms`, sharing the draws.
    fn batch(&self, seed: u64, b: usize, n: usize, ms: &[usize]) -> Vec<BatchValue> {
        let m_max = ms.iter().copied().max().unwrap_or(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut lik = vec![0.0; m_max];
        let mut out = vec![
            BatchValue {
                vdb: 0.0,
                vib: 0.0,
                beta_term: 0.0
            };
            ms.len()
        ];
        for i in 0..n {
            let (x, y) = self.data[(b * n + i) % self.data.len()];
            // Two 32-bit words per f64 draw; 2^32 words reserved per data point.
            rng.set_word_pos((i as u128) << 32);
            for l in lik.iter_mut() {
                *l = self.d.get(self.sample(x, rng.gen::<f64>()), y);
            }
            for (o, &m) in out.iter_mut().zip(ms) {
                let (mut s, mut slog) = (0.0, 0.0);
                for &l in &lik[..m] {
                    s += l;
                    slog += l.log2();
                }
                o.vdb += -(s / m as f64).log2() + self.penalty[x];
                o.vib += -(slog / m as f64) + self.penalty[x];
                o.beta_term += self.penalty[x];
            }
        }
        for o in &mut out {
            o.vdb /= n as f64;
            o.vib /= n as f64;
            o.beta_term /= n as f64;
        }
        out
    }
}

/// VDB estimate on batch 0 (data points `0..N`, cycling through `data`).
/// Returns `+∞` when some data point has `d(y|z) = 0` for every sampled `z`.
pub fn vdb_estimate(data: &[(usize, usize)], e: &Channel, d: &Channel, cfg: &EstimatorConfig) -> Result<f64> {
    let s = Setup::new(data, e, d, cfg)?;
    Ok(s.batch(cfg.seed, 0, cfg.batch, &[cfg.m_samples])[0].vdb)
}

/// VIB estimate on batch 0 with the same draws as [`vdb_estimate`].
pub fn vib_estimate(data: &[(usize, usize)], e: &Channel, d: &Channel, cfg: &EstimatorConfig) -> Result<f64> {
    let s = Setup::new(data, e, d, cfg)?;
    Ok(s.batch(cfg.seed, 0, cfg.batch, &[cfg.m_samples])[0].vib)
}

fn mean_se(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    if n < 2.0 || !mean.is_finite() {
        return (mean, if mean.is_finite() { 0.0 } else { f64::NAN });
    }
    let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Means and standard errors of both estimators over `cfg.batches` batches
/// for every `M` in `m_grid` (`cfg.m_samples` is ignored). Draws are shared
/// across estimators and across `M`: the first `M` samples of each data point
/// are the same for every `M`.
pub fn paired_objective_report(
    data: &[(usize, usize)],
    e: &Channel,
    d: &Channel,
    cfg: &EstimatorConfig,
    m_grid: &[usize],
) -> Result<Vec<PairedRow>> {
    let s = Setup::new(data, e, d, cfg)?;
    if m_grid.is_empty() {
        return Err(Error::Empty("m grid"));
    }
    if let Some(i) = m_grid.iter().position(|&m| m == 0) {
        return Err(Error::InvalidEntry {
            what: "m grid",
            index: i,
            reason: "M must be >= 1".into(),
        });
    }
    let per_batch = cfg.exec.map(cfg.batches, |b| s.batch(cfg.seed, b, cfg.batch, m_grid));
    Ok(m_grid
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let col = per_batch.iter().map(move |v| v[k]);
            let (mean_vdb, se_vdb) = mean_se(col.clone().map(|v| v.vdb));
            let (mean_vib, se_vib) = mean_se(col.clone().map(|v| v.vib));
            let (jensen_gap, se_gap) = mean_se(col.clone().map(|v| v.vib - v.vdb));
            let (beta_term, _) = mean_se(col.map(|v| v.beta_term));
            PairedRow {
                m,
                mean_vdb,
                mean_vib,
                jensen_gap,
                se_vdb,
                se_vib,
                se_gap,
                beta_term,
            }
        })
        .collect())
}

/// Small instance with three symbols per alphabet used for demonstrations.
pub fn toy() -> (Vec<(usize, usize)>, Channel, Channel) {
    let data = vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0), (0, 0), (1, 1), (2, 2)];
    let e = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3], vec![0.25, 0.25, 0.5]]).expect("valid toy encoder");
    let d = Channel::new(vec![vec![0.8, 0.15, 0.05], vec![0.1, 0.7, 0.2], vec![0.2, 0.2, 0.6]]).expect("valid toy decoder");
    (data, e, d)
}
