//! Information bottleneck (IB) and deficiency bottleneck (DB) trade-off curves
//! for discrete alphabets.
//!
//! IB minimizes `I(X;Y) - I(Z;Y) + β I(Z;X)` over encoders `e: X → Z` (the
//! distortion is `I(Y;X|Z)` of the Markov chain `Y - X - Z`). DB minimizes
//! `D(κ ‖ d∘e | π) + β I(Z;X)` over encoders and decoders `d: Z → Y`.

mod db;
mod ib;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::prob::{kl_divergence, Channel};

pub use db::{db_curve, db_curves, db_solve};
pub use ib::{ib_curve, ib_solve};

/// Alternation schedule of the DB solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// One encoder sweep per decoder sweep.
    Oneshot,
    /// `k` encoder sweeps per decoder sweep.
    Sequential(usize),
}

impl Schedule {
    pub fn encoder_sweeps(self) -> usize {
        match self {
            Schedule::Oneshot => 1,
            Schedule::Sequential(k) => k,
        }
    }
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Schedule::Oneshot => write!(f, "oneshot"),
            Schedule::Sequential(k) => write!(f, "sequential({k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BottleneckConfig {
    pub beta: f64,
    pub z_cardinality: usize,
    pub schedule: Schedule,
    pub max_outer_iter: usize,
    /// Relative objective improvement below which a run stops.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for BottleneckConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            z_cardinality: 2,
            schedule: Schedule::Oneshot,
            max_outer_iter: 5_000,
            tol: 1e-9,
            restarts: 5,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl BottleneckConfig {
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_z(mut self, z_cardinality: usize) -> Self {
        self.z_cardinality = z_cardinality;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConfig(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.z_cardinality == 0 {
            return Err(Error::InvalidConfig("z_cardinality must be >= 1".into()));
        }
        if self.schedule.encoder_sweeps() == 0 {
            return Err(Error::InvalidConfig("sequential schedule needs k >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// One point of a trade-off curve; all quantities in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub beta: f64,
    /// `I(Z;X)`.
    pub rate: f64,
    /// `I(Z;Y)` for IB, `J(Z;Y) = H(Y) - E[-log (d∘e)(y|x)]` for DB.
    pub sufficiency: f64,
    pub objective: f64,
    pub encoder: Channel,
    pub decoder: Channel,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after every outer sweep of the winning run.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            })
            .collect(),
    }
}

/// 30 log-spaced values in `[1e-4, 1]`.
pub fn default_beta_grid() -> Vec<f64> {
    log_grid(1e-4, 1.0, 30)
}

pub(crate) fn run_rng(seed: u64, beta_index: usize, restart: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((beta_index as u64) << 32) | restart as u64);
    r
}

/// Row-stochastic `n_in × n_out` matrix `normalize(base + 0.01 u)` with `u`
/// uniform on `[0,1)`; `base` defaults to uniform rows.
pub(crate) fn perturbed_rows(rng: &mut impl Rng, n_in: usize, n_out: usize, base: Option<&[f64]>) -> Vec<f64> {
    let mut e = vec![0.0; n_in * n_out];
    for x in 0..n_in {
        let row = &mut e[x * n_out..(x + 1) * n_out];
        for (z, v) in row.iter_mut().enumerate() {
            let b = base.map_or(1.0 / n_out as f64, |b| b[x * n_out + z]);
            *v = b + 0.01 * rng.gen::<f64>();
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    e
}

/// Starting encoder of restart `i`. Restart 0 is the near-uniform soft
/// clustering, restart 1 a perturbed hard assignment `x ↦ x mod |Z|`, and
/// later restarts draw every row uniformly from the simplex. The near-uniform
/// start alone misses nontrivial optima whenever the trivial encoder is a
/// strict local minimum.
pub(crate) fn initial_encoder(seed: u64, beta_index: usize, i: usize, n_in: usize, n_out: usize) -> Vec<f64> {
    let mut rng = run_rng(seed, beta_index, i);
    match i {
        0 => perturbed_rows(&mut rng, n_in, n_out, None),
        1 => {
            let mut hard = vec![0.0; n_in * n_out];
            for x in 0..n_in {
                hard[x * n_out + x % n_out] = 1.0;
            }
            perturbed_rows(&mut rng, n_in, n_out, Some(&hard))
        }
        _ => {
            let mut e: Vec<f64> = (0..n_in * n_out).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            for row in e.chunks_mut(n_out) {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            e
        }
    }
}

/// Runs every restart (plus an optional warm start) and keeps the best.
pub(crate) fn multi_start(
    cfg: &BottleneckConfig,
    beta_index: usize,
    n_in: usize,
    n_out: usize,
    warm: &[&[f64]],
    run: impl Fn(Vec<f64>) -> Run + Sync + Send,
) -> (Run, usize) {
    let starts = cfg.restarts + warm.len();
    let runs = cfg.exec.map(starts, |i| {
        let e = if i < cfg.restarts {
            initial_encoder(cfg.seed, beta_index, i, n_in, n_out)
        } else {
            perturbed_rows(&mut run_rng(cfg.seed, beta_index, i), n_in, n_out, Some(warm[i - cfg.restarts]))
        };
        run(e)
    });
    let iterations = runs.iter().map(|r| r.trace.len() - 1).sum();
    (best_run(runs), iterations)
}

/// Warm-started sweep over `betas`: once from the largest `β` down and once
/// from the smallest up, keeping the better point at every `β`. `solve`
/// receives the config, a stream index and the warm-start encoders.
pub(crate) fn anneal(
    betas: &[f64],
    cfg: &BottleneckConfig,
    solve: impl Fn(&BottleneckConfig, usize, &[&[f64]]) -> Result<CurvePoint>,
) -> Result<Vec<CurvePoint>> {
    let mut order: Vec<usize> = (0..betas.len()).collect();
    order.sort_by(|&a, &b| betas[b].total_cmp(&betas[a]));
    let mut down: Vec<Option<CurvePoint>> = vec![None; betas.len()];
    let mut prev: Option<Vec<f64>> = None;
    for (step, &b) in order.iter().enumerate() {
        let c = cfg.with_beta(betas[b]);
        c.validate()?;
        let warm: Vec<&[f64]> = prev.iter().map(|v| v.as_slice()).collect();
        let p = solve(&c, step, &warm)?;
        prev = Some(p.encoder.as_flat().to_vec());
        down[b] = Some(p);
    }
    // The upward pass reuses the restarts of the downward one and only adds
    // the warm start from the next smaller β.
    let mut prev: Option<Vec<f64>> = None;
    let n = betas.len();
    for (step, &b) in order.iter().rev().enumerate() {
        let current = down[b].take().expect("filled above");
        let best = match &prev {
            Some(w) => {
                let c = BottleneckConfig {
                    restarts: 0,
                    ..cfg.with_beta(betas[b])
                };
                let p = solve(&c, n + step, &[w.as_slice()])?;
                if p.objective < current.objective {
                    p
                } else {
                    current
                }
            }
            None => current,
        };
        prev = Some(best.encoder.as_flat().to_vec());
        down[b] = Some(best);
    }
    let mut points: Vec<CurvePoint> = down.into_iter().map(|p| p.expect("filled above")).collect();
    points.sort_by(|a, b| a.rate.total_cmp(&b.rate).then(b.beta.total_cmp(&a.beta)));
    Ok(points)
}

/// Encoder marginal `r = π e`.
pub(crate) fn marginal(pi: &[f64], e: &[f64], nz: usize) -> Vec<f64> {
    let mut r = vec![0.0; nz];
    for (x, &p) in pi.iter().enumerate() {
        for z in 0..nz {
            r[z] += p * e[x * nz + z];
        }
    }
    r
}

/// `I(Z;X) = Σ_x π(x) KL(e_x ‖ π e)` in bits.
pub(crate) fn rate_bits(pi: &[f64], e: &[f64], nz: usize) -> f64 {
    let r = marginal(pi, e, nz);
    pi.iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(x, p)| p * kl_divergence(&e[x * nz..(x + 1) * nz], &r))
        .sum::<f64>()
        .max(0.0)
}

/// Replaces rows of `z` symbols with no mass under `r` by uniform rows.
pub(crate) fn uniform_unused(d: &mut [f64], r: &[f64], ny: usize) {
    for (z, &rz) in r.iter().enumerate() {
        if rz <= 0.0 {
            d[z * ny..(z + 1) * ny].iter_mut().for_each(|v| *v = 1.0 / ny as f64);
        }
    }
}

/// Outcome of one run from one starting point.
pub(crate) struct Run {
    pub e: Vec<f64>,
    pub d: Vec<f64>,
    pub objective: f64,
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Relative improvement test shared by both solvers.
pub(crate) fn small_improvement(prev: f64, cur: f64, tol: f64) -> bool {
    prev - cur <= tol * prev.abs().max(1.0)
}

/// Picks the run with the lowest objective; earlier runs win ties.
pub(crate) fn best_run(runs: Vec<Run>) -> Run {
    runs.into_iter()
        .reduce(|a, b| if b.objective < a.objective { b } else { a })
        .expect("at least one run")
}
