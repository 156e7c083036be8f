//! Alternating minimization of `F(e, d) = D(κ ‖ d∘e | π) + β I(Z;X)`.
//!
//! Encoder sweep: for each `x`, one majorize-minimize step on
//! `D(κ_x ‖ d e_x) + β KL(e_x ‖ r)` with `r` held fixed, followed by
//! `r ← π e`. Decoder sweep: one EM step on `d` for fixed `e`. Both steps
//! decrease `F`, so the objective trace is non-increasing.

use super::{
    anneal, marginal, multi_start, rate_bits, small_improvement, uniform_unused, BottleneckConfig, CurvePoint, Run,
    Schedule,
};
use crate::error::{check_dim, Result};
use crate::prob::{Channel, ProbVector};

struct Problem {
    nx: usize,
    ny: usize,
    nz: usize,
    pi: Vec<f64>,
    kappa: Vec<f64>,
    i_xy: f64,
}

impl Problem {
    fn new(pi: &ProbVector, kappa: &Channel, nz: usize) -> Result<Self> {
        check_dim("prior vs channel inputs", kappa.n_inputs(), pi.len())?;
        let i_xy = crate::prob::Joint2::from_prior_channel(pi, kappa)?.mutual_information();
        Ok(Self {
            nx: kappa.n_inputs(),
            ny: kappa.n_outputs(),
            nz,
            pi: pi.as_slice().to_vec(),
            kappa: kappa.as_flat().to_vec(),
            i_xy,
        })
    }

    fn kappa_row(&self, x: usize) -> &[f64] {
        &self.kappa[x * self.ny..(x + 1) * self.ny]
    }

    /// `(d∘e)(·|x)`.
    fn mixture(&self, e: &[f64], d: &[f64], x: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for z in 0..self.nz {
            let w = e[x * self.nz + z];
            if w > 0.0 {
                for (o, &dv) in out.iter_mut().zip(&d[z * self.ny..(z + 1) * self.ny]) {
                    *o += w * dv;
                }
            }
        }
    }

    /// `D(κ ‖ d∘e | π)` in bits.
    fn distortion(&self, e: &[f64], d: &[f64]) -> f64 {
        let mut m = vec![0.0; self.ny];
        let mut acc = 0.0;
        for x in 0..self.nx {
            if self.pi[x] <= 0.0 {
                continue;
            }
            self.mixture(e, d, x, &mut m);
            acc += self.pi[x] * crate::prob::kl_divergence(self.kappa_row(x), &m);
        }
        acc
    }

    fn objective(&self, e: &[f64], d: &[f64], beta: f64) -> f64 {
        let rate = rate_bits(&self.pi, e, self.nz);
        self.distortion(e, d) + if beta > 0.0 { beta * rate } else { 0.0 }
    }

    /// Bayes-consistent decoder `q(y|z)` of an encoder.
    fn posterior(&self, e: &[f64]) -> Vec<f64> {
        let (ny, nz) = (self.ny, self.nz);
        let mut q = vec![0.0; nz * ny];
        for x in 0..self.nx {
            for z in 0..nz {
                let w = self.pi[x] * e[x * nz + z];
                for y in 0..ny {
                    q[z * ny + y] += w * self.kappa[x * ny + y];
                }
            }
        }
        normalize_rows(&mut q, ny);
        q
    }

    fn encoder_sweep(&self, e: &mut [f64], d: &[f64], beta: f64) {
        let (ny, nz) = (self.ny, self.nz);
        let r = marginal(&self.pi, e, nz);
        let mut m = vec![0.0; ny];
        let mut c = vec![0.0; nz];
        for x in 0..self.nx {
            if self.pi[x] <= 0.0 {
                e[x * nz..(x + 1) * nz].iter_mut().for_each(|v| *v = 1.0 / nz as f64);
                continue;
            }
            self.mixture(e, d, x, &mut m);
            let k = self.kappa_row(x);
            for z in 0..nz {
                let ez = e[x * nz + z];
                c[z] = if ez > 0.0 {
                    let dz = &d[z * ny..(z + 1) * ny];
                    (0..ny)
                        .filter(|&y| k[y] > 0.0 && m[y] > 0.0)
                        .map(|y| k[y] * dz[y] / m[y])
                        .sum::<f64>()
                        * ez
                } else {
                    0.0
                };
            }
            mm_step(&c, &r, beta, &mut e[x * nz..(x + 1) * nz]);
        }
    }

    fn decoder_sweep(&self, e: &[f64], d: &mut [f64]) {
        let (ny, nz) = (self.ny, self.nz);
        let mut acc = vec![0.0; nz * ny];
        let mut m = vec![0.0; ny];
        for x in 0..self.nx {
            if self.pi[x] <= 0.0 {
                continue;
            }
            self.mixture(e, d, x, &mut m);
            let k = self.kappa_row(x);
            for z in 0..nz {
                let w = self.pi[x] * e[x * nz + z];
                if w <= 0.0 {
                    continue;
                }
                for y in 0..ny {
                    if k[y] > 0.0 && m[y] > 0.0 {
                        acc[z * ny + y] += w * k[y] * d[z * ny + y] / m[y];
                    }
                }
            }
        }
        for z in 0..nz {
            let s: f64 = acc[z * ny..(z + 1) * ny].iter().sum();
            if s > 0.0 {
                for y in 0..ny {
                    d[z * ny + y] = acc[z * ny + y] / s;
                }
            }
        }
    }

    fn run(&self, mut e: Vec<f64>, cfg: &BottleneckConfig) -> Run {
        let beta = cfg.beta;
        let mut d = self.posterior(&e);
        let mut obj = self.objective(&e, &d, beta);
        let mut trace = vec![obj];
        let mut converged = false;
        for _ in 0..cfg.max_outer_iter {
            let (mut ne, mut nd) = (e.clone(), d.clone());
            for _ in 0..cfg.schedule.encoder_sweeps() {
                self.encoder_sweep(&mut ne, &nd, beta);
            }
            self.decoder_sweep(&ne, &mut nd);
            let cur = self.objective(&ne, &nd, beta);
            if !(cur <= obj) {
                converged = true;
                break;
            }
            let done = small_improvement(obj, cur, cfg.tol);
            e = ne;
            d = nd;
            obj = cur;
            trace.push(obj);
            if done {
                converged = true;
                break;
            }
        }
        let r = marginal(&self.pi, &e, self.nz);
        uniform_unused(&mut d, &r, self.ny);
        Run {
            e,
            d,
            objective: obj,
            trace,
            converged,
        }
    }

    fn solve(&self, cfg: &BottleneckConfig, beta_index: usize, warm: &[&[f64]]) -> Result<CurvePoint> {
        let (run, iterations) = multi_start(cfg, beta_index, self.nx, self.nz, warm, |e| self.run(e, cfg));
        let rate = rate_bits(&self.pi, &run.e, self.nz);
        let distortion = self.distortion(&run.e, &run.d);
        Ok(CurvePoint {
            beta: cfg.beta,
            rate,
            sufficiency: self.i_xy - distortion,
            objective: distortion + cfg.beta * rate,
            encoder: Channel::from_flat(self.nx, self.nz, run.e)?,
            decoder: Channel::from_flat(self.nz, self.ny, run.d)?,
            converged: run.converged,
            iterations,
            trace: run.trace,
        })
    }
}

fn normalize_rows(m: &mut [f64], n: usize) {
    for row in m.chunks_mut(n) {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / n as f64);
        }
    }
}

/// Minimizes `-Σ c_z ln e_z + β Σ e_z ln(e_z / r_z)` over the simplex,
/// writing the minimizer into `out`. Leaves `out` untouched when the
/// surrogate carries no information (all `c = 0` with `β = 0`).
fn mm_step(c: &[f64], r: &[f64], beta: f64, out: &mut [f64]) {
    if beta <= 0.0 {
        let s: f64 = c.iter().sum();
        if s > 0.0 {
            out.iter_mut().zip(c).for_each(|(o, v)| *o = v / s);
        }
        return;
    }
    let active = r.iter().filter(|&&v| v > 0.0).count();
    if active == 0 {
        return;
    }
    let na = active as f64;
    // Stationarity: β ln(e/r) - c/e = μ, with e increasing in μ.
    let at = |e_val: f64, z: usize| beta * (e_val / r[z]).ln() - c[z] / e_val;
    let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
    for z in (0..c.len()).filter(|&z| r[z] > 0.0) {
        hi = hi.min(at(1.0, z));
        lo = lo.min(at(1.0 / na, z));
    }
    let fill = |mu: f64, out: &mut [f64]| -> (f64, f64) {
        let (mut sum, mut slope) = (0.0, 0.0);
        for z in 0..c.len() {
            out[z] = if r[z] > 0.0 { weight(c[z], r[z], beta, mu) } else { 0.0 };
            sum += out[z];
            slope += out[z] * out[z] / (beta * out[z] + c[z]);
        }
        (sum, slope)
    };
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (sum, slope) = fill(mu, out);
        let g = sum - 1.0;
        if g.abs() <= 1e-15 {
            break;
        }
        if g > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        let step = mu - g / slope;
        mu = if slope > 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * mu.abs().max(1.0) {
            break;
        }
    }
    let (sum, _) = fill(mu, out);
    out.iter_mut().for_each(|v| *v /= sum);
}

/// Root `e` of `β ln(e/r) - c/e = μ` for `r > 0`, `β > 0`.
fn weight(c: f64, r: f64, beta: f64, mu: f64) -> f64 {
    if c <= 0.0 {
        return r * (mu / beta).exp();
    }
    // e = c / (β w) with w + ln w = L.
    let l = (c / (beta * r)).ln() - mu / beta;
    let mut t = if l <= 1.0 { l } else { (l - l.ln()).ln() };
    for _ in 0..100 {
        let w = t.exp();
        let dt = (w + t - l) / (w + 1.0);
        t -= dt;
        if dt.abs() <= 1e-15 * t.abs().max(1.0) {
            break;
        }
    }
    c / (beta * t.exp())
}

/// Best of `cfg.restarts` seeded runs at `cfg.beta`.
pub fn db_solve(pi: &ProbVector, kappa: &Channel, cfg: &BottleneckConfig) -> Result<CurvePoint> {
    cfg.validate()?;
    Problem::new(pi, kappa, cfg.z_cardinality)?.solve(cfg, 0, &[])
}

/// One point per `β` with warm starts chained across the grid; returned
/// sorted by rate.
pub fn db_curve(pi: &ProbVector, kappa: &Channel, betas: &[f64], cfg: &BottleneckConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let problem = Problem::new(pi, kappa, cfg.z_cardinality)?;
    anneal(betas, cfg, |c, i, warm| problem.solve(c, i, warm))
}

/// [`db_curve`] once per schedule, for side-by-side comparison.
pub fn db_curves(
    pi: &ProbVector,
    kappa: &Channel,
    betas: &[f64],
    cfg: &BottleneckConfig,
    schedules: &[Schedule],
) -> Result<Vec<(Schedule, Vec<CurvePoint>)>> {
    schedules
        .iter()
        .map(|&s| Ok((s, db_curve(pi, kappa, betas, &BottleneckConfig { schedule: s, ..*cfg })?)))
        .collect()
}
