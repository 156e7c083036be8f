//! Self-consistent iterations for the information bottleneck.
//!
//! Each sweep minimizes the Lagrangian `β Σ π e ln(e/r) + Σ π e KL(p_x ‖ q_z)`
//! in `e` with `(r, q)` fixed and then resets `(r, q)` to the values induced by
//! `e`. At consistent `(r, q)` the Lagrangian equals
//! `I(Y;X|Z) + β I(Z;X)` (in nats), so the objective cannot increase.

use super::{
    anneal, marginal, multi_start, rate_bits, small_improvement, uniform_unused, BottleneckConfig, CurvePoint, Run,
};
use crate::error::{Error, Result};
use crate::prob::{entropy, kl_divergence, Channel, Joint2};

struct Problem {
    nx: usize,
    ny: usize,
    nz: usize,
    pi: Vec<f64>,
    /// `p(y|x)`, row-major `nx × ny`.
    py_x: Vec<f64>,
    i_xy: f64,
}

impl Problem {
    fn new(pxy: &Joint2, nz: usize) -> Self {
        let pi = pxy.row_marginal().into_inner();
        let py_x = pxy.conditional().as_flat().to_vec();
        Self {
            nx: pxy.n_rows(),
            ny: pxy.n_cols(),
            nz,
            pi,
            py_x,
            i_xy: pxy.mutual_information(),
        }
    }

    /// `q(y|z)` induced by `e`; rows of unused `z` are uniform.
    fn decoder(&self, e: &[f64], r: &[f64]) -> Vec<f64> {
        let (ny, nz) = (self.ny, self.nz);
        let mut q = vec![0.0; nz * ny];
        for x in 0..self.nx {
            if self.pi[x] <= 0.0 {
                continue;
            }
            for z in 0..nz {
                let w = self.pi[x] * e[x * nz + z];
                if w > 0.0 {
                    for y in 0..ny {
                        q[z * ny + y] += w * self.py_x[x * ny + y];
                    }
                }
            }
        }
        for z in 0..nz {
            if r[z] > 0.0 {
                let row = &mut q[z * ny..(z + 1) * ny];
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        uniform_unused(&mut q, r, ny);
        q
    }

    /// `I(Z;Y)` of the Markov chain `Z - X - Y` in bits.
    fn sufficiency(&self, e: &[f64], r: &[f64]) -> f64 {
        let (ny, nz) = (self.ny, self.nz);
        let mut pzy = vec![0.0; nz * ny];
        for x in 0..self.nx {
            for z in 0..nz {
                let w = self.pi[x] * e[x * nz + z];
                for y in 0..ny {
                    pzy[z * ny + y] += w * self.py_x[x * ny + y];
                }
            }
        }
        let mut py = vec![0.0; ny];
        for z in 0..nz {
            for y in 0..ny {
                py[y] += pzy[z * ny + y];
            }
        }
        (entropy(&py) + entropy(r) - entropy(&pzy)).max(0.0)
    }

    /// `(objective, rate, sufficiency)` in bits.
    fn evaluate(&self, e: &[f64], beta: f64) -> (f64, f64, f64) {
        let r = marginal(&self.pi, e, self.nz);
        let rate = rate_bits(&self.pi, e, self.nz);
        let suff = self.sufficiency(e, &r).min(self.i_xy);
        ((self.i_xy - suff).max(0.0) + beta * rate, rate, suff)
    }

    fn sweep(&self, e: &mut [f64], beta: f64) {
        let (ny, nz) = (self.ny, self.nz);
        let r = marginal(&self.pi, e, nz);
        let q = self.decoder(e, &r);
        let mut logits = vec![0.0; nz];
        for x in 0..self.nx {
            let row = &mut e[x * nz..(x + 1) * nz];
            if self.pi[x] <= 0.0 {
                row.iter_mut().for_each(|v| *v = 1.0 / nz as f64);
                continue;
            }
            let px = &self.py_x[x * ny..(x + 1) * ny];
            for z in 0..nz {
                logits[z] = if r[z] > 0.0 {
                    let d = kl_divergence(px, &q[z * ny..(z + 1) * ny]) * std::f64::consts::LN_2;
                    if beta > 0.0 {
                        r[z].ln() - d / beta
                    } else {
                        -d
                    }
                } else {
                    f64::NEG_INFINITY
                };
            }
            let best = (0..nz).fold(0, |b, z| if logits[z] > logits[b] { z } else { b });
            let top = logits[best];
            if top == f64::NEG_INFINITY {
                continue;
            }
            if beta > 0.0 {
                let s: f64 = logits.iter().map(|l| (l - top).exp()).sum();
                for z in 0..nz {
                    row[z] = (logits[z] - top).exp() / s;
                }
            } else {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[best] = 1.0;
            }
        }
    }

    fn run(&self, mut e: Vec<f64>, cfg: &BottleneckConfig) -> Run {
        let beta = cfg.beta;
        let mut obj = self.evaluate(&e, beta).0;
        let mut trace = vec![obj];
        let mut converged = false;
        for _ in 0..cfg.max_outer_iter {
            let mut next = e.clone();
            self.sweep(&mut next, beta);
            let cur = self.evaluate(&next, beta).0;
            if cur > obj {
                // Only rounding can do this; keep the better iterate.
                converged = true;
                break;
            }
            let done = small_improvement(obj, cur, cfg.tol);
            e = next;
            obj = cur;
            trace.push(obj);
            if done {
                converged = true;
                break;
            }
        }
        let r = marginal(&self.pi, &e, self.nz);
        let d = self.decoder(&e, &r);
        Run {
            e,
            d,
            objective: obj,
            trace,
            converged,
        }
    }

    fn point(&self, run: Run, cfg: &BottleneckConfig, iterations: usize) -> Result<CurvePoint> {
        let (objective, rate, sufficiency) = self.evaluate(&run.e, cfg.beta);
        Ok(CurvePoint {
            beta: cfg.beta,
            rate,
            sufficiency,
            objective,
            encoder: Channel::from_flat(self.nx, self.nz, run.e)?,
            decoder: Channel::from_flat(self.nz, self.ny, run.d)?,
            converged: run.converged,
            iterations,
            trace: run.trace,
        })
    }

    fn solve(&self, cfg: &BottleneckConfig, beta_index: usize, warm: &[&[f64]]) -> Result<CurvePoint> {
        let (run, iterations) = multi_start(cfg, beta_index, self.nx, self.nz, warm, |e| self.run(e, cfg));
        self.point(run, cfg, iterations)
    }
}

fn check(pxy: &Joint2, cfg: &BottleneckConfig) -> Result<()> {
    cfg.validate()?;
    if pxy.n_rows() == 0 {
        return Err(Error::Empty("joint distribution"));
    }
    Ok(())
}

/// Best of `cfg.restarts` seeded runs at `cfg.beta`. `pxy` has rows indexed
/// by `X` and columns by `Y`.
pub fn ib_solve(pxy: &Joint2, cfg: &BottleneckConfig) -> Result<CurvePoint> {
    check(pxy, cfg)?;
    Problem::new(pxy, cfg.z_cardinality).solve(cfg, 0, &[])
}

/// One point per `β` with warm starts chained across the grid, downward
/// from the largest `β` and back up; returned sorted by rate.
pub fn ib_curve(pxy: &Joint2, betas: &[f64], cfg: &BottleneckConfig) -> Result<Vec<CurvePoint>> {
    check(pxy, cfg)?;
    let problem = Problem::new(pxy, cfg.z_cardinality);
    anneal(betas, cfg, |c, i, warm| problem.solve(c, i, warm))
}
