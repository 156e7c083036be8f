//! Bayes risks under log-loss and generic finite decision problems.
//!
//! The restricted Bayes act is found by a pairwise Frank–Wolfe method on the
//! decoder's mixture weights, independently of the EM iteration used for
//! deficiencies, so the two sides of the risk-gap identity can check each
//! other.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::prob::{entropy, Channel, ProbVector};
use crate::projection::{deficiency, ProjectionOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskOptions {
    /// Certified duality gap (bits) at which each Bayes act is accepted.
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Exec,
}

impl Default for RiskOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            exec: Exec::default(),
        }
    }
}

impl RiskOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    /// `R(P_XY) = H(Y|X)` in bits.
    pub bayes_risk: f64,
    /// `R_d(P_XY)`: log-loss when predictions must lie in the hull of `d`'s rows.
    pub restricted_risk: f64,
    pub gap: f64,
    /// Restricted Bayes acts `q*_{x_d}`; uniform-weight mixtures for `π(x) = 0`.
    pub per_input_acts: Vec<ProbVector>,
    pub converged: bool,
}

/// `H(Y|X)` of the joint `π × κ`, the Bayes risk of log-loss.
pub fn bayes_risk_logloss(pi: &ProbVector, kappa: &Channel) -> Result<f64> {
    check_dim("prior vs channel inputs", kappa.n_inputs(), pi.len())?;
    Ok((0..pi.len())
        .filter(|&x| pi[x] > 0.0)
        .map(|x| pi[x] * entropy(kappa.row(x)))
        .sum())
}

struct BayesAct {
    weights: Vec<f64>,
    point: Vec<f64>,
    /// `E_{y∼target}[-log2 point(y)]`.
    risk: f64,
    converged: bool,
}

/// Minimizes `E_{y∼target}[-log2 q(y)]` over `q` in the hull of `atoms` by
/// pairwise Frank–Wolfe with exact line search.
fn bayes_act(target: &[f64], atoms: &[&[f64]], tol: f64, max_iter: usize) -> BayesAct {
    let n = atoms.len();
    let ny = target.len();
    let support: Vec<usize> = (0..ny).filter(|&y| target[y] > 0.0).collect();
    let mut w = vec![1.0 / n as f64; n];
    let mut m = vec![0.0; ny];
    let mix = |w: &[f64], m: &mut [f64]| {
        m.iter_mut().for_each(|v| *v = 0.0);
        for (wz, a) in w.iter().zip(atoms) {
            for (mv, av) in m.iter_mut().zip(a.iter()) {
                *mv += wz * av;
            }
        }
    };
    mix(&w, &mut m);
    if support.iter().any(|&y| m[y] <= 0.0) {
        return BayesAct {
            weights: w,
            point: m,
            risk: f64::INFINITY,
            converged: true,
        };
    }

    let mut converged = false;
    let mut r = vec![0.0; n];
    let mut delta = vec![0.0; ny];
    for _ in 0..max_iter {
        // r_z = Σ_y target(y) a_z(y) / m(y) is minus the gradient (in nats);
        // Σ_z w_z r_z = 1, so max_z r_z - 1 is the duality gap.
        for (rz, a) in r.iter_mut().zip(atoms) {
            *rz = support.iter().map(|&y| target[y] * a[y] / m[y]).sum();
        }
        let s = (0..n).fold(0, |b, z| if r[z] > r[b] { z } else { b });
        if (r[s] - 1.0) / std::f64::consts::LN_2 <= tol {
            converged = true;
            break;
        }
        let v = (0..n)
            .filter(|&z| w[z] > 0.0)
            .fold(None, |b: Option<usize>, z| match b {
                Some(b) if r[b] <= r[z] => Some(b),
                _ => Some(z),
            })
            .expect("weights sum to one");
        for y in 0..ny {
            delta[y] = atoms[s][y] - atoms[v][y];
        }
        let slope = |g: f64| -> f64 {
            let mut acc = 0.0;
            for &y in &support {
                let my = m[y] + g * delta[y];
                if my <= 0.0 {
                    return f64::INFINITY;
                }
                acc -= target[y] * delta[y] / my;
            }
            acc
        };
        let g_max = w[v];
        let step = if slope(g_max) <= 0.0 {
            g_max
        } else {
            let (mut lo, mut hi) = (0.0, g_max);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-17 * g_max {
                    break;
                }
            }
            lo
        };
        if step <= 0.0 {
            break;
        }
        w[s] += step;
        w[v] = if step == g_max { 0.0 } else { w[v] - step };
        mix(&w, &mut m);
    }
    let risk = -support.iter().map(|&y| target[y] * m[y].log2()).sum::<f64>();
    BayesAct {
        weights: w,
        point: m,
        risk,
        converged,
    }
}

/// Log-loss risk when predictions of `Y` given `x` must be mixtures of `d`'s
/// rows, together with the unrestricted Bayes risk.
pub fn restricted_bayes_risk(
    pi: &ProbVector,
    kappa: &Channel,
    d: &Channel,
    opts: &RiskOptions,
) -> Result<RiskReport> {
    check_dim("prior vs channel inputs", kappa.n_inputs(), pi.len())?;
    check_dim("decoder vs channel outputs", kappa.n_outputs(), d.n_outputs())?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", opts.tol)));
    }
    let atoms: Vec<&[f64]> = d.rows().collect();
    let acts = opts.exec.map(kappa.n_inputs(), |x| {
        let target = if pi[x] > 0.0 { kappa.row(x) } else { d.row(0) };
        bayes_act(target, &atoms, opts.tol, opts.max_iter)
    });
    let bayes_risk = bayes_risk_logloss(pi, kappa)?;
    let mut restricted_risk = 0.0;
    let mut converged = true;
    let mut per_input_acts = Vec::with_capacity(acts.len());
    for (x, act) in acts.into_iter().enumerate() {
        if pi[x] > 0.0 {
            restricted_risk += pi[x] * act.risk;
            converged &= act.converged;
        }
        debug_assert!((act.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let total: f64 = act.point.iter().sum();
        per_input_acts.push(ProbVector::from_normalized(
            act.point.into_iter().map(|v| v / total).collect(),
        ));
    }
    Ok(RiskReport {
        bayes_risk,
        restricted_risk,
        gap: restricted_risk - bayes_risk,
        per_input_acts,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskGapCheck {
    /// `R_d - R` from the Bayes-act solver.
    pub gap: f64,
    /// `δ^π(d, κ)` from the EM projection.
    pub deficiency: f64,
    pub abs_difference: f64,
}

/// Computes the restricted-risk gap and the deficiency with separate solvers.
pub fn verify_risk_gap_identity(
    pi: &ProbVector,
    kappa: &Channel,
    d: &Channel,
    tol: f64,
) -> Result<RiskGapCheck> {
    let report = restricted_bayes_risk(pi, kappa, d, &RiskOptions::default().with_tol(tol))?;
    let def = deficiency(d, kappa, pi, &ProjectionOptions::default().with_tol(tol))?;
    let abs_difference = if report.gap.is_infinite() && def.value.is_infinite() {
        0.0
    } else {
        (report.gap - def.value).abs()
    };
    Ok(RiskGapCheck {
        gap: report.gap,
        deficiency: def.value,
        abs_difference,
    })
}

/// A finite decision problem about `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    pub actions: Vec<String>,
    /// `loss[y][a]`.
    pub loss: Vec<Vec<f64>>,
    pub prior: ProbVector,
}

impl DecisionProblem {
    pub fn new(actions: Vec<String>, loss: Vec<Vec<f64>>, prior: ProbVector) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Empty("action set"));
        }
        check_dim("loss rows vs prior", prior.len(), loss.len())?;
        for (y, row) in loss.iter().enumerate() {
            check_dim("loss columns vs actions", actions.len(), row.len())?;
            if let Some(a) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidEntry {
                    what: "loss",
                    index: y * actions.len() + a,
                    reason: "not finite".into(),
                });
            }
        }
        Ok(Self {
            actions,
            loss,
            prior,
        })
    }

    /// 0–1 loss with one action per symbol of `Y`.
    pub fn zero_one(prior: ProbVector) -> Self {
        let n = prior.len();
        let loss = (0..n)
            .map(|y| (0..n).map(|a| if a == y { 0.0 } else { 1.0 }).collect())
            .collect();
        Self {
            actions: (0..n).map(|a| a.to_string()).collect(),
            loss,
            prior,
        }
    }

    pub fn with_prior(&self, prior: ProbVector) -> Result<Self> {
        Self::new(self.actions.clone(), self.loss.clone(), prior)
    }
}

/// Bayes decision rule for observations through `channel` (`Y → O`): the
/// action minimizing posterior expected loss, lowest index on ties.
pub fn bayes_rule(problem: &DecisionProblem, channel: &Channel) -> Result<Vec<usize>> {
    check_dim("channel inputs vs prior", problem.prior.len(), channel.n_inputs())?;
    let n_a = problem.actions.len();
    Ok((0..channel.n_outputs())
        .map(|o| {
            let cost = |a: usize| -> f64 {
                (0..problem.prior.len())
                    .map(|y| problem.prior[y] * channel.get(y, o) * problem.loss[y][a])
                    .sum()
            };
            (0..n_a).fold((0, f64::INFINITY), |best, a| {
                let c = cost(a);
                if c < best.1 {
                    (a, c)
                } else {
                    best
                }
            })
            .0
        })
        .collect())
}

/// Minimal expected loss achievable from observations through `channel`.
pub fn optimal_risk(problem: &DecisionProblem, channel: &Channel) -> Result<f64> {
    let rule = bayes_rule(problem, channel)?;
    let mut risk = 0.0;
    for (o, &a) in rule.iter().enumerate() {
        for y in 0..problem.prior.len() {
            risk += problem.prior[y] * channel.get(y, o) * problem.loss[y][a];
        }
    }
    Ok(risk)
}
