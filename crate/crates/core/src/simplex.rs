//! Dense two-phase simplex for small standard-form programs
//!
//! ```text
//! minimize c·x  subject to  A x = b,  x ≥ 0
//! ```
//!
//! Sized for the problems in this crate (tens of variables): Blackwell
//! feasibility per input symbol, and the linear minimization step over a
//! transportation polytope. Bland's rule is used throughout, so the method
//! cannot cycle.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; meaningful for `Optimal` (and the phase-one point otherwise).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Optimal value of the phase-one problem: the smallest total violation
    /// `Σ_i |(A x - b)_i|` reachable with `x ≥ 0` under the artificial-variable
    /// relaxation. Zero (up to rounding) iff the program is feasible.
    pub infeasibility: f64,
}

/// Standard-form linear program with a dense row-major constraint matrix.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n_vars: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl LinearProgram {
    pub fn new(n_vars: usize, cost: Vec<f64>) -> Self {
        assert_eq!(cost.len(), n_vars);
        Self {
            n_vars,
            a: Vec::new(),
            b: Vec::new(),
            c: cost,
        }
    }

    /// Adds the equality constraint `row · x = rhs`.
    pub fn add_eq(&mut self, row: &[f64], rhs: f64) {
        assert_eq!(row.len(), self.n_vars);
        self.a.extend_from_slice(row);
        self.b.push(rhs);
    }

    pub fn n_constraints(&self) -> usize {
        self.b.len()
    }

    /// Solves with a phase-one feasibility threshold `feas_tol`.
    pub fn solve(&self, feas_tol: f64) -> LpSolution {
        Tableau::build(self).run(&self.c, feas_tol)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    n_art: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    active_row: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.b.len();
        let n = lp.n_vars;
        let width = n + m + 1;
        let mut t = vec![0.0; m * width];
        for i in 0..m {
            let sign = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
            let row = &mut t[i * width..(i + 1) * width];
            for j in 0..n {
                row[j] = sign * lp.a[i * n + j];
            }
            row[n + i] = 1.0;
            row[width - 1] = sign * lp.b[i];
        }
        Self {
            m,
            n,
            n_art: m,
            width,
            t,
            basis: (n..n + m).collect(),
            active_row: vec![true; m],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width;
        let p = self.at(r, col);
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r || !self.active_row[i] {
                continue;
            }
            let f = self.at(i, col);
            if f != 0.0 {
                for (v, &pr) in self.t[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.t[i * w + col] = 0.0;
            }
        }
        self.basis[r] = col;
    }

    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        let mut rc = cost[..allowed].to_vec();
        for i in 0..self.m {
            if !self.active_row[i] {
                continue;
            }
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, r) in rc.iter_mut().enumerate() {
                    *r -= cb * self.at(i, j);
                }
            }
        }
        rc
    }

    /// Primal simplex on the current basis; columns `>= allowed` never enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> LpStatus {
        let max_iter = 50 * (self.m + self.n + self.n_art) + 1000;
        for _ in 0..max_iter {
            let rc = self.reduced_costs(cost, allowed);
            let Some(enter) = (0..allowed).find(|&j| rc[j] < -1e-11 && !self.basis.contains(&j))
            else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if !self.active_row[i] {
                    continue;
                }
                let a = self.at(i, enter);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                None => return LpStatus::Unbounded,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        LpStatus::IterationLimit
    }

    fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n + self.n_art];
        for i in 0..self.m {
            if self.active_row[i] {
                x[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        x
    }

    fn run(mut self, cost: &[f64], feas_tol: f64) -> LpSolution {
        let total = self.n + self.n_art;
        let mut phase1 = vec![0.0; total];
        phase1[self.n..].iter_mut().for_each(|c| *c = 1.0);
        let status1 = self.optimize(&phase1, total);
        let x_all = self.point();
        let infeasibility: f64 = x_all[self.n..].iter().sum();
        if status1 == LpStatus::IterationLimit || infeasibility > feas_tol {
            let x = x_all[..self.n].to_vec();
            let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
            return LpSolution {
                status: if status1 == LpStatus::IterationLimit {
                    LpStatus::IterationLimit
                } else {
                    LpStatus::Infeasible
                },
                x,
                objective,
                infeasibility,
            };
        }
        // Drive remaining (zero-level) artificials out of the basis, or drop
        // their rows when they are linear combinations of the others.
        for i in 0..self.m {
            if self.basis[i] < self.n {
                continue;
            }
            match (0..self.n).find(|&j| self.at(i, j).abs() > 1e-9 && !self.basis.contains(&j)) {
                Some(j) => self.pivot(i, j),
                None => self.active_row[i] = false,
            }
        }
        let mut full_cost = cost.to_vec();
        full_cost.resize(total, 0.0);
        let status = self.optimize(&full_cost, self.n);
        let x = self.point()[..self.n].to_vec();
        let objective = x.iter().zip(cost).map(|(a, b)| a * b).sum();
        LpSolution {
            status,
            x,
            objective,
            infeasibility,
        }
    }
}
