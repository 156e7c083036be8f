//! `UI(Y;X\Z) = min_{Q ∈ Δ_P} I_Q(Y;X|Z)`.
//!
//! `Δ_P` is a product of transportation polytopes, one per `y` with
//! `P(y) > 0`: couplings of `P(x|y)` and `P(z|y)` on the support rectangle
//! `supp P(x|y) × supp P(z|y)`. Each is parameterized affinely by its leading
//! `(a-1)×(b-1)` block. The objective equals `-H_Q(Y|X,Z)` plus a constant,
//! with gradient `log2 Q(y|x,z)`, and blows up at the boundary, so it is
//! minimized by a log-barrier Newton method started at the conditionally
//! independent coupling. Termination is certified by a Frank–Wolfe type
//! duality gap whose linear subproblems are solved by the simplex method.

use serde::{Deserialize, Serialize};

use crate::prob::Joint3;
use crate::simplex::{LinearProgram, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UiOptions {
    /// Stop once the certified gap (bits) falls below this value.
    pub tol: f64,
    /// Cap on Newton steps.
    pub max_iter: usize,
    pub record_trace: bool,
}

impl Default for UiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 50_000,
            record_trace: false,
        }
    }
}

/// A member of `Δ_P`, stored per `y` with `P(y) > 0` as the conditional
/// coupling `Q(x,z|y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFamily {
    pub ys: Vec<usize>,
    pub nx: usize,
    pub nz: usize,
    /// Row-major `|X|×|Z|` matrices, aligned with `ys`.
    pub per_y: Vec<Vec<f64>>,
}

impl CouplingFamily {
    fn from_joint(p: &Joint3, q: &[f64]) -> Self {
        let [ny, nx, nz] = p.dims();
        let py = p.marginal(crate::prob::Axis::Y);
        let mut ys = Vec::new();
        let mut per_y = Vec::new();
        for y in 0..ny {
            if py[y] > 0.0 {
                ys.push(y);
                per_y.push(q[y * nx * nz..(y + 1) * nx * nz].iter().map(|v| v / py[y]).collect());
            }
        }
        Self { ys, nx, nz, per_y }
    }

    /// The full joint `Q(y,x,z) = P(y) Q(x,z|y)` with the axes of `p`.
    pub fn to_joint(&self, p: &Joint3) -> Joint3 {
        let [ny, nx, nz] = p.dims();
        let py = p.marginal(crate::prob::Axis::Y);
        let mut q = vec![0.0; ny * nx * nz];
        for (y, m) in self.ys.iter().zip(&self.per_y) {
            for (i, v) in m.iter().enumerate() {
                q[y * nx * nz + i] = py[*y] * v;
            }
        }
        Joint3::from_unchecked(p.dims(), q)
    }

    /// Largest violation of the `Δ_P` membership constraints.
    pub fn membership_violation(&self, p: &Joint3) -> f64 {
        let py = p.marginal(crate::prob::Axis::Y);
        let mut worst: f64 = 0.0;
        for (y, m) in self.ys.iter().zip(&self.per_y) {
            worst = worst.max((m.iter().sum::<f64>() - 1.0).abs());
            for x in 0..self.nx {
                let target: f64 = (0..self.nz).map(|z| p.get(*y, x, z)).sum::<f64>() / py[*y];
                let got: f64 = (0..self.nz).map(|z| m[x * self.nz + z]).sum();
                worst = worst.max((target - got).abs());
            }
            for z in 0..self.nz {
                let target: f64 = (0..self.nx).map(|x| p.get(*y, x, z)).sum::<f64>() / py[*y];
                let got: f64 = (0..self.nx).map(|x| m[x * self.nz + z]).sum();
                worst = worst.max((target - got).abs());
            }
            worst = worst.max(-m.iter().copied().fold(0.0, f64::min));
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniqueInformation {
    /// `UI(Y;X\Z)` in bits.
    pub value: f64,
    pub witness: CouplingFamily,
    /// Certified upper bound (bits) on the suboptimality of `value`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `I_Q(Y;X|Z)` after each barrier stage, when requested.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Index bookkeeping for the variables of `Δ_P`.
struct Layout {
    nx: usize,
    nz: usize,
    /// Per supported `y`: (y, supported x's, supported z's).
    blocks: Vec<(usize, Vec<usize>, Vec<usize>)>,
    /// All flat indices `(y*nx + x)*nz + z` that are free variables.
    vars: Vec<usize>,
}

impl Layout {
    fn new(p: &Joint3) -> Self {
        let [ny, nx, nz] = p.dims();
        let mut blocks = Vec::new();
        let mut vars = Vec::new();
        for y in 0..ny {
            let xs: Vec<usize> =
                (0..nx).filter(|&x| (0..nz).any(|z| p.get(y, x, z) > 0.0)).collect();
            let zs: Vec<usize> =
                (0..nz).filter(|&z| (0..nx).any(|x| p.get(y, x, z) > 0.0)).collect();
            if xs.is_empty() {
                continue;
            }
            for &x in &xs {
                for &z in &zs {
                    vars.push((y * nx + x) * nz + z);
                }
            }
            blocks.push((y, xs, zs));
        }
        Self { nx, nz, blocks, vars }
    }
}

/// `I_Q(Y;X|Z)` in bits, evaluated directly; `Q(y,z)` and `Q(z)` are read
/// off `q` itself.
pub(crate) fn cmi_yx_given_z(dims: [usize; 3], q: &[f64]) -> f64 {
    let [ny, nx, nz] = dims;
    let mut qxz = vec![0.0; nx * nz];
    let mut qyz = vec![0.0; ny * nz];
    let mut qz = vec![0.0; nz];
    for y in 0..ny {
        for x in 0..nx {
            for z in 0..nz {
                let v = q[(y * nx + x) * nz + z];
                qxz[x * nz + z] += v;
                qyz[y * nz + z] += v;
                qz[z] += v;
            }
        }
    }
    let mut acc = 0.0;
    for y in 0..ny {
        for x in 0..nx {
            for z in 0..nz {
                let v = q[(y * nx + x) * nz + z];
                if v > 0.0 {
                    acc += v * (v * qz[z] / (qxz[x * nz + z] * qyz[y * nz + z])).log2();
                }
            }
        }
    }
    acc.max(0.0)
}

struct Objective<'a> {
    layout: &'a Layout,
    dims: [usize; 3],
    qxz: Vec<f64>,
    log_ny: f64,
}

impl<'a> Objective<'a> {
    fn new(layout: &'a Layout, dims: [usize; 3]) -> Self {
        Self {
            layout,
            dims,
            qxz: vec![0.0; dims[1] * dims[2]],
            log_ny: (dims[0] as f64).log2(),
        }
    }

    fn refresh_qxz(&mut self, q: &[f64]) {
        let (nx, nz) = (self.dims[1], self.dims[2]);
        self.qxz.iter_mut().for_each(|v| *v = 0.0);
        for &i in &self.layout.vars {
            let xz = i % (nx * nz);
            self.qxz[xz] += q[i];
        }
    }

    /// Gradient `log2 Q(y|x,z)` on the free variables (zero elsewhere).
    fn gradient(&mut self, q: &[f64], g: &mut [f64]) {
        self.refresh_qxz(q);
        let nxz = self.dims[1] * self.dims[2];
        for &i in &self.layout.vars {
            let c = self.qxz[i % nxz];
            g[i] = if c <= 0.0 {
                // Lower bound on the one-sided derivative when the whole
                // `(x,z)` cell is empty: `Σ_y d_y log2(d_y/Σd) ≥ -Σd log2|Y|`.
                -self.log_ny
            } else if q[i] > 0.0 {
                (q[i] / c).log2()
            } else {
                // `log2 0`; any vertex using this cell is a descent direction.
                -1074.0
            };
        }
    }
}

fn dot(layout: &Layout, a: &[f64], b: &[f64]) -> f64 {
    layout.vars.iter().map(|&i| a[i] * b[i]).sum()
}

/// Vertex of `Δ_P` minimizing `<g, Q>`, solved blockwise by the simplex method.
fn linear_minimizer(p: &Joint3, layout: &Layout, g: &[f64]) -> Vec<f64> {
    let (nx, nz) = (layout.nx, layout.nz);
    let mut s = vec![0.0; p.as_flat().len()];
    for (y, xs, zs) in &layout.blocks {
        let idx = |x: usize, z: usize| (y * nx + x) * nz + z;
        let row_mass: Vec<f64> = xs.iter().map(|&x| (0..nz).map(|z| p.get(*y, x, z)).sum()).collect();
        let col_mass: Vec<f64> = zs.iter().map(|&z| (0..nx).map(|x| p.get(*y, x, z)).sum()).collect();
        if xs.len() == 1 || zs.len() == 1 {
            // single feasible point
            for (a, &x) in xs.iter().enumerate() {
                for (b, &z) in zs.iter().enumerate() {
                    s[idx(x, z)] = if xs.len() == 1 { col_mass[b] } else { row_mass[a] };
                }
            }
            continue;
        }
        let n = xs.len() * zs.len();
        let cost: Vec<f64> = xs
            .iter()
            .flat_map(|&x| zs.iter().map(move |&z| (x, z)))
            .map(|(x, z)| g[idx(x, z)])
            .collect();
        let mut lp = LinearProgram::new(n, cost);
        let mut row = vec![0.0; n];
        for a in 0..xs.len() {
            row.iter_mut().for_each(|v| *v = 0.0);
            for b in 0..zs.len() {
                row[a * zs.len() + b] = 1.0;
            }
            lp.add_eq(&row, row_mass[a]);
        }
        for b in 0..zs.len() {
            row.iter_mut().for_each(|v| *v = 0.0);
            for a in 0..xs.len() {
                row[a * zs.len() + b] = 1.0;
            }
            lp.add_eq(&row, col_mass[b]);
        }
        let sol = lp.solve(1e-12);
        debug_assert_eq!(sol.status, LpStatus::Optimal);
        for (a, &x) in xs.iter().enumerate() {
            for (b, &z) in zs.iter().enumerate() {
                s[idx(x, z)] = sol.x[a * zs.len() + b].max(0.0);
            }
        }
    }
    s
}

/// Affine parameterization `Q = q0 + B u` of the free variables of `Δ_P`.
struct Reduced {
    /// Flat index of each variable cell.
    cells: Vec<usize>,
    /// `(x,z)` group of each cell.
    group: Vec<usize>,
    q0: Vec<f64>,
    /// Sparse rows of `B`: `(u index, coefficient)`.
    b: Vec<Vec<(usize, f64)>>,
    n_u: usize,
    n_groups: usize,
}

impl Reduced {
    fn new(p: &Joint3, layout: &Layout) -> Self {
        let [_, nx, nz] = p.dims();
        let py = p.marginal(crate::prob::Axis::Y);
        let mut r = Reduced {
            cells: Vec::new(),
            group: Vec::new(),
            q0: Vec::new(),
            b: Vec::new(),
            n_u: 0,
            n_groups: nx * nz,
        };
        for (y, xs, zs) in &layout.blocks {
            // The dependent last row and column take the heaviest symbols, so
            // that the cells coupling several coordinates have low curvature.
            let heaviest_last = |v: &[usize], mass: &dyn Fn(usize) -> f64| {
                let mut v = v.to_vec();
                let k = (0..v.len())
                    .max_by(|&a, &b| mass(v[a]).total_cmp(&mass(v[b])))
                    .unwrap();
                let n = v.len();
                v.swap(k, n - 1);
                v
            };
            let xs = heaviest_last(xs, &|x| (0..nz).map(|z| p.get(*y, x, z)).sum());
            let zs = heaviest_last(zs, &|z| (0..nx).map(|x| p.get(*y, x, z)).sum());
            let (na, nb) = (xs.len(), zs.len());
            let base = r.n_u;
            let u = |j: usize, k: usize| base + j * (nb - 1) + k;
            for (j, &x) in xs.iter().enumerate() {
                let pyx: f64 = (0..nz).map(|z| p.get(*y, x, z)).sum();
                for (k, &z) in zs.iter().enumerate() {
                    let pyz: f64 = (0..nx).map(|x| p.get(*y, x, z)).sum();
                    let (last_j, last_k) = (j + 1 == na, k + 1 == nb);
                    let coeffs = match (last_j, last_k) {
                        (false, false) => vec![(u(j, k), 1.0)],
                        (false, true) => (0..nb - 1).map(|k| (u(j, k), -1.0)).collect(),
                        (true, false) => (0..na - 1).map(|j| (u(j, k), -1.0)).collect(),
                        (true, true) => (0..na - 1)
                            .flat_map(|j| (0..nb - 1).map(move |k| (u(j, k), 1.0)))
                            .collect(),
                    };
                    r.cells.push((y * nx + x) * nz + z);
                    r.group.push(x * nz + z);
                    r.q0.push(pyx * pyz / py[*y]);
                    r.b.push(coeffs);
                }
            }
            r.n_u += (na - 1) * (nb - 1);
        }
        r
    }

    /// `B u`; iterates are updated in cell space so that tiny cells do not
    /// lose their relative precision.
    fn direction(&self, u: &[f64], out: &mut [f64]) {
        for (c, row) in self.b.iter().enumerate() {
            out[c] = row.iter().map(|&(k, v)| v * u[k]).sum::<f64>();
        }
    }

    fn group_sums(&self, q: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_groups];
        for (c, v) in q.iter().enumerate() {
            s[self.group[c]] += v;
        }
        s
    }

    /// Derivative of the barrier objective (nats) at `q + t dq` along `dq`.
    /// Each cell's log barrier is weighted by its starting mass, which keeps
    /// the barrier curvature on the scale of the objective's for tiny cells.
    fn slope(&self, q: &[f64], dq: &[f64], t: f64, mu: f64, buf: &mut [f64]) -> f64 {
        for c in 0..q.len() {
            buf[c] = q[c] + t * dq[c];
            if buf[c] <= 0.0 {
                return f64::INFINITY;
            }
        }
        let s = self.group_sums(buf);
        (0..q.len())
            .map(|c| dq[c] * ((buf[c] / s[self.group[c]]).ln() - mu * self.q0[c] / buf[c]))
            .sum()
    }

    /// Newton direction for the barrier objective and its decrement.
    fn newton(&self, q: &[f64], mu: f64) -> (Vec<f64>, f64) {
        let n = self.n_u;
        let s = self.group_sums(q);
        let mut grad = nalgebra::DVector::<f64>::zeros(n);
        let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut group_dir = vec![vec![0.0; n]; self.n_groups];
        for (c, row) in self.b.iter().enumerate() {
            let v = q[c];
            let w = mu * self.q0[c];
            let gq = (v / s[self.group[c]]).ln() - w / v;
            let hq = 1.0 / v + w / (v * v);
            for &(i, bi) in row {
                grad[i] += bi * gq;
                group_dir[self.group[c]][i] += bi;
                for &(j, bj) in row {
                    hess[(i, j)] += bi * bj * hq;
                }
            }
        }
        for (g, w) in group_dir.iter().enumerate() {
            if s[g] > 0.0 {
                for i in 0..n {
                    if w[i] != 0.0 {
                        for j in 0..n {
                            hess[(i, j)] -= w[i] * w[j] / s[g];
                        }
                    }
                }
            }
        }
        let mut ridge = 0.0;
        loop {
            let mut h = hess.clone();
            for i in 0..n {
                h[(i, i)] += ridge;
            }
            if let Some(ch) = h.cholesky() {
                let step = ch.solve(&(-&grad));
                let decrement = -grad.dot(&step);
                return (step.as_slice().to_vec(), decrement);
            }
            if !ridge.is_finite() || ridge > 1e300 {
                return (vec![0.0; n], 0.0);
            }
            ridge = if ridge == 0.0 { 1e-12 * hess.diagonal().amax().max(1.0) } else { ridge * 10.0 };
        }
    }
}

/// Upper bound on `f(Q) - min_{Δ_P} f` in bits.
///
/// For any `ν ≥ 0` and `S ∈ Δ_P`, convexity gives
/// `f(S) ≥ f(Q) - <ν,Q> + <∇f(Q) - ν, S - Q>`, so
/// `<ν,Q> + max_S <∇f(Q) - ν, Q - S>` bounds the suboptimality. With
/// `ν = μ w / Q` from the barrier this vanishes along the central path;
/// `ν = 0` gives the plain Frank–Wolfe gap. The smaller of the two is returned.
fn certified_gap(
    p: &Joint3,
    layout: &Layout,
    red: &Reduced,
    qc: &[f64],
    mu: f64,
    q: &[f64],
    g: &mut [f64],
) -> f64 {
    let fw = |g: &[f64]| {
        let s = linear_minimizer(p, layout, g);
        (dot(layout, g, q) - dot(layout, g, &s)).max(0.0)
    };
    let plain = fw(g);
    let mut shift = 0.0;
    for (c, &i) in red.cells.iter().enumerate() {
        let nu = mu * red.q0[c] / qc[c] / std::f64::consts::LN_2;
        g[i] -= nu;
        shift += nu * qc[c];
    }
    plain.min(shift + fw(g))
}

/// Runs the solver on a validated joint.
pub fn unique_information(p: &Joint3, opts: &UiOptions) -> UniqueInformation {
    let dims = p.dims();
    let layout = Layout::new(p);
    let red = Reduced::new(p, &layout);
    let n = p.as_flat().len();

    let mut qc = red.q0.clone();
    let mut trial = vec![0.0; qc.len()];
    let mut dq = vec![0.0; qc.len()];
    let mut q = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut obj = Objective::new(&layout, dims);
    let scatter = |qc: &[f64], q: &mut [f64]| {
        for (c, &i) in red.cells.iter().enumerate() {
            q[i] = qc[c];
        }
    };

    let mut mu = 1.0;
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut gap;
    loop {
        // Centering.
        let mut steps = 0;
        while red.n_u > 0 && iterations < opts.max_iter && steps < 200 {
            let (dir, decrement) = red.newton(&qc, mu);
            if !(decrement > 0.0) {
                break;
            }
            iterations += 1;
            steps += 1;
            red.direction(&dir, &mut dq);
            let mut t_max: f64 = 1.0;
            for c in 0..qc.len() {
                if dq[c] < 0.0 {
                    t_max = t_max.min(-0.99 * qc[c] / dq[c]);
                }
            }
            // Exact line search: the barrier is convex along the segment, so any
            // point with nonpositive slope improves on the current one.
            let t = if red.slope(&qc, &dq, t_max, mu, &mut trial) <= 0.0 {
                t_max
            } else {
                let (mut lo, mut hi) = (0.0, t_max);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if red.slope(&qc, &dq, mid, mu, &mut trial) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            let mut moved = false;
            for c in 0..qc.len() {
                let next = qc[c] + t * dq[c];
                moved |= (next - qc[c]).abs() > 1e-13 * qc[c];
                qc[c] = next;
            }
            if !moved {
                break;
            }
        }
        scatter(&qc, &mut q);
        let value = cmi_yx_given_z(dims, &q);
        if opts.record_trace {
            trace.push(value);
        }
        obj.gradient(&q, &mut g);
        gap = certified_gap(p, &layout, &red, &qc, mu, &q, &mut g);
        if gap <= opts.tol || red.n_u == 0 {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter || mu < 1e-200 {
            break;
        }
        mu *= 0.1;
    }

    let value = cmi_yx_given_z(dims, &q);
    // `P` itself lies in Δ_P and is optimal e.g. for Markov chains Y - X - Z,
    // where the barrier iterates only approach it.
    let at_p = cmi_yx_given_z(dims, p.as_flat());
    let (value, witness) = if at_p < value {
        (at_p, CouplingFamily::from_joint(p, p.as_flat()))
    } else {
        (value, CouplingFamily::from_joint(p, &q))
    };
    UniqueInformation {
        value,
        witness,
        gap,
        iterations,
        converged,
        trace,
    }
}



