//! Deficiency of a decoder with respect to a channel, and input Blackwell
//! sufficiency.
//!
//! The deficiency separates over inputs: for every `x` with `π(x) > 0` the
//! best encoder row is the rI-projection of `κ_x` onto the convex hull of the
//! decoder rows, and the deficiency is the `π`-average of the attained
//! divergences.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::prob::{kl_divergence, Channel, ProbVector};
use crate::simplex::{LinearProgram, LpStatus};

const LN2: f64 = std::f64::consts::LN_2;

/// Settings for [`ri_project`] and [`deficiency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Stop once the Frank–Wolfe duality gap (an upper bound on the
    /// suboptimality of the divergence) drops below this many bits.
    pub tol: f64,
    pub max_iter: usize,
    /// Record the divergence after every EM update.
    pub record_trace: bool,
    pub exec: Exec,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            record_trace: false,
            exec: Exec::default(),
        }
    }
}

impl ProjectionOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Result of projecting a target distribution onto a mixture hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub weights: ProbVector,
    /// The projection point `Σ_z w_z atom_z`.
    pub point: Vec<f64>,
    /// Attained `KL(target ‖ point)` in bits.
    pub divergence: f64,
    /// Final duality gap in bits (0 for closed-form exits).
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// rI-projection of `target` onto `conv(atoms)`: minimizes
/// `KL(target ‖ Σ_z w_z atom_z)` over mixture weights `w`.
///
/// Solved by multiplicative EM updates `w_z ← w_z Σ_y t(y) a_z(y) / m(y)`
/// from the uniform mixture. When the target coincides with an atom the
/// one-hot weight on the lowest such index is returned.
pub fn ri_project(
    target: &ProbVector,
    atoms: &[ProbVector],
    opts: &ProjectionOptions,
) -> Result<Projection> {
    if atoms.is_empty() {
        return Err(Error::Empty("atom set"));
    }
    for a in atoms {
        check_dim("atom alphabet", target.len(), a.len())?;
    }
    opts.validate()?;
    let rows: Vec<&[f64]> = atoms.iter().map(ProbVector::as_slice).collect();
    Ok(project(target.as_slice(), &rows, opts))
}

pub(crate) fn mixture(weights: &[f64], atoms: &[&[f64]], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (&w, a) in weights.iter().zip(atoms) {
        if w == 0.0 {
            continue;
        }
        for (o, &v) in out.iter_mut().zip(a.iter()) {
            *o += w * v;
        }
    }
}

pub(crate) fn project(target: &[f64], atoms: &[&[f64]], opts: &ProjectionOptions) -> Projection {
    let n_atoms = atoms.len();
    let ny = target.len();
    let support: Vec<usize> = (0..ny).filter(|&y| target[y] > 0.0).collect();

    let uncovered = support.iter().any(|&y| atoms.iter().all(|a| a[y] <= 0.0));
    if uncovered {
        let w = vec![1.0 / n_atoms as f64; n_atoms];
        let mut point = vec![0.0; ny];
        mixture(&w, atoms, &mut point);
        return Projection {
            weights: ProbVector::from_normalized(w),
            point,
            divergence: f64::INFINITY,
            gap: f64::INFINITY,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        };
    }

    if let Some(z) = atoms
        .iter()
        .position(|a| a.iter().zip(target).all(|(p, q)| (p - q).abs() <= 1e-12))
    {
        return Projection {
            weights: ProbVector::point(n_atoms, z),
            point: atoms[z].to_vec(),
            divergence: kl_divergence(target, atoms[z]),
            gap: 0.0,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        };
    }

    let mut w = vec![1.0 / n_atoms as f64; n_atoms];
    let mut m = vec![0.0; ny];
    let mut ratio = vec![0.0; n_atoms];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut gap;
    loop {
        mixture(&w, atoms, &mut m);
        for (z, a) in atoms.iter().enumerate() {
            ratio[z] = support.iter().map(|&y| target[y] * a[y] / m[y]).sum();
        }
        if opts.record_trace {
            trace.push(kl_divergence(target, &m));
        }
        // Σ_z w_z ratio_z = 1, so the linear-minimization gap is max ratio - 1.
        gap = (ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0).max(0.0) / LN2;
        if gap <= opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let mut s = 0.0;
        for (wz, r) in w.iter_mut().zip(&ratio) {
            *wz *= r;
            s += *wz;
        }
        w.iter_mut().for_each(|v| *v /= s);
        iterations += 1;
    }
    Projection {
        divergence: kl_divergence(target, &m),
        weights: ProbVector::from_normalized(w),
        point: m,
        gap,
        iterations,
        converged,
        trace,
    }
}

/// Per-input record of a deficiency computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProjection {
    pub x: usize,
    /// `q*_x`, the projection of `κ_x` onto the decoder hull.
    pub point: Vec<f64>,
    /// `KL(κ_x ‖ q*_x)` in bits; zero by convention when `π(x) = 0`.
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyResult {
    /// `δ^π(d, κ)` in bits.
    pub value: f64,
    /// Minimizing encoder `e*` from the channel's inputs to the decoder's inputs.
    pub encoder: Channel,
    pub per_input: Vec<InputProjection>,
    pub converged: bool,
}

impl DeficiencyResult {
    /// True when absolute continuity fails for some supported input.
    pub fn is_degenerate(&self) -> bool {
        !self.value.is_finite()
    }
}

/// `δ^π(d, κ) = min_e Σ_x π(x) KL(κ_x ‖ (d∘e)_x)` in bits.
///
/// Inputs with `π(x) = 0` are skipped; their encoder rows are uniform.
pub fn deficiency(
    d: &Channel,
    kappa: &Channel,
    pi: &ProbVector,
    opts: &ProjectionOptions,
) -> Result<DeficiencyResult> {
    check_dim("decoder vs channel outputs", kappa.n_outputs(), d.n_outputs())?;
    check_dim("prior vs channel inputs", kappa.n_inputs(), pi.len())?;
    opts.validate()?;
    let atoms: Vec<&[f64]> = d.rows().collect();
    let nz = d.n_inputs();
    let uniform = vec![1.0 / nz as f64; nz];

    let solved = opts.exec.map(kappa.n_inputs(), |x| {
        if pi[x] > 0.0 {
            Some(project(kappa.row(x), &atoms, opts))
        } else {
            None
        }
    });

    let mut encoder = Vec::with_capacity(kappa.n_inputs() * nz);
    let mut per_input = Vec::with_capacity(kappa.n_inputs());
    let mut value = 0.0;
    let mut converged = true;
    for (x, proj) in solved.into_iter().enumerate() {
        match proj {
            Some(p) => {
                value += pi[x] * p.divergence;
                converged &= p.converged;
                encoder.extend_from_slice(p.weights.as_slice());
                per_input.push(InputProjection {
                    x,
                    point: p.point,
                    divergence: p.divergence,
                });
            }
            None => {
                encoder.extend_from_slice(&uniform);
                let mut point = vec![0.0; d.n_outputs()];
                mixture(&uniform, &atoms, &mut point);
                per_input.push(InputProjection {
                    x,
                    point,
                    divergence: 0.0,
                });
            }
        }
    }
    let encoder = Channel::from_rows_unchecked(kappa.n_inputs(), nz, encoder)
        .with_input_labels(kappa.input_labels().to_vec())?
        .with_output_labels(d.input_labels().to_vec())?;
    Ok(DeficiencyResult {
        value,
        encoder,
        per_input,
        converged,
    })
}

/// Outcome of the input Blackwell sufficiency test `d ⪰_Y κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlackwellDecision {
    pub sufficient: bool,
    /// An encoder with `d ∘ e = κ` (within the residual), when one exists.
    pub witness_encoder: Option<Channel>,
    /// Worst per-input residual: `‖(d∘e)_x - κ_x‖_∞` for feasible inputs,
    /// the phase-one violation for infeasible ones.
    pub max_residual: f64,
    pub per_input_residual: Vec<f64>,
}

/// Decides whether `κ = d ∘ e` for some encoder `e`, by solving one linear
/// feasibility problem per input symbol.
pub fn blackwell_sufficient(d: &Channel, kappa: &Channel, tol: f64) -> Result<BlackwellDecision> {
    check_dim("decoder vs channel outputs", kappa.n_outputs(), d.n_outputs())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tol must be > 0, got {tol}")));
    }
    let (nz, ny) = (d.n_inputs(), d.n_outputs());
    let rows = Exec::default().map(kappa.n_inputs(), |x| {
        let mut lp = LinearProgram::new(nz, vec![0.0; nz]);
        let mut coeffs = vec![0.0; nz];
        for y in 0..ny {
            for (z, c) in coeffs.iter_mut().enumerate() {
                *c = d.get(z, y);
            }
            lp.add_eq(&coeffs, kappa.get(x, y));
        }
        lp.add_eq(&vec![1.0; nz], 1.0);
        let sol = lp.solve(tol);
        if sol.status != LpStatus::Optimal {
            return (None, sol.infeasibility.max(tol * 2.0));
        }
        let mut e: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
        let s: f64 = e.iter().sum();
        e.iter_mut().for_each(|v| *v /= s);
        let mut recon = vec![0.0; ny];
        mixture(&e, &d.rows().collect::<Vec<_>>(), &mut recon);
        let residual = recon
            .iter()
            .zip(kappa.row(x))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (Some(e), residual)
    });

    let per_input_residual: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let max_residual = per_input_residual.iter().copied().fold(0.0, f64::max);
    let sufficient = rows.iter().all(|r| r.0.is_some()) && max_residual <= tol;
    let witness_encoder = if sufficient {
        let flat = rows.into_iter().flat_map(|r| r.0.unwrap()).collect();
        Some(
            Channel::from_rows_unchecked(kappa.n_inputs(), nz, flat)
                .with_input_labels(kappa.input_labels().to_vec())?
                .with_output_labels(d.input_labels().to_vec())?,
        )
    } else {
        None
    };
    Ok(BlackwellDecision {
        sufficient,
        witness_encoder,
        max_residual,
        per_input_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{compose, conditional_kl};
    use crate::testutil::{random_channel, rng};

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn opts() -> ProjectionOptions {
        ProjectionOptions::default()
    }

    #[test]
    fn target_equal_to_atom() {
        let atoms = [pv(&[0.5, 0.5]), pv(&[0.9, 0.1]), pv(&[0.9, 0.1])];
        let p = ri_project(&pv(&[0.9, 0.1]), &atoms, &opts()).unwrap();
        assert_eq!(p.divergence, 0.0);
        assert_eq!(p.weights.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn full_simplex_hull() {
        let atoms = [pv(&[1.0, 0.0, 0.0]), pv(&[0.0, 1.0, 0.0]), pv(&[0.0, 0.0, 1.0])];
        for t in [[0.2, 0.3, 0.5], [0.7, 0.0, 0.3], [1.0 / 3.0; 3]] {
            let p = ri_project(&pv(&t), &atoms, &opts()).unwrap();
            assert!(p.divergence < 1e-10, "{t:?}: {}", p.divergence);
        }
    }

    #[test]
    fn two_atom_grid_oracle() {
        let target = pv(&[0.9, 0.1]);
        let atoms = [pv(&[0.6, 0.4]), pv(&[0.5, 0.5])];
        // brute-force over the mixing weight in steps of 1e-4
        let (mut best_w, mut best) = (0.0, f64::INFINITY);
        for k in 0..=10_000 {
            let w = k as f64 * 1e-4;
            let q = [w * 0.6 + (1.0 - w) * 0.5, w * 0.4 + (1.0 - w) * 0.5];
            let v = kl_divergence(target.as_slice(), &q);
            if v < best {
                best = v;
                best_w = w;
            }
        }
        assert_eq!(best_w, 1.0);
        let p = ri_project(&target, &atoms, &opts()).unwrap();
        assert!((p.divergence - best).abs() < 1e-9);
        assert!((p.weights[0] - 1.0).abs() < 1e-6);
        assert!((best - kl_divergence(&[0.9, 0.1], &[0.6, 0.4])).abs() < 1e-15);
    }

    #[test]
    fn uncovered_support_is_infinite() {
        let atoms = [pv(&[1.0, 0.0]), pv(&[1.0, 0.0])];
        let p = ri_project(&pv(&[0.5, 0.5]), &atoms, &opts()).unwrap();
        assert_eq!(p.divergence, f64::INFINITY);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(ri_project(&pv(&[1.0]), &[], &opts()), Err(Error::Empty(_))));
        assert!(ri_project(&pv(&[0.5, 0.5]), &[pv(&[1.0])], &opts()).is_err());
        assert!(ri_project(&pv(&[1.0]), &[pv(&[1.0])], &opts().with_tol(0.0)).is_err());
    }

    #[test]
    fn em_trace_non_increasing() {
        let mut r = rng(7);
        for _ in 0..20 {
            let d = random_channel(&mut r, 3, 4);
            let k = random_channel(&mut r, 1, 4);
            let o = ProjectionOptions {
                record_trace: true,
                ..opts()
            };
            let atoms: Vec<&[f64]> = d.rows().collect();
            let p = project(k.row(0), &atoms, &o);
            for w in p.trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn redundant_atom_never_hurts() {
        let mut r = rng(11);
        for _ in 0..20 {
            let d = random_channel(&mut r, 3, 3);
            let t = random_channel(&mut r, 1, 3);
            let base: Vec<&[f64]> = d.rows().collect();
            let extra: Vec<f64> = (0..3).map(|y| 0.3 * d.get(0, y) + 0.7 * d.get(2, y)).collect();
            let mut more = base.clone();
            more.push(&extra);
            let a = project(t.row(0), &base, &opts()).divergence;
            let b = project(t.row(0), &more, &opts()).divergence;
            assert!(b <= a + 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn identical_channels_have_zero_deficiency() {
        let mut r = rng(3);
        let k = random_channel(&mut r, 3, 3);
        let res = deficiency(&k, &k, &ProbVector::uniform(3), &opts()).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(res.encoder.as_flat(), Channel::identity(3).as_flat());
    }

    #[test]
    fn deficiency_random_grid_oracle() {
        let mut r = rng(2024);
        let k = random_channel(&mut r, 3, 3);
        let d = random_channel(&mut r, 2, 3);
        let pi = ProbVector::uniform(3);
        // per-x brute force over the 2-atom mixing weight
        let mut oracle = 0.0;
        for x in 0..3 {
            let mut best = f64::INFINITY;
            for i in 0..=100_000 {
                let w = i as f64 / 100_000.0;
                let q: Vec<f64> = (0..3).map(|y| w * d.get(0, y) + (1.0 - w) * d.get(1, y)).collect();
                best = best.min(kl_divergence(k.row(x), &q));
            }
            oracle += best / 3.0;
        }
        let res = deficiency(&d, &k, &pi, &opts()).unwrap();
        assert!((res.value - oracle).abs() < 1e-5, "{} vs {oracle}", res.value);
        // upper-bound sanity against arbitrary encoders
        for _ in 0..50 {
            let e = random_channel(&mut r, 3, 2);
            let v = conditional_kl(&k, &compose(&d, &e).unwrap(), &pi).unwrap();
            assert!(res.value <= v + 1e-12);
        }
        let sum: f64 = res.per_input.iter().map(|p| pi[p.x] * p.divergence).sum();
        assert!((sum - res.value).abs() < 1e-12);
    }

    #[test]
    fn zero_prior_rows_are_uniform() {
        let k = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = Channel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        // input 1 is unreachable by d but carries no prior mass
        let res = deficiency(&d, &k, &ProbVector::point(2, 0), &opts()).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(res.encoder.row(1), &[0.5, 0.5]);
        let res = deficiency(&d, &k, &ProbVector::uniform(2), &opts()).unwrap();
        assert!(res.value > 0.0 && res.value.is_finite());
    }

    #[test]
    fn deficiency_propagates_infinity() {
        let k = Channel::identity(2);
        let d = Channel::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let res = deficiency(&d, &k, &ProbVector::uniform(2), &opts()).unwrap();
        assert!(res.is_degenerate());
    }

    #[test]
    fn blackwell_constructed_degradation() {
        let mut r = rng(5);
        for _ in 0..20 {
            let d = random_channel(&mut r, 3, 4);
            let e = random_channel(&mut r, 4, 3);
            let k = compose(&d, &e).unwrap();
            let dec = blackwell_sufficient(&d, &k, 1e-8).unwrap();
            assert!(dec.sufficient, "residual {}", dec.max_residual);
            let w = dec.witness_encoder.unwrap();
            assert!(compose(&d, &w).unwrap().max_abs_diff(&k) <= 1e-8);
        }
    }

    #[test]
    fn blackwell_identical_channels() {
        let k = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let dec = blackwell_sufficient(&k, &k, 1e-8).unwrap();
        assert!(dec.sufficient);
        assert!(compose(&k, dec.witness_encoder.as_ref().unwrap()).unwrap().max_abs_diff(&k) < 1e-12);
    }

    #[test]
    fn blackwell_constant_decoder() {
        let q0 = pv(&[0.3, 0.7]);
        let d = Channel::constant(3, &q0);
        let k = Channel::binary_symmetric(0.1).unwrap();
        let dec = blackwell_sufficient(&d, &k, 1e-8).unwrap();
        assert!(!dec.sufficient);
        assert!(dec.max_residual > 1e-8);
        assert!(dec.witness_encoder.is_none());
    }
}
