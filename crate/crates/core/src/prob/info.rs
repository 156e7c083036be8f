//! Information measures in bits. `0 log 0 = 0` throughout; there is no
//! epsilon smoothing anywhere.

use super::{Channel, Joint2, ProbVector};
use crate::error::{check_dim, Result};

/// Shannon entropy of a nonnegative vector summing to one, in bits.
pub fn entropy(p: &[f64]) -> f64 {
    (-p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()).max(0.0)
}

/// `KL(p ‖ q)` in bits; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).log2();
        }
    }
    acc.max(0.0)
}

/// Mutual information between the row and column variables of a pair joint.
pub fn mutual_information(j: &Joint2) -> f64 {
    let r = j.row_marginal();
    let c = j.col_marginal();
    let mut acc = 0.0;
    for a in 0..j.n_rows() {
        for b in 0..j.n_cols() {
            let v = j.get(a, b);
            if v > 0.0 {
                acc += v * (v / (r[a] * c[b])).log2();
            }
        }
    }
    acc.max(0.0)
}

/// Conditional divergence `Σ_x π(x) KL(κ_x ‖ λ_x)` in bits.
pub fn conditional_kl(kappa: &Channel, lambda: &Channel, pi: &ProbVector) -> Result<f64> {
    check_dim("conditional_kl inputs", kappa.n_inputs(), lambda.n_inputs())?;
    check_dim("conditional_kl outputs", kappa.n_outputs(), lambda.n_outputs())?;
    check_dim("conditional_kl prior", kappa.n_inputs(), pi.len())?;
    let mut acc = 0.0;
    for x in 0..kappa.n_inputs() {
        if pi[x] > 0.0 {
            acc += pi[x] * kl_divergence(kappa.row(x), lambda.row(x));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Axis, Joint3};
    use proptest::prelude::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_kl_identical_is_zero() {
        let k = Channel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert_eq!(conditional_kl(&k, &k, &ProbVector::uniform(2)).unwrap(), 0.0);
    }

    #[test]
    fn conditional_kl_absolute_continuity() {
        let k = Channel::identity(2);
        let l = Channel::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let v = conditional_kl(&k, &l, &ProbVector::new(vec![0.3, 0.7]).unwrap()).unwrap();
        assert_eq!(v, f64::INFINITY);
        // π(0) = 0 masks the offending row.
        let v = conditional_kl(&k, &l, &ProbVector::point(2, 1)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_kl_term_by_term() {
        let k = Channel::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let l = Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        // hand summation of the four scalar terms
        let row0 = 0.9 * (0.9f64 / 0.5).log2() + 0.1 * (0.1f64 / 0.5).log2();
        let row1 = 0.2 * (0.2f64 / 0.5).log2() + 0.8 * (0.8f64 / 0.5).log2();
        let expect = 0.5 * row0 + 0.5 * row1;
        let got = conditional_kl(&k, &l, &ProbVector::uniform(2)).unwrap();
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.4045381557616783).abs() < 1e-12);
    }

    fn joint3_strategy() -> impl Strategy<Value = Joint3> {
        (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(a, b, c)| {
            prop::collection::vec(0.0f64..1.0, a * b * c).prop_filter_map(
                "all-zero weights",
                move |w| {
                    let s: f64 = w.iter().sum();
                    (s > 1e-6).then(|| {
                        Joint3::new([a, b, c], w.iter().map(|v| v / s).collect()).unwrap()
                    })
                },
            )
        })
    }

    proptest! {
        #[test]
        fn chain_rule(j in joint3_strategy()) {
            let lhs = j.mi(&[Axis::Y], &[Axis::X, Axis::Z]);
            let rhs = j.mi(&[Axis::Y], &[Axis::X]) + j.cmi(Axis::Y, Axis::Z, Axis::X);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn measures_nonnegative(j in joint3_strategy()) {
            for a in [Axis::Y, Axis::X, Axis::Z] {
                prop_assert!(j.entropy_of(&[a]) >= 0.0);
            }
            prop_assert!(j.mi(&[Axis::Y], &[Axis::X]) >= 0.0);
            prop_assert!(j.cmi(Axis::Y, Axis::X, Axis::Z) >= 0.0);
            prop_assert!(j.conditional_entropy(Axis::Y, Axis::X) >= 0.0);
            let pi = j.marginal(Axis::X);
            let k = j.y_given(Axis::X);
            let d = j.y_given(Axis::Z);
            let z = Channel::constant(k.n_inputs(), &d.row_vector(0));
            prop_assert!(conditional_kl(&k, &z, &pi).unwrap() >= 0.0);
            prop_assert_eq!(conditional_kl(&k, &k, &pi).unwrap(), 0.0);
        }

        #[test]
        fn mi_symmetric(j in joint3_strategy()) {
            let xy = j.pair(Axis::X, Axis::Y);
            let a = mutual_information(&xy);
            let b = mutual_information(&xy.transpose());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((a - j.mi(&[Axis::Y], &[Axis::X])).abs() < 1e-9);
        }
    }
}
