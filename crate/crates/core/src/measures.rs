//! Tsallis entropy, normalized q-expectations and the generalized
//! Kullback-Leibler entropy
//! `K_{q'}[ρ, ρ'] = Tr[ρ^{q'}(ρ^{1−q'} − ρ'^{1−q'})] / (1 − q')`.

use serde::Serialize;

use crate::inference::{is_shannon_limit, InferredState, SHANNON_TOL};
use crate::smallmat::{
    kron, partial_trace, psd_power_of, ComplexMatrix, DensityMatrix, Spectrum, Subsystem,
    STATE_TOL,
};
use crate::error::{Error, Result};

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 {
        Ok(())
    } else {
        Err(Error::QOutOfDomain { q })
    }
}

/// `S_q` of a probability vector; `0^q = 0`, `0 ln 0 = 0`.
///
/// Uses `Σp^q − 1 = Σ p (p^(q−1) − 1)` for `Σp = 1`, so the result keeps its
/// digits as `q → 1` instead of losing them to the subtraction.
pub fn tsallis_of_probabilities(p: &[f64], q: f64) -> f64 {
    let pos = p.iter().filter(|&&x| x > 0.0);
    if is_shannon_limit(q) {
        -pos.map(|x| x * x.ln()).sum::<f64>()
    } else {
        pos.map(|x| x * ((q - 1.0) * x.ln()).exp_m1()).sum::<f64>() / (1.0 - q)
    }
}

/// `S_q[ρ] = (Tr ρ^q − 1)/(1 − q)`, von Neumann entropy within
/// [`SHANNON_TOL`] of `q = 1`.
pub fn tsallis_entropy(rho: &DensityMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(tsallis_of_probabilities(&rho.spectrum().eigenvalues, q))
}

/// `Tr(ρ^q O) / Tr(ρ^q)`.
pub fn q_expectation(rho: &DensityMatrix, obs: &ComplexMatrix, q: f64) -> Result<f64> {
    check_q(q)?;
    let deviation = obs.hermitian_deviation();
    if deviation > STATE_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    if obs.dim() != rho.dim() {
        return Err(Error::Dimension {
            expected: "observable matching the state dimension",
            got: obs.dim(),
        });
    }
    let rho_q = psd_power_of(&rho.spectrum(), q)?;
    Ok((rho_q * *obs).trace().re / rho_q.trace().re)
}

/// Order `q' > 0` of the generalized KL entropy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceOrder(f64);

impl DivergenceOrder {
    pub fn new(q_prime: f64) -> Result<Self> {
        check_q(q_prime)?;
        Ok(Self(q_prime))
    }

    /// `q'` if given, otherwise the entropy index `q`.
    pub fn or_q(q_prime: Option<f64>, q: f64) -> Result<Self> {
        Self::new(q_prime.unwrap_or(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn overlap(a: &Spectrum, i: usize, b: &Spectrum, j: usize) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|k| a.eigenvectors.get(k, i).conj() * b.eigenvectors.get(k, j))
        .sum::<num_complex::Complex64>()
        .norm_sqr()
}

/// Generalized KL entropy of `rho` relative to `reference`.
///
/// Both states are diagonalized separately and the traces are assembled
/// from eigenvalue powers and eigenvector overlaps. On the support of `rho`,
/// `ρ^{q'} ρ^{1−q'} = ρ`. Within [`SHANNON_TOL`] of `q' = 1` this returns
/// `Tr ρ(ln ρ − ln ρ')`.
///
/// For `q' < 1` the term `λ^{q'}` is steep at zero, so eigenvalues near the
/// rounding floor of the eigensolver (about `1e-16`) contribute an error of
/// order `(1e-16)^{q'}`. Use [`mutual_entropy_closed_form`] for inferred
/// states with such eigenvalues.
pub fn generalized_kl(
    rho: &DensityMatrix,
    reference: &DensityMatrix,
    order: DivergenceOrder,
) -> Result<f64> {
    if rho.dim() != reference.dim() {
        return Err(Error::Dimension {
            expected: "states of equal dimension",
            got: reference.dim(),
        });
    }
    let qp = order.value();
    let shannon = (qp - 1.0).abs() < SHANNON_TOL;
    let sr = rho.spectrum();
    let sf = reference.spectrum();
    let n = sr.dim();

    let kernel: Vec<usize> = (0..n).filter(|&j| sf.eigenvalues[j] <= STATE_TOL).collect();
    if !shannon && qp > 1.0 && !kernel.is_empty() {
        return Err(Error::SingularReference {
            eigenvalue: sf.min_eigenvalue(),
        });
    }
    let leak: f64 = kernel
        .iter()
        .map(|&j| rho.matrix().expectation(&sf.eigenvector(j)).re)
        .sum();
    if leak > STATE_TOL {
        return Err(Error::SupportMismatch { leak });
    }

    let lam: Vec<f64> = sr.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let mut cross = 0.0;
    for (i, &li) in lam.iter().enumerate() {
        if li == 0.0 {
            continue;
        }
        for j in 0..n {
            let mu = sf.eigenvalues[j];
            if mu <= STATE_TOL {
                continue;
            }
            let w = overlap(&sr, i, &sf, j);
            cross += if shannon {
                li * mu.ln() * w
            } else {
                li.powf(qp) * mu.powf(1.0 - qp) * w
            };
        }
    }
    if shannon {
        let self_term: f64 = lam.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum();
        Ok(self_term - cross)
    } else {
        let support: f64 = lam.iter().sum();
        Ok((support - cross) / (1.0 - qp))
    }
}

/// `(Tr_B ρ, Tr_A ρ)`.
pub fn marginals(rho_ab: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    let a = partial_trace(rho_ab.matrix(), Subsystem::B)?;
    let b = partial_trace(rho_ab.matrix(), Subsystem::A)?;
    Ok((
        DensityMatrix::from_trusted(a.hermitian_part()),
        DensityMatrix::from_trusted(b.hermitian_part()),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MutualEntropyResult {
    pub value: f64,
    pub order: DivergenceOrder,
}

/// `K_{q'}[ρ_AB, ρ_A ⊗ ρ_B]`.
pub fn mutual_entropy(rho_ab: &DensityMatrix, order: DivergenceOrder) -> Result<MutualEntropyResult> {
    let (a, b) = marginals(rho_ab)?;
    let product = DensityMatrix::from_trusted(kron(a.matrix(), b.matrix())?);
    Ok(MutualEntropyResult {
        value: generalized_kl(rho_ab, &product, order)?,
        order,
    })
}

/// Closed form of the mutual entropy of an inferred state, whose marginal
/// product is `I/4`:
/// `(1 − 4^{q'−1} Z^{q'(1−q)/q} Σ_i w_i^{q'/q}) / (1 − q')`.
pub fn mutual_entropy_closed_form(s: &InferredState, order: DivergenceOrder) -> f64 {
    let qp = order.value();
    if (qp - 1.0).abs() < SHANNON_TOL {
        return 4f64.ln() - tsallis_of_probabilities(&s.eigenvalues(), 1.0);
    }
    let q = s.q();
    let ratio = if is_shannon_limit(q) { qp } else { qp / q };
    let sum: f64 = s
        .weights
        .by_label()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| w.powf(ratio))
        .sum();
    let tr = (-qp * s.log_y).exp() * sum;
    (1.0 - 4f64.powf(qp - 1.0) * tr) / (1.0 - qp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bell_state, chsh_operator, BellLabel, TWO_SQRT_2};
    use crate::inference::{infer_state, to_density_matrix, validate_constraints};
    use crate::sampling::{conjugate, random_density_matrix, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{LN_2, SQRT_2};

    fn phi_plus() -> DensityMatrix {
        DensityMatrix::pure(&bell_state(BellLabel::PhiPlus)).unwrap()
    }

    fn mixed4() -> DensityMatrix {
        DensityMatrix::maximally_mixed(4).unwrap()
    }

    fn inferred(q: f64, b: f64, s2: f64) -> InferredState {
        infer_state(&validate_constraints(q, b, s2).unwrap())
    }

    fn ord(x: f64) -> DivergenceOrder {
        DivergenceOrder::new(x).unwrap()
    }

    #[test]
    fn entropy_keeps_digits_next_to_shannon() {
        // S_q = -Σ_n h^(n-1) M_n / n! with h = q - 1 and M_n = Σ p ln^n p.
        let p: [f64; 4] = [0.45, 0.45, 0.07, 0.03];
        let m = |n: i32| p.iter().map(|x| x * x.ln().powi(n)).sum::<f64>();
        for h in [2e-6, -2e-6, 5e-6, 1e-4] {
            let series = -(m(1) + h * m(2) / 2.0 + h * h * m(3) / 6.0 + h.powi(3) * m(4) / 24.0);
            let got = tsallis_of_probabilities(&p, 1.0 + h);
            assert!((got - series).abs() < 1e-13, "h = {h}: {got} vs {series}");
        }
    }

    #[test]
    fn entropy_examples() {
        for q in [0.3, 1.0, 2.0] {
            assert!(tsallis_entropy(&phi_plus(), q).unwrap().abs() < 1e-14);
        }
        assert!((tsallis_entropy(&mixed4(), 2.0).unwrap() - 0.75).abs() < 1e-14);
        assert!((tsallis_entropy(&mixed4(), 1.0).unwrap() - 4f64.ln()).abs() < 1e-14);
        assert!((tsallis_entropy(&mixed4(), 1.0 + 1e-7).unwrap() - 1.386_294_4).abs() < 1e-7);
        assert!(matches!(
            tsallis_entropy(&mixed4(), 0.0),
            Err(Error::QOutOfDomain { .. })
        ));
    }

    #[test]
    fn q_expectation_examples() {
        let b = chsh_operator().b_op;
        let rho = to_density_matrix(&inferred(2.0, SQRT_2, 6.0));
        assert!((q_expectation(&rho, &b, 2.0).unwrap() - SQRT_2).abs() < 1e-12);
        assert!(q_expectation(&mixed4(), &b, 0.7).unwrap().abs() < 1e-15);
        let id = ComplexMatrix::identity(4).unwrap();
        assert!((q_expectation(&rho, &id, 3.0).unwrap() - 1.0).abs() < 1e-14);
        let skew = ComplexMatrix::from_real(4, &[0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.])
            .unwrap();
        assert!(matches!(
            q_expectation(&rho, &skew, 2.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn kl_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density_matrix(&mut rng, 4);
        for qp in [0.3, 1.0, 2.0, 4.0] {
            assert!(generalized_kl(&rho, &rho, ord(qp)).unwrap().abs() < 1e-12);
        }
        assert!((generalized_kl(&phi_plus(), &mixed4(), ord(2.0)).unwrap() - 3.0).abs() < 1e-12);
        for qp in [1.0 - 1e-7, 1.0, 1.0 + 1e-7] {
            let k = generalized_kl(&phi_plus(), &mixed4(), ord(qp)).unwrap();
            assert!((k - 2.0 * LN_2).abs() < 1e-12);
        }
        // Pure state against the maximally mixed reference.
        for qp in [0.2, 0.5, 1.5, 3.0] {
            let k = generalized_kl(&phi_plus(), &mixed4(), ord(qp)).unwrap();
            let expect = (1.0 - 4f64.powf(qp - 1.0)) / (1.0 - qp);
            assert!((k - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_domain_errors() {
        assert!(matches!(
            generalized_kl(&mixed4(), &phi_plus(), ord(2.0)),
            Err(Error::SingularReference { .. })
        ));
        assert!(matches!(
            generalized_kl(&mixed4(), &phi_plus(), ord(0.5)),
            Err(Error::SupportMismatch { .. })
        ));
        assert!(matches!(
            generalized_kl(&mixed4(), &phi_plus(), ord(1.0)),
            Err(Error::SupportMismatch { .. })
        ));
        // Support inside a singular reference is fine for q' <= 1.
        assert!(generalized_kl(&phi_plus(), &phi_plus(), ord(0.5)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn marginal_examples() {
        let half = ComplexMatrix::identity(2).unwrap().scale_real(0.5);
        for q in [0.2, 1.0, 3.0] {
            let (a, b) = marginals(&to_density_matrix(&inferred(q, 1.1, 5.0))).unwrap();
            assert!(a.matrix().max_abs_diff(&half) < 1e-12);
            assert!(b.matrix().max_abs_diff(&half) < 1e-12);
        }
        let psi = DensityMatrix::pure(&bell_state(BellLabel::PsiPlus)).unwrap();
        let (a, b) = marginals(&psi).unwrap();
        assert!(a.matrix().max_abs_diff(&half) < 1e-15 && b.matrix().max_abs_diff(&half) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ra = random_density_matrix(&mut rng, 2);
        let rb = random_density_matrix(&mut rng, 2);
        let (a, b) = marginals(&ra.tensor(&rb).unwrap()).unwrap();
        assert!(a.matrix().max_abs_diff(ra.matrix()) < 1e-14);
        assert!(b.matrix().max_abs_diff(rb.matrix()) < 1e-14);

        assert!(matches!(marginals(&ra), Err(Error::Dimension { .. })));
    }

    #[test]
    fn mutual_entropy_examples() {
        for qp in [0.5, 1.0, 2.0] {
            assert!(mutual_entropy(&mixed4(), ord(qp)).unwrap().value.abs() < 1e-14);
        }
        assert!((mutual_entropy(&phi_plus(), ord(2.0)).unwrap().value - 3.0).abs() < 1e-12);

        // Commuting case: (1 − 4^{q'−1} Tr ρ^{q'})/(1 − q') with Tr ρ² = 1/(√0.625 + 3√0.125)².
        let s = inferred(2.0, SQRT_2, 6.0);
        let y = 0.625f64.sqrt() + 3.0 * 0.125f64.sqrt();
        let expect = 4.0 / (y * y) - 1.0;
        let k = mutual_entropy(&to_density_matrix(&s), ord(2.0)).unwrap().value;
        assert!((k - expect).abs() < 1e-12);
        assert!((k - 0.167_184_3).abs() < 1e-7);
        assert!((mutual_entropy_closed_form(&s, ord(2.0)) - expect).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_generic_divergence() {
        for q in [0.5, 0.9, 1.0, 2.0, 5.0] {
            for qp in [0.5, 1.0, 1.5, 2.0, 3.0] {
                for (b, s2) in [(0.4, 3.0), (1.2, 5.5), (2.2, 7.2)] {
                    let s = inferred(q, b, s2);
                    let generic = mutual_entropy(&to_density_matrix(&s), ord(qp)).unwrap().value;
                    let closed = mutual_entropy_closed_form(&s, ord(qp));
                    assert!((generic - closed).abs() < 1e-10, "q={q} q'={qp} {generic} {closed}");
                }
            }
        }
        // Pure boundary state reproduces the q-independent value.
        for q in [0.3, 4.0] {
            let s = inferred(q, TWO_SQRT_2, 8.0);
            let k = mutual_entropy_closed_form(&s, ord(2.0));
            assert!((k - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let r1 = random_density_matrix(&mut rng, 2);
            let r2 = random_density_matrix(&mut rng, 2);
            let joint = r1.tensor(&r2).unwrap();
            for q in [0.5, 2.0] {
                let s1 = tsallis_entropy(&r1, q).unwrap();
                let s2 = tsallis_entropy(&r2, q).unwrap();
                let s12 = tsallis_entropy(&joint, q).unwrap();
                assert!((s12 - (s1 + s2 + (1.0 - q) * s1 * s2)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn concavity_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..1000 {
            let dim = if rng.random_bool(0.5) { 2 } else { 4 };
            let r1 = random_density_matrix(&mut rng, dim);
            let r2 = random_density_matrix(&mut rng, dim);
            for t in [0.25, 0.5, 0.75] {
                let mix = DensityMatrix::from_trusted(
                    r1.matrix().scale_real(t) + r2.matrix().scale_real(1.0 - t),
                );
                for q in [0.1, 0.5, 2.0, 5.0] {
                    let lhs = tsallis_entropy(&mix, q).unwrap();
                    let rhs = t * tsallis_entropy(&r1, q).unwrap()
                        + (1.0 - t) * tsallis_entropy(&r2, q).unwrap();
                    assert!(lhs >= rhs - 1e-12);
                }
            }
        }
    }

    #[test]
    fn divergence_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..300 {
            let a = random_density_matrix(&mut rng, 4);
            let b = random_density_matrix(&mut rng, 4);
            for qp in [0.2, 0.5, 1.0, 2.0, 3.0] {
                assert!(generalized_kl(&a, &b, ord(qp)).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn mutual_entropy_is_local_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let states = [
            to_density_matrix(&inferred(0.5, 1.4, 6.0)),
            random_density_matrix(&mut rng, 4),
        ];
        for rho in states {
            for qp in [0.5, 1.0, 2.0] {
                let base = mutual_entropy(&rho, ord(qp)).unwrap().value;
                for _ in 0..100 {
                    let ua = random_unitary(&mut rng, 2);
                    let ub = random_unitary(&mut rng, 2);
                    let u = kron(&ua, &ub).unwrap();
                    let moved = mutual_entropy(&conjugate(&rho, &u), ord(qp)).unwrap().value;
                    assert!((moved - base).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn order_defaults_to_q() {
        assert_eq!(DivergenceOrder::or_q(None, 1.7).unwrap().value(), 1.7);
        assert_eq!(DivergenceOrder::or_q(Some(0.4), 1.7).unwrap().value(), 0.4);
        assert!(DivergenceOrder::new(-1.0).is_err());
    }
}
