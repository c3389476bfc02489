//! Closed-form maximum-Tsallis-entropy state under CHSH data.
//!
//! Given the normalized q-expectations `b_q = ⟨B⟩_q` and `σ_q² = ⟨B²⟩_q`,
//! the maximizer is diagonal in the Bell basis. Its escort weights
//! `λ_i^q / Σ_j λ_j^q` are pinned by the data,
//!
//! ```text
//! w₊ = (σ² + 2√2 b)/16   on |Φ+⟩
//! w₋ = (σ² − 2√2 b)/16   on |Ψ−⟩
//! w₀ = (8 − σ²)/16       on |Φ−⟩ and |Ψ+⟩
//! ```
//!
//! and the eigenvalues are `λ_i = w_i^{1/q} / Y` with `Y = Σ_i w_i^{1/q}`
//! (degenerate pair counted twice). The partition function is
//! `Z_q = Y^{q/(q−1)}` and `c_q = Tr ρ^q = Y^{−q} = Z_q^{1−q}`.
//!
//! All of this is evaluated through `ln Y`, computed as
//! `ln(1 + Σ w_i (w_i^{(1−q)/q} − 1))` with `expm1`, which stays accurate as
//! `q → 1`. Within [`SHANNON_TOL`] of `q = 1` the Gibbs limit is used
//! directly: `λ_i = w_i` and `Z = exp(S_vN)`.

use serde::Serialize;

use crate::bell::{bell_projector, BellLabel, TWO_SQRT_2};
use crate::error::{Error, Result};
use crate::smallmat::{ComplexMatrix, DensityMatrix};

/// Slack on the closed inequalities that define the data domain.
pub const DOMAIN_TOL: f64 = 1e-12;
/// Width of the band around `q = 1` handled by the Shannon-limit branch.
pub const SHANNON_TOL: f64 = 1e-6;
/// Weights at or below this are treated as boundary (multipliers diverge).
pub const INTERIOR_TOL: f64 = 1e-12;

pub fn is_shannon_limit(q: f64) -> bool {
    (q - 1.0).abs() < SHANNON_TOL
}

/// Validated data `(q, b_q, σ_q²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstraintSet {
    q: f64,
    b_q: f64,
    sigma2_q: f64,
}

impl ConstraintSet {
    pub fn new(q: f64, b_q: f64, sigma2_q: f64) -> Result<Self> {
        validate_constraints(q, b_q, sigma2_q)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn b_q(&self) -> f64 {
        self.b_q
    }

    pub fn sigma2_q(&self) -> f64 {
        self.sigma2_q
    }

    /// Same data with a different nonextensivity index.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        validate_constraints(q, self.b_q, self.sigma2_q)
    }
}

/// Checks `q > 0`, `0 ≤ b ≤ 2√2`, `σ² ≤ 8` and the uncertainty relation
/// `σ² ≥ 2√2 b`, each with slack [`DOMAIN_TOL`]. Values inside the slack are
/// clamped onto the domain.
pub fn validate_constraints(q: f64, b: f64, s2: f64) -> Result<ConstraintSet> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::QOutOfDomain { q });
    }
    if !(b.is_finite() && b >= -DOMAIN_TOL && b <= TWO_SQRT_2 + DOMAIN_TOL) {
        return Err(Error::BOutOfRange { b });
    }
    if !(s2.is_finite() && s2 <= 8.0 + DOMAIN_TOL) {
        return Err(Error::SigmaOutOfRange { sigma2: s2 });
    }
    let bound = TWO_SQRT_2 * b;
    if s2 < bound - DOMAIN_TOL {
        return Err(Error::UncertaintyViolated { sigma2: s2, bound });
    }
    Ok(ConstraintSet {
        q,
        b_q: b.clamp(0.0, TWO_SQRT_2),
        sigma2_q: s2.min(8.0),
    })
}

/// Escort weights fixed by the data. `w_zero` applies to both `|Φ−⟩` and `|Ψ+⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EscortWeights {
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_zero: f64,
}

impl EscortWeights {
    /// Weights in [`BellLabel::ALL`] order.
    pub fn by_label(&self) -> [f64; 4] {
        [self.w_plus, self.w_zero, self.w_zero, self.w_minus]
    }

    pub fn total(&self) -> f64 {
        self.w_plus + self.w_minus + 2.0 * self.w_zero
    }

    pub fn is_interior(&self) -> bool {
        self.w_plus > INTERIOR_TOL && self.w_minus > INTERIOR_TOL && self.w_zero > INTERIOR_TOL
    }
}

pub fn escort_weights(c: &ConstraintSet) -> EscortWeights {
    let b = c.b_q;
    let s2 = c.sigma2_q;
    // Gaps within the domain slack sit exactly on the boundary.
    let snap = |gap: f64| if gap < DOMAIN_TOL { 0.0 } else { gap };
    let w_plus = (s2 + TWO_SQRT_2 * b).max(0.0) / 16.0;
    let w_minus = snap(s2 - TWO_SQRT_2 * b) / 16.0;
    let w_zero = snap(8.0 - s2) / 16.0;
    let total = w_plus + w_minus + 2.0 * w_zero;
    EscortWeights {
        w_plus: w_plus / total,
        w_minus: w_minus / total,
        w_zero: w_zero / total,
    }
}

/// The inferred Bell-diagonal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InferredState {
    pub constraints: ConstraintSet,
    pub weights: EscortWeights,
    pub eig_phi_plus: f64,
    pub eig_psi_minus: f64,
    /// Shared eigenvalue of `|Φ−⟩` and `|Ψ+⟩`.
    pub eig_deg: f64,
    /// `ln Σ_i w_i^{1/q}`.
    pub log_y: f64,
    pub log_z: f64,
    pub z_q: f64,
    pub c_q: f64,
}

impl InferredState {
    pub fn q(&self) -> f64 {
        self.constraints.q
    }

    /// Eigenvalues in [`BellLabel::ALL`] order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        [self.eig_phi_plus, self.eig_deg, self.eig_deg, self.eig_psi_minus]
    }

    pub fn eigenvalue(&self, label: BellLabel) -> f64 {
        match label {
            BellLabel::PhiPlus => self.eig_phi_plus,
            BellLabel::PsiMinus => self.eig_psi_minus,
            BellLabel::PhiMinus | BellLabel::PsiPlus => self.eig_deg,
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig_phi_plus.max(self.eig_psi_minus).max(self.eig_deg)
    }

    pub fn is_interior(&self) -> bool {
        self.weights.is_interior()
    }

    /// `(⟨B⟩_q, ⟨B²⟩_q)` evaluated on the spectrum.
    pub fn spectral_q_expectations(&self) -> (f64, f64) {
        let q = self.q();
        let mut norm = 0.0;
        let mut b = 0.0;
        let mut s2 = 0.0;
        for label in BellLabel::ALL {
            let lam = self.eigenvalue(label);
            let p = if lam > 0.0 { lam.powf(q) } else { 0.0 };
            let beta = label.chsh_eigenvalue();
            norm += p;
            b += p * beta;
            s2 += p * beta * beta;
        }
        (b / norm, s2 / norm)
    }
}

/// Closed-form maximum-entropy state for the given data.
pub fn infer_state(c: &ConstraintSet) -> InferredState {
    let q = c.q;
    let weights = escort_weights(c);
    let w = [weights.w_plus, weights.w_minus, weights.w_zero];
    let mult = [1.0, 1.0, 2.0];

    let (eig, log_y, log_z) = if is_shannon_limit(q) {
        let s: f64 = w
            .iter()
            .zip(mult)
            .filter(|(&x, _)| x > 0.0)
            .map(|(&x, g)| -g * x * x.ln())
            .sum();
        (w, 0.0, s)
    } else {
        let a = (1.0 - q) / q;
        // Y - 1 = Σ g w (w^a - 1), using Σ g w = 1
        let mut y_minus_1 = 0.0;
        for (&x, g) in w.iter().zip(mult) {
            if x > 0.0 {
                y_minus_1 += g * x * (a * x.ln()).exp_m1();
            }
        }
        let log_y = if y_minus_1 > -0.5 {
            y_minus_1.ln_1p()
        } else {
            // Y is small and 1 + (Y - 1) would lose its leading digits.
            let terms: Vec<f64> = w
                .iter()
                .zip(mult)
                .filter(|(&x, _)| x > 0.0)
                .map(|(&x, g)| g.ln() + x.ln() / q)
                .collect();
            let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln()
        };
        let eig = w.map(|x| if x > 0.0 { (x.ln() / q - log_y).exp() } else { 0.0 });
        (eig, log_y, q / (q - 1.0) * log_y)
    };

    InferredState {
        constraints: *c,
        weights,
        eig_phi_plus: eig[0],
        eig_psi_minus: eig[1],
        eig_deg: eig[2],
        log_y,
        log_z,
        z_q: log_z.exp(),
        c_q: (-q * log_y).exp(),
    }
}

/// The factors `μ_0`, `μ_±` of the power-law state.
///
/// `mu_plus` belongs to `|Ψ−⟩` (weight `w_minus`) and `mu_minus` to `|Φ+⟩`
/// (weight `w_plus`), following the sign convention `μ± = 1 + k[λ₁(b ± 2√2) + …]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MuFactors {
    pub mu_zero: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    q: f64,
    z_q: f64,
}

impl MuFactors {
    fn sum_pow(&self, exponent: f64) -> f64 {
        2.0 * self.mu_zero.powf(exponent)
            + self.mu_plus.powf(exponent)
            + self.mu_minus.powf(exponent)
    }

    /// `Z_q = 2 μ₀^{1/(1−q)} + μ₋^{1/(1−q)} + μ₊^{1/(1−q)}`.
    pub fn z_linear(&self) -> f64 {
        self.sum_pow(1.0 / (1.0 - self.q))
    }

    /// `Z_q = 2 μ₀^{q/(1−q)} + μ₋^{q/(1−q)} + μ₊^{q/(1−q)}`.
    pub fn z_escort(&self) -> f64 {
        self.sum_pow(self.q / (1.0 - self.q))
    }

    /// Data recovered from the μ-factors: `b = 2√2 (μ₋^{q/(1−q)} − μ₊^{q/(1−q)})/Z`
    /// and `σ² = 8 (μ₋^{q/(1−q)} + μ₊^{q/(1−q)})/Z`.
    pub fn recovered_data(&self) -> (f64, f64) {
        let e = self.q / (1.0 - self.q);
        let m = self.mu_minus.powf(e);
        let p = self.mu_plus.powf(e);
        (TWO_SQRT_2 * (m - p) / self.z_q, 8.0 * (m + p) / self.z_q)
    }
}

/// `μ_i = (w_i Z_q)^{(1−q)/q}`. Undefined at `q = 1`.
pub fn mu_factors(s: &InferredState) -> Result<MuFactors> {
    let q = s.q();
    if is_shannon_limit(q) {
        return Err(Error::ShannonLimit { q });
    }
    let a = (1.0 - q) / q;
    let mu = |w: f64| {
        if w > 0.0 {
            (a * (w.ln() + s.log_z)).exp()
        } else if a > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(MuFactors {
        mu_zero: mu(s.weights.w_zero),
        mu_plus: mu(s.weights.w_minus),
        mu_minus: mu(s.weights.w_plus),
        q,
        z_q: s.z_q,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Multipliers {
    pub lambda_1: f64,
    pub lambda_2: f64,
}

/// Lagrange multipliers conjugate to `b_q` and `σ_q²`.
///
/// The `μ − 1` differences are formed with `expm1` so the `1/(1−q)`
/// prefactors do not cancel catastrophically near `q = 1`.
pub fn lagrange_multipliers(s: &InferredState) -> Result<Multipliers> {
    let w = &s.weights;
    if w.w_zero <= INTERIOR_TOL {
        return Err(Error::BoundaryDivergence {
            reason: "sigma2_q = 8",
        });
    }
    if w.w_minus <= INTERIOR_TOL {
        return Err(Error::BoundaryDivergence {
            reason: "sigma2_q = 2*sqrt(2)*b_q",
        });
    }
    if w.w_plus <= INTERIOR_TOL {
        return Err(Error::BoundaryDivergence {
            reason: "vanishing |Phi+> weight",
        });
    }
    let q = s.q();
    let b = s.constraints.b_q;
    let s2 = s.constraints.sigma2_q;
    let shannon = is_shannon_limit(q);
    let a = (1.0 - q) / q;
    // (μ − 1)/(1 − q) for weight w
    let reduced = |w: f64| {
        let l = w.ln() + s.log_z;
        if shannon {
            l / q
        } else {
            (a * l).exp_m1() / (1.0 - q)
        }
    };
    let em_plus = reduced(w.w_minus);
    let em_minus = reduced(w.w_plus);
    let beta = b / TWO_SQRT_2;
    let lambda_1 = s.c_q / (2.0 * TWO_SQRT_2) * (em_plus - em_minus);
    let lambda_2 =
        s.c_q / (s2 - 8.0) * (0.5 * (1.0 - beta) * em_plus + 0.5 * (1.0 + beta) * em_minus);
    Ok(Multipliers { lambda_1, lambda_2 })
}

/// Rebuilds the state from `(λ₁, λ₂, c_q)` through the power-law form
/// `ρ ∝ [1 + (1−q)/c_q (λ₁(b − B) + λ₂(σ² − B²))]^{1/(1−q)}` and reports the
/// largest discrepancy: eigenvalues (absolute) and `Z_q` (relative, via logs).
pub fn fixed_point_residual(s: &InferredState, m: &Multipliers) -> Result<f64> {
    let q = s.q();
    let b = s.constraints.b_q;
    let s2 = s.constraints.sigma2_q;
    let shannon = is_shannon_limit(q);
    let k = (1.0 - q) / s.c_q;

    let mut log_terms = [0.0; 4];
    for (slot, label) in log_terms.iter_mut().zip(BellLabel::ALL) {
        let beta = label.chsh_eigenvalue();
        let x = m.lambda_1 * (b - beta) + m.lambda_2 * (s2 - beta * beta);
        *slot = if shannon {
            x / s.c_q
        } else {
            let bracket = 1.0 + k * x;
            // Brackets of order w^{(1−q)/q} cancel to rounding noise for small q.
            let noise = 64.0 * f64::EPSILON * (1.0 + (k * x).abs());
            if bracket > noise {
                (k * x).ln_1p() / (1.0 - q)
            } else if bracket >= -noise && q < 1.0 {
                f64::NEG_INFINITY
            } else {
                return Err(Error::NegativeBracket { value: bracket });
            }
        };
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = peak + log_terms.iter().map(|l| (l - peak).exp()).sum::<f64>().ln();

    let expected = s.eigenvalues();
    let eig_err = log_terms
        .iter()
        .zip(expected)
        .map(|(l, e)| ((l - log_z).exp() - e).abs())
        .fold(0.0, f64::max);
    Ok(eig_err.max((log_z - s.log_z).abs()))
}

/// `Σ_i λ_i |Bell_i⟩⟨Bell_i|` in the computational basis.
pub fn to_density_matrix(s: &InferredState) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(4).expect("4x4");
    for label in BellLabel::ALL {
        m = m + bell_projector(label).scale_real(s.eigenvalue(label));
    }
    DensityMatrix::from_trusted(m)
}
