//! Pauli matrices, the Bell basis and the Bell-CHSH observable
//! `B = √2 (σx⊗σx + σz⊗σz)`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::LazyLock;

use crate::smallmat::{kron, ComplexMatrix, C64};

/// `2√2`, the largest eigenvalue of the CHSH observable.
pub const TWO_SQRT_2: f64 = 2.0 * SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match axis {
        Axis::X => [o, one, one, o],
        Axis::Y => [o, -i, i, o],
        Axis::Z => [one, o, o, -one],
    };
    ComplexMatrix::from_row_major(2, &entries).expect("2x2")
}

#[derive(Clone, Debug)]
pub struct PauliSet {
    pub sigma_x: ComplexMatrix,
    pub sigma_y: ComplexMatrix,
    pub sigma_z: ComplexMatrix,
}

impl PauliSet {
    pub fn new() -> Self {
        Self {
            sigma_x: pauli(Axis::X),
            sigma_y: pauli(Axis::Y),
            sigma_z: pauli(Axis::Z),
        }
    }
}

impl Default for PauliSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Labels of the four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    /// Canonical order used for spectra throughout the crate.
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// Eigenvalue of the CHSH observable on this Bell state.
    pub fn chsh_eigenvalue(self) -> f64 {
        match self {
            BellLabel::PhiPlus => TWO_SQRT_2,
            BellLabel::PsiMinus => -TWO_SQRT_2,
            BellLabel::PhiMinus | BellLabel::PsiPlus => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi_plus",
            BellLabel::PhiMinus => "phi_minus",
            BellLabel::PsiPlus => "psi_plus",
            BellLabel::PsiMinus => "psi_minus",
        }
    }
}

/// Bell state vector in the computational basis, with the global phases
/// `|Φ±⟩ = (|↑↑⟩ ± |↓↓⟩)/√2`, `|Ψ±⟩ = (|↑↓⟩ ± |↓↑⟩)/√2`.
pub fn bell_state(label: BellLabel) -> [C64; 4] {
    let s = FRAC_1_SQRT_2;
    let z = |x: f64| C64::new(x, 0.0);
    match label {
        BellLabel::PhiPlus => [z(s), z(0.0), z(0.0), z(s)],
        BellLabel::PhiMinus => [z(s), z(0.0), z(0.0), z(-s)],
        BellLabel::PsiPlus => [z(0.0), z(s), z(s), z(0.0)],
        BellLabel::PsiMinus => [z(0.0), z(s), z(-s), z(0.0)],
    }
}

pub fn bell_projector(label: BellLabel) -> ComplexMatrix {
    ComplexMatrix::projector(&bell_state(label)).expect("4-vector")
}

#[derive(Clone, Debug)]
pub struct BellBasis {
    pub phi_plus: [C64; 4],
    pub phi_minus: [C64; 4],
    pub psi_plus: [C64; 4],
    pub psi_minus: [C64; 4],
}

impl BellBasis {
    pub fn new() -> Self {
        Self {
            phi_plus: bell_state(BellLabel::PhiPlus),
            phi_minus: bell_state(BellLabel::PhiMinus),
            psi_plus: bell_state(BellLabel::PsiPlus),
            psi_minus: bell_state(BellLabel::PsiMinus),
        }
    }

    pub fn get(&self, label: BellLabel) -> &[C64; 4] {
        match label {
            BellLabel::PhiPlus => &self.phi_plus,
            BellLabel::PhiMinus => &self.phi_minus,
            BellLabel::PsiPlus => &self.psi_plus,
            BellLabel::PsiMinus => &self.psi_minus,
        }
    }
}

impl Default for BellBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// The CHSH observable and its square.
#[derive(Clone, Debug)]
pub struct ChshOperators {
    pub b_op: ComplexMatrix,
    pub b_squared: ComplexMatrix,
}

static CHSH: LazyLock<ChshOperators> = LazyLock::new(|| {
    let x = pauli(Axis::X);
    let z = pauli(Axis::Z);
    let b_op = (kron(&x, &x).unwrap() + kron(&z, &z).unwrap()).scale_real(SQRT_2);
    ChshOperators {
        b_op,
        b_squared: chsh_squared(),
    }
});

/// Shared instance of the CHSH operators, built from the Pauli products.
pub fn chsh_operator() -> &'static ChshOperators {
    &CHSH
}

/// `B² = 8 (P_Φ+ + P_Ψ−)`, from the Bell projectors.
pub fn chsh_squared() -> ComplexMatrix {
    (bell_projector(BellLabel::PhiPlus) + bell_projector(BellLabel::PsiMinus)).scale_real(8.0)
}

/// `2√2 (P_Φ+ − P_Ψ−)`: the spectral form of the CHSH observable.
pub fn chsh_spectral() -> ComplexMatrix {
    (bell_projector(BellLabel::PhiPlus) - bell_projector(BellLabel::PsiMinus))
        .scale_real(TWO_SQRT_2)
}
