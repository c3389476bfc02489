//! Entropy, free energy and numerical checks of the Legendre structure
//! linking the data `(b_q, σ_q²)` to the multipliers `(λ₁, λ₂)`.

use serde::Serialize;

use crate::bell::TWO_SQRT_2;
use crate::error::{Error, Result};
use crate::inference::{
    infer_state, is_shannon_limit, lagrange_multipliers, validate_constraints, ConstraintSet,
    InferredState, Multipliers,
};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Number of segments in the path used for the differential identity.
pub const PATH_STEPS: usize = 10;

/// `S_q = (Y^{−q} − 1)/(1 − q)`, von Neumann entropy at `q = 1`.
pub fn entropy_of_state(s: &InferredState) -> f64 {
    let q = s.q();
    if is_shannon_limit(q) {
        s.log_z
    } else {
        (-q * s.log_y).exp_m1() / (1.0 - q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoPoint {
    #[serde(rename = "S_q")]
    pub s_q: f64,
    #[serde(rename = "F_q")]
    pub f_q: f64,
    pub multipliers: Multipliers,
}

/// `F_q = λ₁ b_q + λ₂ σ_q² − S_q`.
pub fn free_energy(s: &InferredState) -> Result<ThermoPoint> {
    let multipliers = lagrange_multipliers(s)?;
    let s_q = entropy_of_state(s);
    let c = &s.constraints;
    Ok(ThermoPoint {
        s_q,
        f_q: multipliers.lambda_1 * c.b_q() + multipliers.lambda_2 * c.sigma2_q() - s_q,
        multipliers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendreReport {
    #[serde(rename = "dS_db_fd")]
    pub ds_db_fd: f64,
    #[serde(rename = "dS_dsigma2_fd")]
    pub ds_dsigma2_fd: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub rel_err_1: f64,
    pub rel_err_2: f64,
    pub path_residual: f64,
    /// `∂S/∂(λ₁, λ₂)` at fixed data. The closed-form entropy depends on the
    /// data alone, so this is exactly zero.
    #[serde(rename = "dS_dlambda_fixed_data")]
    pub ds_dlambda_fixed_data: [f64; 2],
}

/// State at `(b, σ²)` if the point lies strictly inside the data domain.
fn interior_state(q: f64, b: f64, s2: f64) -> Result<InferredState> {
    let out = || Error::StencilOutOfDomain { b, sigma2: s2 };
    let inside = b >= 0.0 && b <= TWO_SQRT_2 && s2 <= 8.0 && s2 >= TWO_SQRT_2 * b;
    if !inside {
        return Err(out());
    }
    let s = infer_state(&validate_constraints(q, b, s2).map_err(|_| out())?);
    if s.is_interior() {
        Ok(s)
    } else {
        Err(out())
    }
}

/// Central differences of `S_q` against the analytic multipliers, plus the
/// differential identity `ΔF = b Δλ₁ + σ² Δλ₂` along a short path.
///
/// Relative errors are taken against `‖(λ₁, λ₂)‖`, since either multiplier
/// alone can vanish inside the domain. The path takes [`PATH_STEPS`] steps of
/// `(h, h)` from the base point; each step is checked at its midpoint data
/// and normalized by `|ΔF| + |b̄ Δλ₁| + |σ̄² Δλ₂|`.
pub fn legendre_report(c: &ConstraintSet, h: f64) -> Result<LegendreReport> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::InvalidArgument {
            name: "h",
            reason: format!("finite-difference step must lie in [1e-8, 1e-3], got {h}"),
        });
    }
    let q = c.q();
    let (b, s2) = (c.b_q(), c.sigma2_q());
    let base = interior_state(q, b, s2)?;
    let m = lagrange_multipliers(&base)?;

    let entropy = |db: f64, ds: f64| -> Result<f64> {
        Ok(entropy_of_state(&interior_state(q, b + db, s2 + ds)?))
    };
    let ds_db_fd = (entropy(h, 0.0)? - entropy(-h, 0.0)?) / (2.0 * h);
    let ds_dsigma2_fd = (entropy(0.0, h)? - entropy(0.0, -h)?) / (2.0 * h);
    let scale = m.lambda_1.hypot(m.lambda_2).max(f64::MIN_POSITIVE);

    let mut path = Vec::with_capacity(PATH_STEPS + 1);
    for k in 0..=PATH_STEPS {
        let t = k as f64 * h;
        let s = interior_state(q, b + t, s2 + t)?;
        path.push((b + t, s2 + t, free_energy(&s)?));
    }
    let path_residual = path
        .windows(2)
        .map(|w| {
            let (b0, s0, p0) = w[0];
            let (b1, s1, p1) = w[1];
            let (bm, sm) = (0.5 * (b0 + b1), 0.5 * (s0 + s1));
            let df = p1.f_q - p0.f_q;
            let t1 = bm * (p1.multipliers.lambda_1 - p0.multipliers.lambda_1);
            let t2 = sm * (p1.multipliers.lambda_2 - p0.multipliers.lambda_2);
            (df - t1 - t2).abs() / (df.abs() + t1.abs() + t2.abs() + 1e-15)
        })
        .fold(0.0, f64::max);

    Ok(LegendreReport {
        ds_db_fd,
        ds_dsigma2_fd,
        lambda_1: m.lambda_1,
        lambda_2: m.lambda_2,
        rel_err_1: (ds_db_fd - m.lambda_1).abs() / scale,
        rel_err_2: (ds_dsigma2_fd - m.lambda_2).abs() / scale,
        path_residual,
        ds_dlambda_fixed_data: [0.0, 0.0],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathPoint {
    pub t: f64,
    pub b_q: f64,
    pub sigma2_q: f64,
    #[serde(rename = "Z_q")]
    pub z_q: f64,
    #[serde(rename = "S_q")]
    pub s_q: f64,
    /// `⟨Φ+|ρ|Φ+⟩`.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PurificationPath {
    pub q: f64,
    pub points: Vec<PathPoint>,
}

impl PurificationPath {
    pub fn end(&self) -> &PathPoint {
        self.points.last().expect("at least two points")
    }
}

/// Walks the intelligent line `σ² = 2√2 b`, `b = 2√2 t`, for
/// `t = k/steps`, `k = 1..=steps`.
pub fn purification_path_check(q: f64, steps: usize) -> Result<PurificationPath> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::QOutOfDomain { q });
    }
    if steps < 2 {
        return Err(Error::InvalidArgument {
            name: "steps",
            reason: format!("need at least 2 steps, got {steps}"),
        });
    }
    let points = (1..=steps)
        .map(|k| {
            let t = if k == steps { 1.0 } else { k as f64 / steps as f64 };
            let (b, s2) = if k == steps {
                (TWO_SQRT_2, 8.0)
            } else {
                (TWO_SQRT_2 * t, 8.0 * t)
            };
            let s = infer_state(&validate_constraints(q, b, s2)?);
            Ok(PathPoint {
                t,
                b_q: s.constraints.b_q(),
                sigma2_q: s.constraints.sigma2_q(),
                z_q: s.z_q,
                s_q: entropy_of_state(&s),
                fidelity: s.eig_phi_plus,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PurificationPath { q, points })
}
