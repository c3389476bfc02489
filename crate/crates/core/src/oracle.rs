//! Independent numerical maximizers used to check the closed-form state.
//!
//! The split oracle searches the one free direction left once the data fix
//! the escort weights of `|Φ+⟩` and `|Ψ−⟩`. The general oracle searches all
//! 4×4 density matrices with a penalized quasi-Newton method; it can only
//! fail to beat the closed form, never prove optimality.

use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bell::{chsh_operator, TWO_SQRT_2};
use crate::error::{Error, Result};
use crate::inference::{
    escort_weights, is_shannon_limit, to_density_matrix, ConstraintSet, InferredState,
};
use crate::measures::tsallis_of_probabilities;
use crate::smallmat::{hermitian_eigen, psd_power_of, ComplexMatrix, DensityMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Split,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub kind: OracleKind,
    /// Sorted in descending order.
    pub eigenvalues: [f64; 4],
    pub achieved_entropy: f64,
    /// Largest absolute deviation of the q-expectations of `B` and `B²` from the data.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Times a collapsed, rank-deficient iterate was mixed back toward full rank.
    pub reinflations: usize,
    /// Escort weight given to `|Φ−⟩` (split oracle only).
    pub split: Option<f64>,
}

fn sorted_desc(mut v: [f64; 4]) -> [f64; 4] {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Density eigenvalues with escort weights `w`: `λ_i ∝ w_i^{1/q}`.
fn eigenvalues_from_escort(w: [f64; 4], q: f64) -> [f64; 4] {
    let r = w.map(|x| if x > 0.0 { x.powf(1.0 / q) } else { 0.0 });
    let total: f64 = r.iter().sum();
    r.map(|x| x / total)
}

/// `(⟨B⟩_q, ⟨B²⟩_q)` of a Bell-diagonal state from its escort weights in
/// `(Φ+, Φ−, Ψ+, Ψ−)` order.
fn escort_data(w: [f64; 4]) -> (f64, f64) {
    (TWO_SQRT_2 * (w[0] - w[3]), 8.0 * (w[0] + w[3]))
}

/// Escort weights `(w₊, t, 2w₀ − t, w₋)` of a split state.
pub fn split_weights(c: &ConstraintSet, t: f64) -> [f64; 4] {
    let w = escort_weights(c);
    [w.w_plus, t, 2.0 * w.w_zero - t, w.w_minus]
}

/// Golden-section maximization of `S_q` over the split `t ∈ [0, 2w₀]`.
///
/// The data are linear in the escort weights and pin `w₊`, `w₋`, so every
/// split state satisfies the constraints exactly; only `S_q` varies with `t`.
pub fn maxent_split_oracle(c: &ConstraintSet, tol: f64) -> Result<OracleResult> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::InvalidArgument {
            name: "tol",
            reason: format!("tolerance must lie in [1e-12, 1e-6], got {tol}"),
        });
    }
    let q = c.q();
    let total = 2.0 * escort_weights(c).w_zero;
    let entropy =
        |t: f64| tsallis_of_probabilities(&eigenvalues_from_escort(split_weights(c, t), q), q);

    let mut iterations = 0;
    let mut evaluations = 0;
    let t = if total == 0.0 {
        0.0
    } else {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0, total);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (entropy(x1), entropy(x2));
        evaluations += 2;
        while hi - lo > tol * total {
            iterations += 1;
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = entropy(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = entropy(x1);
            }
            evaluations += 1;
        }
        0.5 * (lo + hi)
    };

    let w = split_weights(c, t);
    let (b, s2) = escort_data(w);
    Ok(OracleResult {
        kind: OracleKind::Split,
        eigenvalues: sorted_desc(eigenvalues_from_escort(w, q)),
        achieved_entropy: entropy(t),
        constraint_residual: (b - c.b_q()).abs().max((s2 - c.sigma2_q()).abs()),
        iterations,
        evaluations,
        reinflations: 0,
        split: Some(t),
    })
}

/// Default objective-evaluation budget of the general oracle.
pub const DEFAULT_BUDGET: usize = 20_000;
/// Smallest accepted budget.
pub const MIN_BUDGET: usize = 1_000;
/// Largest constraint residual accepted after the penalty schedule.
pub const PENALTY_RESIDUAL_TOL: f64 = 1e-6;
const PENALTY_START: f64 = 1e2;
const PENALTY_GROWTH: f64 = 10.0;
const PENALTY_ROUNDS: usize = 8;
const PENALTY_MAX: f64 = 1e5;
const COLLAPSE_TOL: f64 = 1e-4;
const REINFLATE_MIX: f64 = 1e-2;
const MAX_REINFLATIONS: usize = 3;
/// Longest trial step in parameter space.
const MAX_STEP: f64 = 0.25;

const NPAR: usize = 16;
type Params = [f64; NPAR];

const LOWER: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

/// Lower-triangular `A` with diagonal `exp(x₀..x₃)`; `ρ = A A† / Tr(A A†)`.
///
/// The log-diagonal keeps the search away from rank-deficient states, where
/// the entropy gradient diverges for `q < 1`.
fn factor(x: &Params) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(4).expect("4x4");
    for i in 0..4 {
        a.set(i, i, C64::new(x[i].exp(), 0.0));
    }
    for (k, &(i, j)) in LOWER.iter().enumerate() {
        a.set(i, j, C64::new(x[4 + 2 * k], x[5 + 2 * k]));
    }
    a
}

fn params_of(a: &ComplexMatrix) -> Params {
    let mut x = [0.0; NPAR];
    for i in 0..4 {
        x[i] = a.get(i, i).re.ln();
    }
    for (k, &(i, j)) in LOWER.iter().enumerate() {
        x[4 + 2 * k] = a.get(i, j).re;
        x[5 + 2 * k] = a.get(i, j).im;
    }
    x
}

/// Lower Cholesky factor of a positive definite Hermitian matrix.
fn cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.dim();
    let mut l = ComplexMatrix::zeros(n)?;
    for j in 0..n {
        let mut d = m.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::NotDensityMatrix {
                reason: "start state must be full rank".into(),
            });
        }
        let d = d.sqrt();
        l.set(j, j, C64::new(d, 0.0));
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

struct Evaluation {
    value: f64,
    grad: Params,
    entropy: f64,
    residual: f64,
    eigenvalues: [f64; 4],
    /// Smallest eigenvalue of `X`.
    floor: f64,
    errors: [f64; 2],
}

/// `(t^k − u^k)/(t − u)` for `k ≥ 1`, stable for close arguments.
fn power_divided_difference(t: f64, u: f64, k: f64) -> f64 {
    let (hi, lo) = if t >= u { (t, u) } else { (u, t) };
    if hi <= 0.0 {
        return if k == 1.0 { 1.0 } else { 0.0 };
    }
    let d = (lo - hi) / hi;
    if d == 0.0 {
        k * hi.powf(k - 1.0)
    } else {
        hi.powf(k - 1.0) * (k * d.ln_1p()).exp_m1() / d
    }
}

/// Penalized entropy over a unit-trace positive matrix `X` with
/// `ρ = X^s / Tr X^s`.
///
/// For `q > 1`, `X = ρ`. For `q < 1`, `X` is the escort matrix
/// `ρ^q / Tr ρ^q` and `s = 1/q`. In the Shannon limit `s = 2`. Every power of
/// `X` that appears, `s` and `k = q s`, is at least one and the entropy
/// gradient stays bounded as eigenvalues of `X` approach zero.
struct PenaltyProblem {
    q: f64,
    b: f64,
    s2: f64,
    shannon: bool,
    s: f64,
    k: f64,
    b_op: ComplexMatrix,
    b_sq: ComplexMatrix,
}

impl PenaltyProblem {
    fn new(c: &ConstraintSet) -> Self {
        let ops = chsh_operator();
        let q = c.q();
        let shannon = is_shannon_limit(q);
        let s = if shannon {
            2.0
        } else if q >= 1.0 {
            1.0
        } else {
            1.0 / q
        };
        Self {
            q,
            b: c.b_q(),
            s2: c.sigma2_q(),
            shannon,
            s,
            k: if shannon { s } else { q * s },
            b_op: ops.b_op,
            b_sq: ops.b_squared,
        }
    }

    /// `X` for a given state.
    fn search_matrix(&self, rho: &DensityMatrix) -> Result<ComplexMatrix> {
        let m = psd_power_of(&rho.spectrum(), 1.0 / self.s)?;
        Ok(m.scale_real(1.0 / m.trace().re))
    }

    /// Augmented objective `−S_q + Σ (ν_i e_i + μ e_i²)` and its exact gradient.
    fn evaluate(&self, x: &Params, pen: &Penalty) -> Result<Evaluation> {
        let a = factor(x);
        let m = (a * a.adjoint()).hermitian_part();
        let tr = m.trace().re;
        let xm = m.scale_real(1.0 / tr);
        let spec = hermitian_eigen(&xm)?;
        let u = spec.eigenvectors;
        let ev: Vec<f64> = spec.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let (q, s, k) = (self.q, self.s, self.k);

        let xs: Vec<f64> = ev.iter().map(|e| e.powf(s)).collect();
        let xk: Vec<f64> = ev.iter().map(|e| e.powf(k)).collect();
        let ts: f64 = xs.iter().sum();
        let tk: f64 = xk.iter().sum();

        let bt = u.adjoint() * self.b_op * u;
        let b2t = u.adjoint() * self.b_sq * u;
        let eb = (0..4).map(|i| xk[i] * bt.get(i, i).re).sum::<f64>() / tk;
        let es = (0..4).map(|i| xk[i] * b2t.get(i, i).re).sum::<f64>() / tk;
        let (e1, e2) = (eb - self.b, es - self.s2);

        // Entropy and its derivative along each eigenvalue of X.
        let (entropy, ds_dx): (f64, Vec<f64>) = if self.shannon {
            let p: Vec<f64> = xs.iter().map(|y| y / ts).collect();
            let entropy = -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>();
            let grad = (0..4)
                .map(|i| {
                    if p[i] > 0.0 {
                        s * ev[i].powf(s - 1.0) / ts * (-p[i].ln() - entropy)
                    } else {
                        0.0
                    }
                })
                .collect();
            (entropy, grad)
        } else {
            let log_ts = ts.ln();
            let tr_q = tk * (-q * log_ts).exp();
            let grad = (0..4)
                .map(|i| {
                    let dk = power_divided_difference(ev[i], ev[i], k);
                    let ds = power_divided_difference(ev[i], ev[i], s);
                    (dk * (-q * log_ts).exp() - q * tr_q / ts * ds) / (1.0 - q)
                })
                .collect();
            ((tr_q - 1.0) / (1.0 - q), grad)
        };

        let mut g = ComplexMatrix::zeros(4)?;
        for i in 0..4 {
            for j in 0..4 {
                let gamma = power_divided_difference(ev[i], ev[j], k);
                let diag = if i == j { gamma } else { 0.0 };
                let dexp = (bt.get(i, j) * gamma - C64::new(eb * diag, 0.0)) / tk;
                let dsig = (b2t.get(i, j) * gamma - C64::new(es * diag, 0.0)) / tk;
                let mut v = dexp * (2.0 * pen.mu * e1 + pen.nu[0]) + dsig * (2.0 * pen.mu * e2 + pen.nu[1]);
                if i == j {
                    v -= C64::new(ds_dx[i], 0.0);
                }
                g.set(i, j, v);
            }
        }
        let g = u * g * u.adjoint();
        let shift = (g * xm).trace().re;
        let h = (g - ComplexMatrix::identity(4)?.scale_real(shift)).scale_real(1.0 / tr);
        // grad[0] stays zero: the scale of A is fixed by `normalize`.
        let kk = a.adjoint() * h;
        let mut grad = [0.0; NPAR];
        for i in 1..4 {
            grad[i] = 2.0 * kk.get(i, i).re * a.get(i, i).re;
        }
        for (n, &(i, j)) in LOWER.iter().enumerate() {
            grad[4 + 2 * n] = 2.0 * kk.get(j, i).re;
            grad[5 + 2 * n] = -2.0 * kk.get(j, i).im;
        }

        let mut eigenvalues = [0.0; 4];
        for (slot, y) in eigenvalues.iter_mut().zip(&xs) {
            *slot = y / ts;
        }
        Ok(Evaluation {
            value: -entropy + pen.mu * (e1 * e1 + e2 * e2) + pen.nu[0] * e1 + pen.nu[1] * e2,
            errors: [e1, e2],
            grad,
            entropy,
            residual: e1.abs().max(e2.abs()),
            eigenvalues,
            floor: ev.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

fn dot(a: &Params, b: &Params) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quadratic weight `μ` and multiplier estimates `ν` of the augmented
/// objective.
struct Penalty {
    mu: f64,
    nu: [f64; 2],
}

struct Counters {
    iterations: usize,
    evaluations: usize,
    budget: usize,
}

impl Counters {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }
}

/// BFGS with Armijo backtracking on the penalized objective.
///
/// With `exit_on_collapse`, returns as soon as `X` comes within
/// `COLLAPSE_TOL` of the boundary.
fn bfgs(
    problem: &PenaltyProblem,
    x0: Params,
    pen: &Penalty,
    exit_on_collapse: bool,
    counters: &mut Counters,
) -> Result<Params> {
    let mut x = x0;
    let mut cur = problem.evaluate(&x, pen)?;
    counters.evaluations += 1;
    let mut hinv = [[0.0; NPAR]; NPAR];
    let reset = |h: &mut [[f64; NPAR]; NPAR], scale: f64| {
        for (i, row) in h.iter_mut().enumerate() {
            row.fill(0.0);
            row[i] = scale;
        }
    };
    reset(&mut hinv, 1.0);
    let mut stalls = 0;

    while !counters.exhausted() {
        let gnorm = cur.grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if gnorm < 1e-12 || (exit_on_collapse && cur.floor < COLLAPSE_TOL) {
            break;
        }
        let mut dir = [0.0; NPAR];
        for i in 0..NPAR {
            dir[i] = -dot(&hinv[i], &cur.grad);
        }
        let mut slope = dot(&dir, &cur.grad);
        if slope >= 0.0 {
            reset(&mut hinv, 1.0);
            dir = cur.grad.map(|g| -g);
            slope = -dot(&cur.grad, &cur.grad);
        }

        // Keep trial points within a ball of radius MAX_STEP around x.
        let dnorm = dot(&dir, &dir).sqrt();
        let mut step = (MAX_STEP / dnorm).min(1.0);
        let mut accepted = None;
        for _ in 0..80 {
            if counters.exhausted() {
                break;
            }
            let mut trial = x;
            for i in 0..NPAR {
                trial[i] += step * dir[i];
            }
            let e = problem.evaluate(&trial, pen)?;
            counters.evaluations += 1;
            let finite = e.value.is_finite() && e.grad.iter().all(|g| g.is_finite());
            if finite && e.value <= cur.value + 1e-4 * step * slope {
                accepted = Some((trial, e));
                break;
            }
            step *= 0.5;
        }
        let Some((next, e)) = accepted else { break };
        counters.iterations += 1;

        let s: Params = std::array::from_fn(|i| next[i] - x[i]);
        let y: Params = std::array::from_fn(|i| e.grad[i] - cur.grad[i]);
        let sy = dot(&s, &y);
        let improvement = cur.value - e.value;
        x = next;
        cur = e;

        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if counters.iterations == 1 {
                reset(&mut hinv, sy / dot(&y, &y));
            }
            let hy: Params = std::array::from_fn(|i| dot(&hinv[i], &y));
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..NPAR {
                for j in 0..NPAR {
                    hinv[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }

        if improvement <= 1e-15 * (1.0 + cur.value.abs()) {
            stalls += 1;
            if stalls >= 5 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ok(x)
}

/// Rescales `A` so that `A₀₀ = 1`. `ρ` is invariant under `A → cA`; fixing
/// the scale removes the flat direction from the search.
fn normalize(mut x: Params) -> Params {
    let shift = x[0];
    for (i, v) in x.iter_mut().enumerate() {
        if i < 4 {
            *v -= shift;
        } else {
            *v *= (-shift).exp();
        }
    }
    x
}

fn run_penalty_schedule(c: &ConstraintSet, start: Params, budget: usize) -> Result<OracleResult> {
    if budget < MIN_BUDGET {
        return Err(Error::InvalidArgument {
            name: "budget",
            reason: format!("need at least {MIN_BUDGET} evaluations, got {budget}"),
        });
    }
    if !escort_weights(c).is_interior() {
        return Err(Error::InvalidArgument {
            name: "constraints",
            reason: format!(
                "general oracle needs an interior point, got b_q = {}, sigma2_q = {}",
                c.b_q(),
                c.sigma2_q()
            ),
        });
    }
    let problem = PenaltyProblem::new(c);
    let mut counters = Counters {
        iterations: 0,
        evaluations: 0,
        budget,
    };
    let mut x = normalize(start);
    let mut pen = Penalty {
        mu: PENALTY_START,
        nu: [0.0; 2],
    };
    let mut reinflations = 0;
    let mut fin = problem.evaluate(&x, &pen)?;
    for _ in 0..PENALTY_ROUNDS {
        x = normalize(bfgs(&problem, x, &pen, true, &mut counters)?);
        for attempt in 1..=MAX_REINFLATIONS {
            let mix = (REINFLATE_MIX * 10f64.powi(attempt as i32 - 1)).min(0.5);
            let Some(lifted) = reinflate(&x, mix)? else { break };
            reinflations += 1;
            let last = attempt == MAX_REINFLATIONS;
            x = normalize(bfgs(&problem, lifted, &pen, !last, &mut counters)?);
        }
        fin = problem.evaluate(&x, &pen)?;
        for (nu, e) in pen.nu.iter_mut().zip(fin.errors) {
            *nu += 2.0 * pen.mu * e;
        }
        pen.mu = (pen.mu * PENALTY_GROWTH).min(PENALTY_MAX);
    }
    if !(fin.residual <= PENALTY_RESIDUAL_TOL) {
        return Err(Error::BudgetExhausted {
            residual: fin.residual,
            evaluations: counters.evaluations,
        });
    }
    Ok(OracleResult {
        kind: OracleKind::General,
        eigenvalues: sorted_desc(fin.eigenvalues),
        achieved_entropy: fin.entropy,
        constraint_residual: fin.residual,
        iterations: counters.iterations,
        evaluations: counters.evaluations,
        reinflations,
        split: None,
    })
}

/// Rank-deficient points are stationary in the factor coordinates whatever
/// the entropy gradient on the kernel, so the search can stall on them. Such
/// points are mixed slightly toward `I/4`; a genuine maximum draws the search
/// straight back.
fn reinflate(x: &Params, mix: f64) -> Result<Option<Params>> {
    let a = factor(x);
    let m = (a * a.adjoint()).hermitian_part();
    let m = m.scale_real(1.0 / m.trace().re);
    if hermitian_eigen(&m)?.min_eigenvalue() >= COLLAPSE_TOL {
        return Ok(None);
    }
    let mixed = m.scale_real(1.0 - mix) + ComplexMatrix::identity(4)?.scale_real(mix / 4.0);
    Ok(Some(params_of(&cholesky(&mixed)?)))
}

/// Penalized local maximization of `S_q` over all two-qubit states from a
/// seeded random start.
pub fn maxent_general_oracle(c: &ConstraintSet, seed: u64, budget: usize) -> Result<OracleResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Params = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
    run_penalty_schedule(c, start, budget)
}

/// Independent searches for each seed, run in parallel, results in seed order.
pub fn multistart_general_oracle(
    c: &ConstraintSet,
    seeds: &[u64],
    budget: usize,
) -> Vec<Result<OracleResult>> {
    seeds
        .par_iter()
        .map(|&seed| maxent_general_oracle(c, seed, budget))
        .collect()
}

/// Same search started from a given full-rank state.
pub fn maxent_general_oracle_from(
    c: &ConstraintSet,
    start: &DensityMatrix,
    budget: usize,
) -> Result<OracleResult> {
    let x = PenaltyProblem::new(c).search_matrix(start)?;
    run_penalty_schedule(c, params_of(&cholesky(&x)?), budget)
}

/// Same search started at the closed-form state.
pub fn maxent_general_oracle_at_closed_form(
    s: &InferredState,
    budget: usize,
) -> Result<OracleResult> {
    maxent_general_oracle_from(&s.constraints, &to_density_matrix(s), budget)
}

/// Largest absolute difference between the sorted spectra.
pub fn compare_states(a: &InferredState, b: &OracleResult) -> f64 {
    compare_spectra(a.eigenvalues(), b.eigenvalues)
}

/// Largest absolute difference between two spectra after sorting.
pub fn compare_spectra(a: [f64; 4], b: [f64; 4]) -> f64 {
    sorted_desc(a)
        .iter()
        .zip(sorted_desc(b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
