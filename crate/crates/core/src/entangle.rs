//! Entanglement verdicts from the largest eigenvalue of the inferred state,
//! a partial-transpose cross-check, and rasterized region scans.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::TWO_SQRT_2;
use crate::error::{Error, Result};
use crate::inference::{infer_state, validate_constraints, InferredState};
use crate::numfmt::format_sig;
use crate::smallmat::{hermitian_eigen, partial_transpose, DensityMatrix, Subsystem};

/// Slack on the `λ_max > 1/2` test.
pub const CRITERION_TOL: f64 = 1e-12;
/// Partial-transpose eigenvalues below `-PPT_TOL` count as negative.
pub const PPT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub entangled: bool,
    pub margin: f64,
}

/// Entangled iff `λ_max > 1/2`; margin is `λ_max − 1/2`.
pub fn criterion_verdict(s: &InferredState) -> Verdict {
    let margin = s.lambda_max() - 0.5;
    Verdict {
        entangled: margin > CRITERION_TOL,
        margin,
    }
}

/// Entangled iff the partial transpose on the second qubit has a negative
/// eigenvalue; margin is its smallest eigenvalue.
pub fn ppt_verdict(rho: &DensityMatrix) -> Result<Verdict> {
    let pt = partial_transpose(rho.matrix(), Subsystem::B)?;
    let margin = hermitian_eigen(&pt)?.min_eigenvalue();
    Ok(Verdict {
        entangled: margin < -PPT_TOL,
        margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionCell {
    pub b_q: f64,
    pub sigma2_q: f64,
    pub feasible: bool,
    pub lambda_max: f64,
    pub entangled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionGrid {
    pub q: f64,
    pub n: usize,
    pub cells: Vec<RegionCell>,
}

fn axis(n: usize, k: usize, hi: f64) -> f64 {
    if k + 1 == n {
        hi
    } else {
        hi * k as f64 / (n - 1) as f64
    }
}

fn scan_cell(q: f64, n: usize, idx: usize) -> RegionCell {
    let b_q = axis(n, idx % n, TWO_SQRT_2);
    let sigma2_q = axis(n, idx / n, 8.0);
    match validate_constraints(q, b_q, sigma2_q) {
        Ok(c) => {
            let s = infer_state(&c);
            RegionCell {
                b_q,
                sigma2_q,
                feasible: true,
                lambda_max: s.lambda_max(),
                entangled: criterion_verdict(&s).entangled,
            }
        }
        Err(_) => RegionCell {
            b_q,
            sigma2_q,
            feasible: false,
            lambda_max: f64::NAN,
            entangled: false,
        },
    }
}

/// Uniform `n × n` raster over `b ∈ [0, 2√2]`, `σ² ∈ [0, 8]` with `b`
/// varying fastest. Cells are evaluated on the current rayon pool and
/// collected in index order.
pub fn scan_region(q: f64, n: usize) -> Result<RegionGrid> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::QOutOfDomain { q });
    }
    if n < 2 {
        return Err(Error::InvalidArgument {
            name: "n",
            reason: format!("grid resolution must be at least 2, got {n}"),
        });
    }
    let cells = (0..n * n)
        .into_par_iter()
        .map(|idx| scan_cell(q, n, idx))
        .collect();
    Ok(RegionGrid { q, n, cells })
}

/// Entangled cells over feasible cells.
pub fn area_fraction(g: &RegionGrid) -> Result<f64> {
    let feasible = g.cells.iter().filter(|c| c.feasible).count();
    if feasible == 0 {
        return Err(Error::EmptyGrid);
    }
    let entangled = g.cells.iter().filter(|c| c.feasible && c.entangled).count();
    Ok(entangled as f64 / feasible as f64)
}

pub const CSV_HEADER: &str = "b_q,sigma2_q,feasible,lambda_max,entangled";

impl RegionGrid {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{}",
                format_sig(c.b_q),
                format_sig(c.sigma2_q),
                u8::from(c.feasible),
                format_sig(c.lambda_max),
                u8::from(c.entangled)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}
