//! Seeded random states and unitaries for tests and multistart searches.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::smallmat::{ComplexMatrix, DensityMatrix, C64};

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let entries: Vec<C64> = (0..dim * dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ComplexMatrix::from_row_major(dim, &entries).expect("dimension 2 or 4")
}

/// `G G† / Tr(G G†)` with complex Gaussian `G` (Hilbert-Schmidt measure).
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, dim);
    let m = g * g.adjoint();
    let m = m.scale_real(1.0 / m.trace().re).hermitian_part();
    DensityMatrix::from_trusted(m)
}

/// Haar-random unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, dim);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut v: Vec<C64> = (0..dim).map(|i| g.get(i, k)).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut u = ComplexMatrix::zeros(dim).expect("dimension 2 or 4");
    for (k, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u.set(i, k, *z);
        }
    }
    u
}

/// `U ρ U†`.
pub fn conjugate(rho: &DensityMatrix, u: &ComplexMatrix) -> DensityMatrix {
    DensityMatrix::from_trusted((*u * *rho.matrix() * u.adjoint()).hermitian_part())
}
