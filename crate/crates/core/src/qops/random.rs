//! Random states and Hamiltonians for tests and campaigns.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{self, CMatrix, C64};
use super::operator::{DensityOperator, HermitianOperator, Operator};

fn ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Full-rank state `GG†/Tr[GG†]` from a square Ginibre matrix.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let g = ginibre(rng, d);
    let m = &g * g.adjoint();
    let tr = linalg::trace_re(&m);
    DensityOperator::from_raw(vec![d], linalg::hermitize(&m.unscale(tr)))
}

/// State diagonal in the computational basis.
pub fn random_classical_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    let p: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = p.iter().sum();
    DensityOperator::from_raw(vec![d], linalg::diag(&p.iter().map(|x| x / s).collect::<Vec<_>>()))
}

/// Haar unitary via QR of a Ginibre matrix with the phase fix on R's diagonal.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { linalg::ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hamiltonian with spectrum uniform in `[0, scale]` and a Haar eigenbasis.
pub fn random_hamiltonian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> HermitianOperator {
    let u = random_unitary(rng, d);
    let e: Vec<f64> = (0..d).map(|_| scale * rng.random::<f64>()).collect();
    let m = &u * linalg::diag(&e) * u.adjoint();
    HermitianOperator::from_raw(vec![d], linalg::hermitize(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..5 {
            let rho = random_state(&mut rng, d);
            assert!(DensityOperator::new(vec![d], rho.matrix().clone()).is_ok());
            let u = random_unitary(&mut rng, d);
            let id = &u * u.adjoint() - CMatrix::identity(d, d);
            assert!(linalg::max_abs(&id) < 1e-12);
            let p = random_classical_state(&mut rng, d);
            assert!(linalg::is_diagonal(p.matrix()));
        }
    }
}
