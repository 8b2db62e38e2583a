//! Seeded random operators, states and bases.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{DensityMatrix, HermitianOperator};
use crate::{CMatrix, C64};

/// Deterministic generator for a `(seed, stream)` pair.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// GUE-distributed Hermitian operator.
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::hermitize(&ginibre(dim, rng))
}

/// Traceless GUE-distributed operator.
pub fn traceless_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let h = hermitian(dim, rng);
    let shift = h.trace() / dim as f64;
    h.sub(&HermitianOperator::identity(dim).scale(shift))
        .expect("same dimension")
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Haar-random pure state vector.
pub fn pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Random full-rank mixed state `G G† / Tr(G G†)` (Hilbert-Schmidt measure).
pub fn density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_evolved(&m.unscale(tr), 1e-10).expect("Wishart matrix is a state")
}

/// Qubit state with Bloch vector uniform in the unit ball.
pub fn bloch_ball_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_bloch(unit_ball_vector(rng)).expect("inside the ball")
}

pub fn unit_sphere_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

pub fn unit_ball_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let dir = unit_sphere_vector(rng);
    let r: f64 = rng.random::<f64>().cbrt();
    dir.map(|x| x * r)
}
