#![allow(dead_code)]

use std::f64::consts::PI;

use measdisc::matcore::{self, ComplexMatrix, C64};
use measdisc::measurements::{MeasurementEnsemble, Povm};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    measdisc::single_system::restart_rng(seed, 0)
}

/// `A^dagger A` for a random square `A`.
pub fn random_psd(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let a = matcore::random_matrix(rng, d, d);
    a.adjoint().matmul(&a).unwrap()
}

/// `S^{-1/2} A_a S^{-1/2}` with `S = sum_a A_a`.
pub fn random_povm(rng: &mut ChaCha8Rng, d: usize, outcomes: usize) -> Povm {
    let parts: Vec<ComplexMatrix> = (0..outcomes).map(|_| random_psd(rng, d)).collect();
    let total = matcore::sum_matrices(parts.iter()).unwrap();
    let (inv, _) = matcore::psd_inv_sqrt(&total, 1e-14).unwrap();
    let elements = parts
        .iter()
        .map(|p| inv.matmul(p).unwrap().matmul(&inv).unwrap().hermitian_part())
        .collect();
    Povm::new(elements).unwrap()
}

pub fn random_ensemble(rng: &mut ChaCha8Rng, d: usize, settings: usize, outcomes: usize) -> MeasurementEnsemble {
    let povms = (0..settings).map(|_| random_povm(rng, d, outcomes)).collect();
    let mut priors: Vec<f64> = (0..settings).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = priors.iter().sum();
    priors.iter_mut().for_each(|p| *p /= s);
    MeasurementEnsemble::new(povms, priors).unwrap()
}

/// Index-loop `(A (x) B)|phi+>`: entry `(i, j)` is `sum_k A_ik B_jk / sqrt d`.
pub fn kron_on_maxent(a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<C64> {
    let d = a.rows();
    let s = (d as f64).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = (0..d).map(|k| a[(i, k)] * b[(j, k)]).sum::<C64>() / s;
        }
    }
    out
}

/// Index-loop `(1 (x) C)|phi+>`: entry `(i, j)` is `C_ji / sqrt d`.
pub fn local_on_maxent(c: &ComplexMatrix) -> Vec<C64> {
    let d = c.rows();
    let s = (d as f64).sqrt();
    (0..d * d).map(|n| c[(n % d, n / d)] / s).collect()
}

/// `(1 + n.sigma)/2` assembled entry by entry.
pub fn bloch_projector(theta: f64, phi: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (nx, ny, nz) = (st * cp, st * sp, ct);
    ComplexMatrix::new(
        2,
        2,
        vec![
            C64::new((1.0 + nz) / 2.0, 0.0),
            C64::new(nx / 2.0, -ny / 2.0),
            C64::new(nx / 2.0, ny / 2.0),
            C64::new((1.0 - nz) / 2.0, 0.0),
        ],
    )
    .unwrap()
}

/// Best two-outcome value over a 100 x 100 grid of projective qubit
/// measurements plus the two trivial ones.
pub fn brute_force_pair(s0: &ComplexMatrix, s1: &ComplexMatrix) -> f64 {
    let t0 = s0.trace().re;
    let t1 = s1.trace().re;
    let diff = s0 - s1;
    let mut best = t0.max(t1);
    for i in 0..100 {
        let theta = PI * i as f64 / 99.0;
        for j in 0..100 {
            let phi = 2.0 * PI * j as f64 / 100.0;
            let n0 = bloch_projector(theta, phi);
            best = best.max(t1 + diff.trace_product(&n0).unwrap().re);
        }
    }
    best
}

pub fn abs_diff(a: f64, b: f64) -> f64 {
    (a - b).abs()
}
