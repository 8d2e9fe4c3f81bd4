//! Catalog of measurement families, bases and unitaries, together with the
//! overlap conditions that decide whether a family is perfectly
//! distinguishable with a maximally entangled probe but not with a single
//! system.
//!
//! Conventions:
//! - `Z = diag(w^0, ..., w^{d-1})` with `w = exp(2 pi i / d)`, `X|i> = |i+1 mod d>`.
//! - `U_{k,l} = X^k Z^l`; the `d^2` outcomes of a Weyl-covariant POVM are
//!   flattened as `a = k * d + l`.
//! - Strict inequalities are enforced with a margin: "`< 1`" means
//!   `<= 1 - 1e-9`, "`!= 0`" means `>= 1e-9`.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{self, inner, normalize, real_vec, vec_norm, ComplexMatrix, C64, ONE, ZERO};
use crate::measurements::{MeasurementEnsemble, Povm};

/// Margin used for strict inequalities on overlaps.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Tolerance on pairwise inner products of a basis.
const ORTHO_TOL: f64 = 1e-9;

/// Largest `r` for which the tensor-power magic basis is known to give an
/// informationally complete POVM.
pub const MAX_VERIFIED_MAGIC_POWER: u32 = 5;

/// An orthonormal basis of `C^dim`, vectors in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    dim: usize,
    vectors: Vec<Vec<C64>>,
}

impl Basis {
    /// Checks unit norms (1e-12) and pairwise orthogonality (1e-9).
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 {
            return Err(Error::InvalidBasis("empty".into()));
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidBasis(format!("need {dim} vectors of length {dim}")));
        }
        for (i, v) in vectors.iter().enumerate() {
            let n = vec_norm(v);
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidBasis(format!("vector {i} has norm {n}")));
            }
        }
        let b = Self { dim, vectors };
        let r = b.orthonormality_residual();
        if r > ORTHO_TOL {
            return Err(Error::InvalidBasis(format!("orthonormality residual {r:.3e}")));
        }
        Ok(b)
    }

    /// Normalizes every vector before checking orthogonality.
    pub fn normalized(vectors: Vec<Vec<C64>>) -> Result<Self> {
        if vectors.iter().any(|v| vec_norm(v) == 0.0) {
            return Err(Error::InvalidBasis("zero vector".into()));
        }
        Self::new(vectors.iter().map(|v| normalize(v)).collect())
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            dim,
            vectors: (0..dim).map(|i| matcore::basis_vector(dim, i)).collect(),
        }
    }

    /// Columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let d = u.dim()?;
        Self::new((0..d).map(|j| u.column(j)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i]
    }

    /// `max |<v_i|v_j> - delta_ij|`
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((inner(u, v) - target).norm());
            }
        }
        worst
    }

    /// `U = sum_i |v_i><i|`
    pub fn to_unitary(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.vectors).expect("square")
    }

    /// Applies a unitary to every vector.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(self.vectors.iter().map(|v| u.apply(v)).collect::<Result<Vec<_>>>()?)
    }
}

/// Indices and overlap that decided a condition check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    /// Names of the indices, e.g. `"k,l,i,j"`.
    pub labels: String,
    pub indices: Vec<usize>,
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub satisfied: bool,
    pub witness: Option<Witness>,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::OutOfRange(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// `exp(2 pi i t / d)`, accepting half-integer exponents via `t` real.
fn root_of_unity(t: f64, d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * t / d as f64)
}

pub fn weyl_z(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let diag: Vec<C64> = (0..d).map(|i| root_of_unity(i as f64, d)).collect();
    Ok(ComplexMatrix::from_diag(&diag))
}

pub fn weyl_x(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    Ok(ComplexMatrix::from_fn(
        d,
        d,
        |i, j| if i == (j + 1) % d { ONE } else { ZERO },
    ))
}

/// `X^k Z^l`
pub fn weyl_unitary(k: usize, l: usize, d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    if k >= d || l >= d {
        return Err(Error::OutOfRange(format!("weyl indices ({k},{l}) for d={d}")));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + k) % d {
            root_of_unity((j * l) as f64, d)
        } else {
            ZERO
        }
    }))
}

/// `X^k Z^l |v>` without forming the matrix.
pub fn weyl_apply(k: usize, l: usize, v: &[C64]) -> Vec<C64> {
    let d = v.len();
    let mut out = vec![ZERO; d];
    for (j, &vj) in v.iter().enumerate() {
        out[(j + k) % d] = root_of_unity(((j * l) % d) as f64, d) * vj;
    }
    out
}

/// Two-level factors `V_i = diag(1, w^{2^{r-i}})`, `i = 1..r`, whose tensor
/// product is `Z` in dimension `2^r`.
pub fn z_tensor_factors(r: u32) -> Result<Vec<ComplexMatrix>> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be at least 1".into()));
    }
    let d = 1usize << r;
    Ok((1..=r)
        .map(|i| ComplexMatrix::from_diag(&[ONE, root_of_unity((1usize << (r - i)) as f64, d)]))
        .collect())
}

fn d4_projective_raw() -> Vec<Vec<[f64; 4]>> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let sc = |v: [f64; 4], s: f64| v.map(|c| c / s);
    vec![
        vec![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        vec![
            sc([0.0, 1.0, -1.0, 0.0], s2),
            sc([1.0, 0.0, 0.0, 1.0], s2),
            sc([1.0, 0.0, 0.0, -1.0], s2),
            sc([0.0, 1.0, 1.0, 0.0], s2),
        ],
        vec![
            sc([0.0, 1.0, 1.0, 1.0], s3),
            sc([1.0, 0.0, 1.0, -1.0], s3),
            sc([-1.0, 1.0, 0.0, -1.0], s3),
            sc([1.0, 1.0, -1.0, 0.0], s3),
        ],
        vec![
            sc([0.0, 1.0, 1.0, -2.0], s6),
            sc([-1.0, 0.0, 2.0, 1.0], s6),
            sc([1.0, 2.0, 0.0, 1.0], s6),
            // The only unit vector orthogonal to the rest of its row and column.
            sc([-2.0, 1.0, -1.0, 0.0], s6),
        ],
    ]
}

/// The four orthonormal bases of the dimension-4 projective example;
/// `bases[x].vector(a)` is `|v_x^a>`.
pub fn d4_projective_bases() -> Vec<Basis> {
    d4_projective_raw()
        .into_iter()
        .map(|row| Basis::new(row.iter().map(|v| real_vec(v)).collect()).expect("hard-coded vectors are orthonormal"))
        .collect()
}

/// Projective measurements from a list of bases, uniform priors.
pub fn projective_ensemble(bases: &[Basis]) -> Result<MeasurementEnsemble> {
    let povms = bases
        .iter()
        .map(|b| Povm::from_rank_one(b.vectors(), 1.0))
        .collect::<Result<Vec<_>>>()?;
    MeasurementEnsemble::uniform(povms)
}

pub fn d4_projective_ensemble() -> MeasurementEnsemble {
    projective_ensemble(&d4_projective_bases()).expect("hard-coded ensemble is well formed")
}

/// Overlap conditions for `d` rank-one projective measurements:
/// 1. `<v_x^a|v_{x'}^a> = delta_{x,x'}` for every outcome `a`;
/// 2. some pair of outcomes `a != a'` has `|<v_x^a|v_{x'}^{a'}>| < 1` for all `x, x'`.
pub fn check_projective_conditions(bases: &[Basis]) -> Result<ConditionReport> {
    let n = bases.len();
    let d = bases
        .first()
        .ok_or_else(|| Error::InvalidBasis("no bases".into()))?
        .dim();
    if bases.iter().any(|b| b.dim() != d) || n != d {
        return Err(Error::InvalidBasis(format!("expected {d} bases of dimension {d}")));
    }
    let v = |x: usize, a: usize| bases[x].vector(a);

    for a in 0..d {
        for x in 0..n {
            for y in 0..n {
                let target = if x == y { ONE } else { ZERO };
                let dev = (inner(v(x, a), v(y, a)) - target).norm();
                if dev > ORTHO_TOL {
                    return Ok(ConditionReport {
                        satisfied: false,
                        witness: Some(Witness {
                            labels: "a,x,x'".into(),
                            indices: vec![a, x, y],
                            overlap: inner(v(x, a), v(y, a)).norm(),
                        }),
                    });
                }
            }
        }
    }

    // Pair (a, a') with the smallest worst-case overlap.
    let mut best: Option<Witness> = None;
    for a in 0..d {
        for b in (a + 1)..d {
            let mut worst = (0usize, 0usize, -1.0f64);
            for x in 0..n {
                for y in 0..n {
                    let o = inner(v(x, a), v(y, b)).norm();
                    if o > worst.2 {
                        worst = (x, y, o);
                    }
                }
            }
            if best.as_ref().is_none_or(|w| worst.2 < w.overlap) {
                best = Some(Witness {
                    labels: "a,a',x,x'".into(),
                    indices: vec![a, b, worst.0, worst.1],
                    overlap: worst.2,
                });
            }
        }
    }
    let satisfied = best.as_ref().is_some_and(|w| w.overlap <= 1.0 - STRICT_MARGIN);
    Ok(ConditionReport {
        satisfied,
        witness: best,
    })
}

/// `d` POVMs with `d^2` outcomes `M^{k,l}_x = U_{k,l}|v_x><v_x|U_{k,l}^dagger / d`,
/// uniform priors.
pub fn weyl_covariant_povm_ensemble(basis: &Basis) -> Result<MeasurementEnsemble> {
    let d = basis.dim();
    check_dim(d)?;
    if basis.orthonormality_residual() > ORTHO_TOL {
        return Err(Error::InvalidBasis("not orthonormal".into()));
    }
    let scale = 1.0 / d as f64;
    let povms = basis
        .vectors()
        .iter()
        .map(|v| {
            let mut elements = Vec::with_capacity(d * d);
            for k in 0..d {
                for l in 0..d {
                    elements.push(ComplexMatrix::projector(&weyl_apply(k, l, v)).scale_real(scale));
                }
            }
            Povm::new(elements)
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementEnsemble::uniform(povms)
}

/// Worst overlap `max_{i,j} |<v_j|U_{k,l}|v_i>|` for one displacement.
fn max_displacement_overlap(basis: &Basis, k: usize, l: usize) -> (usize, usize, f64) {
    let mut worst = (0, 0, -1.0f64);
    for (i, vi) in basis.vectors().iter().enumerate() {
        let w = weyl_apply(k, l, vi);
        for (j, vj) in basis.vectors().iter().enumerate() {
            let o = inner(vj, &w).norm();
            if o > worst.2 {
                worst = (i, j, o);
            }
        }
    }
    worst
}

/// Some `(k,l) != (0,0)` with `|<v_j|U_{k,l}|v_i>| < 1` for all `i, j`.
/// The witness is the displacement with the smallest worst-case overlap.
pub fn check_cond(basis: &Basis) -> ConditionReport {
    let d = basis.dim();
    let mut best: Option<Witness> = None;
    for k in 0..d {
        for l in 0..d {
            if k == 0 && l == 0 {
                continue;
            }
            let (i, j, o) = max_displacement_overlap(basis, k, l);
            if best.as_ref().is_none_or(|w| o < w.overlap) {
                best = Some(Witness {
                    labels: "k,l,i,j".into(),
                    indices: vec![k, l, i, j],
                    overlap: o,
                });
            }
        }
    }
    let satisfied = best.as_ref().is_some_and(|w| w.overlap <= 1.0 - STRICT_MARGIN);
    ConditionReport {
        satisfied,
        witness: best,
    }
}

/// Same as [`check_cond`] restricted to one displacement `(k, l)`.
pub fn check_cond_at(basis: &Basis, k: usize, l: usize) -> ConditionReport {
    let (i, j, o) = max_displacement_overlap(basis, k, l);
    ConditionReport {
        satisfied: o <= 1.0 - STRICT_MARGIN,
        witness: Some(Witness {
            labels: "k,l,i,j".into(),
            indices: vec![k, l, i, j],
            overlap: o,
        }),
    }
}

/// `U_d = sum_i w^{i+1/2}|i><i| - (2/d) sum_{i,j} (-1)^{[i=0]+[j=0]} w^{(i+j+1)/2}|i><j|`.
pub fn mixing_unitary(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let c = 2.0 / d as f64;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let sign = if (i == 0) ^ (j == 0) { -1.0 } else { 1.0 };
        let off = root_of_unity((i + j + 1) as f64 / 2.0, d) * (c * sign);
        let diag = if i == j { root_of_unity(i as f64 + 0.5, d) } else { ZERO };
        diag - off
    }))
}

/// Eigenbasis of a normal matrix (e.g. a unitary) from its Hermitian pair
/// `H1 = (U + U^dagger)/2`, `H2 = (U - U^dagger)/(2i)`: diagonalize `H1`, then
/// split each degenerate eigenspace (gap below `1e-8`) with `H2`.
pub fn normal_eigenbasis(u: &ComplexMatrix) -> Result<Basis> {
    const DEGENERACY_TOL: f64 = 1e-8;
    let d = u.dim()?;
    let ud = u.adjoint();
    let h1 = (u + &ud).scale_real(0.5);
    let h2 = (u - &ud).scale(C64::new(0.0, -0.5));
    let e1 = matcore::hermitian_eigen(&h1)?;

    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && e1.eigenvalues[end] - e1.eigenvalues[end - 1] < DEGENERACY_TOL {
            end += 1;
        }
        let block: Vec<Vec<C64>> = (start..end).map(|k| e1.eigenvector(k)).collect();
        if block.len() == 1 {
            vectors.push(block.into_iter().next().unwrap());
        } else {
            // Restrict H2 to the block: B^dagger H2 B, then rotate the block.
            let b = ComplexMatrix::from_columns(&block)?;
            let small = b.adjoint().matmul(&h2)?.matmul(&b)?;
            let e2 = matcore::hermitian_eigen(&small)?;
            let rotated = b.matmul(&e2.eigenvectors)?;
            for k in 0..block.len() {
                vectors.push(normalize(&rotated.column(k)));
            }
        }
        start = end;
    }
    Basis::new(vectors)
}

/// `{cos b|0> + e^{ia} sin b|1>, e^{-ia} sin b|0> - cos b|1>}` with `b` in `(0, pi/4)`.
pub fn magic_qubit_basis(alpha: f64, beta: f64) -> Result<Basis> {
    if !(beta > 0.0 && beta < PI / 4.0) {
        return Err(Error::OutOfRange(format!("beta must lie in (0, pi/4), got {beta}")));
    }
    let (sb, cb) = beta.sin_cos();
    let v0 = vec![C64::new(cb, 0.0), C64::from_polar(sb, alpha)];
    let v1 = vec![C64::from_polar(sb, -alpha), C64::new(-cb, 0.0)];
    Basis::new(vec![v0, v1])
}

/// `alpha = pi/4`, `beta = arccos(1/sqrt 3)/2`.
pub fn default_magic_angles() -> (f64, f64) {
    (PI / 4.0, (1.0 / 3f64.sqrt()).acos() / 2.0)
}

/// Tensor powers of a qubit basis, ordered by binary index with the first
/// factor most significant.
pub fn tensor_power_basis(b: &Basis, r: u32) -> Result<Basis> {
    if b.dim() != 2 {
        return Err(Error::InvalidBasis("tensor power needs a qubit basis".into()));
    }
    if r < 1 {
        return Err(Error::OutOfRange("r must be at least 1".into()));
    }
    let mut vectors: Vec<Vec<C64>> = b.vectors().to_vec();
    for _ in 1..r {
        vectors = vectors
            .iter()
            .flat_map(|u| b.vectors().iter().map(move |v| matcore::kron_vec(u, v)))
            .collect();
    }
    Basis::new(vectors)
}

/// IC basis for `d = 2^r` from the default magic qubit basis; only `r <= 5`
/// is accepted since larger powers have not been checked.
pub fn magic_ic_basis(d: usize) -> Result<Basis> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::OutOfRange(format!("magic basis needs d = 2^r, got {d}")));
    }
    let r = d.trailing_zeros();
    if r > MAX_VERIFIED_MAGIC_POWER {
        return Err(Error::OutOfRange(format!(
            "IC property unverified for d = 2^{r}; supported up to 2^{MAX_VERIFIED_MAGIC_POWER}"
        )));
    }
    let (a, b) = default_magic_angles();
    tensor_power_basis(&magic_qubit_basis(a, b)?, r)
}

/// `|<v_i|U_{k,l}|v_i>| != 0` for every `i, k, l`; witness is the smallest
/// diagonal overlap.
pub fn check_ic_condition(basis: &Basis) -> ConditionReport {
    let d = basis.dim();
    let mut min = Witness {
        labels: "k,l,i".into(),
        indices: vec![0, 0, 0],
        overlap: f64::INFINITY,
    };
    for k in 0..d {
        for l in 0..d {
            for (i, v) in basis.vectors().iter().enumerate() {
                let o = inner(v, &weyl_apply(k, l, v)).norm();
                if o < min.overlap {
                    min = Witness {
                        labels: "k,l,i".into(),
                        indices: vec![k, l, i],
                        overlap: o,
                    };
                }
            }
        }
    }
    ConditionReport {
        satisfied: min.overlap >= STRICT_MARGIN,
        witness: Some(min),
    }
}

/// Normalized `{|1>-|2>, (1+sqrt3)|0>+|1>+|2>, (1-sqrt3)|0>+|1>+|2>}`.
pub fn ic_basis_d3() -> Basis {
    let s3 = 3f64.sqrt();
    Basis::normalized(vec![
        real_vec(&[0.0, 1.0, -1.0]),
        real_vec(&[1.0 + s3, 1.0, 1.0]),
        real_vec(&[1.0 - s3, 1.0, 1.0]),
    ])
    .expect("orthogonal by construction")
}

/// IC basis used by the catalog for dimension `d`: the explicit qutrit basis
/// for `d = 3`, tensor powers of the magic qubit basis for `d = 2^r`.
pub fn ic_basis(d: usize) -> Result<Basis> {
    match d {
        3 => Ok(ic_basis_d3()),
        _ => magic_ic_basis(d),
    }
}

/// `|<j|v_i>| = 1/d` if `i = j`, `sqrt(d+1)/d` otherwise.
pub fn check_condd1(basis: &Basis) -> ConditionReport {
    let d = basis.dim() as f64;
    let mut worst = Witness {
        labels: "i,j".into(),
        indices: vec![0, 0],
        overlap: 0.0,
    };
    let mut worst_dev = -1.0f64;
    for (i, v) in basis.vectors().iter().enumerate() {
        for (j, c) in v.iter().enumerate() {
            let target = if i == j { 1.0 / d } else { (d + 1.0).sqrt() / d };
            let dev = (c.norm() - target).abs();
            if dev > worst_dev {
                worst_dev = dev;
                worst = Witness {
                    labels: "i,j".into(),
                    indices: vec![i, j],
                    overlap: c.norm(),
                };
            }
        }
    }
    ConditionReport {
        satisfied: worst_dev <= STRICT_MARGIN,
        witness: Some(worst),
    }
}

/// Vectors `eta^a_x = Z^a |v_x>` for `a < d` and `eta^d_x = |x>`.
pub fn dplus1_vectors(basis: &Basis) -> Vec<Vec<Vec<C64>>> {
    let d = basis.dim();
    (0..d)
        .map(|x| {
            let mut etas: Vec<Vec<C64>> = (0..d).map(|a| weyl_apply(0, a, basis.vector(x))).collect();
            etas.push(matcore::basis_vector(d, x));
            etas
        })
        .collect()
}

/// Builds the `(d+1)`-outcome POVMs `M^a_x = d/(d+1) |eta^a_x><eta^a_x|` without
/// checking the overlap condition; completeness fails if it does not hold.
pub fn dplus1_povm_ensemble_unchecked(basis: &Basis) -> Result<MeasurementEnsemble> {
    let d = basis.dim();
    check_dim(d)?;
    let w = d as f64 / (d as f64 + 1.0);
    let povms = dplus1_vectors(basis)
        .iter()
        .map(|etas| Povm::from_rank_one(etas, w))
        .collect::<Result<Vec<_>>>()?;
    MeasurementEnsemble::uniform(povms)
}

pub fn dplus1_povm_ensemble(basis: &Basis) -> Result<MeasurementEnsemble> {
    let report = check_condd1(basis);
    if !report.satisfied {
        let w = report.witness.expect("always present");
        return Err(Error::ConditionViolated(format!(
            "|<{}|v_{}>| = {:.6} breaks the (d+1)-outcome overlap pattern",
            w.indices[1], w.indices[0], w.overlap
        )));
    }
    dplus1_povm_ensemble_unchecked(basis)
}

/// The explicit bases satisfying the `(d+1)`-outcome overlap pattern for `d = 2, 3, 4`.
pub fn example_basis_dplus1(d: usize) -> Result<Basis> {
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let vectors = match d {
        2 => vec![real_vec(&[0.5, s3 / 2.0]), real_vec(&[s3 / 2.0, -0.5])],
        3 => (0..3)
            .map(|i| {
                let mut v = [0.0; 3];
                v[i] = 1.0 / 3.0;
                v[(i + 1) % 3] = -2.0 / 3.0;
                v[(i + 2) % 3] = -2.0 / 3.0;
                real_vec(&v)
            })
            .collect(),
        4 => [
            [1.0, s5, s5, s5],
            [s5, -1.0, s5, -s5],
            [s5, -s5, -1.0, s5],
            [s5, s5, -s5, -1.0],
        ]
        .iter()
        .map(|v| real_vec(&v.map(|c| c / 4.0)))
        .collect(),
        _ => return Err(Error::OutOfRange(format!("no example (d+1)-outcome basis for d={d}"))),
    };
    Basis::new(vectors)
}

/// Two three-outcome qubit POVMs `{2/3 |v_i><v_i|, 2/3 Z|v_i><v_i|Z, 2/3 |i><i|}`.
pub fn trine_pair_ensemble() -> MeasurementEnsemble {
    dplus1_povm_ensemble(&example_basis_dplus1(2).expect("d=2 example")).expect("d=2 example satisfies condition")
}

/// Measurement families with a known perfect entanglement-assisted strategy.
#[derive(Clone, Debug)]
pub enum Construction {
    /// Rank-one projective measurements, `bases[x].vector(a) = |v_x^a>`.
    Projective(Vec<Basis>),
    /// `d^2`-outcome Weyl-covariant POVMs.
    WeylCovariant(Basis),
    /// `(d+1)`-outcome POVMs.
    DPlusOne(Basis),
}

impl Construction {
    pub fn ensemble(&self) -> Result<MeasurementEnsemble> {
        match self {
            Construction::Projective(bases) => projective_ensemble(bases),
            Construction::WeylCovariant(b) => weyl_covariant_povm_ensemble(b),
            Construction::DPlusOne(b) => dplus1_povm_ensemble(b),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Construction::Projective(bases) => bases[0].dim(),
            Construction::WeylCovariant(b) | Construction::DPlusOne(b) => b.dim(),
        }
    }
}

/// Bob's measurements from the perfect-discrimination strategies: for each of
/// Alice's outcomes, a projective POVM over her settings whose elements are
/// transposes of the rank-one projectors behind `M^a_x`.
pub fn proof_bob_measurements(kind: &Construction) -> Result<Vec<Povm>> {
    let transposed = |vs: &[&[C64]]| -> Result<Povm> {
        Povm::new(vs.iter().map(|v| ComplexMatrix::projector(v).transpose()).collect())
    };
    match kind {
        Construction::Projective(bases) => {
            let d = bases[0].dim();
            (0..d)
                .map(|a| transposed(&bases.iter().map(|b| b.vector(a)).collect::<Vec<_>>()))
                .collect()
        }
        Construction::WeylCovariant(basis) => {
            let d = basis.dim();
            let mut out = Vec::with_capacity(d * d);
            for k in 0..d {
                for l in 0..d {
                    let shifted: Vec<Vec<C64>> = basis.vectors().iter().map(|v| weyl_apply(k, l, v)).collect();
                    out.push(transposed(&shifted.iter().map(Vec::as_slice).collect::<Vec<_>>())?);
                }
            }
            Ok(out)
        }
        Construction::DPlusOne(basis) => {
            let etas = dplus1_vectors(basis);
            let d = basis.dim();
            (0..=d)
                .map(|a| transposed(&etas.iter().map(|e| e[a].as_slice()).collect::<Vec<_>>()))
                .collect()
        }
    }
}

/// Result of the randomized search for projective measurement sets
/// satisfying both overlap conditions.
#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub dim: usize,
    pub trials: usize,
    /// Candidates passing condition 1 (outcome-wise orthonormality).
    pub condition1_hits: usize,
    /// Candidates passing both conditions.
    pub satisfying: usize,
}

/// Random candidate set of `d` orthonormal bases. Three families are mixed:
/// independent random bases, rotated Latin-square arrangements of a single
/// basis (always outcome-wise orthonormal), and a perturbed completion of the
/// computational basis.
fn random_candidate(rng: &mut ChaCha8Rng, d: usize) -> Vec<Basis> {
    match rng.gen_range(0..3) {
        0 => (0..d)
            .map(|_| Basis::from_unitary(&matcore::random_unitary(rng, d)).expect("unitary"))
            .collect(),
        1 => {
            let v = matcore::random_unitary(rng, d);
            let mut rows: Vec<usize> = (0..d).collect();
            let mut cols: Vec<usize> = (0..d).collect();
            let mut syms: Vec<usize> = (0..d).collect();
            rows.shuffle(rng);
            cols.shuffle(rng);
            syms.shuffle(rng);
            (0..d)
                .map(|x| {
                    let vecs = (0..d)
                        .map(|a| {
                            let s = syms[(rows[x] + cols[a]) % d];
                            let phase = C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
                            v.column(s).iter().map(|c| c * phase).collect()
                        })
                        .collect();
                    Basis::new(vecs).expect("columns of a unitary")
                })
                .collect()
        }
        _ => {
            // First setting computational, the rest random completions.
            let mut bases = vec![Basis::computational(d)];
            for _ in 1..d {
                bases.push(Basis::from_unitary(&matcore::random_unitary(rng, d)).expect("unitary"));
            }
            let v = matcore::random_unitary(rng, d);
            bases.iter().map(|b| b.rotated(&v).expect("unitary")).collect()
        }
    }
}

/// Samples `trials` candidate sets and counts how many satisfy both
/// conditions of [`check_projective_conditions`].
pub fn search_projective_sets(d: usize, trials: usize, seed: u64) -> Result<SearchOutcome> {
    check_dim(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SearchOutcome {
        dim: d,
        trials,
        condition1_hits: 0,
        satisfying: 0,
    };
    for _ in 0..trials {
        let cand = random_candidate(&mut rng, d);
        let rep = check_projective_conditions(&cand)?;
        let cond1 = rep.witness.as_ref().is_some_and(|w| w.labels != "a,x,x'");
        if cond1 {
            out.condition1_hits += 1;
        }
        if rep.satisfied {
            out.satisfying += 1;
        }
    }
    Ok(out)
}
