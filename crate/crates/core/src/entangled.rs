//! Entanglement-assisted discrimination. Alice applies the unknown
//! measurement to her half of a shared state, announces the outcome `a`, and
//! Bob guesses the setting `x` with a measurement chosen per outcome:
//!
//! `B = sum_{x,a} p(x) Tr[rho (M^a_x (x) N^a_x)]`.
//!
//! Given `a`, Bob faces a minimum-error problem over the subnormalized
//! operators `sigma[a][x] = p(x) Tr_A[(M^a_x (x) 1) rho]`, so the optimum
//! splits into one independent problem per outcome.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcore::{self, kron, ComplexMatrix, C64};
use crate::measurements::{self, matrix_from_pairs, matrix_to_pairs, MeasurementEnsemble, Povm};

/// Eigenvalues at or below this are treated as zero in inverse square roots.
pub const SPECTRAL_FLOOR: f64 = 1e-12;
pub const DEFAULT_MARGIN: f64 = 1e-4;

/// Density matrix on `C^{dim_a} (x) C^{dim_b}`, A-major ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteDensity {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct DensityDoc {
    dim_a: usize,
    dim_b: usize,
    matrix: Vec<[f64; 2]>,
}

impl BipartiteDensity {
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidDensity("subsystem dimensions must be positive".into()));
        }
        let tr = matrix.trace().re;
        if matrix.is_square() && (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        measurements::check_density(&matrix, dim_a * dim_b, matcore::DEFAULT_TOL)?;
        Ok(Self { dim_a, dim_b, matrix })
    }

    /// `|psi><psi|` for a normalized `psi` in A-major order.
    pub fn pure(dim_a: usize, dim_b: usize, psi: &[C64]) -> Result<Self> {
        if psi.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {dim_a}x{dim_b}",
                psi.len()
            )));
        }
        Self::new(dim_a, dim_b, ComplexMatrix::projector(psi))
    }

    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        Self::new(rho_a.dim()?, rho_b.dim()?, kron(rho_a, rho_b))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn reduced_a(&self) -> ComplexMatrix {
        matcore::partial_trace_b(&self.matrix, self.dim_a, self.dim_b).expect("consistent dims")
    }

    pub fn reduced_b(&self) -> ComplexMatrix {
        matcore::partial_trace_a(&self.matrix, self.dim_a, self.dim_b).expect("consistent dims")
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DensityDoc {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: matrix_to_pairs(&self.matrix),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DensityDoc = serde_json::from_str(text)?;
        let n = doc.dim_a * doc.dim_b;
        if doc.matrix.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                doc.matrix.len()
            )));
        }
        Self::new(doc.dim_a, doc.dim_b, matrix_from_pairs(n, &doc.matrix)?)
    }
}

/// `(1/sqrt d) sum_i |ii>`
pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let mut v = vec![matcore::ZERO; d * d];
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

pub fn max_entangled(d: usize) -> Result<BipartiteDensity> {
    if d < 2 {
        return Err(Error::OutOfRange(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    BipartiteDensity::pure(d, d, &max_entangled_vector(d))
}

/// `sin(alpha)|00> + cos(alpha)|11>`
pub fn pure_two_qubit(alpha: f64) -> BipartiteDensity {
    let (s, c) = alpha.sin_cos();
    let psi = matcore::real_vec(&[s, 0.0, 0.0, c]);
    BipartiteDensity::pure(2, 2, &psi).expect("unit vector")
}

/// `p |phi+><phi+| + (1-p) 1/4`
pub fn werner_state(p: f64) -> Result<BipartiteDensity> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!(
            "Werner parameter must lie in [0, 1], got {p}"
        )));
    }
    let bell = ComplexMatrix::projector(&max_entangled_vector(2));
    let noise = ComplexMatrix::identity(4).scale_real(0.25);
    BipartiteDensity::new(2, 2, &bell.scale_real(p) + &noise.scale_real(1.0 - p))
}

/// Bob's conditional operators `sigma[a][x]`, priors included.
#[derive(Clone, Debug)]
pub struct Assemblage {
    dim_b: usize,
    operators: Vec<Vec<ComplexMatrix>>,
}

impl Assemblage {
    pub fn new(operators: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let dim_b = operators
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| Error::DimensionMismatch("empty assemblage".into()))?
            .dim()?;
        let settings = operators[0].len();
        for row in &operators {
            if row.len() != settings {
                return Err(Error::DimensionMismatch("ragged assemblage".into()));
            }
            if row.iter().any(|m| m.rows() != dim_b || m.cols() != dim_b) {
                return Err(Error::DimensionMismatch("assemblage operators differ in size".into()));
            }
        }
        Ok(Self { dim_b, operators })
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn outcomes(&self) -> usize {
        self.operators.len()
    }

    pub fn settings(&self) -> usize {
        self.operators[0].len()
    }

    /// `sigma[a][x]`
    pub fn get(&self, a: usize, x: usize) -> &ComplexMatrix {
        &self.operators[a][x]
    }

    pub fn for_outcome(&self, a: usize) -> &[ComplexMatrix] {
        &self.operators[a]
    }

    pub fn total_trace(&self) -> f64 {
        self.operators.iter().flatten().map(|m| m.trace().re).sum()
    }
}

pub fn assemblage_of(rho: &BipartiteDensity, ens: &MeasurementEnsemble) -> Result<Assemblage> {
    if rho.dim_a() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dim_A={} but the ensemble acts on dimension {}",
            rho.dim_a(),
            ens.dim()
        )));
    }
    let id_b = ComplexMatrix::identity(rho.dim_b());
    let operators = (0..ens.outcomes())
        .map(|a| {
            (0..ens.settings())
                .map(|x| {
                    let lifted = kron(ens.element(x, a), &id_b);
                    let reduced = matcore::partial_trace_a(&lifted.matmul(rho.matrix())?, rho.dim_a(), rho.dim_b())?;
                    Ok(reduced.hermitian_part().scale_real(ens.priors()[x]))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(operators)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BMethod {
    ExactBob,
    Helstrom,
    Iterative,
}

fn serialize_povms<S: Serializer>(povms: &Option<Vec<Povm>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Option<Vec<Vec<Vec<[f64; 2]>>>> = povms.as_ref().map(|ps| {
        ps.iter()
            .map(|p| p.elements().iter().map(matrix_to_pairs).collect())
            .collect()
    });
    pairs.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct BValueReport {
    pub value: f64,
    pub method: BMethod,
    /// `bob_povms[a]` is Bob's measurement after Alice reports `a`; element
    /// `x` is his guess of the setting.
    #[serde(serialize_with = "serialize_povms")]
    pub bob_povms: Option<Vec<Povm>>,
    pub iterations: usize,
    /// Upper bound on the optimum from the dual certificate.
    pub dual_bound: Option<f64>,
    pub gap: Option<f64>,
    pub converged: bool,
}

fn check_bob_shape(bob: &[Povm], rho: &BipartiteDensity, ens: &MeasurementEnsemble) -> Result<()> {
    if bob.len() != ens.outcomes() {
        return Err(Error::DimensionMismatch(format!(
            "{} Bob measurements for {} outcomes",
            bob.len(),
            ens.outcomes()
        )));
    }
    for (a, n) in bob.iter().enumerate() {
        if n.dim() != rho.dim_b() || n.outcomes() != ens.settings() {
            return Err(Error::DimensionMismatch(format!(
                "Bob measurement {a} has {} outcomes on dimension {}, expected {} on {}",
                n.outcomes(),
                n.dim(),
                ens.settings(),
                rho.dim_b()
            )));
        }
    }
    Ok(())
}

/// Direct evaluation of the success probability for fixed Bob measurements.
pub fn b_value_with_bob(rho: &BipartiteDensity, ens: &MeasurementEnsemble, bob: &[Povm]) -> Result<BValueReport> {
    if rho.dim_a() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim_A={} vs ensemble dim {}",
            rho.dim_a(),
            ens.dim()
        )));
    }
    check_bob_shape(bob, rho, ens)?;
    let mut value = 0.0;
    for (a, n) in bob.iter().enumerate() {
        for (x, &px) in ens.priors().iter().enumerate() {
            value += px * rho.matrix().trace_product(&kron(ens.element(x, a), n.element(x)))?.re;
        }
    }
    Ok(BValueReport {
        value,
        method: BMethod::ExactBob,
        bob_povms: Some(bob.to_vec()),
        iterations: 0,
        dual_bound: None,
        gap: None,
        converged: true,
    })
}

/// Optimal two-hypothesis discrimination of subnormalized operators.
#[derive(Clone, Debug)]
pub struct HelstromSolution {
    pub value: f64,
    /// Outcome 0 projects onto the positive eigenspace of `s0 - s1`.
    pub povm: Povm,
}

/// `(Tr(s0 + s1) + ||s0 - s1||_1) / 2` together with the measurement that
/// attains it.
pub fn helstrom_pair(s0: &ComplexMatrix, s1: &ComplexMatrix) -> Result<HelstromSolution> {
    for s in [s0, s1] {
        if !matcore::is_psd(s, matcore::DEFAULT_TOL) {
            return Err(Error::NotPsd(matcore::min_eigenvalue(s, 1e-6).unwrap_or(f64::NAN)));
        }
    }
    if s0.rows() != s1.rows() {
        return Err(Error::DimensionMismatch("Helstrom operators differ in size".into()));
    }
    let diff = (s0 - s1).hermitian_part();
    let eig = matcore::hermitian_eigen(&diff)?;
    let p0 = eig.map_spectrum(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let p1 = &ComplexMatrix::identity(s0.rows()) - &p0;
    let value = (s0.trace().re + s1.trace().re + eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()) / 2.0;
    Ok(HelstromSolution {
        value,
        povm: Povm::new(vec![p0, p1])?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Target duality gap.
    pub tol: f64,
    /// Use the fixed-point solver even for two settings.
    pub force_iterative: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tol: 1e-8,
            force_iterative: false,
        }
    }
}

/// Minimum-error measurement for `n` subnormalized operators.
#[derive(Clone, Debug)]
pub struct MinErrorSolution {
    pub value: f64,
    pub povm: Povm,
    pub iterations: usize,
    pub dual_bound: f64,
    pub gap: f64,
    pub converged: bool,
}

/// Dual-feasible `Y = herm(sum_x sigma_x Pi_x) + lambda 1 >= sigma_x`; returns
/// `(primal, Tr Y)`.
pub fn dual_certificate(states: &[ComplexMatrix], povm: &[ComplexMatrix]) -> Result<(f64, f64)> {
    let dim = states[0].rows();
    let terms: Vec<ComplexMatrix> = states
        .iter()
        .zip(povm)
        .map(|(s, p)| s.matmul(p))
        .collect::<Result<_>>()?;
    let y = matcore::sum_matrices(terms.iter()).expect("non-empty").hermitian_part();
    let primal = y.trace().re;
    let mut lambda = 0.0f64;
    for s in states {
        let eig = matcore::hermitian_eigen(&(s - &y).hermitian_part())?;
        lambda = lambda.max(*eig.eigenvalues.last().expect("non-empty"));
    }
    Ok((primal, primal + dim as f64 * lambda))
}

fn herm_sandwich(left: &ComplexMatrix, mid: &ComplexMatrix) -> ComplexMatrix {
    left.matmul(mid)
        .and_then(|m| m.matmul(left))
        .expect("square")
        .hermitian_part()
}

/// Adds the projector onto the complement of `support` to the first element.
fn complete(povm: &mut [ComplexMatrix], support: &ComplexMatrix) {
    let rest = &ComplexMatrix::identity(support.rows()) - support;
    povm[0] = &povm[0] + &rest;
}

/// Fixed-point iteration `Pi_x <- G^{-1/2} sigma_x Pi_x sigma_x G^{-1/2}`,
/// `G = sum_y sigma_y Pi_y sigma_y`, started from the pretty-good
/// measurement and stopped once the dual certificate closes to `cfg.tol`.
pub fn min_error_iterative(states: &[ComplexMatrix], cfg: &SolverConfig) -> Result<MinErrorSolution> {
    let first = states
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no hypotheses".into()))?;
    let dim = first.dim()?;
    if states.iter().any(|s| s.rows() != dim || s.cols() != dim) {
        return Err(Error::DimensionMismatch("hypotheses differ in size".into()));
    }

    let total = matcore::sum_matrices(states.iter()).expect("non-empty");
    let (s_inv, support) = matcore::psd_inv_sqrt(&total, SPECTRAL_FLOOR)?;
    let mut povm: Vec<ComplexMatrix> = states.iter().map(|s| herm_sandwich(&s_inv, s)).collect();
    complete(&mut povm, &support);

    let mut iterations = 0;
    let (mut primal, mut dual) = dual_certificate(states, &povm)?;
    while dual - primal >= cfg.tol && iterations < cfg.max_iterations {
        // The certificate costs about as much as an update; check it every few steps.
        for _ in 0..8 {
            let weighted: Vec<ComplexMatrix> = states
                .iter()
                .zip(&povm)
                .map(|(s, p)| s.matmul(p).and_then(|m| m.matmul(s)).map(|m| m.hermitian_part()))
                .collect::<Result<_>>()?;
            let g = matcore::sum_matrices(weighted.iter()).expect("non-empty");
            let (g_inv, g_support) = matcore::psd_inv_sqrt(&g, SPECTRAL_FLOOR)?;
            povm = weighted.iter().map(|w| herm_sandwich(&g_inv, w)).collect();
            complete(&mut povm, &g_support);
            iterations += 1;
        }
        (primal, dual) = dual_certificate(states, &povm)?;
    }
    let gap = (dual - primal).max(0.0);
    Ok(MinErrorSolution {
        value: primal,
        povm: Povm::new(povm)?,
        iterations,
        dual_bound: dual,
        gap,
        converged: gap < cfg.tol,
    })
}

/// Optimal entanglement-assisted success probability for `rho`. Two settings
/// are solved exactly; otherwise each outcome uses [`min_error_iterative`].
pub fn b_value_optimal(rho: &BipartiteDensity, ens: &MeasurementEnsemble, cfg: &SolverConfig) -> Result<BValueReport> {
    let asm = assemblage_of(rho, ens)?;
    let exact = ens.settings() <= 2 && !cfg.force_iterative;
    let per_outcome: Vec<MinErrorSolution> = (0..asm.outcomes())
        .into_par_iter()
        .map(|a| {
            let states = asm.for_outcome(a);
            match states {
                [only] => Ok(MinErrorSolution {
                    value: only.trace().re,
                    povm: Povm::new(vec![ComplexMatrix::identity(asm.dim_b())])?,
                    iterations: 0,
                    dual_bound: only.trace().re,
                    gap: 0.0,
                    converged: true,
                }),
                [s0, s1] if exact => {
                    let h = helstrom_pair(s0, s1)?;
                    Ok(MinErrorSolution {
                        value: h.value,
                        povm: h.povm,
                        iterations: 0,
                        dual_bound: h.value,
                        gap: 0.0,
                        converged: true,
                    })
                }
                _ => min_error_iterative(states, cfg),
            }
        })
        .collect::<Result<_>>()?;

    let bob: Vec<Povm> = per_outcome.iter().map(|s| s.povm.clone()).collect();
    let value = b_value_with_bob(rho, ens, &bob)?.value;
    Ok(BValueReport {
        value,
        method: if exact { BMethod::Helstrom } else { BMethod::Iterative },
        bob_povms: Some(bob),
        iterations: per_outcome.iter().map(|s| s.iterations).max().unwrap_or(0),
        dual_bound: Some(per_outcome.iter().map(|s| s.dual_bound).sum()),
        gap: Some(per_outcome.iter().map(|s| s.gap).sum()),
        converged: per_outcome.iter().all(|s| s.converged),
    })
}

/// `(4 + sqrt(1 + 3 C^2)) / 6` with concurrence `C = sin(2 alpha)`.
pub fn two_qubit_b_closed(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= FRAC_PI_4) {
        return Err(Error::OutOfRange(format!("alpha must lie in (0, pi/4], got {alpha}")));
    }
    let c = (2.0 * alpha).sin();
    Ok((4.0 + (1.0 + 3.0 * c * c).sqrt()) / 6.0)
}

/// Observables `sin t X - cos t Z`, `-sin t X - cos t Z`, `Z` with
/// `sin t = sqrt(3) C / sqrt(1 + 3 C^2)`, one per Alice outcome.
pub fn two_qubit_observables(alpha: f64) -> [ComplexMatrix; 3] {
    let c = (2.0 * alpha).sin();
    let norm = (1.0 + 3.0 * c * c).sqrt();
    let (s, co) = (3f64.sqrt() * c / norm, 1.0 / norm);
    let obs = |sx: f64, sz: f64| ComplexMatrix::from_real(2, 2, &[sz, sx, sx, -sz]).expect("2x2");
    [obs(s, -co), obs(-s, -co), obs(0.0, 1.0)]
}

/// Bob's optimal measurements for `sin a|00> + cos a|11>` and the trine pair:
/// guess `x = 0` on the `+1` eigenspace of each observable.
pub fn two_qubit_optimal_bob(alpha: f64) -> Vec<Povm> {
    two_qubit_observables(alpha)
        .iter()
        .map(|n| {
            let id = ComplexMatrix::identity(2);
            let plus = (&id + n).scale_real(0.5);
            let minus = (&id - n).scale_real(0.5);
            Povm::new(vec![plus, minus]).expect("2x2")
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SteerableWitnessed,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessRecord {
    pub verdict: Verdict,
    pub b_value: f64,
    pub d_value: f64,
    /// `b_value - d_value`
    pub gap: f64,
    pub margin: f64,
    pub solver_gap: f64,
}

/// Entanglement-assisted advantage over the single-system value certifies that
/// `rho` is steerable. Failing to exceed it proves nothing.
pub fn steering_witness(
    rho: &BipartiteDensity,
    ens: &MeasurementEnsemble,
    d_value: f64,
    margin: f64,
    cfg: &SolverConfig,
) -> Result<WitnessRecord> {
    let report = b_value_optimal(rho, ens, cfg)?;
    let gap = report.value - d_value;
    Ok(WitnessRecord {
        verdict: if gap > margin {
            Verdict::SteerableWitnessed
        } else {
            Verdict::Inconclusive
        },
        b_value: report.value,
        d_value,
        gap,
        margin,
        solver_gap: report.gap.unwrap_or(0.0),
    })
}

/// Bloch-sphere projectors `(1 + n.sigma)/2`, used as a brute-force oracle.
pub fn qubit_projector(theta: f64, phi: f64) -> ComplexMatrix {
    let (st, ct) = theta.sin_cos();
    let off = C64::from_polar(st, -phi) * 0.5;
    ComplexMatrix::new(
        2,
        2,
        vec![
            C64::new((1.0 + ct) / 2.0, 0.0),
            off,
            off.conj(),
            C64::new((1.0 - ct) / 2.0, 0.0),
        ],
    )
    .expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{d4_projective_bases, proof_bob_measurements, trine_pair_ensemble, Construction};
    use crate::matcore::{random_density, random_unit_vector};
    use crate::single_system::{restart_rng, score};
    use rand::Rng;
    use std::f64::consts::PI;

    fn angle_grid(n: usize) -> impl Iterator<Item = (f64, f64)> {
        (0..n).flat_map(move |i| (0..n).map(move |j| (PI * i as f64 / (n - 1) as f64, 2.0 * PI * j as f64 / n as f64)))
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn states() {
        let bell = max_entangled(2).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(bell.reduced_a().max_abs_diff(&half) < 1e-15);
        assert!(bell.reduced_b().max_abs_diff(&half) < 1e-15);
        let m = bell.matrix();
        assert!((m.trace_product(m).unwrap().re - 1.0).abs() < 1e-14);
        assert!(max_entangled(1).is_err());

        assert!(werner_state(1.0).unwrap().matrix().max_abs_diff(m) < 1e-15);
        assert!(
            werner_state(0.0)
                .unwrap()
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-15
        );
        assert!(werner_state(1.1).is_err() && werner_state(-0.1).is_err());
        assert!(BipartiteDensity::new(2, 2, ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = werner_state(0.37).unwrap();
        let back = BipartiteDensity::from_json(&w.to_json().unwrap()).unwrap();
        assert_eq!(back, w);
        assert!(BipartiteDensity::from_json(r#"{"dim_a":2,"dim_b":2,"matrix":[[1,0]]}"#).is_err());
    }

    #[test]
    fn maxent_transpose_trick() {
        let mut rng = restart_rng(11, 0);
        for d in 2..=3 {
            let psi = max_entangled_vector(d);
            for _ in 0..5 {
                let a = matcore::random_matrix(&mut rng, d, d);
                let b = matcore::random_matrix(&mut rng, d, d);
                let lhs = ComplexMatrix::projector(&psi).trace_product(&kron(&a, &b)).unwrap();
                let rhs = a.matmul(&b.transpose()).unwrap().trace() / d as f64;
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn assemblage_product_and_maxent() {
        let trine = trine_pair_ensemble();
        let mut rng = restart_rng(12, 0);
        let psi = random_unit_vector(&mut rng, 2);
        let phi = random_unit_vector(&mut rng, 2);
        let pb = ComplexMatrix::projector(&phi);
        let rho = BipartiteDensity::product(&ComplexMatrix::projector(&psi), &pb).unwrap();
        let asm = assemblage_of(&rho, &trine).unwrap();
        assert!((asm.total_trace() - 1.0).abs() < 1e-12);
        for a in 0..3 {
            for x in 0..2 {
                let w = 0.5 * trine.element(x, a).expectation(&psi).re;
                assert!(asm.get(a, x).max_abs_diff(&pb.scale_real(w)) < 1e-14);
            }
        }

        let bases = d4_projective_bases();
        let ens = Construction::Projective(bases.clone()).ensemble().unwrap();
        let asm = assemblage_of(&max_entangled(4).unwrap(), &ens).unwrap();
        for (x, b) in bases.iter().enumerate() {
            for a in 0..4 {
                let expected = ComplexMatrix::projector(b.vector(a)).transpose().scale_real(0.25 / 4.0);
                assert!(asm.get(a, x).max_abs_diff(&expected) < 1e-14);
            }
        }
        let bad = BipartiteDensity::new(3, 1, ComplexMatrix::identity(3).scale_real(1.0 / 3.0)).unwrap();
        assert!(assemblage_of(&bad, &trine).is_err());
    }

    #[test]
    fn exact_bob_shapes() {
        let trine = trine_pair_ensemble();
        let bell = max_entangled(2).unwrap();
        let bob = two_qubit_optimal_bob(FRAC_PI_4);
        assert!(b_value_with_bob(&bell, &trine, &bob[..2]).is_err());
        let r = b_value_with_bob(&bell, &trine, &bob).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.method, BMethod::ExactBob);
    }

    #[test]
    fn helstrom_basics() {
        let mut rng = restart_rng(13, 0);
        let s = random_density(&mut rng, 2).scale_real(0.3);
        assert!((helstrom_pair(&s, &s).unwrap().value - 0.3).abs() < 1e-12);
        let p0 = ComplexMatrix::projector(&matcore::basis_vector(2, 0)).scale_real(0.2);
        let p1 = ComplexMatrix::projector(&matcore::basis_vector(2, 1)).scale_real(0.5);
        assert!((helstrom_pair(&p0, &p1).unwrap().value - 0.7).abs() < 1e-12);
        assert!(helstrom_pair(&pauli_x(), &p0).is_err());
    }

    #[test]
    fn helstrom_matches_scan() {
        let mut rng = restart_rng(14, 0);
        for _ in 0..5 {
            let w: f64 = rng.gen_range(0.1..0.9);
            let s0 = random_density(&mut rng, 2).scale_real(w);
            let s1 = random_density(&mut rng, 2).scale_real(1.0 - w);
            let h = helstrom_pair(&s0, &s1).unwrap();
            let direct =
                s0.trace_product(h.povm.element(0)).unwrap().re + s1.trace_product(h.povm.element(1)).unwrap().re;
            assert!((direct - h.value).abs() < 1e-12);
            let mut best = s0.trace().re.max(s1.trace().re);
            for (t, p) in angle_grid(100) {
                let n0 = qubit_projector(t, p);
                let v = s1.trace().re + (&s0 - &s1).trace_product(&n0).unwrap().re;
                best = best.max(v);
            }
            assert!(best <= h.value + 1e-12);
            assert!(h.value - best < 1e-3);
        }
    }

    #[test]
    fn iterative_on_trine_states() {
        let states: Vec<ComplexMatrix> = (0..3)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 3.0;
                ComplexMatrix::projector(&matcore::real_vec(&[(t / 2.0).cos(), (t / 2.0).sin()])).scale_real(1.0 / 3.0)
            })
            .collect();
        let sol = min_error_iterative(&states, &SolverConfig::default()).unwrap();
        assert!((sol.value - 2.0 / 3.0).abs() < 1e-8);
        assert!(sol.converged);
        assert!(sol.povm.is_valid(1e-9));
    }

    #[test]
    fn iterative_agrees_with_helstrom() {
        let mut rng = restart_rng(15, 0);
        let cfg = SolverConfig::default();
        for d in [2, 3] {
            for _ in 0..3 {
                let s0 = random_density(&mut rng, d).scale_real(0.4);
                let s1 = random_density(&mut rng, d).scale_real(0.6);
                let h = helstrom_pair(&s0, &s1).unwrap().value;
                let it = min_error_iterative(&[s0, s1], &cfg).unwrap();
                assert!(it.value <= h + 1e-10 && h <= it.dual_bound + 1e-10);
                assert!((it.value - h).abs() < 1e-6, "{} vs {h}", it.value);
            }
        }
    }

    #[test]
    fn werner_line() {
        let trine = trine_pair_ensemble();
        for p in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
            let r = b_value_optimal(&werner_state(p).unwrap(), &trine, &SolverConfig::default()).unwrap();
            assert!((r.value - (1.0 + p) / 2.0).abs() < 1e-10, "p={p}: {}", r.value);
            assert_eq!(r.method, BMethod::Helstrom);
        }
        let forced = SolverConfig {
            force_iterative: true,
            ..Default::default()
        };
        let r = b_value_optimal(&werner_state(0.8).unwrap(), &trine, &forced).unwrap();
        assert_eq!(r.method, BMethod::Iterative);
        assert!((r.value - 0.9).abs() < 1e-6);
    }

    #[test]
    fn product_state_gives_single_system_score() {
        let trine = trine_pair_ensemble();
        let mut rng = restart_rng(16, 0);
        for _ in 0..5 {
            let psi = random_unit_vector(&mut rng, 2);
            let phi = random_unit_vector(&mut rng, 2);
            let rho =
                BipartiteDensity::product(&ComplexMatrix::projector(&psi), &ComplexMatrix::projector(&phi)).unwrap();
            let b = b_value_optimal(&rho, &trine, &SolverConfig::default()).unwrap().value;
            assert!((b - score(&psi, &trine).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn two_qubit_closed_form() {
        assert!((two_qubit_b_closed(FRAC_PI_4).unwrap() - 1.0).abs() < 1e-15);
        assert!((two_qubit_b_closed(1e-9).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        let expected = (4.0 + 2.5f64.sqrt()) / 6.0;
        assert!((two_qubit_b_closed(PI / 8.0).unwrap() - expected).abs() < 1e-14);
        assert!(two_qubit_b_closed(0.0).is_err() && two_qubit_b_closed(1.0).is_err());

        let trine = trine_pair_ensemble();
        for alpha in [PI / 16.0, PI / 8.0, FRAC_PI_4] {
            let r = b_value_with_bob(&pure_two_qubit(alpha), &trine, &two_qubit_optimal_bob(alpha)).unwrap();
            assert!((r.value - two_qubit_b_closed(alpha).unwrap()).abs() < 1e-10);
        }
        let obs = two_qubit_observables(FRAC_PI_4);
        assert!((obs[0][(0, 1)].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
        for o in &obs {
            assert!(o.matmul(o).unwrap().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
        }
    }

    #[test]
    fn proof_measurements_reach_one() {
        let kind = Construction::Projective(d4_projective_bases());
        let bob = proof_bob_measurements(&kind).unwrap();
        let r = b_value_with_bob(&max_entangled(4).unwrap(), &kind.ensemble().unwrap(), &bob).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn witness_verdicts() {
        let trine = trine_pair_ensemble();
        let cfg = SolverConfig::default();
        let d = 5.0 / 6.0;
        let w = steering_witness(&werner_state(0.9).unwrap(), &trine, d, DEFAULT_MARGIN, &cfg).unwrap();
        assert_eq!(w.verdict, Verdict::SteerableWitnessed);
        let w = steering_witness(&werner_state(0.6).unwrap(), &trine, d, DEFAULT_MARGIN, &cfg).unwrap();
        assert_eq!(w.verdict, Verdict::Inconclusive);
        let prod = BipartiteDensity::product(
            &ComplexMatrix::projector(&matcore::basis_vector(2, 1)),
            &ComplexMatrix::identity(2).scale_real(0.5),
        )
        .unwrap();
        let w = steering_witness(&prod, &trine, d, DEFAULT_MARGIN, &cfg).unwrap();
        assert_eq!(w.verdict, Verdict::Inconclusive);
        assert!(w.gap.abs() < 1e-12);
    }
}
