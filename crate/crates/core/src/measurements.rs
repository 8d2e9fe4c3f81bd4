//! POVMs, ensembles of measurements with prior weights, and their validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, C64};

/// An ordered list of measurement operators, one per outcome.
///
/// The constructor checks shapes only; positivity and completeness are
/// reported by [`Povm::certificate`] / [`validate`] so that defective
/// measurements can still be inspected.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no outcomes".into()))?;
        let dim = first.dim()?;
        for (a, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "outcome {a} is {}x{}, expected {dim}x{dim}",
                    e.rows(),
                    e.cols()
                )));
            }
        }
        Ok(Self { dim, elements })
    }

    /// Like [`Povm::new`] but also rejects elements that are not PSD or do not
    /// sum to the identity within `tol`.
    pub fn new_checked(elements: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let povm = Self::new(elements)?;
        let cert = povm.certificate(tol);
        if !cert.valid {
            return Err(Error::InvalidPovm(format!(
                "completeness residual {:.3e}, most negative eigenvalue {:.3e}",
                cert.completeness_residual, -cert.negativity
            )));
        }
        Ok(povm)
    }

    /// Projective measurement from an orthonormal list of vectors.
    pub fn from_rank_one(vectors: &[Vec<C64>], weight: f64) -> Result<Self> {
        Self::new(
            vectors
                .iter()
                .map(|v| ComplexMatrix::projector(v).scale_real(weight))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> &ComplexMatrix {
        &self.elements[a]
    }

    pub fn completeness_residual(&self) -> f64 {
        let sum = matcore::sum_matrices(self.elements.iter()).expect("non-empty");
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    pub fn certificate(&self, tol: f64) -> PovmCertificate {
        let completeness_residual = self.completeness_residual();
        let mut hermitian = true;
        let mut negativity = 0.0f64;
        for e in &self.elements {
            if e.hermiticity_residual() > tol {
                hermitian = false;
                continue;
            }
            match matcore::min_eigenvalue(e, tol) {
                Ok(l) => negativity = negativity.max(-l),
                Err(_) => hermitian = false,
            }
        }
        let valid = hermitian && negativity <= tol && completeness_residual <= tol;

        let mut projective = valid;
        if projective {
            'outer: for (a, ea) in self.elements.iter().enumerate() {
                let sq = ea * ea;
                if sq.max_abs_diff(ea) > tol {
                    projective = false;
                    break;
                }
                for eb in &self.elements[a + 1..] {
                    if (ea * eb).max_abs() > tol {
                        projective = false;
                        break 'outer;
                    }
                }
            }
        }
        let ranks = if projective {
            self.elements
                .iter()
                .map(|e| e.trace().re.round().max(0.0) as usize)
                .collect()
        } else {
            Vec::new()
        };
        PovmCertificate {
            valid,
            projective,
            completeness_residual,
            negativity,
            ranks,
        }
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.certificate(tol).valid
    }

    /// `E -> u E u^dagger` for every element.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|e| u.sandwich(e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
    }

    /// Elementwise transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.iter().map(ComplexMatrix::transpose).collect(),
        }
    }
}

/// Per-POVM result of validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovmCertificate {
    pub valid: bool,
    pub projective: bool,
    pub completeness_residual: f64,
    /// `max(0, -lambda_min)` over all elements.
    pub negativity: f64,
    /// Projector ranks, inferred from rounded traces; empty unless projective.
    pub ranks: Vec<usize>,
}

/// `n` measurements on a common space with prior weights `p(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementEnsemble {
    dim: usize,
    outcomes: usize,
    measurements: Vec<Povm>,
    priors: Vec<f64>,
}

impl MeasurementEnsemble {
    pub fn new(measurements: Vec<Povm>, priors: Vec<f64>) -> Result<Self> {
        let first = measurements
            .first()
            .ok_or_else(|| Error::InvalidEnsemble("no measurements".into()))?;
        let (dim, outcomes) = (first.dim(), first.outcomes());
        for (x, m) in measurements.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "measurement {x} acts on dimension {}, expected {dim}",
                    m.dim()
                )));
            }
            if m.outcomes() != outcomes {
                return Err(Error::InvalidEnsemble(format!(
                    "measurement {x} has {} outcomes, expected {outcomes}",
                    m.outcomes()
                )));
            }
        }
        if priors.len() != measurements.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} priors for {} measurements",
                priors.len(),
                measurements.len()
            )));
        }
        if priors.iter().any(|&p| p.is_nan() || p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidEnsemble("priors must be finite and non-negative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}, not 1")));
        }
        Ok(Self {
            dim,
            outcomes,
            measurements,
            priors,
        })
    }

    /// Equal priors `1/n`.
    pub fn uniform(measurements: Vec<Povm>) -> Result<Self> {
        let n = measurements.len();
        Self::new(measurements, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Outcome count `m`, shared by every measurement.
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// Number of settings `n`.
    pub fn settings(&self) -> usize {
        self.measurements.len()
    }

    pub fn measurements(&self) -> &[Povm] {
        &self.measurements
    }

    pub fn measurement(&self, x: usize) -> &Povm {
        &self.measurements[x]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// `M^a_x`
    pub fn element(&self, x: usize, a: usize) -> &ComplexMatrix {
        self.measurements[x].element(a)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&EnsembleDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: EnsembleDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationCertificate {
    pub povm_valid: Vec<bool>,
    pub projective: Vec<bool>,
    pub max_completeness_residual: f64,
    /// Largest `-lambda_min` over all elements, clamped at zero.
    pub max_negative_eigenvalue: f64,
    pub ranks: Vec<Vec<usize>>,
}

impl ValidationCertificate {
    pub fn all_valid(&self) -> bool {
        self.povm_valid.iter().all(|&v| v)
    }

    pub fn all_projective(&self) -> bool {
        self.projective.iter().all(|&v| v)
    }
}

pub fn validate(ens: &MeasurementEnsemble, tol: f64) -> Result<ValidationCertificate> {
    let mut cert = ValidationCertificate {
        povm_valid: Vec::with_capacity(ens.settings()),
        projective: Vec::with_capacity(ens.settings()),
        max_completeness_residual: 0.0,
        max_negative_eigenvalue: 0.0,
        ranks: Vec::with_capacity(ens.settings()),
    };
    for m in ens.measurements() {
        if m.dim() != ens.dim() {
            return Err(Error::DimensionMismatch("POVM dimension differs from ensemble".into()));
        }
        let c = m.certificate(tol);
        cert.povm_valid.push(c.valid);
        cert.projective.push(c.projective);
        cert.max_completeness_residual = cert.max_completeness_residual.max(c.completeness_residual);
        cert.max_negative_eigenvalue = cert.max_negative_eigenvalue.max(c.negativity);
        cert.ranks.push(c.ranks);
    }
    Ok(cert)
}

/// Checks that `rho` is a `dim`-dimensional density matrix within `tol`.
pub fn check_density(rho: &ComplexMatrix, dim: usize, tol: f64) -> Result<()> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, expected {dim}x{dim}",
            rho.rows(),
            rho.cols()
        )));
    }
    let asym = rho.hermiticity_residual();
    if asym > tol {
        return Err(Error::InvalidDensity(format!("not Hermitian (residual {asym:.3e})")));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > tol {
        return Err(Error::InvalidDensity(format!("trace {tr}")));
    }
    let lmin = matcore::min_eigenvalue(rho, tol)?;
    if lmin < -tol {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {lmin:.3e}")));
    }
    Ok(())
}

/// `Tr(rho M^a_x)`, clamped to `[0, 1]`.
pub fn outcome_probability(ens: &MeasurementEnsemble, x: usize, a: usize, rho: &ComplexMatrix) -> Result<f64> {
    if x >= ens.settings() || a >= ens.outcomes() {
        return Err(Error::OutOfRange(format!("setting {x} / outcome {a}")));
    }
    check_density(rho, ens.dim(), matcore::DEFAULT_TOL)?;
    let p = rho.trace_product(ens.element(x, a))?.re;
    Ok(p.clamp(0.0, 1.0))
}

/// Rotates every measurement operator by `u`; priors are kept.
pub fn conjugate_ensemble(ens: &MeasurementEnsemble, u: &ComplexMatrix) -> Result<MeasurementEnsemble> {
    if u.rows() != ens.dim() || u.cols() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} unitary for a dimension-{} ensemble",
            u.rows(),
            u.cols(),
            ens.dim()
        )));
    }
    let res = matcore::unitarity_residual(u)?;
    if res > matcore::DEFAULT_TOL {
        return Err(Error::NotUnitary(res));
    }
    let measurements = ens
        .measurements()
        .iter()
        .map(|m| m.conjugate(u))
        .collect::<Result<Vec<_>>>()?;
    MeasurementEnsemble::new(measurements, ens.priors().to_vec())
}

/// Flat row-major `[re, im]` pairs.
pub(crate) fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.entries().iter().map(|z| [z.re, z.im]).collect()
}

pub(crate) fn matrix_from_pairs(dim: usize, pairs: &[[f64; 2]]) -> Result<ComplexMatrix> {
    ComplexMatrix::new(dim, dim, pairs.iter().map(|p| C64::new(p[0], p[1])).collect())
}

/// On-disk form: `measurements[x][a]` is the row-major entry list of `M^a_x`.
#[derive(Debug, Serialize, Deserialize)]
pub struct EnsembleDoc {
    pub dim: usize,
    pub priors: Vec<f64>,
    pub measurements: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&MeasurementEnsemble> for EnsembleDoc {
    fn from(ens: &MeasurementEnsemble) -> Self {
        Self {
            dim: ens.dim(),
            priors: ens.priors().to_vec(),
            measurements: ens
                .measurements()
                .iter()
                .map(|m| m.elements().iter().map(matrix_to_pairs).collect())
                .collect(),
        }
    }
}

impl TryFrom<EnsembleDoc> for MeasurementEnsemble {
    type Error = Error;

    fn try_from(doc: EnsembleDoc) -> Result<Self> {
        let measurements = doc
            .measurements
            .iter()
            .map(|els| {
                let mats = els
                    .iter()
                    .map(|p| matrix_from_pairs(doc.dim, p))
                    .collect::<Result<Vec<_>>>()?;
                Povm::new(mats)
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementEnsemble::new(measurements, doc.priors)
    }
}
