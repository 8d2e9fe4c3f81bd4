//! Single-system distinguishability: the best guessing probability when a
//! single probe state is fed to the unknown measurement,
//!
//! `D = max_psi sum_a max_x p(x) <psi|M^a_x|psi>`.
//!
//! The maximum over states is attained on pure states, so the search runs over
//! hyperspherical coordinates of a unit vector with a multistart Nelder-Mead
//! simplex. The objective has kinks wherever the inner `max_x` switches, which
//! is why no gradient information is used.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::C64;
use crate::measurements::MeasurementEnsemble;

/// Default base seed for restart streams.
pub const DEFAULT_SEED: u64 = 20_210_517;

/// Angles of a pure state in `C^d`: `d-1` polar angles in `[0, pi/2]` and
/// `d-1` phases in `[0, 2 pi)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypersphereParams {
    pub thetas: Vec<f64>,
    pub nus: Vec<f64>,
}

/// Triangle wave onto `[0, pi/2]`; continuous, so the folded objective has
/// no plateaus.
fn fold_polar(t: f64) -> f64 {
    let r = t.rem_euclid(PI);
    if r > FRAC_PI_2 {
        PI - r
    } else {
        r
    }
}

impl HypersphereParams {
    pub fn new(thetas: Vec<f64>, nus: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != nus.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} polar angles and {} phases",
                thetas.len(),
                nus.len()
            )));
        }
        Ok(Self {
            thetas: thetas.into_iter().map(fold_polar).collect(),
            nus: nus.into_iter().map(|n| n.rem_euclid(2.0 * PI)).collect(),
        })
    }

    /// From an unconstrained optimizer vector `[thetas..., nus...]`.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        let half = raw.len() / 2;
        if !raw.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(
                "raw parameter vector must have even length".into(),
            ));
        }
        Self::new(raw[..half].to_vec(), raw[half..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.thetas.len() + 1
    }

    pub fn to_raw(&self) -> Vec<f64> {
        self.thetas.iter().chain(&self.nus).copied().collect()
    }
}

/// `cos t1|0> + sum_k (prod_{i<=k} sin t_i) cos t_{k+1} e^{i nu_k}|k> + (prod sin t_i) e^{i nu_{d-1}}|d-1>`.
pub fn state_from_params(p: &HypersphereParams) -> Vec<C64> {
    let d = p.dim();
    let mut v = Vec::with_capacity(d);
    v.push(C64::new(p.thetas[0].cos(), 0.0));
    let mut sin_prod = 1.0;
    for k in 1..d {
        sin_prod *= p.thetas[k - 1].sin();
        let radial = if k < d - 1 {
            sin_prod * p.thetas[k].cos()
        } else {
            sin_prod
        };
        v.push(C64::from_polar(radial, p.nus[k - 1]));
    }
    v
}

/// Score and the setting chosen for each outcome (lowest `x` on ties).
pub fn score_detail(psi: &[C64], ens: &MeasurementEnsemble) -> Result<(f64, Vec<usize>)> {
    if psi.len() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} for a dimension-{} ensemble",
            psi.len(),
            ens.dim()
        )));
    }
    let priors = ens.priors();
    let mut total = 0.0;
    let mut argmax = Vec::with_capacity(ens.outcomes());
    for a in 0..ens.outcomes() {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (x, &px) in priors.iter().enumerate() {
            let val = px * ens.element(x, a).expectation(psi).re;
            if val > best.1 {
                best = (x, val);
            }
        }
        total += best.1;
        argmax.push(best.0);
    }
    Ok((total, argmax))
}

/// `sum_a max_x p(x) <psi|M^a_x|psi>` for a unit vector `psi`.
pub fn score(psi: &[C64], ens: &MeasurementEnsemble) -> Result<f64> {
    Ok(score_detail(psi, ens)?.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerConfig {
    /// Local searches; `None` means `50 (d - 1)`.
    pub restarts: Option<usize>,
    /// Objective evaluations per local search.
    pub max_evals: usize,
    /// Simplex diameter at which a local search stops.
    pub tol: f64,
    pub seed: u64,
    /// Edge length of the initial simplex, in radians.
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: None,
            max_evals: 5000,
            tol: 1e-9,
            seed: DEFAULT_SEED,
            initial_step: 0.3,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = Some(restarts);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn restarts_for(&self, dim: usize) -> usize {
        self.restarts.unwrap_or(50 * (dim - 1)).max(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscriminationReport {
    pub value: f64,
    pub best_state: Vec<C64>,
    pub best_params: HypersphereParams,
    /// `argmax_map[a]` is the setting guessed on outcome `a`.
    pub argmax_map: Vec<usize>,
    pub restarts_used: usize,
    /// Whether the winning local search met the simplex tolerance.
    pub converged: bool,
    /// Number of local searches that met the tolerance.
    pub converged_restarts: usize,
    /// Best minus worst local optimum across restarts.
    pub spread: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead minimization with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). Stops when the simplex
/// diameter (max-norm distance of any vertex to the best) drops below `tol`
/// or after `max_evals` evaluations.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_evals: usize) -> SimplexResult {
    let n = x0.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x);
        simplex.push((x, fx));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }
        if evals.get() >= max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(1.0);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let fx = eval(&x);
            *vertex = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult {
        x,
        value,
        evaluations: evals.get(),
        converged,
    }
}

/// Independent random stream for restart `index`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct LocalOptimum {
    index: usize,
    raw: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Multistart maximization of [`score`] over pure states.
pub fn optimize_d(ens: &MeasurementEnsemble, cfg: &OptimizerConfig) -> Result<DiscriminationReport> {
    let d = ens.dim();
    if d < 2 {
        return Err(Error::OutOfRange("need dimension at least 2".into()));
    }
    let restarts = cfg.restarts_for(d);
    let objective = |raw: &[f64]| -> f64 {
        let p = HypersphereParams::from_raw(raw).expect("even length");
        -score_detail(&state_from_params(&p), ens).expect("matching dimension").0
    };

    let locals: Vec<LocalOptimum> = (0..restarts)
        .into_par_iter()
        .map(|index| {
            let mut rng = restart_rng(cfg.seed, index);
            let mut x0 = Vec::with_capacity(2 * (d - 1));
            x0.extend((0..d - 1).map(|_| rng.gen_range(0.0..FRAC_PI_2)));
            x0.extend((0..d - 1).map(|_| rng.gen_range(0.0..2.0 * PI)));
            let r = nelder_mead(objective, &x0, cfg.initial_step, cfg.tol, cfg.max_evals);
            LocalOptimum {
                index,
                raw: r.x,
                value: -r.value,
                evaluations: r.evaluations,
                converged: r.converged,
            }
        })
        .collect();

    // Max by value, ties to the lowest restart index.
    let best = locals
        .iter()
        .reduce(|a, b| {
            if b.value > a.value || (b.value == a.value && b.index < a.index) {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    let worst = locals.iter().map(|l| l.value).fold(f64::INFINITY, f64::min);

    let best_params = HypersphereParams::from_raw(&best.raw)?;
    let best_state = state_from_params(&best_params);
    let (value, argmax_map) = score_detail(&best_state, ens)?;
    Ok(DiscriminationReport {
        value,
        best_state,
        best_params,
        argmax_map,
        restarts_used: restarts,
        converged: best.converged,
        converged_restarts: locals.iter().filter(|l| l.converged).count(),
        spread: best.value - worst,
        evaluations: locals.iter().map(|l| l.evaluations).sum(),
    })
}

/// Exhaustive scan over `cos t|0> + e^{i nu} sin t|1>` for qubit ensembles:
/// `resolution + 1` polar angles in `[0, pi/2]` times `resolution` phases.
pub fn grid_oracle_d(ens: &MeasurementEnsemble, resolution: usize) -> Result<f64> {
    if ens.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "grid oracle needs a qubit ensemble, got d={}",
            ens.dim()
        )));
    }
    if resolution == 0 {
        return Err(Error::OutOfRange("resolution must be positive".into()));
    }
    let best = (0..=resolution)
        .into_par_iter()
        .map(|i| {
            let t = FRAC_PI_2 * i as f64 / resolution as f64;
            let mut row_best = f64::NEG_INFINITY;
            for j in 0..resolution {
                let nu = 2.0 * PI * j as f64 / resolution as f64;
                let psi = [C64::new(t.cos(), 0.0), C64::from_polar(t.sin(), nu)];
                let s = score_detail(&psi, ens).expect("qubit").0;
                row_best = row_best.max(s);
            }
            row_best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// Single-system score of `sin d|0> + cos d|1>` on the trine pair, in closed form.
pub fn trine_d_closed_form(delta: f64) -> Result<f64> {
    if !(0.0..=PI / 4.0).contains(&delta) {
        return Err(Error::OutOfRange(format!("delta must lie in [0, pi/4], got {delta}")));
    }
    let (s2, c2) = (2.0 * delta).sin_cos();
    Ok(if delta <= PI / 12.0 {
        (3.0 + 2.0 * c2) / 6.0
    } else {
        (3.0 + c2 + 3f64.sqrt() * s2) / 6.0
    })
}

/// `sin d|0> + cos d|1>`
pub fn trine_probe_state(delta: f64) -> Vec<C64> {
    vec![C64::new(delta.sin(), 0.0), C64::new(delta.cos(), 0.0)]
}
