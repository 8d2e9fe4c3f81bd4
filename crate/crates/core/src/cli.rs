//! Command-line front end: a catalog of named constructions and states, and
//! the `reproduce`, `validate`, `witness`, `compute-d`, `compute-b` and
//! `export` subcommands.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{self, ConditionReport, Construction};
use crate::entangled::{self, BValueReport, BipartiteDensity, SolverConfig, WitnessRecord};
use crate::error::{Error, Result};
use crate::measurements::{self, MeasurementEnsemble, ValidationCertificate};
use crate::single_system::{self, DiscriminationReport, OptimizerConfig, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "measdisc",
    version,
    about = "Single-shot discrimination of quantum measurements"
)]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Emit JSON with full-precision values.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Emit CSV.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Local searches for the single-system optimum [default: 50 (d-1)].
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    pub max_evals: usize,
    /// Simplex diameter at which a local search stops.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, env = "MEASDISC_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

impl OptimizerArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_evals: self.max_evals,
            tol: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    All,
    DValues,
    BValues,
    ClosedForms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BobChoice {
    /// The measurements from the perfect-discrimination strategies.
    Proof,
    /// Numerically optimal measurements.
    Optimal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute the reference values and compare.
    Reproduce {
        #[arg(value_enum, default_value = "all")]
        table: Table,
        #[command(flatten)]
        opt: OptimizerArgs,
        /// Include per-row wall-clock times in JSON output.
        #[arg(long)]
        timings: bool,
    },
    /// Check POVM axioms and the construction's overlap condition.
    Validate { tag: String },
    /// Test whether the entanglement-assisted value beats the single-system one.
    Witness {
        #[arg(long)]
        state: String,
        #[arg(long)]
        ensemble: String,
        #[arg(long, default_value_t = entangled::DEFAULT_MARGIN)]
        margin: f64,
        /// Single-system value to compare against; computed when omitted.
        #[arg(long)]
        d_value: Option<f64>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Single-system optimum.
    ComputeD {
        tag: String,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Entanglement-assisted value.
    ComputeB {
        tag: String,
        /// Shared state [default: maxent:d].
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_enum, default_value = "optimal")]
        bob: BobChoice,
    },
    /// Print an ensemble as JSON.
    Export { tag: String },
}

/// An ensemble resolved from a catalog tag or file.
pub struct Resolved {
    pub tag: String,
    pub construction: Option<Construction>,
    pub ensemble: MeasurementEnsemble,
    kind: Kind,
}

#[derive(Clone, Copy)]
enum Kind {
    Projective,
    Weyl,
    Ic,
    DPlusOne,
    File,
}

fn malformed(spec: &str, why: &str) -> Error {
    Error::Malformed(spec.into(), why.into())
}

fn parse_num<T: std::str::FromStr>(spec: &str, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| malformed(spec, &format!("cannot parse `{field}`")))
}

/// Catalog tags: `table1`, `weyl:d:{magic|ic|mixing|dplus1}`, `ic:d`,
/// `dplus1:d`, `trine`, or a path to an ensemble JSON file.
pub fn resolve_ensemble(tag: &str) -> Result<Resolved> {
    let parts: Vec<&str> = tag.split(':').collect();
    let (construction, kind) = match parts.as_slice() {
        ["table1"] => (
            Construction::Projective(constructions::d4_projective_bases()),
            Kind::Projective,
        ),
        ["trine"] => (
            Construction::DPlusOne(constructions::example_basis_dplus1(2)?),
            Kind::DPlusOne,
        ),
        ["ic", d] => (
            Construction::WeylCovariant(constructions::ic_basis(parse_num(tag, d)?)?),
            Kind::Ic,
        ),
        ["dplus1", d] => (
            Construction::DPlusOne(constructions::example_basis_dplus1(parse_num(tag, d)?)?),
            Kind::DPlusOne,
        ),
        ["weyl", d, basis] => {
            let d: usize = parse_num(tag, d)?;
            let b = match *basis {
                "magic" => constructions::magic_ic_basis(d)?,
                "ic" => constructions::ic_basis(d)?,
                "mixing" => constructions::normal_eigenbasis(&constructions::mixing_unitary(d)?)?,
                "dplus1" => constructions::example_basis_dplus1(d)?,
                other => return Err(Error::UnknownTag(format!("basis `{other}` in `{tag}`"))),
            };
            (Construction::WeylCovariant(b), Kind::Weyl)
        }
        _ if tag.ends_with(".json") || Path::new(tag).is_file() => {
            let ensemble = MeasurementEnsemble::from_json(&std::fs::read_to_string(tag)?)?;
            return Ok(Resolved {
                tag: tag.into(),
                construction: None,
                ensemble,
                kind: Kind::File,
            });
        }
        _ => return Err(Error::UnknownTag(tag.into())),
    };
    let ensemble = construction.ensemble()?;
    Ok(Resolved {
        tag: tag.into(),
        construction: Some(construction),
        ensemble,
        kind,
    })
}

/// State specs: `maxent:d`, `werner:p`, `pure2q:alpha`, or a path to a
/// state JSON file.
pub fn resolve_state(spec: &str) -> Result<BipartiteDensity> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["maxent", d] => entangled::max_entangled(parse_num(spec, d)?),
        ["werner", p] => entangled::werner_state(parse_num(spec, p)?),
        ["pure2q", a] => Ok(entangled::pure_two_qubit(parse_num(spec, a)?)),
        _ if spec.ends_with(".json") || Path::new(spec).is_file() => {
            BipartiteDensity::from_json(&std::fs::read_to_string(spec)?)
        }
        _ => Err(malformed(
            spec,
            "expected maxent:d, werner:p, pure2q:alpha or a JSON file",
        )),
    }
}

#[derive(Debug, Serialize)]
pub struct NamedCondition {
    pub name: &'static str,
    #[serde(flatten)]
    pub report: ConditionReport,
}

#[derive(Debug, Serialize)]
pub struct ValidateOutput {
    pub tag: String,
    pub certificate: ValidationCertificate,
    pub conditions: Vec<NamedCondition>,
    pub pass: bool,
}

pub fn cmd_validate(tag: &str) -> Result<ValidateOutput> {
    let r = resolve_ensemble(tag)?;
    let certificate = measurements::validate(&r.ensemble, 1e-9)?;
    let named = |name, report| NamedCondition { name, report };
    let conditions = match (&r.construction, r.kind) {
        (Some(Construction::Projective(bases)), _) => {
            vec![named(
                "projective-overlap",
                constructions::check_projective_conditions(bases)?,
            )]
        }
        (Some(Construction::WeylCovariant(b)), Kind::Ic) => vec![named("ic", constructions::check_ic_condition(b))],
        (Some(Construction::WeylCovariant(b)), _) => vec![named("displacement", constructions::check_cond(b))],
        (Some(Construction::DPlusOne(b)), _) => vec![named("dplus1", constructions::check_condd1(b))],
        (None, _) => Vec::new(),
    };
    let pass = certificate.all_valid() && conditions.iter().all(|c| c.report.satisfied);
    Ok(ValidateOutput {
        tag: r.tag,
        certificate,
        conditions,
        pass,
    })
}

pub fn cmd_compute_d(tag: &str, cfg: &OptimizerConfig) -> Result<DiscriminationReport> {
    single_system::optimize_d(&resolve_ensemble(tag)?.ensemble, cfg)
}

pub fn cmd_compute_b(tag: &str, state: Option<&str>, bob: BobChoice) -> Result<BValueReport> {
    let r = resolve_ensemble(tag)?;
    let rho = match state {
        Some(s) => resolve_state(s)?,
        None => entangled::max_entangled(r.ensemble.dim())?,
    };
    match bob {
        BobChoice::Optimal => entangled::b_value_optimal(&rho, &r.ensemble, &SolverConfig::default()),
        BobChoice::Proof => {
            let c = r
                .construction
                .as_ref()
                .ok_or_else(|| malformed(tag, "proof measurements need a catalog construction"))?;
            entangled::b_value_with_bob(&rho, &r.ensemble, &constructions::proof_bob_measurements(c)?)
        }
    }
}

pub fn cmd_witness(
    state: &str,
    tag: &str,
    margin: f64,
    d_value: Option<f64>,
    cfg: &OptimizerConfig,
) -> Result<WitnessRecord> {
    let rho = resolve_state(state)?;
    let ens = resolve_ensemble(tag)?.ensemble;
    let d = match d_value {
        Some(v) => v,
        None => single_system::optimize_d(&ens, cfg)?.value,
    };
    entangled::steering_witness(&rho, &ens, d, margin, &SolverConfig::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproductionRow {
    pub label: String,
    pub reference: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

type RowFn = Box<dyn Fn(&OptimizerConfig) -> Result<f64> + Send + Sync>;

struct RowSpec {
    table: Table,
    label: String,
    reference: f64,
    tolerance: f64,
    compute: RowFn,
}

fn row(table: Table, label: impl Into<String>, reference: f64, tolerance: f64, compute: RowFn) -> RowSpec {
    RowSpec {
        table,
        label: label.into(),
        reference,
        tolerance,
        compute,
    }
}

fn d_row(tag: &'static str, reference: f64, tolerance: f64, min_restarts: usize) -> RowSpec {
    row(
        Table::DValues,
        format!("D {tag}"),
        reference,
        tolerance,
        Box::new(move |cfg| {
            let ens = resolve_ensemble(tag)?.ensemble;
            let mut cfg = cfg.clone();
            cfg.restarts = Some(cfg.restarts_for(ens.dim()).max(min_restarts));
            Ok(single_system::optimize_d(&ens, &cfg)?.value)
        }),
    )
}

fn proof_row(tag: &'static str) -> RowSpec {
    row(
        Table::BValues,
        format!("B {tag} maxent proof"),
        1.0,
        1e-10,
        Box::new(move |_| Ok(cmd_compute_b(tag, None, BobChoice::Proof)?.value)),
    )
}

fn state_row(label: String, reference: f64, rho: BipartiteDensity) -> RowSpec {
    row(
        Table::BValues,
        label,
        reference,
        1e-6,
        Box::new(move |_| {
            Ok(
                entangled::b_value_optimal(&rho, &constructions::trine_pair_ensemble(), &SolverConfig::default())?
                    .value,
            )
        }),
    )
}

fn reference_rows() -> Vec<RowSpec> {
    let mut rows = vec![
        d_row("table1", 0.7752, 1e-3, 0),
        d_row("ic:2", 0.7887, 1e-3, 0),
        d_row("ic:3", 0.6436, 1e-3, 0),
        d_row("ic:4", 0.622, 2e-3, 300),
        d_row("dplus1:2", 5.0 / 6.0, 1e-6, 0),
        d_row("dplus1:3", 0.698, 1e-3, 0),
        d_row("dplus1:4", 0.706, 1e-3, 0),
    ];
    for tag in ["table1", "ic:2", "ic:3", "dplus1:2", "dplus1:3", "dplus1:4"] {
        rows.push(proof_row(tag));
    }
    for (name, p) in [
        ("0", 0.0),
        ("0.2", 0.2),
        ("1/3", 1.0 / 3.0),
        ("0.5", 0.5),
        ("2/3", 2.0 / 3.0),
        ("0.8", 0.8),
        ("1", 1.0),
    ] {
        rows.push(state_row(
            format!("B trine werner p={name}"),
            (1.0 + p) / 2.0,
            entangled::werner_state(p).expect("p in range"),
        ));
    }
    for (name, k) in [("pi/16", 1.0), ("pi/8", 2.0), ("3pi/16", 3.0), ("pi/4", 4.0)] {
        let alpha = k * PI / 16.0;
        let reference = entangled::two_qubit_b_closed(alpha).expect("alpha in range");
        rows.push(state_row(
            format!("B trine pure2q alpha={name}"),
            reference,
            entangled::pure_two_qubit(alpha),
        ));
    }
    let trine_at = |delta: f64| -> RowFn { Box::new(move |_| single_system::trine_d_closed_form(delta)) };
    rows.push(row(
        Table::ClosedForms,
        "trine delta=0",
        5.0 / 6.0,
        1e-12,
        trine_at(0.0),
    ));
    rows.push(row(
        Table::ClosedForms,
        "trine delta=pi/6",
        5.0 / 6.0,
        1e-12,
        trine_at(PI / 6.0),
    ));
    rows.push(row(
        Table::ClosedForms,
        "trine delta=pi/12",
        (3.0 + 3f64.sqrt()) / 6.0,
        1e-12,
        trine_at(PI / 12.0),
    ));
    rows.push(row(
        Table::ClosedForms,
        "two-qubit alpha=pi/4",
        1.0,
        1e-12,
        Box::new(|_| entangled::two_qubit_b_closed(PI / 4.0)),
    ));
    rows
}

pub fn cmd_reproduce(table: Table, cfg: &OptimizerConfig) -> Result<Vec<ReproductionRow>> {
    let specs: Vec<RowSpec> = reference_rows()
        .into_iter()
        .filter(|r| table == Table::All || r.table == table)
        .collect();
    let mut rows = specs
        .par_iter()
        .map(|spec| {
            let start = Instant::now();
            let computed = (spec.compute)(cfg)?;
            Ok(ReproductionRow {
                label: spec.label.clone(),
                reference: spec.reference,
                computed,
                tolerance: spec.tolerance,
                pass: (computed - spec.reference).abs() <= spec.tolerance,
                runtime_ms: Some(start.elapsed().as_millis() as u64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(rows)
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_rows(rows: &[ReproductionRow], out: &OutputArgs, timings: bool) -> Result<String> {
    if out.json {
        let rows: Vec<ReproductionRow> = rows
            .iter()
            .cloned()
            .map(|mut r| {
                if !timings {
                    r.runtime_ms = None;
                }
                r
            })
            .collect();
        return Ok(serde_json::to_string_pretty(&rows)? + "\n");
    }
    let mut s = String::new();
    if out.csv {
        s.push_str("label,reference,computed,tolerance,pass,runtime_ms\n");
        for r in rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                csv_escape(&r.label),
                sig6(r.reference),
                sig6(r.computed),
                sig6(r.tolerance),
                r.pass,
                r.runtime_ms.unwrap_or(0)
            );
        }
        return Ok(s);
    }
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(
        s,
        "{:<width$}  {:>12}  {:>12}  {:>10}  {:>4}  {:>8}",
        "label", "reference", "computed", "tol", "ok", "ms"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:>12}  {:>12}  {:>10}  {:>4}  {:>8}",
            r.label,
            sig6(r.reference),
            sig6(r.computed),
            sig6(r.tolerance),
            if r.pass { "PASS" } else { "FAIL" },
            r.runtime_ms.unwrap_or(0)
        );
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let _ = writeln!(s, "{} rows, {} failed", rows.len(), failed);
    Ok(s)
}

fn render_pairs(pairs: &[(&str, String)], out: &OutputArgs) -> String {
    let mut s = String::new();
    if out.csv {
        s.push_str(&pairs.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(","));
        s.push('\n');
        s.push_str(&pairs.iter().map(|(_, v)| csv_escape(v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    } else {
        let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in pairs {
            let _ = writeln!(s, "{k:<width$}  {v}");
        }
    }
    s
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Output text and exit code for a parsed command line.
pub fn execute(cli: &Cli) -> Result<(String, i32)> {
    let out = &cli.output;
    match &cli.command {
        Command::Reproduce { table, opt, timings } => {
            let rows = cmd_reproduce(*table, &opt.config())?;
            let code = if rows.iter().all(|r| r.pass) {
                EXIT_OK
            } else {
                EXIT_FAIL
            };
            Ok((render_rows(&rows, out, *timings)?, code))
        }
        Command::Validate { tag } => {
            let v = cmd_validate(tag)?;
            let code = if v.pass { EXIT_OK } else { EXIT_FAIL };
            if out.json {
                return Ok((json(&v)?, code));
            }
            let c = &v.certificate;
            let mut pairs = vec![
                ("tag", v.tag.clone()),
                ("povm_valid", c.all_valid().to_string()),
                ("projective", c.all_projective().to_string()),
                ("completeness_residual", sig6(c.max_completeness_residual)),
                ("max_negative_eigenvalue", sig6(c.max_negative_eigenvalue)),
            ];
            for cond in &v.conditions {
                pairs.push((cond.name, cond.report.satisfied.to_string()));
                if let Some(w) = &cond.report.witness {
                    let idx: Vec<String> = w.indices.iter().map(usize::to_string).collect();
                    pairs.push((
                        "witness",
                        format!("{}={} overlap {}", w.labels, idx.join(","), sig6(w.overlap)),
                    ));
                }
            }
            pairs.push(("pass", v.pass.to_string()));
            Ok((render_pairs(&pairs, out), code))
        }
        Command::Witness {
            state,
            ensemble,
            margin,
            d_value,
            opt,
        } => {
            let w = cmd_witness(state, ensemble, *margin, *d_value, &opt.config())?;
            if out.json {
                return Ok((json(&w)?, EXIT_OK));
            }
            let verdict = serde_json::to_value(w.verdict)?
                .as_str()
                .unwrap_or_default()
                .to_string();
            let pairs = [
                ("verdict", verdict),
                ("b_value", sig6(w.b_value)),
                ("d_value", sig6(w.d_value)),
                ("gap", sig6(w.gap)),
                ("margin", sig6(w.margin)),
            ];
            Ok((render_pairs(&pairs, out), EXIT_OK))
        }
        Command::ComputeD { tag, opt } => {
            let r = cmd_compute_d(tag, &opt.config())?;
            if out.json {
                return Ok((json(&r)?, EXIT_OK));
            }
            let pairs = [
                ("value", sig6(r.value)),
                ("argmax_map", format!("{:?}", r.argmax_map)),
                ("restarts", r.restarts_used.to_string()),
                ("converged_restarts", r.converged_restarts.to_string()),
                ("spread", sig6(r.spread)),
            ];
            Ok((render_pairs(&pairs, out), EXIT_OK))
        }
        Command::ComputeB { tag, state, bob } => {
            let r = cmd_compute_b(tag, state.as_deref(), *bob)?;
            if out.json {
                return Ok((json(&r)?, EXIT_OK));
            }
            let method = serde_json::to_value(r.method)?.as_str().unwrap_or_default().to_string();
            let opt = |v: Option<f64>| v.map(sig6).unwrap_or_else(|| "-".into());
            let pairs = [
                ("value", sig6(r.value)),
                ("method", method),
                ("gap", opt(r.gap)),
                ("dual_bound", opt(r.dual_bound)),
                ("iterations", r.iterations.to_string()),
                ("converged", r.converged.to_string()),
            ];
            Ok((render_pairs(&pairs, out), EXIT_OK))
        }
        Command::Export { tag } => {
            let r = resolve_ensemble(tag)?;
            Ok((r.ensemble.to_json()? + "\n", EXIT_OK))
        }
    }
}

/// Exit code for a failed command: bad tags and specs count as usage errors.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::UnknownTag(_) | Error::Malformed(..) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}
