//! One function per subcommand, each turning a loaded problem into a report
//! and an exit status.

use std::path::Path;

use arcstab_core::lp::{rat, Rational};
use arcstab_core::parallel::Execution;
use arcstab_core::slope::{self, default_samples, SlopeFit};
use arcstab_core::stability::{self, epsilon_from_k, CheckKind, StabilityReport, Verdict};
use arcstab_core::{ArcMatrix, SlotOrder};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::problem::Problem;
use crate::report::{integers, matrix, rational, rationals};
use crate::CliError;

/// Slopes within this distance of the exact invariant count as agreeing.
pub const SLOPE_TOLERANCE: f64 = 0.05;

const SCAN_NOTE: &str = "a nonnegative minimum over one-parameter subgroups does not certify semistability";
const CHECK_NOTE: &str = "only the supplied arcs were tested";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Nothing violated among the inputs examined.
    Clean,
    /// An explicit violation was found.
    Violation,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Violation => 1,
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub status: Status,
}

impl Outcome {
    fn clean(report: Value) -> Self {
        Self { report, status: Status::Clean }
    }
}

pub fn weight(p: &Problem, arc: &str) -> Result<Outcome, CliError> {
    let a = p.arc(arc)?;
    let parts = stability::weight_parts(&a.arc, &p.pair)?;
    let spec = stability::weight_via_specialization(&a.arc, &p.pair)?;
    Ok(Outcome::clean(json!({
        "command": "weight",
        "arc": a.name,
        "weight": parts.nu,
        "m_v": parts.m_v,
        "m_w": parts.m_w,
        "specialization_weight": spec,
        "specialization_agrees": spec == parts.nu,
    })))
}

pub fn scan_1ps(p: &Problem, box_size: Option<u32>, trace_zero: bool, exec: Execution) -> Result<Outcome, CliError> {
    let b = box_size
        .or(p.box_size)
        .ok_or_else(|| CliError::Invalid("no scan box given (use --box or parameters.box)".into()))?;
    let trace_zero = trace_zero || p.trace_zero;
    let s = stability::scan_1ps(&p.pair, b, trace_zero, exec)?;
    let status = if s.min_weight < 0 { Status::Violation } else { Status::Clean };
    Ok(Outcome {
        report: json!({
            "command": "scan-1ps",
            "box": s.box_size,
            "trace_zero": s.trace_zero,
            "count": s.count,
            "min_weight": s.min_weight,
            "argmin": integers(&s.argmin),
            "note": SCAN_NOTE,
        }),
        status,
    })
}

pub fn snf(p: &Problem, arc: &str) -> Result<Outcome, CliError> {
    let a = p.arc(arc)?;
    let d = a.arc.snf()?;
    let diag = ArcMatrix::from_cocharacter(&d.exponents);
    let rebuilt = d.u.compose(&diag)?.compose(&d.v)?;
    let det_ord = a.arc.determinant()?.ord()?;
    Ok(Outcome::clean(json!({
        "command": "snf",
        "arc": a.name,
        "exponents": integers(&d.exponents),
        "exponent_sum": d.exponents.iter().sum::<i64>(),
        "det_order": det_ord,
        "u": matrix(&d.u),
        "v": matrix(&d.v),
        "reconstruction_holds": rebuilt.approx_eq(&a.arc),
    })))
}

pub fn norm(p: &Problem, arc: &str, order: Option<SlotOrder>) -> Result<Outcome, CliError> {
    let a = p.arc(arc)?;
    let order = order.unwrap_or(p.slot_order);
    let parts = stability::norm_parts(&a.arc, &p.pair)?;
    Ok(Outcome::clean(json!({
        "command": "norm",
        "arc": a.name,
        "slot_order": order.to_string(),
        "norm": parts.value(order),
        "deg_v": parts.deg_v,
        "m_e": parts.m_e,
        "m_v": parts.m_v,
    })))
}

pub fn reduced_norm(p: &Problem, arc: &str) -> Result<Outcome, CliError> {
    let a = p.arc(arc)?;
    let t = p.torus_or_trivial();
    let red = stability::reduced_norm(&a.arc, &p.pair, &t)?;
    let n = stability::norm(&a.arc, &p.pair, SlotOrder::Analytic)?;
    Ok(Outcome::clean(json!({
        "command": "reduced-norm",
        "arc": a.name,
        "torus_rank": t.rank,
        "reduced_norm": rational(&red.value),
        "minimizer": rationals(&red.minimizer),
        "attained": red.attained,
        "proper": red.properness.proper,
        "proper_certified": red.properness.certified,
        "improper_direction": red.properness.witness.as_deref().map(rationals),
        "norm": n,
    })))
}

pub struct CheckOptions {
    pub k: Option<u32>,
    pub epsilon: Option<Rational>,
    pub slot_order: Option<SlotOrder>,
    pub allow_improper: bool,
    pub exec: Execution,
}

fn resolve_epsilon(p: &Problem, o: &CheckOptions) -> Result<Rational, CliError> {
    if let Some(e) = &o.epsilon {
        return Ok(e.clone());
    }
    if let Some(k) = o.k {
        return Ok(epsilon_from_k(k)?);
    }
    if let Some(e) = &p.epsilon {
        return Ok(e.clone());
    }
    Ok(epsilon_from_k(p.k.unwrap_or(1))?)
}

pub fn check(p: &Problem, kind: CheckKind, o: &CheckOptions) -> Result<Outcome, CliError> {
    let report = match kind {
        CheckKind::Semistable => stability::check_semistable(&p.pair, &p.arcs, o.exec)?,
        CheckKind::Stable => {
            let eps = resolve_epsilon(p, o)?;
            let order = o.slot_order.unwrap_or(p.slot_order);
            stability::check_stable(&p.pair, &p.arcs, &eps, order, o.exec)?
        }
        CheckKind::Polystable => {
            let eps = resolve_epsilon(p, o)?;
            let t = p.torus_or_trivial();
            stability::check_polystable(&p.pair, &p.arcs, &eps, &t, o.allow_improper, o.exec)?
        }
    };
    let status = if report.violated() { Status::Violation } else { Status::Clean };
    Ok(Outcome { report: stability_json(&report), status })
}

pub fn stability_json(r: &StabilityReport) -> Value {
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|x| {
            json!({
                "arc": x.arc,
                "weight": x.weight,
                "m_v": x.m_v,
                "m_w": x.m_w,
                "norm": x.norm,
                "reduced_norm": x.reduced_norm.as_ref().map(rational),
                "minimizer": x.minimizer.as_deref().map(rationals),
                "threshold": rational(&x.threshold),
                "holds": x.holds,
            })
        })
        .collect();
    let verdict = match &r.verdict {
        Verdict::NoViolationFound => json!({"status": "no violation among supplied arcs"}),
        Verdict::Destabilized { arc } => json!({"status": "destabilized", "arc": arc}),
    };
    let mut m = Map::new();
    m.insert("command".into(), json!("check"));
    m.insert("kind".into(), json!(r.kind.to_string()));
    m.insert("epsilon".into(), r.epsilon.as_ref().map(rational).unwrap_or(Value::Null));
    if r.kind == CheckKind::Stable {
        m.insert("slot_order".into(), json!(r.slot_order.to_string()));
    }
    m.insert("records".into(), Value::Array(records));
    m.insert("verdict".into(), verdict);
    m.insert("note".into(), json!(CHECK_NOTE));
    Value::Object(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    /// log|ρ.v| − log|ρ.w|, slope ν.
    Weight,
    /// deg V·log|ρ| − log|ρ.v|, slope the norm.
    Norm,
    /// log|ρ|.
    Matrix,
    /// The norm functional minimized over the torus, slope the reduced norm.
    Reduced,
}

impl Functional {
    pub fn name(self) -> &'static str {
        match self {
            Functional::Weight => "weight",
            Functional::Norm => "norm",
            Functional::Matrix => "matrix",
            Functional::Reduced => "reduced",
        }
    }
}

pub fn slope(
    p: &Problem,
    arc: &str,
    functional: Functional,
    plot_data: Option<&Path>,
    exec: Execution,
) -> Result<Outcome, CliError> {
    let a = p.arc(arc)?;
    let zs = p.z_samples.clone().unwrap_or_else(default_samples);
    let (fit, exact): (SlopeFit, Option<Rational>) = match functional {
        Functional::Weight => {
            (slope::fit_slope(&a.arc, &p.pair, &zs, exec)?, Some(rat(stability::weight(&a.arc, &p.pair)?)))
        }
        Functional::Norm => (
            slope::fit_norm_slope(&a.arc, &p.pair, &zs, exec)?,
            Some(rat(stability::norm(&a.arc, &p.pair, SlotOrder::Analytic)?)),
        ),
        Functional::Matrix => (slope::fit_matrix_slope(&a.arc, &zs, exec)?, Some(rat(-a.arc.min_entry_ord()?))),
        Functional::Reduced => {
            let check = slope::verify_reduced_slope(&a.arc, &p.pair, &p.torus_or_trivial(), &zs, exec)?;
            (check.fit, Some(check.exact))
        }
    };
    if let Some(path) = plot_data {
        std::fs::write(path, fit.plot_data())
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    }
    let exact_f = exact.as_ref().and_then(|q| q.to_f64());
    let deviation = exact_f.map(|e| (fit.slope - e).abs());
    let within = deviation.is_some_and(|d| d <= SLOPE_TOLERANCE);
    let samples: Vec<Value> = fit
        .magnitudes
        .iter()
        .zip(fit.log_inverse_magnitudes())
        .zip(&fit.values)
        .map(|((z, x), y)| json!({"z": z, "log_inverse_z": x, "value": y}))
        .collect();
    Ok(Outcome {
        report: json!({
            "command": "slope",
            "arc": a.name,
            "functional": functional.name(),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "max_residual": fit.residual,
            "exact": exact.as_ref().map(rational),
            "deviation": deviation,
            "tolerance": SLOPE_TOLERANCE,
            "within_tolerance": within,
            "samples": samples,
        }),
        status: if within { Status::Clean } else { Status::Violation },
    })
}
