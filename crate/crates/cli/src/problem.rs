//! Problem files: one JSON document describing a pair, an optional torus,
//! named arcs and run parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use arcstab_core::literal::{parse_gaussian, parse_series, ParseError};
use arcstab_core::lp::Rational;
use arcstab_core::repr::parse_rep;
use arcstab_core::{ArcMatrix, GaussianRational, NamedArc, Pair, RepExpr, RepVector, SlotOrder, TorusData};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub group_dim: usize,
    #[serde(rename = "V")]
    pub v_rep: String,
    #[serde(rename = "W")]
    pub w_rep: String,
    /// Basis-element name → Gaussian-rational literal.
    pub v: BTreeMap<String, String>,
    pub w: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deg_v: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusSpec>,
    #[serde(default)]
    pub arcs: Vec<ArcSpec>,
    #[serde(default)]
    pub parameters: Parameters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub rank: usize,
    /// Weight in ℤ^rank of each standard basis vector e1…em.
    pub weights: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub name: String,
    /// Rows of series literals.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "box")]
    pub box_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_zero: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_order: Option<String>,
}

impl ProblemFile {
    pub fn from_json(src: &str) -> Result<Self, CliError> {
        serde_json::from_str(src).map_err(|e| {
            // serde appends its own " at line L column C"; the error already carries both
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
            CliError::Json { line: e.line(), column: e.column(), message }
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&src)
    }

    /// Pretty JSON with sorted keys.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("problem files serialize");
        let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
        s.push('\n');
        s
    }

    /// Validates the file and builds the typed problem.
    pub fn load(&self, precision: Option<u32>) -> Result<Problem, CliError> {
        let m = self.group_dim;
        if m == 0 {
            return Err(CliError::Invalid("group_dim must be positive".into()));
        }
        let v_rep = rep_at("V", &self.v_rep)?;
        let w_rep = rep_at("W", &self.w_rep)?;
        for (name, rep) in [("V", &v_rep), ("W", &w_rep)] {
            if let Some(d) = rep.ambient_dim()? {
                if d != m {
                    return Err(CliError::Invalid(format!("{name} acts on dimension {d}, but group_dim is {m}")));
                }
            }
        }
        let v = vector_at("v", v_rep, &self.v)?;
        let w = vector_at("w", w_rep, &self.w)?;
        let pair = match self.deg_v {
            Some(d) => Pair::with_degree(v, w, d)?,
            None => Pair::new(v, w)?,
        };
        let torus = match &self.torus {
            Some(t) => {
                if t.weights.len() != m {
                    return Err(CliError::Invalid(format!(
                        "torus lists {} weights for a group of dimension {m}",
                        t.weights.len()
                    )));
                }
                Some(TorusData::new(t.rank, t.weights.clone())?)
            }
            None => None,
        };
        let precision = precision.or(self.parameters.precision);
        let mut names = BTreeSet::new();
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for a in &self.arcs {
            if !names.insert(a.name.as_str()) {
                return Err(CliError::Invalid(format!("duplicate arc name `{}`", a.name)));
            }
            let mut rows = Vec::with_capacity(a.matrix.len());
            for (i, row) in a.matrix.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, lit) in row.iter().enumerate() {
                    let s = parse_series(lit)
                        .map_err(|e| literal_error(format!("arc `{}` entry ({}, {})", a.name, i + 1, j + 1), e))?;
                    out.push(s);
                }
                rows.push(out);
            }
            if rows.len() != m {
                return Err(CliError::Invalid(format!("arc `{}` has {} rows, expected {m}", a.name, rows.len())));
            }
            let mut arc = ArcMatrix::arc(rows)?;
            if let Some(p) = precision {
                arc = arc.with_inverse_precision(p);
            }
            arcs.push(NamedArc::new(a.name.clone(), arc));
        }
        let p = &self.parameters;
        let epsilon = match &p.epsilon {
            Some(lit) => Some(parse_epsilon(lit)?),
            None => None,
        };
        let slot_order = match &p.slot_order {
            Some(s) => s.parse::<SlotOrder>()?,
            None => SlotOrder::default(),
        };
        Ok(Problem {
            group_dim: m,
            pair,
            torus,
            arcs,
            k: p.k,
            epsilon,
            precision,
            z_samples: p.z_samples.clone(),
            box_size: p.box_size,
            trace_zero: p.trace_zero.unwrap_or(false),
            slot_order,
        })
    }
}

fn literal_error(location: String, error: ParseError) -> CliError {
    CliError::Literal { location, error }
}

fn rep_at(field: &str, src: &str) -> Result<RepExpr, CliError> {
    parse_rep(src).map_err(|e| literal_error(format!("representation {field}"), e))
}

fn vector_at(field: &str, rep: RepExpr, coords: &BTreeMap<String, String>) -> Result<RepVector, CliError> {
    let mut named: Vec<(&str, GaussianRational)> = Vec::with_capacity(coords.len());
    for (name, lit) in coords {
        let c = parse_gaussian(lit).map_err(|e| literal_error(format!("vector {field} coordinate `{name}`"), e))?;
        named.push((name, c));
    }
    Ok(RepVector::from_names(rep, named)?)
}

/// A positive rational `p/q`.
pub fn parse_epsilon(src: &str) -> Result<Rational, CliError> {
    let g = parse_gaussian(src).map_err(|e| literal_error("epsilon".into(), e))?;
    if !g.is_real() || g.re() <= Rational::from_integer(0.into()) {
        return Err(CliError::Invalid(format!("epsilon must be a positive rational, got `{src}`")));
    }
    Ok(g.re())
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub group_dim: usize,
    pub pair: Pair,
    pub torus: Option<TorusData>,
    pub arcs: Vec<NamedArc>,
    pub k: Option<u32>,
    pub epsilon: Option<Rational>,
    pub precision: Option<u32>,
    pub z_samples: Option<Vec<f64>>,
    pub box_size: Option<u32>,
    pub trace_zero: bool,
    pub slot_order: SlotOrder,
}

impl Problem {
    pub fn arc(&self, name: &str) -> Result<&NamedArc, CliError> {
        self.arcs.iter().find(|a| a.name == name).ok_or_else(|| CliError::Invalid(format!("no arc named `{name}`")))
    }

    /// The torus, or the rank-0 torus when none is declared.
    pub fn torus_or_trivial(&self) -> TorusData {
        self.torus.clone().unwrap_or_else(|| TorusData::trivial(self.group_dim))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "group_dim": 2,
        "V": "triv",
        "W": "sym(2, std(2))",
        "v": {"1": "1"},
        "w": {"e1^2": "1", "e2^2": "-1/2"},
        "torus": {"rank": 1, "weights": [[1], [-1]]},
        "arcs": [{"name": "lambda", "matrix": [["z^-1", "0"], ["0", "z"]]}],
        "parameters": {"k": 2, "box": 3, "trace_zero": true}
    }"#;

    #[test]
    fn canonical_round_trip() {
        let f = ProblemFile::from_json(SAMPLE).unwrap();
        let canon = f.to_canonical_json();
        let g = ProblemFile::from_json(&canon).unwrap();
        assert_eq!(f, g);
        assert_eq!(canon, g.to_canonical_json());
    }

    #[test]
    fn loads() {
        let p = ProblemFile::from_json(SAMPLE).unwrap().load(None).unwrap();
        assert_eq!(p.arcs.len(), 1);
        assert!(p.trace_zero);
        assert_eq!(p.torus.unwrap().rank, 1);
    }

    #[test]
    fn literal_errors_name_the_token() {
        let bad = SAMPLE.replace("z^-1", "z^^1");
        let err = ProblemFile::from_json(&bad).unwrap().load(None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("arc `lambda` entry (1, 1)"), "{msg}");
        assert!(msg.contains("column 3"), "{msg}");
    }

    #[test]
    fn json_errors_carry_line_and_column() {
        let err = ProblemFile::from_json("{\n  \"group_dim\": 2,\n  oops\n}").unwrap_err();
        assert!(matches!(err, CliError::Json { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_inconsistent_files() {
        let bad = SAMPLE.replace("\"group_dim\": 2", "\"group_dim\": 3");
        assert!(ProblemFile::from_json(&bad).unwrap().load(None).is_err());
        let bad = SAMPLE.replace("\"e2^2\"", "\"e3^2\"");
        assert!(ProblemFile::from_json(&bad).unwrap().load(None).is_err());
        assert!(parse_epsilon("-1/2").is_err());
        assert_eq!(parse_epsilon("1/3").unwrap(), Rational::new(1.into(), 3.into()));
    }
}
