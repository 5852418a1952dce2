//! Problem files: a versioned TOML document describing one tensor or
//! polynomial-map eigenproblem.

use std::path::Path;

use mlpf::{MapKind, MonotoneMap, NonnegTensor, NormWeights, PolynomialMap};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tensor,
    Polymap,
}

/// One nonzero tensor coefficient, 0-based multi-index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub idx: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub exps: Vec<u32>,
    pub coeff: f64,
}

/// A single exponent or one per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponents {
    Scalar(f64),
    List(Vec<f64>),
}

/// Solver overrides stored with the problem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
}

impl SolverSpec {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Raw file contents, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponents>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<EntrySpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<MonomialSpec>>>,
    #[serde(default, skip_serializing_if = "SolverSpec::is_empty")]
    pub solver: SolverSpec,
}

/// A validated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub system: MapKind,
    pub psi: Option<Vec<f64>>,
    pub solver: SolverSpec,
}

fn invalid(field: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid {
        field: field.into(),
        message: msg.to_string(),
    }
}

fn require<T>(v: Option<T>, field: &str, kind: &str) -> Result<T, CliError> {
    v.ok_or_else(|| invalid(field, format!("required for kind = \"{kind}\"")))
}

fn forbid<T>(v: &Option<T>, field: &str, kind: &str) -> Result<(), CliError> {
    match v {
        Some(_) => Err(invalid(field, format!("not allowed for kind = \"{kind}\""))),
        None => Ok(()),
    }
}

/// Reads and validates a problem file.
pub fn parse_problem(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_problem_str(&text).map_err(|e| e.in_file(path))
}

pub fn parse_problem_str(text: &str) -> Result<Problem, CliError> {
    let raw: ProblemFile = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    raw.validate()
}

impl ProblemFile {
    pub fn validate(self) -> Result<Problem, CliError> {
        if self.format != FORMAT_VERSION {
            return Err(invalid(
                "format",
                format!(
                    "unsupported version {}, expected {FORMAT_VERSION}",
                    self.format
                ),
            ));
        }
        let system = match self.kind {
            Kind::Tensor => {
                let k = "tensor";
                forbid(&self.n, "n", k)?;
                forbid(&self.deltas, "deltas", k)?;
                forbid(&self.a, "a", k)?;
                forbid(&self.components, "components", k)?;
                let dims = require(self.dims, "dims", k)?;
                let entries = require(self.entries, "entries", k)?;
                let tensor = NonnegTensor::new(
                    dims.clone(),
                    entries.into_iter().map(|e| (e.idx, e.value)).collect(),
                )
                .map_err(|e| invalid(tensor_field(&e), e))?;
                let p = match require(self.p, "p", k)? {
                    Exponents::Scalar(v) => vec![v; dims.len()],
                    Exponents::List(v) => v,
                };
                let weights = NormWeights::new(p).map_err(|e| invalid("p", e))?;
                if weights.len() != tensor.order() {
                    return Err(invalid(
                        "p",
                        format!(
                            "expected {} exponents, got {}",
                            tensor.order(),
                            weights.len()
                        ),
                    ));
                }
                MapKind::Tensor { tensor, weights }
            }
            Kind::Polymap => {
                let k = "polymap";
                forbid(&self.dims, "dims", k)?;
                forbid(&self.entries, "entries", k)?;
                let n = require(self.n, "n", k)?;
                let components = require(self.components, "components", k)?;
                for (i, c) in components.iter().enumerate() {
                    for (j, m) in c.iter().enumerate() {
                        if !(m.coeff >= 0.0 && m.coeff.is_finite()) {
                            return Err(invalid(
                                format!("components[{i}][{j}].coeff"),
                                format!("coefficient {} must be finite and nonnegative", m.coeff),
                            ));
                        }
                    }
                }
                let map = PolynomialMap::new(
                    n,
                    components
                        .into_iter()
                        .map(|c| c.into_iter().map(|m| (m.exps, m.coeff)).collect())
                        .collect(),
                )
                .map_err(|e| invalid(poly_field(&e), e))?;
                let deltas = require(self.deltas, "deltas", k)?;
                let norm_p = match require(self.p, "p", k)? {
                    Exponents::Scalar(v) => v,
                    Exponents::List(_) => return Err(invalid("p", "must be a single number")),
                };
                let scale = self.a.unwrap_or(1.0);
                // reuses the map constructor's checks on deltas, p and a
                MonotoneMap::from_poly(&map, &deltas, norm_p, scale)
                    .map_err(|e| invalid(poly_param_field(&e), e))?;
                MapKind::Poly {
                    map,
                    deltas,
                    norm_p,
                    scale,
                }
            }
        };
        let n = system_dim(&system);
        if let Some(psi) = &self.psi {
            if psi.len() != n {
                return Err(invalid(
                    "psi",
                    format!("expected {n} values, got {}", psi.len()),
                ));
            }
            if psi.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(invalid("psi", "entries must be strictly positive"));
            }
        }
        validate_solver(&self.solver)?;
        Ok(Problem {
            system,
            psi: self.psi,
            solver: self.solver,
        })
    }
}

fn validate_solver(s: &SolverSpec) -> Result<(), CliError> {
    if let Some(t) = s.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("solver.tol", "must be positive"));
        }
    }
    if let Some(d) = s.damping {
        if !(d > 0.0 && d <= 1.0) {
            return Err(invalid("solver.damping", "must lie in (0, 1]"));
        }
    }
    if s.max_iter == Some(0) {
        return Err(invalid("solver.max_iter", "must be at least 1"));
    }
    if s.starts == Some(0) {
        return Err(invalid("solver.starts", "must be at least 1"));
    }
    Ok(())
}

fn tensor_field(e: &mlpf::Error) -> String {
    use mlpf::Error::*;
    match e {
        IndexOutOfRange { entry, .. } => format!("entries[{entry}].idx"),
        NegativeCoefficient { entry, .. } | NonFiniteCoefficient { entry, .. } => {
            format!("entries[{entry}].value")
        }
        DuplicateIndex(_) => "entries".into(),
        _ => "dims".into(),
    }
}

fn poly_field(e: &mlpf::Error) -> String {
    use mlpf::Error::*;
    match e {
        ExponentLength { component, .. } | DegreeTooLow { component } => {
            format!("components[{component}]")
        }
        _ => "components".into(),
    }
}

fn poly_param_field(e: &mlpf::Error) -> String {
    use mlpf::Error::*;
    match e {
        DeltaBelowDegree { component, .. } => format!("deltas[{component}]"),
        InvalidParameter { name, .. } => (*name).to_string(),
        _ => "deltas".into(),
    }
}

pub fn system_dim(system: &MapKind) -> usize {
    match system {
        MapKind::Tensor { tensor, .. } => tensor.total_dim(),
        MapKind::Poly { map, .. } => map.n(),
    }
}

impl Problem {
    pub fn kind(&self) -> Kind {
        match self.system {
            MapKind::Tensor { .. } => Kind::Tensor,
            MapKind::Poly { .. } => Kind::Polymap,
        }
    }

    pub fn dim(&self) -> usize {
        system_dim(&self.system)
    }

    /// The map `F` of this problem.
    pub fn map(&self) -> mlpf::Result<MonotoneMap> {
        match &self.system {
            MapKind::Tensor { tensor, weights } => MonotoneMap::from_tensor(tensor, weights),
            MapKind::Poly {
                map,
                deltas,
                norm_p,
                scale,
            } => MonotoneMap::from_poly(map, deltas, *norm_p, *scale),
        }
    }

    /// Replaces the norm exponents.
    pub fn with_p(mut self, p: &[f64]) -> Result<Self, CliError> {
        match &mut self.system {
            MapKind::Tensor { tensor, weights } => {
                let p = match p {
                    [v] => vec![*v; tensor.order()],
                    _ => p.to_vec(),
                };
                if p.len() != tensor.order() {
                    return Err(invalid(
                        "--p",
                        format!("expected 1 or {} values, got {}", tensor.order(), p.len()),
                    ));
                }
                *weights = NormWeights::new(p).map_err(|e| invalid("--p", e))?;
            }
            MapKind::Poly {
                map,
                deltas,
                norm_p,
                scale,
            } => {
                let [v] = p else {
                    return Err(invalid("--p", "polymap problems take a single value"));
                };
                MonotoneMap::from_poly(map, deltas, *v, *scale).map_err(|e| invalid("--p", e))?;
                *norm_p = *v;
            }
        }
        Ok(self)
    }

    /// Canonical file form: sorted entries, explicit defaults for `a`.
    pub fn to_file(&self) -> ProblemFile {
        let mut file = ProblemFile {
            format: FORMAT_VERSION,
            kind: self.kind(),
            dims: None,
            n: None,
            p: None,
            deltas: None,
            a: None,
            psi: self.psi.clone(),
            entries: None,
            components: None,
            solver: self.solver.clone(),
        };
        match &self.system {
            MapKind::Tensor { tensor, weights } => {
                file.dims = Some(tensor.dims().to_vec());
                file.p = Some(Exponents::List(weights.as_slice().to_vec()));
                file.entries = Some(
                    tensor
                        .entries()
                        .map(|(idx, value)| EntrySpec {
                            idx: idx.to_vec(),
                            value,
                        })
                        .collect(),
                );
            }
            MapKind::Poly {
                map,
                deltas,
                norm_p,
                scale,
            } => {
                file.n = Some(map.n());
                file.p = Some(Exponents::Scalar(*norm_p));
                file.deltas = Some(deltas.clone());
                file.a = Some(*scale);
                file.components = Some(
                    map.components()
                        .iter()
                        .map(|c| {
                            c.iter()
                                .map(|m| MonomialSpec {
                                    exps: m.exponents.clone(),
                                    coeff: m.coeff,
                                })
                                .collect()
                        })
                        .collect(),
                );
            }
        }
        file
    }

    pub fn to_toml(&self) -> String {
        crate::report::compact_floats(
            &toml::to_string(&self.to_file()).expect("problem files always serialize"),
        )
    }
}
