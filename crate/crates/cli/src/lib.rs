//! Problem files, reports and command dispatch for the `mlpf` binary.

pub mod problem;
pub mod report;

use std::path::{Path, PathBuf};

use mlpf::structure::Imprimitivity;
use mlpf::{
    block_normalize, convergence_rate, multi_start_solve, power_solve, verify_solution,
    EigenSolution, MapKind, MonotoneMap, Route, SolveError, SolverConfig, StructureReport, Verdict,
};
use thiserror::Error;

pub use problem::{parse_problem, parse_problem_str, Kind, Problem, ProblemFile};
pub use report::Report;

use report::{
    round12, round12_up, round_all, CandidateFile, CwSection, RateSection, SearchSection,
    SolutionSection, StructureSection, VerifySection,
};

/// Tolerance for `verify` when neither `--tol` nor the candidate gives one.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {inner}")]
    InFile { path: String, inner: Box<CliError> },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not primitive: {0} (pass --allow-nonprimitive to run anyway)")]
    NotPrimitive(String),
    #[error("map is not monotone (some p_j < d); use `search`")]
    NonMonotone,
    #[error("{0}")]
    MaxIter(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

impl CliError {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Parse(_) | Self::Invalid { .. } => 3,
            Self::InFile { inner, .. } => inner.exit_code(),
            Self::Precondition(_) => 4,
            Self::NotPrimitive(_) => 5,
            Self::NonMonotone => 6,
            Self::MaxIter(_) => 7,
            Self::Io { .. } => 9,
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (Self::Io { .. } | Self::InFile { .. }) => e,
            e => Self::InFile {
                path: path.display().to_string(),
                inner: Box::new(e),
            },
        }
    }
}

/// Exit status when every verification ran but at least one failed.
pub const EXIT_VERIFY_FAILED: i32 = 8;

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => Self::Precondition(m.to_string()),
            e @ SolveError::NotPrimitive { .. } => Self::NotPrimitive(e.to_string()),
            SolveError::NonMonotoneMap => Self::NonMonotone,
            e @ SolveError::MaxIterExceeded { .. } => Self::MaxIter(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Solve,
    Search,
    Rate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Check => "check",
            Self::Solve => "solve",
            Self::Search => "search",
            Self::Rate => "rate",
            Self::Verify => "verify",
        }
    }
}

/// Command-line overrides; `None` keeps the problem file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub p: Option<Vec<f64>>,
    pub psi: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub damping: Option<f64>,
    pub allow_nonprimitive: bool,
    pub candidate: Option<PathBuf>,
    pub lambda: Option<f64>,
}

fn solver_config(problem: &Problem, flags: &Flags) -> Result<SolverConfig, CliError> {
    let defaults = SolverConfig::default();
    let s = &problem.solver;
    let psi = match flags.psi.clone().or_else(|| problem.psi.clone()) {
        Some(v) => {
            if v.len() != problem.dim() {
                return Err(CliError::Invalid {
                    field: "psi".into(),
                    message: format!("expected {} values, got {}", problem.dim(), v.len()),
                });
            }
            if let Some(i) = v.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(CliError::Invalid {
                    field: format!("psi[{i}]"),
                    message: format!("must be positive and finite, got {}", v[i]),
                });
            }
            Some(mlpf::Functional::new(v).map_err(|e| CliError::Invalid {
                field: "psi".into(),
                message: e.to_string(),
            })?)
        }
        None => None,
    };
    let cfg = SolverConfig {
        psi,
        tol: flags.tol.or(s.tol).unwrap_or(defaults.tol),
        max_iter: flags.max_iter.or(s.max_iter).unwrap_or(defaults.max_iter),
        damping: flags.damping.or(s.damping),
        seed: flags.seed.or(s.seed).unwrap_or(defaults.seed),
        starts: flags.starts.or(s.starts).unwrap_or(defaults.starts),
        allow_nonprimitive: flags.allow_nonprimitive,
    };
    let bad = |name: &str, msg: &str| CliError::Invalid {
        field: name.into(),
        message: msg.into(),
    };
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(bad("tol", "must be positive"));
    }
    if cfg.damping.is_some_and(|d| !(d > 0.0 && d <= 1.0)) {
        return Err(bad("damping", "must lie in (0, 1]"));
    }
    if cfg.max_iter == 0 {
        return Err(bad("max_iter", "must be at least 1"));
    }
    if cfg.starts == 0 {
        return Err(bad("starts", "must be at least 1"));
    }
    Ok(cfg)
}

fn exponents(problem: &Problem) -> Vec<f64> {
    match &problem.system {
        MapKind::Tensor { weights, .. } => weights.as_slice().to_vec(),
        MapKind::Poly { norm_p, .. } => vec![*norm_p],
    }
}

fn build_map(problem: &Problem) -> Result<MonotoneMap, CliError> {
    problem
        .map()
        .map_err(|e| CliError::Precondition(e.to_string()))
}

/// Runs one command on a validated problem.
pub fn run_command(cmd: Command, problem: &Problem, flags: &Flags) -> Result<Report, CliError> {
    let problem = match &flags.p {
        Some(p) => problem.clone().with_p(p)?,
        None => problem.clone(),
    };
    let cfg = solver_config(&problem, flags)?;
    let mut report = Report::new(cmd.name(), problem.kind(), exponents(&problem));
    match cmd {
        Command::Check => report.structure = Some(structure_section(&problem)),
        Command::Solve => {
            let map = build_map(&problem)?;
            let mut sol = power_solve(&map, &cfg)?;
            if let MapKind::Tensor { tensor, weights } = &problem.system {
                sol = block_normalize(&sol, tensor, weights)
                    .map_err(|e| CliError::Precondition(e.to_string()))?;
            }
            report.warnings.extend(sol.warnings.iter().cloned());
            report
                .solutions
                .push(solution_section(&problem, &sol, None)?);
        }
        Command::Search => {
            let map = build_map(&problem)?;
            let out = multi_start_solve(&map, &cfg)?;
            report.search = Some(SearchSection {
                starts: out.starts,
                seed: cfg.seed,
                damping: round12(cfg.damping_for(&map)),
                distinct: out.solutions.len(),
                damped_converged: out.damped_converged,
                newton_converged: out.newton_converged,
                failed: out.failed,
            });
            if !map.is_monotone() {
                report.warnings.push(
                    "map is not monotone; the number of positive solutions is not certified".into(),
                );
            }
            for (sol, hits) in out.solutions.iter().zip(&out.hits) {
                report
                    .solutions
                    .push(solution_section(&problem, sol, Some(*hits))?);
            }
        }
        Command::Rate => {
            let map = build_map(&problem)?;
            let sol = power_solve(&map, &cfg)?;
            let rep = convergence_rate(&map, &sol, &cfg)?;
            report.warnings.extend(sol.warnings.iter().cloned());
            report.rate = Some(RateSection {
                lambda_m: round12(rep.lambda_m),
                second_modulus: round12(rep.second),
                rate: round12(rep.rate),
                empirical_rate: round12(rep.empirical_rate),
                ratios_used: rep.ratios_used,
                within_bound: rep.within_bound,
            });
            if !rep.within_bound {
                report.warnings.push(
                    "measured error decay exceeds the predicted rate by more than 0.05".into(),
                );
            }
            report
                .solutions
                .push(solution_section(&problem, &sol, None)?);
        }
        Command::Verify => {
            let path = flags
                .candidate
                .as_ref()
                .ok_or_else(|| CliError::Usage("verify needs --candidate <path>".into()))?;
            report.verifications = verify_candidates(&problem, path, flags)?;
        }
    }
    Ok(report)
}

fn verdict_flag<W>(
    name: &str,
    v: &Verdict<W>,
    witness: impl Fn(&W) -> String,
    out: &mut StructureSection,
) -> Option<bool> {
    match v {
        Verdict::Holds => Some(true),
        Verdict::Fails(w) => {
            out.witnesses.push(format!("{name}: {}", witness(w)));
            Some(false)
        }
        Verdict::Skipped(why) => {
            out.skipped.push(format!("{name}: {why}"));
            None
        }
    }
}

fn imprimitivity(w: &Imprimitivity) -> String {
    match w {
        Imprimitivity::Reducible(set) => format!("not strongly connected, closed class {set:?}"),
        Imprimitivity::Periodic(c) => format!("cyclicity {c}"),
    }
}

fn structure_section(problem: &Problem) -> StructureSection {
    let rep = match &problem.system {
        MapKind::Tensor { tensor, weights } => StructureReport::for_tensor(tensor, weights),
        MapKind::Poly { map, deltas, .. } => StructureReport::for_map(map, deltas),
    };
    let mut s = StructureSection {
        weakly_irreducible: None,
        irreducible: None,
        weakly_primitive: None,
        map_primitive: None,
        map_cyclicity: None,
        monotone: problem.map().ok().map(|m| m.is_monotone()),
        witnesses: Vec::new(),
        skipped: Vec::new(),
    };
    let set = |v: &Vec<usize>| format!("{v:?}");
    s.weakly_irreducible = verdict_flag("weakly_irreducible", &rep.weakly_irreducible, set, &mut s);
    s.irreducible = verdict_flag("irreducible", &rep.irreducible, set, &mut s);
    s.weakly_primitive = verdict_flag(
        "weakly_primitive",
        &rep.weakly_primitive,
        imprimitivity,
        &mut s,
    );
    match &rep.map_primitive {
        Some(v) => {
            s.map_primitive = verdict_flag("map_primitive", v, imprimitivity, &mut s);
            if let Verdict::Fails(Imprimitivity::Periodic(c)) = v {
                s.map_cyclicity = Some(*c);
            }
        }
        None => s
            .skipped
            .push("map_primitive: the map cannot be built (a slice of the tensor vanishes)".into()),
    }
    s
}

fn solution_section(
    problem: &Problem,
    sol: &EigenSolution,
    hits: Option<usize>,
) -> Result<SolutionSection, CliError> {
    let x = round_all(&sol.x());
    let lambda = round12(sol.lambda);
    let check = verify_solution(&problem.system, &x, Some(lambda), f64::INFINITY)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let cw = (!sol.cw_trace.is_empty()).then(|| {
        let first = sol.cw_trace[0];
        let last = *sol.cw_trace.last().unwrap();
        CwSection {
            first: [round12(first.0), round12(first.1)],
            last: [round12(last.0), round12(last.1)],
            relative_width: round12((last.1 - last.0) / last.1),
            contains_mu: sol
                .cw_trace
                .iter()
                .all(|(lo, hi)| *lo <= sol.mu && sol.mu <= *hi),
        }
    });
    Ok(SolutionSection {
        x,
        block_sizes: sol.blocks.iter().map(Vec::len).collect(),
        lambda,
        mu: round12(sol.mu),
        u: round_all(&sol.u),
        residual: round12_up(check.residual.max(check.norm_deviation)),
        fixed_point_residual: round12_up(sol.residual),
        route: match sol.route {
            Route::Power => "power",
            Route::Damped => "damped",
            Route::Newton => "newton",
        }
        .into(),
        iterations: (sol.route == Route::Power).then_some(sol.iterations),
        attracting: sol.attracting,
        hits,
        cw,
    })
}

fn verify_candidates(
    problem: &Problem,
    path: &Path,
    flags: &Flags,
) -> Result<Vec<VerifySection>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let file: CandidateFile =
        toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()).in_file(path))?;
    let candidates = file.candidates();
    if candidates.is_empty() {
        return Err(CliError::Invalid {
            field: "solutions".into(),
            message: "candidate file lists no solutions".into(),
        }
        .in_file(path));
    }
    candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let tol = flags.tol.or(c.residual).unwrap_or(DEFAULT_VERIFY_TOL);
            let lambda = flags.lambda.or(c.lambda);
            let rep = verify_solution(&problem.system, &c.x, lambda, tol).map_err(|e| {
                CliError::Invalid {
                    field: format!("solutions[{i}].x"),
                    message: e.to_string(),
                }
                .in_file(path)
            })?;
            Ok(VerifySection {
                candidate: i,
                residual: round12_up(rep.residual),
                norm_deviation: round12_up(rep.norm_deviation),
                lambda: round12(rep.lambda),
                tol,
                passed: rep.passed,
            })
        })
        .collect()
}
