//! Normalized power algorithm with Collatz-Wielandt certificates, multi-start
//! search for maps with several positive eigenvectors, and residual checks
//! on the raw eigen-systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{hilbert_interior, split_blocks, Functional, MapKind, MonotoneMap};
use crate::error::{Error, Result};
use crate::model::{all_slots, p_norm, NonnegTensor, NormWeights, PolynomialMap};
use crate::rate::{gelfand_radius, jacobian};
use crate::structure::{primitivity, Imprimitivity, Verdict};

/// Solutions closer than this in Hilbert distance are merged.
pub const DEDUP_DISTANCE: f64 = 1e-6;
const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TARGET: f64 = 1e-14;
/// Log-coordinates below this are treated as having left the interior.
const LOG_FLOOR: f64 = -700.0;

/// The eigen-system a candidate is checked against: the tensor system with
/// unit block norms, or `P_i(x) = lambda x_i^delta_i` with `||x||_p = a`.
pub type System = MapKind;

/// Parameters of the power algorithm and of the multi-start search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Normalizing functional; all-ones when `None`.
    pub psi: Option<Functional>,
    pub tol: f64,
    pub max_iter: usize,
    /// Damping `theta` in `(0, 1]`; when `None`, 1 for monotone maps and 0.5
    /// otherwise.
    pub damping: Option<f64>,
    pub seed: u64,
    pub starts: usize,
    /// Run the power algorithm on strongly connected but periodic maps.
    pub allow_nonprimitive: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            psi: None,
            tol: 1e-10,
            max_iter: 10_000,
            damping: None,
            seed: 0,
            starts: 100,
            allow_nonprimitive: false,
        }
    }
}

impl SolverConfig {
    /// The validated functional for dimension `n`.
    pub fn functional(&self, n: usize) -> Result<Functional> {
        let psi = self.psi.clone().unwrap_or_else(|| Functional::ones(n));
        if psi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: psi.len(),
            });
        }
        if !psi.is_positive() {
            return Err(Error::FunctionalNotPositive);
        }
        Ok(psi)
    }

    pub fn damping_for(&self, map: &MonotoneMap) -> f64 {
        self.damping
            .unwrap_or(if map.is_monotone() { 1.0 } else { 0.5 })
    }

    fn validate(&self, map: &MonotoneMap) -> Result<Functional> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: self.tol,
            });
        }
        let theta = self.damping_for(map);
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "damping",
                value: theta,
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
            });
        }
        self.functional(map.dim())
    }
}

/// How a solution was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Route {
    Power,
    Damped,
    Newton,
}

/// A positive eigenvector of `F` together with the matching solution of the
/// underlying system.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// Eigenvector of `F`, `psi^T u = 1`.
    pub u: Vec<f64>,
    /// `F(u) = mu u`.
    pub mu: f64,
    /// System eigenvalue: `mu^(pmax - 1)` for tensors, `mu^delta` for maps.
    pub lambda: f64,
    /// Tensors: blocks of unit `p_j`-norm. Maps: one block with `||x||_p = a`.
    pub blocks: Vec<Vec<f64>>,
    pub iterations: usize,
    /// `||F(u) - mu u||_inf / ||F(u)||_inf`.
    pub residual: f64,
    /// Collatz-Wielandt bracket at every iterate (power algorithm only).
    pub cw_trace: Vec<(f64, f64)>,
    pub route: Route,
    /// Whether the damped iteration is locally contracting at `u`.
    pub attracting: Option<bool>,
    pub warnings: Vec<String>,
}

impl EigenSolution {
    /// The system solution as one concatenated vector.
    pub fn x(&self) -> Vec<f64> {
        self.blocks.concat()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] Error),
    /// `cyclicity` is `None` when the di-graph is not strongly connected.
    #[error("{}", match .cyclicity {
        Some(c) => format!("map di-graph is periodic with cyclicity {c}"),
        None => "map di-graph is not strongly connected".to_string(),
    })]
    NotPrimitive { cyclicity: Option<usize> },
    #[error("map is not monotone; use the multi-start search")]
    NonMonotoneMap,
    #[error("no convergence within {} iterations (bracket [{}, {}])",
        .best.iterations,
        .best.cw_trace.last().map_or(f64::NAN, |b| b.0),
        .best.cw_trace.last().map_or(f64::NAN, |b| b.1))]
    MaxIterExceeded { best: Box<EigenSolution> },
}

pub type SolveResult<T> = std::result::Result<T, SolveError>;

/// `(min_i F_i(x)/x_i, max_i F_i(x)/x_i)`.
pub fn collatz_wielandt_bounds(map: &MonotoneMap, x: &[f64]) -> Result<(f64, f64)> {
    let fx = map.apply(x)?;
    Ok(bracket(&fx, x))
}

fn bracket(fx: &[f64], x: &[f64]) -> (f64, f64) {
    fx.iter()
        .zip(x)
        .map(|(f, v)| f / v)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

fn relative_residual(fx: &[f64], x: &[f64], mu: f64) -> f64 {
    let num = fx
        .iter()
        .zip(x)
        .map(|(f, v)| (f - mu * v).abs())
        .fold(0.0, f64::max);
    num / fx.iter().copied().fold(0.0, f64::max)
}

fn interior(x: &[f64]) -> bool {
    x.iter().all(|v| *v > 0.0 && v.is_finite())
}

/// I.i.d. standard exponential coordinates scaled to `psi^T x = 1`.
pub(crate) fn sample_start(rng: &mut ChaCha8Rng, psi: &Functional) -> Vec<f64> {
    let mut x: Vec<f64> = (0..psi.len())
        .map(|_| {
            let v: f64 = Exp1.sample(rng);
            v.max(f64::MIN_POSITIVE)
        })
        .collect();
    psi.normalize(&mut x);
    x
}

fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct Run {
    x: Vec<f64>,
    mu: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<(f64, f64)>,
}

/// Iterates `x <- (1 - theta) x + theta G(x)`. With `certify`, convergence
/// also requires a small Collatz-Wielandt gap and residual.
fn iterate(
    map: &MonotoneMap,
    psi: &Functional,
    x0: &[f64],
    theta: f64,
    tol: f64,
    max_iter: usize,
    certify: bool,
) -> Run {
    let mut x = x0.to_vec();
    psi.normalize(&mut x);
    let mut trace = Vec::new();
    for k in 0..max_iter {
        let fx = map.apply_interior(&x);
        let s = psi.dot(&fx);
        if !interior(&fx) || !(s > 0.0 && s.is_finite()) {
            return Run {
                x,
                mu: f64::NAN,
                iterations: k,
                converged: false,
                trace,
            };
        }
        let (lo, hi) = bracket(&fx, &x);
        if certify {
            trace.push((lo, hi));
        }
        let mu = s / psi.dot(&x);
        let residual = relative_residual(&fx, &x, mu);
        let next: Vec<f64> = x
            .iter()
            .zip(&fx)
            .map(|(xi, fi)| (1.0 - theta) * xi + theta * fi / s)
            .collect();
        let step = hilbert_interior(&x, &next);
        let done = step <= tol && (!certify || ((hi - lo) / hi <= tol && residual <= tol));
        if done {
            return Run {
                x,
                mu,
                iterations: k,
                converged: true,
                trace,
            };
        }
        x = next;
        psi.normalize(&mut x);
    }
    let fx = map.apply_interior(&x);
    let mu = psi.dot(&fx) / psi.dot(&x);
    if certify {
        trace.push(bracket(&fx, &x));
    }
    Run {
        x,
        mu,
        iterations: max_iter,
        converged: false,
        trace,
    }
}

/// Newton's method on `log G(e^y) - y = 0`. Returns the final point scaled to
/// `psi^T x = 1`, or `None` if it leaves the interior or the linear solve
/// fails.
fn newton(map: &MonotoneMap, psi: &Functional, x0: &[f64], max_iter: usize) -> Option<Vec<f64>> {
    let n = x0.len();
    let log_residual = |y: &[f64]| -> Option<Vec<f64>> {
        if y.iter()
            .any(|v| !(v.is_finite() && *v > LOG_FLOOR && *v < -LOG_FLOOR))
        {
            return None;
        }
        let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        let fx = map.apply_interior(&x);
        let s = psi.dot(&fx);
        let r: Vec<f64> = fx.iter().zip(y).map(|(f, yi)| (f / s).ln() - yi).collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    };
    let sup = |r: &[f64]| r.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let mut y: Vec<f64> = x0.iter().map(|v| v.ln()).collect();
    let mut r = log_residual(&y)?;
    let mut rn = sup(&r);
    for _ in 0..max_iter {
        if rn <= NEWTON_TARGET {
            break;
        }
        let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        let fx = map.apply_interior(&x);
        let s = psi.dot(&fx);
        let g: Vec<f64> = fx.iter().map(|f| f / s).collect();
        let m = jacobian(map, &x).ok()?;
        let psi_m = DMatrix::from_row_slice(1, n, psi.as_slice()) * &m;
        let jac = DMatrix::from_fn(n, n, |i, k| {
            let gp = (m[(i, k)] - g[i] * psi_m[(0, k)]) / s;
            gp * x[k] / g[i] - if i == k { 1.0 } else { 0.0 }
        });
        let rhs = -DVector::from_column_slice(&r);
        let step = jac.lu().solve(&rhs)?;
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-10 {
            let trial: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if let Some(tr) = log_residual(&trial) {
                let tn = sup(&tr);
                if tn < rn {
                    y = trial;
                    r = tr;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let mut x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    psi.normalize(&mut x);
    interior(&x).then_some(x)
}

/// Hilbert distance between `x` and `G(x)`.
fn fixed_point_gap(map: &MonotoneMap, x: &[f64]) -> f64 {
    let fx = map.apply_interior(x);
    if !interior(&fx) {
        return f64::INFINITY;
    }
    hilbert_interior(x, &fx)
}

/// Polishes an eigenvector with a few Newton steps, keeping the input when
/// they do not help.
pub(crate) fn refine_eigenvector(map: &MonotoneMap, psi: &Functional, u: &[f64]) -> Vec<f64> {
    let before = fixed_point_gap(map, u);
    match newton(map, psi, u, 20) {
        Some(x)
            if fixed_point_gap(map, &x) <= before && hilbert_interior(u, &x) < DEDUP_DISTANCE =>
        {
            x
        }
        _ => u.to_vec(),
    }
}

fn solution_from(
    map: &MonotoneMap,
    psi: &Functional,
    u: Vec<f64>,
    iterations: usize,
    trace: Vec<(f64, f64)>,
    route: Route,
) -> EigenSolution {
    let fx = map.apply_interior(&u);
    let mu = psi.dot(&fx) / psi.dot(&u);
    let residual = relative_residual(&fx, &u, mu);
    let mut sol = EigenSolution {
        lambda: mu.powf(map.lambda_exponent()),
        blocks: Vec::new(),
        u,
        mu,
        iterations,
        residual,
        cw_trace: trace,
        route,
        attracting: None,
        warnings: Vec::new(),
    };
    sol.blocks = system_blocks(map, &sol.u);
    sol
}

fn system_blocks(map: &MonotoneMap, u: &[f64]) -> Vec<Vec<f64>> {
    match map.kind() {
        MapKind::Tensor { weights, .. } => split_blocks(u, map.block_sizes())
            .into_iter()
            .enumerate()
            .map(|(j, b)| {
                let nrm = p_norm(b, weights.get(j));
                b.iter().map(|v| v / nrm).collect()
            })
            .collect(),
        MapKind::Poly { norm_p, scale, .. } => {
            let c = scale / p_norm(u, *norm_p);
            vec![u.iter().map(|v| v * c).collect()]
        }
    }
}

/// Rescales each block of a tensor solution to unit `p_j`-norm and sets
/// `lambda = mu^(pmax - 1)`.
pub fn block_normalize(
    sol: &EigenSolution,
    tensor: &NonnegTensor,
    weights: &NormWeights,
) -> Result<EigenSolution> {
    if sol.u.len() != tensor.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: tensor.total_dim(),
            got: sol.u.len(),
        });
    }
    if weights.len() != tensor.order() {
        return Err(Error::WeightCount {
            expected: tensor.order(),
            got: weights.len(),
        });
    }
    let mut blocks = Vec::with_capacity(tensor.order());
    for (j, b) in split_blocks(&sol.u, tensor.dims()).into_iter().enumerate() {
        let nrm = p_norm(b, weights.get(j));
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::ZeroBlock(j));
        }
        blocks.push(b.iter().map(|v| v / nrm).collect());
    }
    Ok(EigenSolution {
        blocks,
        lambda: sol.mu.powf(weights.pmax() - 1.0),
        ..sol.clone()
    })
}

/// `rho((1 - theta) I + theta G'(u)) < 1`, with `G'(u) = (M - u psi^T M) / mu`.
fn is_attracting(
    map: &MonotoneMap,
    psi: &Functional,
    sol: &EigenSolution,
    theta: f64,
) -> Option<bool> {
    let m = jacobian(map, &sol.u).ok()?;
    let q = crate::rate::deflate(&m, &sol.u, psi) * (theta / sol.mu);
    let n = sol.u.len();
    let step = q + DMatrix::<f64>::identity(n, n) * (1.0 - theta);
    let rho = gelfand_radius(&step);
    rho.is_finite().then_some(rho < 1.0 - 1e-9)
}

fn check_primitive(map: &MonotoneMap, cfg: &SolverConfig) -> SolveResult<Vec<String>> {
    match primitivity(&map.digraph()?) {
        Verdict::Holds => Ok(Vec::new()),
        Verdict::Fails(Imprimitivity::Reducible(_)) => {
            Err(SolveError::NotPrimitive { cyclicity: None })
        }
        Verdict::Fails(Imprimitivity::Periodic(c)) if cfg.allow_nonprimitive => Ok(vec![format!(
            "map di-graph is periodic (cyclicity {c}); convergence is not guaranteed"
        )]),
        Verdict::Fails(Imprimitivity::Periodic(c)) => {
            Err(SolveError::NotPrimitive { cyclicity: Some(c) })
        }
        Verdict::Skipped(why) => Ok(vec![format!("primitivity not checked: {why}")]),
    }
}

/// Power algorithm from a seeded random interior point.
pub fn power_solve(map: &MonotoneMap, cfg: &SolverConfig) -> SolveResult<EigenSolution> {
    let psi = cfg.validate(map)?;
    let x0 = sample_start(&mut start_rng(cfg.seed, 0), &psi);
    power_solve_from(map, cfg, &x0)
}

/// Power algorithm from a given strictly positive point.
pub fn power_solve_from(
    map: &MonotoneMap,
    cfg: &SolverConfig,
    x0: &[f64],
) -> SolveResult<EigenSolution> {
    if !map.is_monotone() {
        return Err(SolveError::NonMonotoneMap);
    }
    let psi = cfg.validate(map)?;
    let warnings = check_primitive(map, cfg)?;
    // validates x0
    map.apply(x0)?;
    let run = iterate(
        map,
        &psi,
        x0,
        cfg.damping_for(map),
        cfg.tol,
        cfg.max_iter,
        true,
    );
    if !interior(&run.x) || !run.mu.is_finite() {
        return Err(Error::DegenerateNormalization.into());
    }
    let mut sol = solution_from(map, &psi, run.x, run.iterations, run.trace, Route::Power);
    sol.warnings = warnings;
    if run.converged {
        Ok(sol)
    } else {
        Err(SolveError::MaxIterExceeded {
            best: Box::new(sol),
        })
    }
}

/// Result of a multi-start search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Distinct solutions, sorted lexicographically by their blocks.
    pub solutions: Vec<EigenSolution>,
    /// Number of starts that reached each solution.
    pub hits: Vec<usize>,
    pub starts: usize,
    /// Starts whose damped iteration converged.
    pub damped_converged: usize,
    /// Starts whose Newton stage converged.
    pub newton_converged: usize,
    /// Starts where neither stage converged.
    pub failed: usize,
}

/// Runs every start through the damped iteration and, independently, through
/// Newton's method on the fixed-point equation of `G`; converged points are
/// merged by Hilbert distance. Newton also finds repelling eigenvectors that
/// no damping can reach; `attracting` tells them apart.
pub fn multi_start_solve(map: &MonotoneMap, cfg: &SolverConfig) -> SolveResult<SearchOutcome> {
    let psi = cfg.validate(map)?;
    let theta = cfg.damping_for(map);
    let per_start: Vec<[Option<Vec<f64>>; 2]> = (0..cfg.starts)
        .into_par_iter()
        .map(|s| {
            let x0 = sample_start(&mut start_rng(cfg.seed, s), &psi);
            let run = iterate(map, &psi, &x0, theta, cfg.tol, cfg.max_iter, false);
            let damped = run.converged.then_some(run.x);
            let polished = newton(map, &psi, &x0, NEWTON_MAX_ITER)
                .filter(|x| fixed_point_gap(map, x) <= cfg.tol);
            [damped, polished]
        })
        .collect();

    let mut found: Vec<(Vec<f64>, Route, usize)> = Vec::new();
    let (mut damped_converged, mut newton_converged, mut failed) = (0, 0, 0);
    for [damped, polished] in per_start {
        damped_converged += damped.is_some() as usize;
        newton_converged += polished.is_some() as usize;
        failed += (damped.is_none() && polished.is_none()) as usize;
        let mut seen_here = false;
        for (x, route) in [(damped, Route::Damped), (polished, Route::Newton)] {
            let Some(x) = x else { continue };
            match found
                .iter_mut()
                .find(|(u, _, _)| hilbert_interior(u, &x) < DEDUP_DISTANCE)
            {
                Some(entry) if !seen_here => entry.2 += 1,
                Some(_) => {}
                None => found.push((x, route, 1)),
            }
            seen_here = true;
        }
    }

    let mut solutions: Vec<(EigenSolution, usize)> = found
        .into_iter()
        .map(|(x, route, hits)| {
            let u = refine_eigenvector(map, &psi, &x);
            let mut sol = solution_from(map, &psi, u, 0, Vec::new(), route);
            sol.attracting = is_attracting(map, &psi, &sol, theta);
            (sol, hits)
        })
        .collect();
    solutions.sort_by(|a, b| {
        a.0.blocks
            .concat()
            .partial_cmp(&b.0.blocks.concat())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (solutions, hits) = solutions.into_iter().unzip();
    Ok(SearchOutcome {
        solutions,
        hits,
        starts: cfg.starts,
        damped_converged,
        newton_converged,
        failed,
    })
}

/// Residuals of a candidate against the raw system.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// `max_i |LHS_i - lambda x_i^e_i|`.
    pub residual: f64,
    /// Largest deviation of a block norm from its target.
    pub norm_deviation: f64,
    /// The eigenvalue used, fitted by least squares if none was given.
    pub lambda: f64,
    pub passed: bool,
}

/// Checks `x >= 0` against the system. Tensors: `S_ij(x) = lambda x_ij^(p_j-1)`
/// with `||x_j||_{p_j} = 1`. Maps: `P_i(x) = lambda x_i^delta_i` with
/// `||x||_p = a`.
pub fn verify_solution(
    system: &System,
    x: &[f64],
    lambda: Option<f64>,
    tol: f64,
) -> Result<VerifyReport> {
    let (lhs, powers, norm_deviation) = match system {
        MapKind::Tensor { tensor, weights } => {
            if x.len() != tensor.total_dim() {
                return Err(Error::DimensionMismatch {
                    expected: tensor.total_dim(),
                    got: x.len(),
                });
            }
            if weights.len() != tensor.order() {
                return Err(Error::WeightCount {
                    expected: tensor.order(),
                    got: weights.len(),
                });
            }
            check_nonnegative(x)?;
            let lhs = all_slots(tensor, x, &tensor.offsets());
            let mut powers = Vec::with_capacity(x.len());
            let mut dev: f64 = 0.0;
            for (j, b) in split_blocks(x, tensor.dims()).into_iter().enumerate() {
                let pj = weights.get(j);
                powers.extend(b.iter().map(|v| v.powf(pj - 1.0)));
                dev = dev.max((p_norm(b, pj) - 1.0).abs());
            }
            (lhs, powers, dev)
        }
        MapKind::Poly {
            map,
            deltas,
            norm_p,
            scale,
        } => {
            if x.len() != map.n() {
                return Err(Error::DimensionMismatch {
                    expected: map.n(),
                    got: x.len(),
                });
            }
            check_nonnegative(x)?;
            let lhs = crate::model::evaluate_poly(map, x)?;
            let powers = x.iter().zip(deltas).map(|(v, d)| v.powf(*d)).collect();
            (lhs, powers, (p_norm(x, *norm_p) - scale).abs())
        }
    };
    let lambda = lambda.unwrap_or_else(|| {
        let num: f64 = lhs.iter().zip(&powers).map(|(l, r)| l * r).sum();
        let den: f64 = powers.iter().map(|r| r * r).sum();
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    });
    let residual = lhs
        .iter()
        .zip(&powers)
        .map(|(l, r)| (l - lambda * r).abs())
        .fold(0.0, f64::max);
    Ok(VerifyReport {
        residual,
        norm_deviation,
        lambda,
        passed: residual <= tol && norm_deviation <= tol,
    })
}

fn check_nonnegative(x: &[f64]) -> Result<()> {
    match x
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
    {
        Some((index, &value)) if value.is_finite() => Err(Error::NonPositive { index, value }),
        Some((index, &value)) => Err(Error::NonFinite { index, value }),
        None => Ok(()),
    }
}

/// Outcome of [`verify_complex_eigenpair`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPairReport {
    /// `max_i |P_i(v) - nu v_i^d|`.
    pub residual: f64,
    /// `|nu|`.
    pub modulus: f64,
    /// `|nu| <= lambda + tol`.
    pub bound_ok: bool,
    pub passed: bool,
}

/// Checks a complex eigenpair `P(v) = nu v^[d]` of a homogeneous map and
/// compares `|nu|` with the Perron root `lambda`.
pub fn verify_complex_eigenpair(
    map: &PolynomialMap,
    v: &[Complex64],
    nu: Complex64,
    lambda: f64,
    tol: f64,
) -> Result<ComplexPairReport> {
    let d = map.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    if v.len() != map.n() {
        return Err(Error::DimensionMismatch {
            expected: map.n(),
            got: v.len(),
        });
    }
    let residual = map
        .components()
        .iter()
        .zip(v)
        .map(|(monos, vi)| {
            let lhs: Complex64 = monos
                .iter()
                .map(|m| {
                    m.exponents
                        .iter()
                        .zip(v)
                        .fold(Complex64::new(m.coeff, 0.0), |acc, (&e, z)| {
                            acc * z.powi(e as i32)
                        })
                })
                .sum();
            (lhs - nu * vi.powi(d as i32)).norm()
        })
        .fold(0.0, f64::max);
    let modulus = nu.norm();
    let bound_ok = modulus <= lambda + tol;
    Ok(ComplexPairReport {
        residual,
        modulus,
        bound_ok,
        passed: residual <= tol && bound_ok,
    })
}
