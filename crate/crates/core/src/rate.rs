//! Linearization of `F` at its eigenvector and the spectral-gap rate of the
//! power algorithm.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{max_of, pow_or_one, Functional, MapKind, MonotoneMap};
use crate::error::{Error, Result};
use crate::model::{all_slots, p_norm, NonnegTensor, NormWeights, PolynomialMap};
use crate::solver::{refine_eigenvector, sample_start, EigenSolution, SolverConfig};

/// Relative tolerance of the Gelfand iteration.
const GELFAND_TOL: f64 = 1e-9;
const GELFAND_MAX_SQUARINGS: usize = 60;
/// Window of error ratios averaged into the empirical rate.
const RATE_WINDOW: usize = 20;
/// Slack allowed between the measured and the predicted rate.
const RATE_SLACK: f64 = 0.05;

/// Analytic Jacobian `DF(x)` at a strictly positive point.
pub fn jacobian(map: &MonotoneMap, x: &[f64]) -> Result<DMatrix<f64>> {
    // validates x
    let fx = map.apply(x)?;
    Ok(match map.kind() {
        MapKind::Tensor { tensor, weights } => tensor_jacobian(tensor, weights, x, &fx),
        MapKind::Poly {
            map: p,
            deltas,
            norm_p,
            scale,
        } => poly_jacobian(p, deltas, *norm_p, *scale, x, &fx),
    })
}

fn tensor_jacobian(
    tensor: &NonnegTensor,
    weights: &NormWeights,
    x: &[f64],
    fx: &[f64],
) -> DMatrix<f64> {
    let n = x.len();
    let d = tensor.order();
    let offsets = tensor.offsets();
    let pmax = weights.pmax();
    let slots = all_slots(tensor, x, &offsets);

    // dS[r, c] = derivative of slot contraction r with respect to x_c
    let mut ds = DMatrix::<f64>::zeros(n, n);
    for (idx, v) in tensor.entries() {
        for j in 0..d {
            for k in (0..d).filter(|&k| k != j) {
                let prod: f64 = (0..d)
                    .filter(|&m| m != j && m != k)
                    .map(|m| x[offsets[m] + idx[m]])
                    .product();
                ds[(offsets[j] + idx[j], offsets[k] + idx[k])] += v * prod;
            }
        }
    }

    let mut jac = ds;
    for (j, (&start, &m)) in offsets.iter().zip(tensor.dims()).enumerate() {
        let pj = weights.get(j);
        let block = start..start + m;
        let norm_pow = p_norm(&x[block.clone()], pj).powf(pj);
        for r in block.clone() {
            let s = slots[r];
            let scale = fx[r] / (pmax - 1.0);
            for c in 0..n {
                jac[(r, c)] /= s;
            }
            jac[(r, r)] += (pmax - pj) / x[r];
            if pj != d as f64 {
                for c in block.clone() {
                    jac[(r, c)] += (pj - d as f64) * x[c].powf(pj - 1.0) / norm_pow;
                }
            }
            for c in 0..n {
                jac[(r, c)] *= scale;
            }
        }
    }
    jac
}

fn poly_jacobian(
    map: &PolynomialMap,
    deltas: &[f64],
    norm_p: f64,
    scale: f64,
    x: &[f64],
    fx: &[f64],
) -> DMatrix<f64> {
    let n = x.len();
    let delta = max_of(deltas);
    let full_norm = p_norm(x, norm_p);
    let nrm = full_norm / scale;
    // derivative of ||x||_p / scale
    let dnorm: Vec<f64> = x
        .iter()
        .map(|&xk| xk.powf(norm_p - 1.0) * full_norm.powf(1.0 - norm_p) / scale)
        .collect();

    let mut jac = DMatrix::<f64>::zeros(n, n);
    for (i, monos) in map.components().iter().enumerate() {
        let mut sum = 0.0;
        let mut grad = vec![0.0; n];
        for mono in monos {
            let e = deltas[i] - mono.degree() as f64;
            let term = mono.eval(x);
            let weight = pow_or_one(nrm, e);
            sum += term * weight;
            for k in mono.support() {
                grad[k] += term * weight * mono.exponents[k] as f64 / x[k];
            }
            if e != 0.0 {
                let w = term * e * nrm.powf(e - 1.0);
                for (g, dn) in grad.iter_mut().zip(&dnorm) {
                    *g += w * dn;
                }
            }
        }
        let outer = fx[i] / delta;
        for k in 0..n {
            jac[(i, k)] = outer * grad[k] / sum;
        }
        jac[(i, i)] += outer * (delta - deltas[i]) / x[i];
    }
    jac
}

/// Spectral radius of a square matrix by Gelfand's formula
/// `rho = lim ||M^(2^k)||_1^(1/2^k)`, rescaling at every squaring.
pub(crate) fn gelfand_radius(m: &DMatrix<f64>) -> f64 {
    let mut b = m.clone();
    let mut log_rho = 0.0;
    let mut weight = 1.0;
    let mut small_steps = 0;
    for _ in 0..=GELFAND_MAX_SQUARINGS {
        let s = one_norm(&b);
        if s == 0.0 || !s.is_finite() {
            return if s == 0.0 { 0.0 } else { f64::NAN };
        }
        b /= s;
        let step = s.ln() * weight;
        log_rho += step;
        small_steps = if step.abs() <= GELFAND_TOL {
            small_steps + 1
        } else {
            0
        };
        if small_steps >= 2 {
            break;
        }
        b = &b * &b;
        weight *= 0.5;
    }
    log_rho.exp()
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral radius of a nonnegative square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            let v = m[(row, col)];
            if v.is_nan() || v < 0.0 {
                return Err(Error::NegativeEntry { row, col });
            }
        }
    }
    Ok(gelfand_radius(m))
}

/// `Q = M - u psi^T M`, whose spectrum is that of `M` with the Perron root
/// replaced by zero.
pub(crate) fn deflate(m: &DMatrix<f64>, u: &[f64], psi: &Functional) -> DMatrix<f64> {
    let n = u.len();
    let psi_m = DMatrix::from_row_slice(1, n, psi.as_slice()) * m;
    m - DMatrix::from_column_slice(n, 1, u) * psi_m
}

/// Largest modulus among the non-Perron eigenvalues of `M`, computed as
/// `rho(M - u psi^T M)`. Requires `psi^T u = 1`.
pub fn second_modulus(m: &DMatrix<f64>, u: &[f64], psi: &Functional) -> Result<f64> {
    let n = m.nrows();
    if !m.is_square() || u.len() != n || psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let s = psi.dot(u);
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(s));
    }
    Ok(gelfand_radius(&deflate(m, u, psi)))
}

/// Predicted and measured convergence rates at an eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `DF(u)`.
    pub jacobian: DMatrix<f64>,
    /// Perron root of the Jacobian.
    pub lambda_m: f64,
    /// Largest modulus among the remaining eigenvalues.
    pub second: f64,
    /// `second / lambda_m`.
    pub rate: f64,
    /// Geometric mean of the last error ratios of a fresh power run.
    pub empirical_rate: f64,
    /// Number of ratios averaged into `empirical_rate`.
    pub ratios_used: usize,
    /// Refined eigenvector, `psi^T u = 1`.
    pub u: Vec<f64>,
    /// `empirical_rate <= rate + 0.05`.
    pub within_bound: bool,
}

/// Linearizes `F` at the solution and measures the error decay of a fresh
/// undamped power run started from `cfg.seed`.
pub fn convergence_rate(
    map: &MonotoneMap,
    sol: &EigenSolution,
    cfg: &SolverConfig,
) -> crate::solver::SolveResult<RateReport> {
    let psi = cfg.functional(map.dim())?;
    let mut u = sol.u.clone();
    psi.normalize(&mut u);
    let u = refine_eigenvector(map, &psi, &u);

    let jac = jacobian(map, &u)?;
    let lambda_m = gelfand_radius(&jac);
    let second = second_modulus(&jac, &u, &psi)?;
    let rate = second / lambda_m;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = sample_start(&mut rng, &psi);
    let u_sup = u.iter().copied().fold(0.0, f64::max);
    let floor = 1e-10 * u_sup;
    let mut errors = vec![sup_dist(&x, &u)];
    for _ in 0..cfg.max_iter {
        x = crate::dynamics::normalize(map, &psi, &x)?;
        let e = sup_dist(&x, &u);
        errors.push(e);
        if e <= floor {
            break;
        }
    }
    let ratios: Vec<f64> = errors
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    let tail = &ratios[ratios.len().saturating_sub(RATE_WINDOW)..];
    let empirical_rate = if tail.is_empty() {
        0.0
    } else {
        (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp()
    };
    Ok(RateReport {
        jacobian: jac,
        lambda_m,
        second,
        rate,
        empirical_rate,
        ratios_used: tail.len(),
        u,
        within_bound: empirical_rate <= rate + RATE_SLACK,
    })
}

fn sup_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
