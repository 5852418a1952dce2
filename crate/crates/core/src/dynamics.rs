//! The degree-one homogeneous map `F`, its normalization `G` and the Hilbert
//! projective metric on the open orthant.

use crate::error::{Error, Result};
use crate::model::{all_slots, offsets_of, p_norm, NonnegTensor, NormWeights, PolynomialMap};
use crate::structure::{map_digraph, tensor_f_digraph, DiGraph};

/// What `F` is built from.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// Blockwise map from a multilinear form and norm exponents.
    Tensor {
        tensor: NonnegTensor,
        weights: NormWeights,
    },
    /// Map from a polynomial system `P_i(x) = lambda x_i^delta_i`, normalized
    /// by `||x||_p = scale`.
    Poly {
        map: PolynomialMap,
        deltas: Vec<f64>,
        norm_p: f64,
        scale: f64,
    },
}

/// Degree-one homogeneous map on the open orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    kind: MapKind,
    monotone: bool,
    block_sizes: Vec<usize>,
}

impl MonotoneMap {
    /// `F_{i,j}(x) = (x_{i,j}^(p - p_j) ||x_j||_{p_j}^(p_j - d) S_{i,j}(x))^(1/(p - 1))`
    /// with `p = max p_j` and `S_{i,j}` the slot contraction.
    ///
    /// Monotone exactly when every `p_j >= d`; smaller exponents are accepted
    /// but flagged.
    pub fn from_tensor(tensor: &NonnegTensor, weights: &NormWeights) -> Result<Self> {
        if weights.len() != tensor.order() {
            return Err(Error::WeightCount {
                expected: tensor.order(),
                got: weights.len(),
            });
        }
        if let Some((mode, index)) = tensor.vanishing_slice() {
            return Err(Error::VanishingSlice { mode, index });
        }
        let d = tensor.order() as f64;
        let monotone = weights.as_slice().iter().all(|&p| p >= d);
        Ok(Self {
            kind: MapKind::Tensor {
                tensor: tensor.clone(),
                weights: weights.clone(),
            },
            monotone,
            block_sizes: tensor.dims().to_vec(),
        })
    }

    /// `F_i(x) = (sum_j a_ij x_i^(delta - delta_i) (||x||_p / scale)^(delta_i - |j|) x^j)^(1/delta)`
    /// with `delta = max delta_i`. Requires `delta_i >= d_i`.
    pub fn from_poly(map: &PolynomialMap, deltas: &[f64], norm_p: f64, scale: f64) -> Result<Self> {
        if deltas.len() != map.n() {
            return Err(Error::DimensionMismatch {
                expected: map.n(),
                got: deltas.len(),
            });
        }
        for (component, (&delta, &degree)) in deltas.iter().zip(map.degrees()).enumerate() {
            if !delta.is_finite() || delta < degree as f64 {
                return Err(Error::DeltaBelowDegree {
                    component,
                    delta,
                    degree,
                });
            }
        }
        if !(norm_p > 0.0 && norm_p.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: norm_p,
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: scale,
            });
        }
        Ok(Self {
            kind: MapKind::Poly {
                map: map.clone(),
                deltas: deltas.to_vec(),
                norm_p,
                scale,
            },
            monotone: true,
            block_sizes: vec![map.n()],
        })
    }

    /// Homogeneous special case: all components of common degree `d` and
    /// `delta_i = d`, so `F_i = P_i^(1/d)`.
    pub fn from_homogeneous_poly(map: &PolynomialMap) -> Result<Self> {
        let d = map.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
        Self::from_poly(map, &vec![d as f64; map.n()], 2.0, 1.0)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Block sizes of the underlying variables (`[n]` for polynomial maps).
    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Exponent `e` in `lambda = mu^e` linking the eigenvalue of `F` to that
    /// of the underlying system.
    pub fn lambda_exponent(&self) -> f64 {
        match &self.kind {
            MapKind::Tensor { weights, .. } => weights.pmax() - 1.0,
            MapKind::Poly { deltas, .. } => max_of(deltas),
        }
    }

    /// Di-graph of `F`; its pattern is that of the Jacobian in the interior.
    pub fn digraph(&self) -> Result<DiGraph> {
        match &self.kind {
            MapKind::Tensor { tensor, weights } => tensor_f_digraph(tensor, weights),
            MapKind::Poly { map, deltas, .. } => poly_f_digraph(map, deltas),
        }
    }

    /// Evaluates `F` at a strictly positive point.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positive(x, self.dim())?;
        Ok(self.apply_interior(x))
    }

    /// `F` without input validation; `x` must be strictly positive.
    pub(crate) fn apply_interior(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            MapKind::Tensor { tensor, weights } => tensor_apply(tensor, weights, x),
            MapKind::Poly {
                map,
                deltas,
                norm_p,
                scale,
            } => poly_apply(map, deltas, *norm_p, *scale, x),
        }
    }
}

pub(crate) fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `b^e`, exact when `e == 0`.
#[inline]
pub(crate) fn pow_or_one(b: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        b.powf(e)
    }
}

fn tensor_apply(tensor: &NonnegTensor, weights: &NormWeights, x: &[f64]) -> Vec<f64> {
    let offsets = tensor.offsets();
    let d = tensor.order() as f64;
    let pmax = weights.pmax();
    let outer = 1.0 / (pmax - 1.0);
    let mut out = all_slots(tensor, x, &offsets);
    for (j, (&start, &m)) in offsets.iter().zip(tensor.dims()).enumerate() {
        let pj = weights.get(j);
        let block = &x[start..start + m];
        let norm_factor = pow_or_one(p_norm(block, pj), pj - d);
        for (o, &xi) in out[start..start + m].iter_mut().zip(block) {
            *o = (*o * pow_or_one(xi, pmax - pj) * norm_factor).powf(outer);
        }
    }
    out
}

fn poly_apply(map: &PolynomialMap, deltas: &[f64], norm_p: f64, scale: f64, x: &[f64]) -> Vec<f64> {
    let delta = max_of(deltas);
    let nrm = p_norm(x, norm_p) / scale;
    map.components()
        .iter()
        .enumerate()
        .map(|(i, monos)| {
            let sum: f64 = monos
                .iter()
                .map(|m| m.eval(x) * pow_or_one(nrm, deltas[i] - m.degree() as f64))
                .sum();
            (sum * pow_or_one(x[i], delta - deltas[i])).powf(1.0 / delta)
        })
        .collect()
}

/// Di-graph of the polynomial-form `F`: the support of `P`, full rows for
/// components with a monomial of degree below `delta_i`, and loops where
/// `delta_i < max delta`.
pub fn poly_f_digraph(map: &PolynomialMap, deltas: &[f64]) -> Result<DiGraph> {
    if deltas.len() != map.n() {
        return Err(Error::DimensionMismatch {
            expected: map.n(),
            got: deltas.len(),
        });
    }
    let n = map.n();
    let delta = max_of(deltas);
    let mut g = map_digraph(map);
    for (i, monos) in map.components().iter().enumerate() {
        if monos.iter().any(|m| (m.degree() as f64) < deltas[i]) {
            for k in 0..n {
                g.add_edge(i, k);
            }
        }
        if deltas[i] < delta {
            g.add_edge(i, i);
        }
    }
    Ok(g)
}

fn check_positive(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    match x
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
    {
        Some((index, &value)) => Err(Error::NonPositive { index, value }),
        None => Ok(()),
    }
}

/// Nonnegative, nonzero linear functional `psi` used for normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional(Vec<f64>);

impl Functional {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        if psi.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || psi.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidFunctional);
        }
        Ok(Self(psi))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `psi^T x`.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Scales `x` in place so that `psi^T x = 1`.
    pub fn normalize(&self, x: &mut [f64]) {
        let s = self.dot(x);
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// `G(x) = F(x) / psi^T F(x)`.
pub fn normalize(map: &MonotoneMap, psi: &Functional, x: &[f64]) -> Result<Vec<f64>> {
    check_positive(x, map.dim())?;
    if psi.len() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            got: psi.len(),
        });
    }
    if !psi.is_positive() {
        return Err(Error::FunctionalNotPositive);
    }
    let mut fx = map.apply_interior(x);
    let s = psi.dot(&fx);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::DegenerateNormalization);
    }
    fx.iter_mut().for_each(|v| *v /= s);
    Ok(fx)
}

/// Hilbert projective distance `max log(y/x) - min log(y/x)`.
pub fn hilbert_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_positive(x, x.len())?;
    check_positive(y, x.len())?;
    Ok(hilbert_interior(x, y))
}

pub(crate) fn hilbert_interior(x: &[f64], y: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b / a).ln())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        });
    (hi - lo).max(0.0)
}

/// Splits a concatenated vector into blocks of the given sizes.
pub(crate) fn split_blocks<'a>(x: &'a [f64], sizes: &[usize]) -> Vec<&'a [f64]> {
    offsets_of(sizes)
        .iter()
        .zip(sizes)
        .map(|(&o, &m)| &x[o..o + m])
        .collect()
}
