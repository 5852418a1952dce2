//! Nonnegative tensors, polynomial maps and the raw expressions built on them.
//!
//! A [`NonnegTensor`] stores the coefficients `f[i_1, .., i_d]` of a
//! multilinear form in sparse coordinate form. Indices are zero-based and
//! entries are kept in lexicographic order of their multi-index. A
//! [`PolynomialMap`] stores `n` polynomials with nonnegative coefficients as
//! lists of (exponent vector, coefficient) pairs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Sparse `m_1 x .. x m_d` array of nonnegative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegTensor {
    dims: Vec<usize>,
    indices: Vec<Vec<usize>>,
    values: Vec<f64>,
}

impl NonnegTensor {
    /// Builds a tensor from `(multi-index, coefficient)` pairs.
    ///
    /// Zero coefficients are dropped, negative ones are rejected and a
    /// repeated multi-index is an error rather than being summed.
    pub fn new(dims: Vec<usize>, entries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::TooFewModes(dims.len()));
        }
        if let Some((mode, &dim)) = dims.iter().enumerate().find(|(_, &m)| m < 2) {
            return Err(Error::ModeTooSmall { mode, dim });
        }
        let mut sorted = BTreeMap::new();
        for (entry, (index, value)) in entries.into_iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteCoefficient { entry, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeCoefficient { entry, value });
            }
            if index.len() != dims.len() || index.iter().zip(&dims).any(|(&i, &m)| i >= m) {
                return Err(Error::IndexOutOfRange {
                    entry,
                    index,
                    dims: dims.clone(),
                });
            }
            if sorted.contains_key(&index) {
                return Err(Error::DuplicateIndex(index));
            }
            sorted.insert(index, value);
        }
        let (indices, values) = sorted.into_iter().filter(|(_, v)| *v > 0.0).unzip();
        Ok(Self {
            dims,
            indices,
            values,
        })
    }

    /// Dense constructor; `values` is read in row-major order.
    pub fn from_dense(dims: Vec<usize>, values: &[f64]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if values.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: values.len(),
            });
        }
        let mut entries = Vec::new();
        let mut index = vec![0; dims.len()];
        for &v in values {
            entries.push((index.clone(), v));
            for k in (0..dims.len()).rev() {
                index[k] += 1;
                if index[k] < dims[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        Self::new(dims, entries)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of modes `d`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Total number of variables `m_1 + .. + m_d`.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of each block inside the concatenated vector.
    pub fn offsets(&self) -> Vec<usize> {
        offsets_of(&self.dims)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.indices
            .iter()
            .map(Vec::as_slice)
            .zip(self.values.iter().copied())
    }

    /// Multiplies every coefficient by `t > 0`.
    pub fn scaled(&self, t: f64) -> Self {
        assert!(t > 0.0 && t.is_finite());
        Self {
            dims: self.dims.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }

    /// First `(mode, index)` whose slice `f[.., i_mode = index, ..]` is all zero.
    pub fn vanishing_slice(&self) -> Option<(usize, usize)> {
        let mut seen: Vec<Vec<bool>> = self.dims.iter().map(|&m| vec![false; m]).collect();
        for idx in &self.indices {
            for (mode, &i) in idx.iter().enumerate() {
                seen[mode][i] = true;
            }
        }
        seen.iter()
            .enumerate()
            .find_map(|(mode, s)| s.iter().position(|&b| !b).map(|index| (mode, index)))
    }

    fn check_blocks(&self, x: &BlockVector) -> Result<()> {
        if x.sizes() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn offsets_of(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0, |acc, &m| {
            let start = *acc;
            *acc += m;
            Some(start)
        })
        .collect()
}

/// Norm exponents `p_1 .. p_d`, each in `(1, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormWeights {
    p: Vec<f64>,
    pmax: f64,
}

impl NormWeights {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::WeightCount {
                expected: 1,
                got: 0,
            });
        }
        for (index, &value) in p.iter().enumerate() {
            if !(value > 1.0 && value.is_finite()) {
                return Err(Error::NormExponent { index, value });
            }
        }
        let pmax = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { p, pmax })
    }

    /// Same exponent for all `d` modes.
    pub fn uniform(d: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, j: usize) -> f64 {
        self.p[j]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn pmax(&self) -> f64 {
        self.pmax
    }
}

/// A vector split into `d` consecutive blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    data: Vec<f64>,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockVector {
    pub fn from_blocks(blocks: Vec<Vec<f64>>) -> Result<Self> {
        let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
        Self::from_concat(blocks.into_iter().flatten().collect(), &sizes)
    }

    pub fn from_concat(data: Vec<f64>, sizes: &[usize]) -> Result<Self> {
        let expected: usize = sizes.iter().sum();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self {
            data,
            sizes: sizes.to_vec(),
            offsets: offsets_of(sizes),
        })
    }

    /// Block vector with every entry equal to `value`, shaped like `tensor`.
    pub fn filled(tensor: &NonnegTensor, value: f64) -> Self {
        Self {
            data: vec![value; tensor.total_dim()],
            sizes: tensor.dims.clone(),
            offsets: tensor.offsets(),
        }
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.data[self.offsets[j]..self.offsets[j] + self.sizes[j]]
    }

    pub fn block_mut(&mut self, j: usize) -> &mut [f64] {
        let start = self.offsets[j];
        &mut self.data[start..start + self.sizes[j]]
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Value at `(block, index)`.
    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.data[self.offsets[j] + i]
    }
}

/// `f(x_1, .., x_d) = sum f[i_1..i_d] x_{i_1,1} .. x_{i_d,d}`.
pub fn evaluate_form(tensor: &NonnegTensor, x: &BlockVector) -> Result<f64> {
    tensor.check_blocks(x)?;
    Ok(tensor
        .entries()
        .map(|(idx, f)| {
            idx.iter()
                .enumerate()
                .fold(f, |acc, (k, &i)| acc * x.at(k, i))
        })
        .sum())
}

/// Contraction of the tensor with every block except `slot`.
///
/// Component `i` is the sum over entries with `i_slot = i` of the
/// coefficient times the product of the remaining coordinates.
pub fn evaluate_slot(tensor: &NonnegTensor, slot: usize, x: &BlockVector) -> Result<Vec<f64>> {
    tensor.check_blocks(x)?;
    if slot >= tensor.order() {
        return Err(Error::SlotOutOfRange {
            slot,
            modes: tensor.order(),
        });
    }
    let mut out = vec![0.0; tensor.dims[slot]];
    for (idx, f) in tensor.entries() {
        let term = idx
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != slot)
            .fold(f, |acc, (k, &i)| acc * x.at(k, i));
        out[idx[slot]] += term;
    }
    Ok(out)
}

/// All slot contractions at once, concatenated in block order.
///
/// Uses prefix/suffix products so each entry costs `O(d)`.
pub(crate) fn all_slots(tensor: &NonnegTensor, x: &[f64], offsets: &[usize]) -> Vec<f64> {
    let d = tensor.order();
    let mut out = vec![0.0; x.len()];
    let mut prefix = vec![1.0; d + 1];
    let mut factors = vec![0.0; d];
    for (idx, f) in tensor.entries() {
        for k in 0..d {
            factors[k] = x[offsets[k] + idx[k]];
            prefix[k + 1] = prefix[k] * factors[k];
        }
        let mut suffix = 1.0;
        for j in (0..d).rev() {
            out[offsets[j] + idx[j]] += f * prefix[j] * suffix;
            suffix *= factors[j];
        }
    }
    out
}

/// One term `coeff * x^exponents` of a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

impl Monomial {
    pub fn degree(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }

    /// Variables with a positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, _)| k)
    }

    /// `x^exponents` without the coefficient.
    pub fn power_product(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(1.0, |acc, (&e, &xk)| acc * xk.powi(e as i32))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeff * self.power_product(x)
    }
}

/// `n` polynomials in `n` variables with nonnegative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMap {
    n: usize,
    components: Vec<Vec<Monomial>>,
    degrees: Vec<usize>,
}

impl PolynomialMap {
    /// Each component is a list of `(exponents, coefficient)` pairs.
    ///
    /// Zero coefficients are dropped and monomials are kept in lexicographic
    /// order of their exponent vectors. Degrees are derived.
    pub fn new(n: usize, components: Vec<Vec<(Vec<u32>, f64)>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMap);
        }
        if components.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: components.len(),
            });
        }
        let mut out = Vec::with_capacity(n);
        let mut degrees = Vec::with_capacity(n);
        let mut entry = 0;
        for (component, monos) in components.into_iter().enumerate() {
            let mut sorted = BTreeMap::new();
            for (exponents, value) in monos {
                if exponents.len() != n {
                    return Err(Error::ExponentLength {
                        component,
                        len: exponents.len(),
                        n,
                    });
                }
                if !value.is_finite() {
                    return Err(Error::NonFiniteCoefficient { entry, value });
                }
                if value < 0.0 {
                    return Err(Error::NegativeCoefficient { entry, value });
                }
                if sorted.contains_key(&exponents) {
                    return Err(Error::DuplicateIndex(
                        exponents.iter().map(|&e| e as usize).collect(),
                    ));
                }
                sorted.insert(exponents, value);
                entry += 1;
            }
            let monos: Vec<Monomial> = sorted
                .into_iter()
                .filter(|(_, c)| *c > 0.0)
                .map(|(exponents, coeff)| Monomial { exponents, coeff })
                .collect();
            let degree = monos.iter().map(Monomial::degree).max().unwrap_or(0);
            if degree < 1 {
                return Err(Error::DegreeTooLow { component });
            }
            degrees.push(degree);
            out.push(monos);
        }
        Ok(Self {
            n,
            components: out,
            degrees,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize) -> &[Monomial] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<Monomial>] {
        &self.components
    }

    /// `d_i`, the largest monomial degree in component `i`.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Common degree if every monomial of every component has the same degree.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let d = self.degrees[0];
        self.components
            .iter()
            .flatten()
            .all(|m| m.degree() == d)
            .then_some(d)
    }

    pub fn scaled(&self, t: f64) -> Self {
        assert!(t > 0.0 && t.is_finite());
        let mut out = self.clone();
        for m in out.components.iter_mut().flatten() {
            m.coeff *= t;
        }
        out
    }
}

/// Componentwise monomial sums `P_i(x)`.
pub fn evaluate_poly(map: &PolynomialMap, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != map.n {
        return Err(Error::DimensionMismatch {
            expected: map.n,
            got: x.len(),
        });
    }
    Ok(map
        .components
        .iter()
        .map(|monos| monos.iter().map(|m| m.eval(x)).sum())
        .collect())
}

/// The polynomial system behind the slot contractions, over the
/// concatenated variables of all blocks.
///
/// Component `offset_j + i` equals `evaluate_slot(tensor, j, x)[i]`; every
/// component is homogeneous of degree `d - 1`. Fails if a slice of the tensor
/// vanishes, since that component would be the zero polynomial.
pub fn tensor_system(tensor: &NonnegTensor) -> Result<PolynomialMap> {
    if let Some((mode, index)) = tensor.vanishing_slice() {
        return Err(Error::VanishingSlice { mode, index });
    }
    let n = tensor.total_dim();
    let offsets = tensor.offsets();
    let mut components: Vec<Vec<(Vec<u32>, f64)>> = vec![Vec::new(); n];
    for (idx, f) in tensor.entries() {
        for j in 0..tensor.order() {
            let mut exps = vec![0u32; n];
            for (k, &i) in idx.iter().enumerate() {
                if k != j {
                    exps[offsets[k] + i] += 1;
                }
            }
            components[offsets[j] + idx[j]].push((exps, f));
        }
    }
    // distinct entries give distinct monomials within a component
    PolynomialMap::new(n, components)
}

/// `(sum |x_i|^p)^(1/p)`.
pub fn p_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn all_ones() -> NonnegTensor {
        NonnegTensor::from_dense(vec![2, 2, 2], &[1.0; 8]).unwrap()
    }

    /// `f111 = f222 = a`, every other entry `b`.
    pub fn two_level(a: f64, b: f64) -> NonnegTensor {
        let mut v = [b; 8];
        v[0] = a;
        v[7] = a;
        NonnegTensor::from_dense(vec![2, 2, 2], &v).unwrap()
    }

    pub fn diagonal() -> NonnegTensor {
        NonnegTensor::new(
            vec![2, 2, 2],
            vec![(vec![0, 0, 0], 1.0), (vec![1, 1, 1], 1.0)],
        )
        .unwrap()
    }

    pub fn swap_matrix() -> NonnegTensor {
        NonnegTensor::from_dense(vec![2, 2], &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn poly(n: usize, comps: &[&[(&[u32], f64)]]) -> PolynomialMap {
        PolynomialMap::new(
            n,
            comps
                .iter()
                .map(|c| c.iter().map(|(e, v)| (e.to_vec(), *v)).collect())
                .collect(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn ones(t: &NonnegTensor) -> BlockVector {
        BlockVector::filled(t, 1.0)
    }

    #[test]
    fn form_of_all_ones() {
        let t = all_ones();
        assert_eq!(evaluate_form(&t, &ones(&t)).unwrap(), 8.0);
    }

    #[test]
    fn form_of_two_level_matches_factored_expression() {
        // b (x11+x21)(x12+x22)(x13+x23) + (a-b)(x11 x12 x13 + x21 x22 x23)
        let (a, b) = (1.2, 0.2);
        let expected = b * 8.0 + (a - b) * 2.0;
        let t = two_level(a, b);
        let v = evaluate_form(&t, &ones(&t)).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 3.6).abs() < 1e-14);
    }

    #[test]
    fn zero_block_kills_form_and_slots() {
        let t = two_level(1.2, 0.2);
        let x =
            BlockVector::from_blocks(vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![3.0, 1.0]]).unwrap();
        assert_eq!(evaluate_form(&t, &x).unwrap(), 0.0);
        assert_eq!(evaluate_slot(&t, 0, &x).unwrap(), vec![0.0, 0.0]);
        assert_eq!(evaluate_slot(&t, 2, &x).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn slot_values() {
        let t = all_ones();
        assert_eq!(evaluate_slot(&t, 0, &ones(&t)).unwrap(), vec![4.0, 4.0]);
        let t = two_level(1.2, 0.2);
        let s = evaluate_slot(&t, 0, &ones(&t)).unwrap();
        for v in s {
            assert!((v - 1.8).abs() < 1e-14);
        }
    }

    #[test]
    fn slot_errors() {
        let t = all_ones();
        assert!(matches!(
            evaluate_slot(&t, 3, &ones(&t)),
            Err(Error::SlotOutOfRange { .. })
        ));
        let bad = BlockVector::from_blocks(vec![vec![1.0; 2], vec![1.0; 3], vec![1.0; 2]]).unwrap();
        assert!(matches!(
            evaluate_form(&t, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn construction_rules() {
        assert!(matches!(
            NonnegTensor::new(vec![2, 2], vec![(vec![0, 0], -0.1)]),
            Err(Error::NegativeCoefficient { entry: 0, .. })
        ));
        assert!(matches!(
            NonnegTensor::new(vec![2, 2], vec![(vec![0, 0], 1.0), (vec![0, 0], 2.0)]),
            Err(Error::DuplicateIndex(_))
        ));
        assert!(matches!(
            NonnegTensor::new(vec![2, 2], vec![(vec![0, 2], 1.0)]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            NonnegTensor::new(vec![3], vec![]),
            Err(Error::TooFewModes(1))
        ));
        assert!(matches!(
            NonnegTensor::new(vec![2, 1], vec![]),
            Err(Error::ModeTooSmall { mode: 1, dim: 1 })
        ));
        let t = NonnegTensor::new(
            vec![2, 2],
            vec![(vec![1, 1], 2.0), (vec![0, 1], 0.0), (vec![0, 0], 1.0)],
        )
        .unwrap();
        assert_eq!(t.nnz(), 2);
        let idx: Vec<_> = t.entries().map(|(i, _)| i.to_vec()).collect();
        assert_eq!(idx, vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn tensor_system_of_swap_matrix() {
        let p = tensor_system(&swap_matrix()).unwrap();
        // variables: x1, x2 (block 1), x1', x2' (block 2)
        let expected: [&[u32]; 4] = [&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(p.component(i).len(), 1);
            assert_eq!(p.component(i)[0].exponents, e.to_vec());
            assert_eq!(p.component(i)[0].coeff, 1.0);
        }
        assert_eq!(p.degrees(), &[1, 1, 1, 1]);
    }

    #[test]
    fn tensor_system_of_all_ones() {
        let p = tensor_system(&all_ones()).unwrap();
        assert_eq!(p.n(), 6);
        for i in 0..6 {
            assert_eq!(p.component(i).len(), 4);
            assert!(p.component(i).iter().all(|m| m.degree() == 2));
        }
        assert_eq!(p.homogeneous_degree(), Some(2));
        assert_eq!(evaluate_poly(&p, &[1.0; 6]).unwrap(), vec![4.0; 6]);
    }

    #[test]
    fn tensor_system_of_diagonal() {
        let p = tensor_system(&diagonal()).unwrap();
        assert_eq!(p.component(0).len(), 1);
        // x_{1,2} x_{1,3}: variables 2 and 4 in the concatenation
        assert_eq!(p.component(0)[0].exponents, vec![0, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn tensor_system_rejects_vanishing_slice() {
        let t = NonnegTensor::new(vec![2, 2], vec![(vec![0, 0], 1.0), (vec![0, 1], 1.0)]).unwrap();
        assert_eq!(t.vanishing_slice(), Some((0, 1)));
        assert!(matches!(
            tensor_system(&t),
            Err(Error::VanishingSlice { mode: 0, index: 1 })
        ));
    }

    #[test]
    fn poly_values() {
        let p = poly(2, &[&[(&[1, 1], 1.0)], &[(&[0, 2], 1.0)]]);
        assert_eq!(evaluate_poly(&p, &[2.0, 3.0]).unwrap(), vec![6.0, 9.0]);
        let q = poly(2, &[&[(&[0, 2], 1.0)], &[(&[2, 0], 1.0)]]);
        assert_eq!(evaluate_poly(&q, &[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert!(evaluate_poly(&q, &[1.0]).is_err());
    }

    #[test]
    fn poly_construction_rules() {
        let constant_only = PolynomialMap::new(1, vec![vec![(vec![0], 1.0)]]);
        assert!(matches!(
            constant_only,
            Err(Error::DegreeTooLow { component: 0 })
        ));
        let negative = PolynomialMap::new(1, vec![vec![(vec![1], -1.0)]]);
        assert!(matches!(negative, Err(Error::NegativeCoefficient { .. })));
        let dup = PolynomialMap::new(1, vec![vec![(vec![1], 1.0), (vec![1], 2.0)]]);
        assert!(matches!(dup, Err(Error::DuplicateIndex(_))));
        let mixed = poly(2, &[&[(&[2, 0], 1.0), (&[0, 1], 1.0)], &[(&[2, 0], 1.0)]]);
        assert_eq!(mixed.degrees(), &[2, 2]);
        assert_eq!(mixed.homogeneous_degree(), None);
    }

    fn arb_tensor() -> impl Strategy<Value = NonnegTensor> {
        (2usize..=4)
            .prop_flat_map(|d| prop::collection::vec(2usize..=3, d))
            .prop_flat_map(|dims| {
                let total: usize = dims.iter().product();
                (
                    Just(dims),
                    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..3.0], total),
                )
            })
            .prop_map(|(dims, vals)| NonnegTensor::from_dense(dims, &vals).unwrap())
    }

    fn arb_point(t: &NonnegTensor) -> impl Strategy<Value = BlockVector> {
        let dims = t.dims().to_vec();
        prop::collection::vec(0.05f64..3.0, t.total_dim())
            .prop_map(move |v| BlockVector::from_concat(v, &dims).unwrap())
    }

    proptest! {
        #[test]
        fn form_is_linear_in_each_block(
            (t, x, j, s) in arb_tensor().prop_flat_map(|t| {
                let d = t.order();
                (Just(t.clone()), arb_point(&t), 0..d, 0.1f64..5.0)
            })
        ) {
            let base = evaluate_form(&t, &x).unwrap();
            let mut y = x.clone();
            y.block_mut(j).iter_mut().for_each(|v| *v *= s);
            let scaled = evaluate_form(&t, &y).unwrap();
            prop_assert!((scaled - s * base).abs() <= 1e-12 * (1.0 + scaled.abs()));
        }

        #[test]
        fn slot_contraction_recovers_form(
            (t, x) in arb_tensor().prop_flat_map(|t| (Just(t.clone()), arb_point(&t)))
        ) {
            let f = evaluate_form(&t, &x).unwrap();
            for j in 0..t.order() {
                let s = evaluate_slot(&t, j, &x).unwrap();
                let c: f64 = s.iter().zip(x.block(j)).map(|(a, b)| a * b).sum();
                prop_assert!((c - f).abs() <= 1e-12 * (1.0 + f.abs()));
            }
        }

        #[test]
        fn system_matches_stacked_slots(
            (t, x) in arb_tensor().prop_flat_map(|t| (Just(t.clone()), arb_point(&t)))
        ) {
            if let Ok(p) = tensor_system(&t) {
                let via_poly = evaluate_poly(&p, x.as_slice()).unwrap();
                let stacked: Vec<f64> = (0..t.order())
                    .flat_map(|j| evaluate_slot(&t, j, &x).unwrap())
                    .collect();
                let fast = all_slots(&t, x.as_slice(), &t.offsets());
                for ((a, b), c) in via_poly.iter().zip(&stacked).zip(&fast) {
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                    prop_assert!((c - b).abs() <= 1e-12 * (1.0 + b.abs()));
                }
            }
        }

        #[test]
        fn poly_is_monotone_on_orthant(
            (t, x, bump, k) in arb_tensor().prop_flat_map(|t| {
                let n = t.total_dim();
                (Just(t.clone()), arb_point(&t), 0.0f64..2.0, 0..n)
            })
        ) {
            if let Ok(p) = tensor_system(&t) {
                let mut y = x.as_slice().to_vec();
                y[k] += bump;
                let px = evaluate_poly(&p, x.as_slice()).unwrap();
                let py = evaluate_poly(&p, &y).unwrap();
                for (a, b) in px.iter().zip(&py) {
                    prop_assert!(b >= a);
                }
            }
        }
    }
}
