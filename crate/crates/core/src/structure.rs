//! Combinatorial structure: support graphs, irreducibility, primitivity.
//!
//! Vertices of a tensor's graphs are numbered in concatenated order, so
//! vertex `offset_j + i` is index `i` of mode `j` (both zero-based).

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::{tensor_system, NonnegTensor, NormWeights, PolynomialMap};

/// Exhaustive subset enumeration is refused above this many vertices.
pub const MAX_SUBSET_VERTICES: usize = 24;

/// Outcome of a structural test. Negative verdicts carry a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
    /// The test was not run; the reason is attached.
    Skipped(String),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> Option<bool> {
        match self {
            Verdict::Holds => Some(true),
            Verdict::Fails(_) => Some(false),
            Verdict::Skipped(_) => None,
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}

/// Why a di-graph is not primitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Imprimitivity {
    /// Not strongly connected; the strongly connected component is attached.
    Reducible(Vec<usize>),
    /// Strongly connected with circuit-length gcd `g != 1`.
    Periodic(usize),
}

/// Undirected `d`-partite support graph of a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PartiteGraph {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl PartiteGraph {
    pub fn num_vertices(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Concatenated id of `(part, index)`.
    pub fn vertex(&self, part: usize, index: usize) -> usize {
        self.offsets[part] + index
    }

    /// `(part, index)` of a concatenated id.
    pub fn label(&self, v: usize) -> (usize, usize) {
        label_of(&self.offsets, v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

fn label_of(offsets: &[usize], v: usize) -> (usize, usize) {
    let part = offsets.partition_point(|&o| o <= v) - 1;
    (part, v - offsets[part])
}

/// Directed graph on `0..n`, loops allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    succ: Vec<BTreeSet<usize>>,
}

impl DiGraph {
    pub fn new(n: usize) -> Self {
        Self {
            succ: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(
            u < self.succ.len() && v < self.succ.len(),
            "edge out of range"
        );
        self.succ[u].insert(v);
    }

    pub fn num_vertices(&self) -> usize {
        self.succ.len()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(&v)
    }

    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[u].iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (u, v)))
    }

    fn transpose(&self) -> Self {
        Self::from_edges(self.num_vertices(), self.edges().map(|(u, v)| (v, u)))
    }

    /// Strongly connected components (Kosaraju), each sorted, ordered by
    /// smallest vertex.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![(s, self.succ[s].iter())];
            while let Some((u, it)) = stack.last_mut() {
                if let Some(&v) = it.next() {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push((v, self.succ[v].iter()));
                    }
                } else {
                    order.push(*u);
                    stack.pop();
                }
            }
        }
        let rev = self.transpose();
        let mut comp_of = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for &s in order.iter().rev() {
            if comp_of[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            comp_of[s] = id;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for v in rev.successors(u) {
                    if comp_of[v] == usize::MAX {
                        comp_of[v] = id;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by_key(|c| c[0]);
        comps
    }

    fn bfs_levels(&self, root: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.num_vertices()];
        level[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let next = level[u].map(|l| l + 1);
            for v in self.successors(u) {
                if level[v].is_none() {
                    level[v] = next;
                    queue.push_back(v);
                }
            }
        }
        level
    }
}

/// Strong connectivity. On failure the witness is a strongly connected
/// component other than the one containing vertex 0.
pub fn is_strongly_connected(g: &DiGraph) -> Verdict<Vec<usize>> {
    if g.num_vertices() == 0 {
        return Verdict::Holds;
    }
    let comps = g.strongly_connected_components();
    if comps.len() == 1 {
        return Verdict::Holds;
    }
    let witness = comps
        .into_iter()
        .find(|c| c[0] != 0)
        .expect("two components");
    Verdict::Fails(witness)
}

/// Greatest common divisor of circuit lengths of a strongly connected graph,
/// computed from BFS level differences. `None` when the graph is not strongly
/// connected; `Some(0)` when it has no circuit at all.
pub fn cyclicity(g: &DiGraph) -> Option<usize> {
    if !is_strongly_connected(g).is_holds() {
        return None;
    }
    if g.num_vertices() == 0 {
        return Some(0);
    }
    let level = g.bfs_levels(0);
    let g_val = g.edges().fold(0usize, |acc, (u, v)| {
        let lu = level[u].expect("strongly connected") as i64;
        let lv = level[v].expect("strongly connected") as i64;
        gcd(acc, (lu + 1 - lv).unsigned_abs() as usize)
    });
    Some(g_val)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Strongly connected with circuit gcd 1.
pub fn primitivity(g: &DiGraph) -> Verdict<Imprimitivity> {
    match is_strongly_connected(g) {
        Verdict::Fails(scc) => Verdict::Fails(Imprimitivity::Reducible(scc)),
        _ => match cyclicity(g) {
            Some(1) => Verdict::Holds,
            Some(c) => Verdict::Fails(Imprimitivity::Periodic(c)),
            None => unreachable!("strongly connected"),
        },
    }
}

/// Edge `(i_k, i_l)`, `k != l`, iff some stored entry has both indices.
pub fn partite_graph(tensor: &NonnegTensor) -> PartiteGraph {
    let offsets = tensor.offsets();
    let mut edges = BTreeSet::new();
    for (idx, _) in tensor.entries() {
        for k in 0..idx.len() {
            for l in k + 1..idx.len() {
                edges.insert((offsets[k] + idx[k], offsets[l] + idx[l]));
            }
        }
    }
    PartiteGraph {
        dims: tensor.dims().to_vec(),
        offsets,
        edges,
    }
}

/// Connectivity of the partite graph; the witness is the component of vertex 0.
pub fn is_weakly_irreducible(tensor: &NonnegTensor) -> Verdict<Vec<usize>> {
    let comps = partite_graph(tensor).components();
    if comps.len() == 1 {
        Verdict::Holds
    } else {
        Verdict::Fails(comps.into_iter().next().expect("nonempty"))
    }
}

fn vertex_mask(vs: impl IntoIterator<Item = usize>) -> u64 {
    vs.into_iter().fold(0, |m, v| m | (1u64 << v))
}

fn mask_vertices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Tensor irreducibility by exhaustive enumeration of the zero set `I`.
///
/// `I` ranges over proper nonempty vertex sets whose complement `J` meets
/// every part; for each such `I` some positive entry must have exactly one
/// index in `I` and all others in `J`. Without the restriction on `J` no
/// tensor with `d >= 3` could pass, because a `J` inside a single part never
/// supplies the `d - 1` indices required. The witness is a violating `I`.
pub fn is_irreducible_tensor(tensor: &NonnegTensor) -> Verdict<Vec<usize>> {
    let n = tensor.total_dim();
    if n > MAX_SUBSET_VERTICES {
        return Verdict::Skipped(format!(
            "{n} vertices exceeds the enumeration limit {MAX_SUBSET_VERTICES}"
        ));
    }
    let offsets = tensor.offsets();
    let part_masks: Vec<u64> = tensor
        .dims()
        .iter()
        .zip(&offsets)
        .map(|(&m, &o)| vertex_mask(o..o + m))
        .collect();
    let entry_masks: Vec<u64> = tensor
        .entries()
        .map(|(idx, _)| vertex_mask(idx.iter().zip(&offsets).map(|(&i, &o)| o + i)))
        .collect();
    let full = (1u64 << n) - 1;
    for zero_set in 1..full {
        if part_masks.iter().any(|&p| p & !zero_set == 0) {
            continue;
        }
        let crossing = entry_masks
            .iter()
            .any(|&e| (e & zero_set).count_ones() == 1);
        if !crossing {
            return Verdict::Fails(mask_vertices(zero_set, n));
        }
    }
    Verdict::Holds
}

/// `G(P)`: edge `(i, j)` iff `x_j` appears in `P_i`; every `(i, k)` when
/// `P_i` has a monomial of degree below `d_i`.
pub fn map_digraph(map: &PolynomialMap) -> DiGraph {
    let n = map.n();
    let mut g = DiGraph::new(n);
    for (i, monos) in map.components().iter().enumerate() {
        let d_i = map.degrees()[i];
        for m in monos {
            for k in m.support() {
                g.add_edge(i, k);
            }
        }
        if monos.iter().any(|m| m.degree() < d_i) {
            for k in 0..n {
                g.add_edge(i, k);
            }
        }
    }
    g
}

/// Di-graph of the homogeneous map built from a tensor and norm exponents.
///
/// Edges between distinct parts follow the support; edges inside a part come
/// from the norm factor when `p_k > d` (loops included) and loops from the
/// power of the coordinate itself when `pmax > p_k`.
pub fn tensor_f_digraph(tensor: &NonnegTensor, weights: &NormWeights) -> Result<DiGraph> {
    let d = tensor.order();
    if weights.len() != d {
        return Err(Error::WeightCount {
            expected: d,
            got: weights.len(),
        });
    }
    if let Some((mode, index)) = tensor.vanishing_slice() {
        return Err(Error::VanishingSlice { mode, index });
    }
    let offsets = tensor.offsets();
    let mut g = DiGraph::new(tensor.total_dim());
    for (idx, _) in tensor.entries() {
        for k in 0..d {
            for l in 0..d {
                if k != l {
                    g.add_edge(offsets[k] + idx[k], offsets[l] + idx[l]);
                }
            }
        }
    }
    for (k, &m) in tensor.dims().iter().enumerate() {
        let pk = weights.get(k);
        let block = offsets[k]..offsets[k] + m;
        if pk > d as f64 {
            for r in block.clone() {
                for s in block.clone() {
                    g.add_edge(r, s);
                }
            }
        }
        if weights.pmax() > pk {
            for r in block {
                g.add_edge(r, r);
            }
        }
    }
    Ok(g)
}

/// Weak primitivity of `G(P)`.
pub fn is_weakly_primitive(map: &PolynomialMap) -> Verdict<Imprimitivity> {
    primitivity(&map_digraph(map))
}

/// Whether no proper nontrivial part of the orthant is invariant under `P`.
///
/// The witness is the support `I` of an invariant part: every `P_i` with
/// `i` in `I` has a monomial supported in `I`, no other `P_i` does.
pub fn is_irreducible_map(map: &PolynomialMap) -> Verdict<Vec<usize>> {
    let n = map.n();
    if n > MAX_SUBSET_VERTICES {
        return Verdict::Skipped(format!(
            "{n} vertices exceeds the enumeration limit {MAX_SUBSET_VERTICES}"
        ));
    }
    let supports: Vec<Vec<u64>> = map
        .components()
        .iter()
        .map(|monos| monos.iter().map(|m| vertex_mask(m.support())).collect())
        .collect();
    let full = (1u64 << n) - 1;
    for part in 1..full {
        let invariant = supports.iter().enumerate().all(|(i, ms)| {
            let inside = ms.iter().any(|&s| s & !part == 0);
            inside == (part >> i & 1 == 1)
        });
        if invariant {
            return Verdict::Fails(mask_vertices(part, n));
        }
    }
    Verdict::Holds
}

/// Structural summary of a problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    /// Connected partite graph (tensors) or strongly connected `G(P)` (maps).
    pub weakly_irreducible: Verdict<Vec<usize>>,
    pub irreducible: Verdict<Vec<usize>>,
    /// Weak primitivity of the polynomial system `G(P)`.
    pub weakly_primitive: Verdict<Imprimitivity>,
    /// Primitivity of the di-graph of the homogeneous map `F` that the power
    /// algorithm iterates; `None` when the map cannot be built.
    pub map_primitive: Option<Verdict<Imprimitivity>>,
}

impl StructureReport {
    pub fn for_tensor(tensor: &NonnegTensor, weights: &NormWeights) -> Self {
        let weakly_primitive = match tensor_system(tensor) {
            Ok(p) => is_weakly_primitive(&p),
            Err(_) => {
                let (mode, index) = tensor.vanishing_slice().expect("vanishing slice");
                Verdict::Fails(Imprimitivity::Reducible(vec![
                    tensor.offsets()[mode] + index,
                ]))
            }
        };
        let map_primitive = tensor_f_digraph(tensor, weights)
            .ok()
            .map(|g| primitivity(&g));
        Self {
            weakly_irreducible: is_weakly_irreducible(tensor),
            irreducible: is_irreducible_tensor(tensor),
            weakly_primitive,
            map_primitive,
        }
    }

    pub fn for_map(map: &PolynomialMap, deltas: &[f64]) -> Self {
        let map_primitive = crate::dynamics::poly_f_digraph(map, deltas)
            .ok()
            .map(|g| primitivity(&g));
        Self {
            weakly_irreducible: is_strongly_connected(&map_digraph(map)),
            irreducible: is_irreducible_map(map),
            weakly_primitive: is_weakly_primitive(map),
            map_primitive,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    #[test]
    fn partite_graph_examples() {
        let g = partite_graph(&all_ones());
        assert_eq!(g.num_edges(), 12);
        assert!(g.has_edge(g.vertex(0, 0), g.vertex(2, 1)));
        assert!(!g.has_edge(0, 1));

        let g = partite_graph(&diagonal());
        assert_eq!(g.num_edges(), 6);
        assert_eq!(g.components(), vec![vec![0, 2, 4], vec![1, 3, 5]]);

        let g = partite_graph(&swap_matrix());
        let edges: Vec<_> = g.edges().collect();
        // (1_1, 2_2) and (2_1, 1_2)
        assert_eq!(edges, vec![(0, 3), (1, 2)]);
        assert_eq!(g.label(3), (1, 1));
    }

    #[test]
    fn weak_irreducibility_examples() {
        assert!(is_weakly_irreducible(&two_level(1.2, 0.2)).is_holds());
        assert!(is_weakly_irreducible(&all_ones()).is_holds());
        assert_eq!(
            is_weakly_irreducible(&diagonal()),
            Verdict::Fails(vec![0, 2, 4])
        );
        assert!(!is_weakly_irreducible(&swap_matrix()).is_holds());
    }

    #[test]
    fn tensor_irreducibility_examples() {
        assert!(is_irreducible_tensor(&all_ones()).is_holds());
        assert!(is_irreducible_tensor(&two_level(1.2, 0.2)).is_holds());
        let v = is_irreducible_tensor(&diagonal());
        let w = v.witness().expect("reducible");
        // witness is a zero set with no entry crossing into its complement
        let t = diagonal();
        let offs = t.offsets();
        for (idx, _) in t.entries() {
            let inside = idx
                .iter()
                .zip(&offs)
                .filter(|(&i, &o)| w.contains(&(o + i)))
                .count();
            assert_ne!(inside, 1);
        }
        // d = 2: agrees with the (disconnected) partite graph
        assert_eq!(is_irreducible_tensor(&swap_matrix()).holds(), Some(false));
        let full = NonnegTensor::from_dense(vec![2, 2], &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(is_irreducible_tensor(&full).is_holds());
    }

    #[test]
    fn irreducibility_is_skipped_for_large_instances() {
        let t = NonnegTensor::from_dense(vec![13, 12], &vec![1.0; 156]).unwrap();
        assert!(matches!(is_irreducible_tensor(&t), Verdict::Skipped(_)));
    }

    #[test]
    fn map_digraph_examples() {
        let p = poly(2, &[&[(&[0, 1], 1.0)], &[(&[1, 0], 1.0)]]);
        assert_eq!(map_digraph(&p), DiGraph::from_edges(2, [(0, 1), (1, 0)]));

        let p = poly(2, &[&[(&[1, 1], 1.0)], &[(&[0, 2], 1.0)]]);
        assert_eq!(
            map_digraph(&p),
            DiGraph::from_edges(2, [(0, 0), (0, 1), (1, 1)])
        );

        let p = poly(2, &[&[(&[2, 0], 1.0), (&[0, 1], 1.0)], &[(&[2, 0], 1.0)]]);
        assert_eq!(
            map_digraph(&p),
            DiGraph::from_edges(2, [(0, 0), (0, 1), (1, 0)])
        );
    }

    #[test]
    fn tensor_f_digraph_examples() {
        let t = all_ones();
        let g = tensor_f_digraph(&t, &NormWeights::uniform(3, 3.0).unwrap()).unwrap();
        for r in 0..6 {
            for s in 0..6 {
                assert_eq!(g.has_edge(r, s), r / 2 != s / 2, "({r},{s})");
            }
        }
        assert!(is_strongly_connected(&g).is_holds());

        let w = NormWeights::new(vec![4.0, 3.0, 3.0]).unwrap();
        let g = tensor_f_digraph(&t, &w).unwrap();
        for r in 0..6 {
            for s in 0..6 {
                let expected = r / 2 != s / 2 || (r < 2 && s < 2) || r == s;
                assert_eq!(g.has_edge(r, s), expected, "({r},{s})");
            }
        }

        let g =
            tensor_f_digraph(&two_level(1.2, 0.2), &NormWeights::uniform(3, 3.0).unwrap()).unwrap();
        assert_eq!(g.num_edges(), 24);

        let zero_slice =
            NonnegTensor::new(vec![2, 2], vec![(vec![0, 0], 1.0), (vec![1, 0], 1.0)]).unwrap();
        assert!(matches!(
            tensor_f_digraph(&zero_slice, &NormWeights::uniform(2, 2.0).unwrap()),
            Err(Error::VanishingSlice { mode: 1, index: 1 })
        ));
    }

    #[test]
    fn strong_connectivity_examples() {
        assert!(is_strongly_connected(&DiGraph::from_edges(2, [(0, 1), (1, 0)])).is_holds());
        assert_eq!(
            is_strongly_connected(&DiGraph::from_edges(2, [(0, 0), (0, 1), (1, 1)])),
            Verdict::Fails(vec![1])
        );
        let g = DiGraph::from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2), (1, 2)]);
        assert_eq!(
            g.strongly_connected_components(),
            vec![vec![0, 1], vec![2, 3]]
        );
    }

    #[test]
    fn primitivity_examples() {
        let p = poly(2, &[&[(&[0, 1], 1.0)], &[(&[1, 0], 1.0)]]);
        assert_eq!(
            is_weakly_primitive(&p),
            Verdict::Fails(Imprimitivity::Periodic(2))
        );

        let p = poly(2, &[&[(&[1, 1], 1.0)], &[(&[2, 0], 1.0)]]);
        assert!(is_weakly_primitive(&p).is_holds());
        assert_eq!(cyclicity(&map_digraph(&p)), Some(1));

        let p = tensor_system(&all_ones()).unwrap();
        assert!(is_weakly_primitive(&p).is_holds());

        // a directed 3-cycle with a chord making a 2-cycle: gcd(2, 3) = 1
        let g = DiGraph::from_edges(3, [(0, 1), (1, 2), (2, 0), (1, 0)]);
        assert_eq!(cyclicity(&g), Some(1));
        let g = DiGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 0)]);
        assert_eq!(cyclicity(&g), Some(2));
    }

    #[test]
    fn map_irreducibility_examples() {
        let p = poly(2, &[&[(&[0, 1], 1.0)], &[(&[1, 0], 1.0)]]);
        assert!(is_irreducible_map(&p).is_holds());

        let p = poly(2, &[&[(&[2, 0], 1.0)], &[(&[0, 2], 1.0)]]);
        assert_eq!(is_irreducible_map(&p), Verdict::Fails(vec![0]));

        let p = tensor_system(&diagonal()).unwrap();
        let w = is_irreducible_map(&p);
        assert!(w == Verdict::Fails(vec![0, 2, 4]) || w == Verdict::Fails(vec![1, 3, 5]));

        let p = tensor_system(&all_ones()).unwrap();
        assert!(is_irreducible_map(&p).is_holds());
    }

    #[test]
    fn verdicts_ignore_coefficient_scale() {
        let t = two_level(1.2, 0.2);
        let w = NormWeights::uniform(3, 3.0).unwrap();
        assert_eq!(
            StructureReport::for_tensor(&t, &w),
            StructureReport::for_tensor(&t.scaled(17.0), &w)
        );
    }

    #[test]
    fn structure_report_for_f1() {
        let r = StructureReport::for_tensor(
            &two_level(1.2, 0.2),
            &NormWeights::uniform(3, 3.0).unwrap(),
        );
        assert!(r.weakly_irreducible.is_holds());
        assert!(r.irreducible.is_holds());
        assert!(r.weakly_primitive.is_holds());
        assert_eq!(r.map_primitive, Some(Verdict::Holds));
    }
}
