use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::tf::RationalTf;

/// `I - D0` with a condition number above this is rejected as ill-posed.
pub const WELL_POSED_CONDITION: f64 = 1e12;

/// Sparse network matrix `G(q)` with `w = G w + r + v`.
///
/// Nodes are numbered `1..=L`. An edge `(j, i)` holds `G_{ji}`, the module
/// from node `i` into node `j`. The diagonal is always empty.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel<T: Real> {
    node_count: usize,
    edges: BTreeMap<(usize, usize), RationalTf<T>>,
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
}

/// The neighbour sets a local identification plan is allowed to see.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTopology {
    pub target: usize,
    pub source: usize,
    /// `N_i^+` for the source node `i`.
    pub source_out: Vec<usize>,
    /// `N_j^-` for the target node `j`.
    pub target_in: Vec<usize>,
}

impl<T: Real> NetworkModel<T> {
    /// Validates node indices, the zero diagonal and well-posedness.
    ///
    /// Zero transfer functions are dropped. Duplicate edges keep the last one.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = ((usize, usize), RationalTf<T>)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((j, i), g) in edges {
            for node in [j, i] {
                if node == 0 || node > node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            if j == i {
                return Err(Error::SelfLoop(j));
            }
            if g.is_zero() {
                map.remove(&(j, i));
            } else {
                map.insert((j, i), g);
            }
        }
        let mut in_neighbors = vec![Vec::new(); node_count];
        let mut out_neighbors = vec![Vec::new(); node_count];
        for &(j, i) in map.keys() {
            in_neighbors[j - 1].push(i);
            out_neighbors[i - 1].push(j);
        }
        for list in out_neighbors.iter_mut() {
            list.sort_unstable();
        }
        let model = Self { node_count, edges: map, in_neighbors, out_neighbors };
        let condition = model.well_posedness_condition();
        if !(condition < WELL_POSED_CONDITION) {
            return Err(Error::IllPosed { condition });
        }
        Ok(model)
    }

    pub fn empty(node_count: usize) -> Self {
        Self::new(node_count, std::iter::empty()).expect("edgeless network is well posed")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge(&self, j: usize, i: usize) -> Option<&RationalTf<T>> {
        self.edges.get(&(j, i))
    }

    /// Edges in `(j, i)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), &RationalTf<T>)> {
        self.edges.iter().map(|(&k, g)| (k, g))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `N_j^-`, ascending.
    pub fn in_neighbors(&self, j: usize) -> &[usize] {
        &self.in_neighbors[j - 1]
    }

    /// `N_i^+`, ascending.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_neighbors[i - 1]
    }

    pub fn in_degree(&self, j: usize) -> usize {
        self.in_neighbors(j).len()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors(i).len()
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.node_count {
            Err(Error::NodeOutOfRange { node, node_count: self.node_count })
        } else {
            Ok(())
        }
    }

    pub fn local_topology(&self, j: usize, i: usize) -> Result<LocalTopology> {
        self.check_node(j)?;
        self.check_node(i)?;
        Ok(LocalTopology {
            target: j,
            source: i,
            source_out: self.out_neighbors(i).to_vec(),
            target_in: self.in_neighbors(j).to_vec(),
        })
    }

    /// Copy with edge `(j, i)` replaced (or removed when `g` is zero).
    pub fn with_edge(&self, j: usize, i: usize, g: RationalTf<T>) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.insert((j, i), g);
        Self::new(self.node_count, edges)
    }

    /// Zero-delay coefficient matrix `D0` (0-based indices).
    pub fn feedthrough_matrix(&self) -> DMatrix<T> {
        let mut d0 = DMatrix::zeros(self.node_count, self.node_count);
        for (&(j, i), g) in &self.edges {
            d0[(j - 1, i - 1)] = g.feedthrough();
        }
        d0
    }

    /// True when `D0` is nilpotent, i.e. every loop of the graph carries at
    /// least one delay.
    pub fn has_delay_in_every_loop(&self) -> bool {
        // Kahn's algorithm on the graph of feedthrough edges
        let n = self.node_count;
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for (&(j, i), g) in &self.edges {
            if g.feedthrough() != T::zero() {
                succ[i - 1].push(j - 1);
                indeg[j - 1] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&k| indeg[k] == 0).collect();
        let mut seen = 0;
        while let Some(k) = stack.pop() {
            seen += 1;
            for &s in &succ[k] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    stack.push(s);
                }
            }
        }
        seen == n
    }

    /// 1-norm condition number of `I - D0`.
    pub fn well_posedness_condition(&self) -> f64 {
        let n = self.node_count;
        if n == 0 {
            return 1.0;
        }
        let a = DMatrix::<T>::identity(n, n) - self.feedthrough_matrix();
        let norm = |m: &DMatrix<T>| {
            m.column_iter()
                .map(|c| c.iter().fold(T::zero(), |s, x| s + x.abs()))
                .fold(T::zero(), |acc, s| acc.max(s))
        };
        match a.clone().try_inverse() {
            Some(inv) if inv.iter().all(|x| x.is_finite()) => (norm(&a) * norm(&inv)).to_f64_lossy(),
            _ => f64::INFINITY,
        }
    }

    /// `(I - D0)^{-1}`.
    pub(crate) fn feedthrough_solve_matrix(&self) -> DMatrix<T> {
        let n = self.node_count;
        (DMatrix::<T>::identity(n, n) - self.feedthrough_matrix())
            .try_inverse()
            .expect("well-posedness checked at construction")
    }

    /// `G(e^{j omega})` as a dense complex matrix (0-based indices).
    pub fn eval_matrix(&self, omega: T) -> Result<DMatrix<Cplx<T>>> {
        let mut g = DMatrix::from_element(self.node_count, self.node_count, Cplx::new(T::zero(), T::zero()));
        for (&(j, i), tf) in &self.edges {
            g[(j - 1, i - 1)] = tf.eval(omega)?;
        }
        Ok(g)
    }

    pub fn all_edges_stable(&self) -> bool {
        self.edges.values().all(RationalTf::is_stable)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::PolyQ;

    fn delay(c: f64, d: usize) -> RationalTf<f64> {
        RationalTf::fir(PolyQ::monomial(c, d))
    }

    #[test]
    fn neighbour_sets_follow_rows_and_columns() {
        let m = NetworkModel::new(3, [((2, 1), delay(1.0, 1)), ((3, 1), delay(0.5, 0)), ((3, 2), delay(0.2, 1))]).unwrap();
        assert_eq!(m.in_neighbors(3), &[1, 2]);
        assert_eq!(m.out_neighbors(1), &[2, 3]);
        assert_eq!(m.in_degree(1), 0);
        assert_eq!(m.out_degree(3), 0);
        assert_eq!(m.edge_count(), 3);
    }

    #[test]
    fn rejects_self_loops_and_bad_indices() {
        assert!(matches!(NetworkModel::new(2, [((1, 1), delay(1.0, 1))]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            NetworkModel::new(2, [((3, 1), delay(1.0, 1))]),
            Err(Error::NodeOutOfRange { node: 3, node_count: 2 })
        ));
        assert!(matches!(
            NetworkModel::new(2, [((1, 0), delay(1.0, 1))]),
            Err(Error::NodeOutOfRange { node: 0, .. })
        ));
    }

    #[test]
    fn zero_edges_are_dropped() {
        let m = NetworkModel::new(2, [((2, 1), RationalTf::<f64>::zero())]).unwrap();
        assert_eq!(m.edge_count(), 0);
        assert!(m.in_neighbors(2).is_empty());
    }

    #[test]
    fn algebraic_loop_with_unit_gain_is_ill_posed() {
        let r = NetworkModel::new(2, [((1, 2), delay(1.0, 0)), ((2, 1), delay(1.0, 0))]);
        assert!(matches!(r, Err(Error::IllPosed { .. })));
    }

    #[test]
    fn loop_delay_detection() {
        let with_delay = NetworkModel::new(2, [((1, 2), delay(2.0, 1)), ((2, 1), delay(1.0, 0))]).unwrap();
        assert!(with_delay.has_delay_in_every_loop());
        let algebraic = NetworkModel::new(2, [((1, 2), delay(0.5, 0)), ((2, 1), delay(0.5, 0))]).unwrap();
        assert!(!algebraic.has_delay_in_every_loop());
        assert!(algebraic.well_posedness_condition() < 10.0);
    }

    #[test]
    fn with_edge_mutates_a_copy() {
        let m = NetworkModel::<f64>::empty(3);
        let m2 = m.with_edge(2, 1, delay(1.0, 1)).unwrap();
        assert_eq!(m.edge_count(), 0);
        assert_eq!(m2.out_neighbors(1), &[2]);
        let m3 = m2.with_edge(2, 1, RationalTf::zero()).unwrap();
        assert_eq!(m3.edge_count(), 0);
    }
}
