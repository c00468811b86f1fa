use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::solve_with_condition;
use crate::network::model::NetworkModel;
use crate::network::sim::simulate_signals;
use crate::scalar::{Cplx, Real};
use crate::tf::FreqGrid;

/// Samples of a transfer submatrix on a frequency grid, addressed by node index.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponseMatrix<T: Real> {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub grid: FreqGrid<T>,
    /// One `rows x cols` matrix per grid point.
    pub samples: Vec<DMatrix<Cplx<T>>>,
}

impl<T: Real> FreqResponseMatrix<T> {
    pub fn row_pos(&self, node: usize) -> Option<usize> {
        self.rows.iter().position(|&r| r == node)
    }

    pub fn col_pos(&self, node: usize) -> Option<usize> {
        self.cols.iter().position(|&c| c == node)
    }

    /// Response of entry `(row, col)` at grid point `k`.
    pub fn get(&self, row: usize, col: usize, k: usize) -> Option<Cplx<T>> {
        Some(self.samples[k][(self.row_pos(row)?, self.col_pos(col)?)])
    }

    /// Entry `(row, col)` across the whole grid.
    pub fn entry(&self, row: usize, col: usize) -> Option<Vec<Cplx<T>>> {
        let (a, b) = (self.row_pos(row)?, self.col_pos(col)?);
        Some(self.samples.iter().map(|m| m[(a, b)]).collect())
    }

    /// `rows x cols` submatrix at grid point `k`; `None` if an index is missing.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize], k: usize) -> Option<DMatrix<Cplx<T>>> {
        let ri: Option<Vec<usize>> = rows.iter().map(|&r| self.row_pos(r)).collect();
        let ci: Option<Vec<usize>> = cols.iter().map(|&c| self.col_pos(c)).collect();
        let (ri, ci) = (ri?, ci?);
        Some(DMatrix::from_fn(ri.len(), ci.len(), |a, b| self.samples[k][(ri[a], ci[b])]))
    }
}

/// `(I - G(e^{j omega}))^{-1}` restricted to `rows x cols`, on every grid point.
pub fn true_t<T: Real>(
    model: &NetworkModel<T>,
    rows: &[usize],
    cols: &[usize],
    grid: &FreqGrid<T>,
) -> Result<FreqResponseMatrix<T>> {
    for &node in rows.iter().chain(cols) {
        model.check_node(node)?;
    }
    let l = model.node_count();
    let one = Cplx::new(T::one(), T::zero());
    let zero = Cplx::new(T::zero(), T::zero());
    let rhs = DMatrix::from_fn(l, cols.len(), |a, b| if a + 1 == cols[b] { one } else { zero });
    let singular_limit = T::one() / (T::default_epsilon() * T::lit(1e2));
    let samples = grid
        .omegas()
        .iter()
        .map(|&omega| {
            let a = DMatrix::identity(l, l) - model.eval_matrix(omega)?;
            let singular = || Error::SingularAtFrequency { omega: omega.to_f64_lossy() };
            let (x, cond) = solve_with_condition(&a, &rhs).ok_or_else(singular)?;
            if cond > singular_limit {
                return Err(singular());
            }
            Ok(DMatrix::from_fn(rows.len(), cols.len(), |a, b| x[(rows[a] - 1, b)]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FreqResponseMatrix { rows: rows.to_vec(), cols: cols.to_vec(), grid: grid.clone(), samples })
}

/// First `n` impulse-response samples of `T_{out,in}`.
///
/// Expands `(I - G)^{-1}` as a power series in `q^-1`: with `G = sum G_m q^-m`
/// and `M = (I - G_0)^{-1}`, the series coefficients obey
/// `T_0 = M` and `T_n = M sum_{m=1..n} G_m T_{n-m}`. Only column `in` is
/// carried through the recursion.
pub fn true_t_impulse<T: Real>(model: &NetworkModel<T>, out: usize, input: usize, n: usize) -> Result<Vec<T>> {
    model.check_node(out)?;
    model.check_node(input)?;
    let l = model.node_count();
    let solve = model.feedthrough_solve_matrix();
    let edges: Vec<(usize, usize, Vec<T>)> =
        model.edges().map(|((j, i), g)| (j - 1, i - 1, g.impulse(n))).collect();

    let mut series: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut acc = vec![T::zero(); l];
    for step in 0..n {
        acc.iter_mut().for_each(|x| *x = T::zero());
        if step == 0 {
            acc[input - 1] = T::one();
        } else {
            for (to, from, h) in &edges {
                let mut s = T::zero();
                for m in 1..=step {
                    s += h[m] * series[step - m][*from];
                }
                acc[*to] += s;
            }
        }
        let col: Vec<T> = (0..l)
            .map(|row| (0..l).fold(T::zero(), |s, c| s + solve[(row, c)] * acc[c]))
            .collect();
        series.push(col);
    }
    Ok(series.iter().map(|c| c[out - 1]).collect())
}

/// Settings for [`is_internally_stable`].
#[derive(Debug, Clone, Copy)]
pub struct StabilityCheck {
    pub horizon: usize,
    pub decay_tol: f64,
    pub grid_points: usize,
}

impl Default for StabilityCheck {
    fn default() -> Self {
        Self { horizon: 2000, decay_tol: 1e-8, grid_points: 4096 }
    }
}

/// Internal stability of the interconnection.
///
/// Requires (a) stable edges, (b) noise-free impulse responses from every
/// node that decay below `decay_tol` by the end of the horizon and (c) a
/// zero winding number of `det(I - G(e^{j omega}))` around the origin with
/// no zero crossing on the grid.
pub fn is_internally_stable<T: Real>(model: &NetworkModel<T>, check: StabilityCheck) -> bool {
    if !model.all_edges_stable() {
        return false;
    }
    let l = model.node_count();
    let tail = check.horizon.saturating_sub(check.horizon / 10).max(1);
    let zeros = vec![vec![T::zero(); check.horizon]; l];
    for k in 0..l {
        let mut r = zeros.clone();
        r[k][0] = T::one();
        let w = match simulate_signals(model, &r, &zeros) {
            Ok(w) => w,
            Err(_) => return false,
        };
        let decay = T::lit(check.decay_tol);
        if w.iter().any(|row| row[tail.min(check.horizon - 1)..].iter().any(|x| x.abs() >= decay)) {
            return false;
        }
    }
    winding_number(model, check.grid_points) == Some(0)
}

/// Winding number of `det(I - G(e^{j omega}))` as `omega` sweeps `[0, 2 pi)`;
/// `None` if the determinant vanishes on the grid.
pub fn winding_number<T: Real>(model: &NetworkModel<T>, points: usize) -> Option<i64> {
    let l = model.node_count();
    let grid = FreqGrid::<T>::uniform(points).ok()?;
    let mut phases = Vec::with_capacity(points);
    for &omega in grid.omegas() {
        let a = DMatrix::identity(l, l) - model.eval_matrix(omega).ok()?;
        let det = a.determinant();
        if det.norm_sqr().sqrt().to_f64_lossy() < 1e-12 {
            return None;
        }
        phases.push(det.im.atan2(det.re).to_f64_lossy());
    }
    let mut total = 0.0;
    for k in 0..points {
        let next = phases[(k + 1) % points];
        let mut d = next - phases[k];
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        while d < -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        total += d;
    }
    Some((total / std::f64::consts::TAU).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::{PolyQ, RationalTf};

    fn delay(c: f64, d: usize) -> RationalTf<f64> {
        RationalTf::fir(PolyQ::monomial(c, d))
    }

    #[test]
    fn edgeless_network_has_identity_map() {
        let m = NetworkModel::<f64>::empty(3);
        let grid = FreqGrid::uniform(8).unwrap();
        let t = true_t(&m, &[1, 2, 3], &[1, 2, 3], &grid).unwrap();
        for s in &t.samples {
            assert!((s - DMatrix::identity(3, 3)).norm() < 1e-15);
        }
        assert_eq!(true_t_impulse(&m, 2, 2, 4).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(true_t_impulse(&m, 1, 2, 3).unwrap(), vec![0.0, 0.0, 0.0]);
        assert!(is_internally_stable(&m, StabilityCheck::default()));
    }

    #[test]
    fn single_edge_map_is_unit_upper_triangular() {
        let g = RationalTf::from_coeffs(&[0.3, 0.2], &[1.0, -0.4]).unwrap();
        let m = NetworkModel::new(2, [((1, 2), g.clone())]).unwrap();
        let grid = FreqGrid::uniform(5).unwrap();
        let t = true_t(&m, &[1, 2], &[1, 2], &grid).unwrap();
        for (k, &w) in grid.omegas().iter().enumerate() {
            assert!((t.get(1, 2, k).unwrap() - g.eval(w).unwrap()).norm() < 1e-14);
            assert!((t.get(1, 1, k).unwrap() - Cplx::new(1.0, 0.0)).norm() < 1e-14);
            assert!((t.get(2, 2, k).unwrap() - Cplx::new(1.0, 0.0)).norm() < 1e-14);
            assert!(t.get(2, 1, k).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn chain_impulse_is_a_delay() {
        let m = NetworkModel::new(2, [((2, 1), delay(1.0, 1))]).unwrap();
        assert_eq!(true_t_impulse(&m, 2, 1, 4).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn loop_gain_two_is_unstable() {
        let m = NetworkModel::new(2, [((1, 2), delay(2.0, 1)), ((2, 1), delay(1.0, 0))]).unwrap();
        assert!(!is_internally_stable(&m, StabilityCheck::default()));
        assert_eq!(winding_number(&m, 512), Some(-1));
    }

    #[test]
    fn case_study_is_internally_stable() {
        let m = crate::network::build_case_study::<f64>();
        assert!(is_internally_stable(&m, StabilityCheck::default()));
    }

    #[test]
    fn singular_frequency_is_named() {
        // w1 = q^-1 w2, w2 = w1: loop gain 1 puts a closed-loop pole at z = 1
        let m = NetworkModel::new(2, [((1, 2), delay(1.0, 1)), ((2, 1), delay(1.0, 0))]).unwrap();
        let grid = FreqGrid::new(vec![0.0, 1.0]).unwrap();
        match true_t(&m, &[1], &[1], &grid) {
            Err(Error::SingularAtFrequency { omega }) => assert_eq!(omega, 0.0),
            other => panic!("expected singular frequency, got {other:?}"),
        }
    }
}
