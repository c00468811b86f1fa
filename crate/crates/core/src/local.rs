//! Local two-step identification of one module `G_{ji}`.
//!
//! 1. Identify a small block of `T = (I - G)^{-1}` in open loop from
//!    excitations `r` to node signals `w`.
//! 2. Use `T (I - G) = I` column `i` (out-neighbour variant) or
//!    `(I - G) T = I` row `j` (in-neighbour variant), which reduce to
//!
//!    `T[N_i^+, i] = T[N_i^+, N_i^+] G[N_i^+, i]`
//!    `T[j, N_j^-] = G[j, N_j^-] T[N_j^-, N_j^-]`
//!
//!    and solve them frequency by frequency.
//!
//! A parametric model of the target is then fitted to the solved samples.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, lstsq_many, solve_with_condition};
use crate::network::{FreqResponseMatrix, LocalTopology, SignalRecord};
use crate::scalar::{Cplx, Real};
use crate::tf::{unit_delay, FreqGrid, PolyQ, RationalTf};

/// Grid points whose `T` block has a larger condition number are dropped.
pub const DROP_CONDITION: f64 = 1e10;

/// Solves fail when more than this fraction of the grid is dropped.
pub const MAX_DROP_FRACTION: f64 = 0.2;

pub const DEFAULT_FIR_ORDER: usize = 50;
pub const DEFAULT_GRID_POINTS: usize = 100;

/// Which side of the target edge the experiment is built around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Excite `i` and `N_i^+`, measure `N_i^+`.
    OutNeighbors,
    /// Excite `N_j^-`, measure `j` and `N_j^-`.
    InNeighbors,
}

impl Theorem {
    pub fn label(self) -> &'static str {
        match self {
            Theorem::OutNeighbors => "theorem1",
            Theorem::InNeighbors => "theorem2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodChoice {
    pub which: Theorem,
    pub target: (usize, usize),
    pub excite: Vec<usize>,
    pub measure: Vec<usize>,
    /// Rows and columns of the `T` block to identify.
    pub t_rows: Vec<usize>,
    pub t_cols: Vec<usize>,
    pub entry_count: usize,
}

fn sorted_union(a: usize, rest: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::once(a).chain(rest.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Experiment for the given variant, built from local topology only.
pub fn plan_with(topology: &LocalTopology, which: Theorem) -> Result<MethodChoice> {
    let (j, i) = (topology.target, topology.source);
    if !topology.source_out.contains(&j) || !topology.target_in.contains(&i) {
        return Err(Error::EdgeNotInTopology { j, i });
    }
    let choice = match which {
        Theorem::OutNeighbors => {
            let n = topology.source_out.clone();
            let cols = sorted_union(i, &n);
            MethodChoice {
                which,
                target: (j, i),
                excite: cols.clone(),
                measure: n.clone(),
                entry_count: n.len() * cols.len(),
                t_rows: n,
                t_cols: cols,
            }
        }
        Theorem::InNeighbors => {
            let n = topology.target_in.clone();
            let rows = sorted_union(j, &n);
            MethodChoice {
                which,
                target: (j, i),
                excite: n.clone(),
                measure: rows.clone(),
                entry_count: rows.len() * n.len(),
                t_rows: rows,
                t_cols: n,
            }
        }
    };
    Ok(choice)
}

/// Picks the variant needing fewer `T` entries: out-neighbour variant iff
/// `d_i^+ <= d_j^-`.
pub fn plan_experiment(topology: &LocalTopology) -> Result<MethodChoice> {
    let which = if topology.source_out.len() <= topology.target_in.len() {
        Theorem::OutNeighbors
    } else {
        Theorem::InNeighbors
    };
    plan_with(topology, which)
}

/// Open-loop FIR estimates of a block of `T`.
#[derive(Debug, Clone)]
pub struct TSubmatrixEstimate<T: Real> {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub entries: BTreeMap<(usize, usize), RationalTf<T>>,
    /// `1 - |w_k - w_hat_k| / |w_k - mean(w_k)|` of the row model each entry belongs to.
    pub fit_scores: BTreeMap<(usize, usize), T>,
    pub samples: FreqResponseMatrix<T>,
}

impl<T: Real> TSubmatrixEstimate<T> {
    /// Wraps exact frequency responses (e.g. from the true `T`) so the solve
    /// steps can run on them directly.
    pub fn from_response(samples: FreqResponseMatrix<T>) -> Self {
        let mut fit_scores = BTreeMap::new();
        for &r in &samples.rows {
            for &c in &samples.cols {
                fit_scores.insert((r, c), T::one());
            }
        }
        Self { rows: samples.rows.clone(), cols: samples.cols.clone(), entries: BTreeMap::new(), fit_scores, samples }
    }

    pub fn min_fit(&self) -> T {
        self.fit_scores.values().fold(T::one(), |m, &f| m.min(f))
    }
}

/// MISO least squares of each row node on lags `0..=fir_order` of the
/// excitations in `cols`.
///
/// Signals start from rest, so pre-sample excitation values are zero and
/// every sample is used.
pub fn estimate_t_entries<T: Real>(
    record: &SignalRecord<T>,
    rows: &[usize],
    cols: &[usize],
    fir_order: usize,
    grid: &FreqGrid<T>,
) -> Result<TSubmatrixEstimate<T>> {
    if fir_order == 0 {
        return Err(Error::InvalidStructure("FIR order must be at least 1".into()));
    }
    let l = record.node_count();
    for &node in rows.iter().chain(cols) {
        if node == 0 || node > l {
            return Err(Error::NodeOutOfRange { node, node_count: l });
        }
    }
    for &c in cols {
        if !record.is_excited(c) || record.r(c).iter().all(|&x| x == T::zero()) {
            return Err(Error::UnexcitedNode(c));
        }
    }
    let n = record.samples();
    let taps = fir_order + 1;
    let params = taps * cols.len();
    if n < params {
        return Err(Error::InsufficientSamples { needed: params, available: n });
    }
    let phi = DMatrix::from_fn(n, params, |t, p| {
        let (c, d) = (cols[p / taps], p % taps);
        if t >= d {
            record.r(c)[t - d]
        } else {
            T::zero()
        }
    });

    let y = DMatrix::from_fn(n, rows.len(), |t, k| record.w(rows[k])[t]);
    let (theta, rank) = lstsq_many(&phi, &y);
    if rank < params {
        return Err(Error::RankDeficient { rows: n, cols: params, rank });
    }
    let residual = &y - &phi * &theta;

    let mut entries = BTreeMap::new();
    let mut fit_scores = BTreeMap::new();
    for (kk, &k) in rows.iter().enumerate() {
        let col = y.column(kk);
        let mean = col.mean();
        let spread = col.map(|x| x - mean).norm();
        let fit = if spread > T::zero() { T::one() - residual.column(kk).norm() / spread } else { T::one() };
        for (ci, &c) in cols.iter().enumerate() {
            let coeffs: Vec<T> = theta.view((ci * taps, kk), (taps, 1)).iter().copied().collect();
            entries.insert((k, c), RationalTf::fir(PolyQ::new(coeffs)));
            fit_scores.insert((k, c), fit);
        }
    }

    let samples = grid
        .omegas()
        .iter()
        .map(|&w| {
            let x = unit_delay(w);
            DMatrix::from_fn(rows.len(), cols.len(), |a, b| entries[&(rows[a], cols[b])].num().eval_complex(x))
        })
        .collect();
    let samples = FreqResponseMatrix { rows: rows.to_vec(), cols: cols.to_vec(), grid: grid.clone(), samples };
    Ok(TSubmatrixEstimate { rows: rows.to_vec(), cols: cols.to_vec(), entries, fit_scores, samples })
}

/// Frequency samples of a set of edges recovered by a solve.
#[derive(Debug, Clone)]
pub struct SolvedEdges<T: Real> {
    pub which: Theorem,
    /// `(j, i)` for each solved edge, in the order of the neighbour set.
    pub edges: Vec<(usize, usize)>,
    /// Grid points that were kept.
    pub omegas: Vec<T>,
    pub kept: Vec<usize>,
    /// `responses[e][k]` is edge `e` at kept point `k`.
    pub responses: Vec<Vec<Cplx<T>>>,
    /// Dropped grid indices with the condition number that caused the drop.
    pub dropped: Vec<(usize, f64)>,
}

impl<T: Real> SolvedEdges<T> {
    pub fn response(&self, j: usize, i: usize) -> Option<&[Cplx<T>]> {
        let e = self.edges.iter().position(|&x| x == (j, i))?;
        Some(&self.responses[e])
    }
}

fn block<T: Real>(est: &TSubmatrixEstimate<T>, rows: &[usize], cols: &[usize], k: usize) -> Result<DMatrix<Cplx<T>>> {
    est.samples.submatrix(rows, cols, k).ok_or_else(|| {
        let row = rows.iter().copied().find(|r| est.samples.row_pos(*r).is_none()).unwrap_or(rows[0]);
        let col = cols.iter().copied().find(|c| est.samples.col_pos(*c).is_none()).unwrap_or(cols[0]);
        Error::MissingEntry { row, col }
    })
}

fn finish<T: Real>(
    which: Theorem,
    edges: Vec<(usize, usize)>,
    grid: &FreqGrid<T>,
    per_point: Vec<std::result::Result<Vec<Cplx<T>>, f64>>,
) -> Result<SolvedEdges<T>> {
    let total = per_point.len();
    let mut kept = Vec::new();
    let mut omegas = Vec::new();
    let mut dropped = Vec::new();
    let mut responses = vec![Vec::new(); edges.len()];
    for (k, point) in per_point.into_iter().enumerate() {
        match point {
            Ok(x) => {
                kept.push(k);
                omegas.push(grid.omegas()[k]);
                for (e, v) in x.into_iter().enumerate() {
                    responses[e].push(v);
                }
            }
            Err(cond) => dropped.push((k, cond)),
        }
    }
    if dropped.len() as f64 > MAX_DROP_FRACTION * total as f64 {
        return Err(Error::TooManyDroppedPoints { dropped: dropped.len(), total });
    }
    Ok(SolvedEdges { which, edges, omegas, kept, responses, dropped })
}

/// Out-neighbour solve: `T[N, N] x = T[N, i]` at each grid point, giving
/// `G[N, i]` for `N = ni_plus`.
pub fn solve_theorem1<T: Real>(est: &TSubmatrixEstimate<T>, i: usize, ni_plus: &[usize]) -> Result<SolvedEdges<T>> {
    let grid = &est.samples.grid;
    let per_point = (0..grid.len())
        .map(|k| {
            let a = block(est, ni_plus, ni_plus, k)?;
            let b = block(est, ni_plus, &[i], k)?;
            Ok(match solve_with_condition(&a, &b) {
                Some((x, cond)) if cond.to_f64_lossy() <= DROP_CONDITION => Ok(x.column(0).iter().copied().collect()),
                Some((_, cond)) => Err(cond.to_f64_lossy()),
                None => Err(f64::INFINITY),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = ni_plus.iter().map(|&j| (j, i)).collect();
    finish(Theorem::OutNeighbors, edges, grid, per_point)
}

/// In-neighbour solve: `x T[N, N] = T[j, N]` at each grid point, giving
/// `G[j, N]` for `N = nj_minus`.
pub fn solve_theorem2<T: Real>(est: &TSubmatrixEstimate<T>, j: usize, nj_minus: &[usize]) -> Result<SolvedEdges<T>> {
    let grid = &est.samples.grid;
    let per_point = (0..grid.len())
        .map(|k| {
            // x A = b  <=>  A^T x^T = b^T
            let a = block(est, nj_minus, nj_minus, k)?.transpose();
            let b = block(est, &[j], nj_minus, k)?.transpose();
            Ok(match solve_with_condition(&a, &b) {
                Some((x, cond)) if cond.to_f64_lossy() <= DROP_CONDITION => Ok(x.column(0).iter().copied().collect()),
                Some((_, cond)) => Err(cond.to_f64_lossy()),
                None => Err(f64::INFINITY),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = nj_minus.iter().map(|&i| (j, i)).collect();
    finish(Theorem::InNeighbors, edges, grid, per_point)
}

/// Largest absolute difference between two solves on the edges and grid
/// points they share; `None` if they share nothing.
pub fn solution_disagreement<T: Real>(a: &SolvedEdges<T>, b: &SolvedEdges<T>) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (ea, &edge) in a.edges.iter().enumerate() {
        let Some(eb) = b.edges.iter().position(|&x| x == edge) else { continue };
        for (ka, &k) in a.kept.iter().enumerate() {
            let Some(kb) = b.kept.iter().position(|&x| x == k) else { continue };
            let d = (a.responses[ea][ka] - b.responses[eb][kb]).norm_sqr().sqrt().to_f64_lossy();
            worst = Some(worst.map_or(d, |w| w.max(d)));
        }
    }
    worst
}

/// FIR band `theta_0 q^-delay + ... q^-max_degree` fitted to frequency samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub delay: usize,
    pub max_degree: usize,
}

impl Band {
    pub fn params(&self) -> usize {
        self.max_degree.saturating_sub(self.delay) + 1
    }
}

#[derive(Debug, Clone)]
pub struct ModuleEstimate<T: Real> {
    pub target: (usize, usize),
    pub band: Band,
    pub omegas: Vec<T>,
    pub freq_samples: Vec<Cplx<T>>,
    /// Coefficients for delays `band.delay..=band.max_degree`.
    pub theta_hat: Vec<T>,
    /// Least-squares cost at the optimum.
    pub residual: T,
}

impl<T: Real> ModuleEstimate<T> {
    pub fn transfer_function(&self) -> RationalTf<T> {
        let mut coeffs = vec![T::zero(); self.band.max_degree + 1];
        coeffs[self.band.delay..].copy_from_slice(&self.theta_hat);
        RationalTf::fir(PolyQ::new(coeffs))
    }
}

/// Real least squares `min sum |sum_d theta_d e^{-j d w} - sample(w)|^2`,
/// stacking real and imaginary parts.
pub fn fit_parametric<T: Real>(
    target: (usize, usize),
    omegas: &[T],
    samples: &[Cplx<T>],
    band: Band,
) -> Result<ModuleEstimate<T>> {
    if band.max_degree < band.delay {
        return Err(Error::InvalidStructure("band max degree below delay".into()));
    }
    assert_eq!(omegas.len(), samples.len(), "one sample per frequency");
    let p = band.params();
    let m = omegas.len();
    if 2 * m < p || m == 0 {
        return Err(Error::Underdetermined { points: m, params: p });
    }
    let mut phi = DMatrix::zeros(2 * m, p);
    let mut y = DVector::zeros(2 * m);
    for (k, (&w, s)) in omegas.iter().zip(samples).enumerate() {
        for c in 0..p {
            let d = T::lit((band.delay + c) as f64);
            phi[(2 * k, c)] = (d * w).cos();
            phi[(2 * k + 1, c)] = -(d * w).sin();
        }
        y[2 * k] = s.re;
        y[2 * k + 1] = s.im;
    }
    let sol = lstsq(&phi, &y);
    if !sol.full_rank() {
        return Err(Error::Underdetermined { points: m, params: p });
    }
    let residual = (&y - &phi * &sol.theta).norm_squared();
    Ok(ModuleEstimate {
        target,
        band,
        omegas: omegas.to_vec(),
        freq_samples: samples.to_vec(),
        theta_hat: sol.theta.iter().copied().collect(),
        residual,
    })
}
