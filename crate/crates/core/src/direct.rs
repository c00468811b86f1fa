//! Direct prediction-error method on a single node equation.
//!
//! Node `j` obeys `w_j = sum_{k in N_j^-} G_{jk}(q) w_k + r_j + v_j`. With FIR
//! edge models and the noise model fixed to one, the one-step predictor is
//! linear in the parameters and minimizing the prediction-error energy is an
//! ordinary least-squares problem on `y = w_j - r_j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, spd_condition};
use crate::network::{NetworkModel, SignalRecord};
use crate::scalar::Real;
use crate::tf::{PolyQ, RationalTf};

/// Gram condition numbers at or above this mark the experiment as non-informative.
pub const DEFAULT_INFORMATIVITY_THRESHOLD: f64 = 1e6;

/// FIR band `b_d q^-d + ... + b_m q^-m` for the edge from `source`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBand {
    pub source: usize,
    pub delay: usize,
    pub max_degree: usize,
}

impl EdgeBand {
    pub fn params(&self) -> usize {
        self.max_degree - self.delay + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectModelStructure {
    pub target: usize,
    pub edges: Vec<EdgeBand>,
}

impl DirectModelStructure {
    pub fn new(target: usize, edges: Vec<EdgeBand>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidStructure("no regressor edges".into()));
        }
        if let Some(b) = edges.iter().find(|b| b.max_degree < b.delay) {
            return Err(Error::InvalidStructure(format!(
                "edge from {}: max degree {} below delay {}",
                b.source, b.max_degree, b.delay
            )));
        }
        if edges.iter().any(|b| b.source == target) {
            return Err(Error::InvalidStructure("regressor includes the target node".into()));
        }
        Ok(Self { target, edges })
    }

    /// Full-order structure for every in-edge of `target`, read off the true
    /// (FIR) edge transfer functions.
    pub fn from_model<T: Real>(model: &NetworkModel<T>, target: usize) -> Result<Self> {
        model.check_node(target)?;
        let edges = model
            .in_neighbors(target)
            .iter()
            .map(|&k| {
                let g = model.edge(target, k).expect("neighbour has an edge");
                if !g.is_fir() {
                    return Err(Error::InvalidStructure(format!("edge {target} <- {k} is not FIR")));
                }
                Ok(EdgeBand {
                    source: k,
                    delay: g.relative_degree().unwrap_or(0),
                    max_degree: g.num().degree(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(target, edges)
    }

    pub fn param_count(&self) -> usize {
        self.edges.iter().map(EdgeBand::params).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.edges.iter().map(|b| b.max_degree).max().unwrap_or(0)
    }

    /// Offset of `source`'s parameters in `theta`.
    pub fn offset_of(&self, source: usize) -> Option<(usize, EdgeBand)> {
        let mut offset = 0;
        for b in &self.edges {
            if b.source == source {
                return Some((offset, *b));
            }
            offset += b.params();
        }
        None
    }
}

/// Regression `y ~ Phi theta` for rows `t = max_delay .. N-1`.
///
/// Columns run over edges in structure order, each with ascending delays.
pub fn build_regressor<T: Real>(
    record: &SignalRecord<T>,
    structure: &DirectModelStructure,
) -> Result<(DMatrix<T>, DVector<T>)> {
    let l = record.node_count();
    for node in std::iter::once(structure.target).chain(structure.edges.iter().map(|b| b.source)) {
        if node == 0 || node > l {
            return Err(Error::NodeOutOfRange { node, node_count: l });
        }
    }
    let n = record.samples();
    let start = structure.max_delay();
    if n <= start {
        return Err(Error::InsufficientSamples { needed: start, available: n });
    }
    let rows = n - start;
    let mut phi = DMatrix::zeros(rows, structure.param_count());
    let mut col = 0;
    for band in &structure.edges {
        let w = record.w(band.source);
        for d in band.delay..=band.max_degree {
            for row in 0..rows {
                phi[(row, col)] = w[start + row - d];
            }
            col += 1;
        }
    }
    let wj = record.w(structure.target);
    let rj = record.r(structure.target);
    let y = DVector::from_fn(rows, |row, _| wj[start + row] - rj[start + row]);
    Ok((phi, y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Informativity {
    /// Eigenvalue condition number of `Phi^T Phi / N`; infinite when singular.
    pub condition_number: f64,
    pub min_eigenvalue: f64,
    pub informative: bool,
}

fn informativity_of<T: Real>(phi: &DMatrix<T>, threshold: f64) -> Informativity {
    let rows = T::lit(phi.nrows().max(1) as f64);
    let gram = phi.tr_mul(phi) / rows;
    let (cond, min) = spd_condition(&gram);
    let condition_number = if cond == T::max_value().unwrap() { f64::INFINITY } else { cond.to_f64_lossy() };
    Informativity { condition_number, min_eigenvalue: min.to_f64_lossy(), informative: condition_number < threshold }
}

/// Sample-Gram conditioning of the regressor, a numerical proxy for the
/// regressor spectrum being positive definite.
pub fn informativity_diagnostic<T: Real>(
    record: &SignalRecord<T>,
    structure: &DirectModelStructure,
    threshold: f64,
) -> Result<Informativity> {
    let (phi, _) = build_regressor(record, structure)?;
    Ok(informativity_of(&phi, threshold))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectEstimate<T: Real> {
    pub structure: DirectModelStructure,
    pub theta_hat: DVector<T>,
    /// One FIR estimate per structure edge, same order.
    pub edges: Vec<(usize, RationalTf<T>)>,
    pub gram_condition: f64,
    pub informative: bool,
    /// Numerical rank of the regression; below `theta_hat.len()` means a
    /// minimum-norm solution was returned.
    pub rank: usize,
    pub residual_variance: T,
}

impl<T: Real> DirectEstimate<T> {
    /// Coefficients of the edge from `source`, one per delay in its band.
    pub fn edge_coeffs(&self, source: usize) -> Option<Vec<T>> {
        let (offset, band) = self.structure.offset_of(source)?;
        Some(self.theta_hat.rows(offset, band.params()).iter().copied().collect())
    }
}

/// Least-squares direct-method estimate.
///
/// Non-informative data still yields an estimate (minimum-norm when the
/// regression is rank deficient) with `informative == false`.
pub fn estimate_direct<T: Real>(
    record: &SignalRecord<T>,
    structure: &DirectModelStructure,
    threshold: f64,
) -> Result<DirectEstimate<T>> {
    let (phi, y) = build_regressor(record, structure)?;
    let diag = informativity_of(&phi, threshold);
    let sol = lstsq(&phi, &y);
    let residual = &y - &phi * &sol.theta;
    let residual_variance = residual.norm_squared() / T::lit(y.len() as f64);

    let mut edges = Vec::with_capacity(structure.edges.len());
    let mut offset = 0;
    for band in &structure.edges {
        let mut coeffs = vec![T::zero(); band.max_degree + 1];
        for (k, c) in coeffs[band.delay..].iter_mut().enumerate() {
            *c = sol.theta[offset + k];
        }
        offset += band.params();
        edges.push((band.source, RationalTf::fir(PolyQ::new(coeffs))));
    }
    Ok(DirectEstimate {
        structure: structure.clone(),
        informative: diag.informative && sol.full_rank(),
        gram_condition: diag.condition_number,
        rank: sol.rank,
        theta_hat: sol.theta,
        edges,
        residual_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_case_study, simulate, ExcitationSpec};
    use std::collections::BTreeSet;

    fn record_from_w(w: Vec<Vec<f64>>) -> SignalRecord<f64> {
        let zeros = vec![vec![0.0; w[0].len()]; w.len()];
        SignalRecord { w, r: zeros.clone(), v: zeros, excited_nodes: BTreeSet::new(), seed: 0 }
    }

    #[test]
    fn impulse_regressor_is_shifted() {
        let mut w = vec![vec![0.0; 5]; 2];
        w[1][0] = 1.0;
        let s = DirectModelStructure::new(1, vec![EdgeBand { source: 2, delay: 1, max_degree: 1 }]).unwrap();
        let (phi, y) = build_regressor(&record_from_w(w), &s).unwrap();
        assert_eq!(phi.shape(), (4, 1));
        assert_eq!(phi.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(y.len(), 4);
    }

    #[test]
    fn case_study_structure_has_seven_columns() {
        let m = build_case_study::<f64>();
        let s = DirectModelStructure::from_model(&m, 3).unwrap();
        let bands: Vec<_> = s.edges.iter().map(|b| (b.source, b.delay, b.max_degree)).collect();
        assert_eq!(bands, vec![(2, 0, 1), (4, 1, 2), (5, 1, 1), (9, 0, 1)]);
        assert_eq!(s.param_count(), 7);
        let rec = simulate(&m, &ExcitationSpec::new(1..=20, 100, 3)).unwrap();
        let (phi, _) = build_regressor(&rec, &s).unwrap();
        assert_eq!(phi.ncols(), 7);
        assert_eq!(phi.nrows(), 98);
    }

    #[test]
    fn zero_signals_are_not_informative() {
        let s = DirectModelStructure::new(1, vec![EdgeBand { source: 2, delay: 0, max_degree: 2 }]).unwrap();
        let rec = record_from_w(vec![vec![0.0; 20]; 2]);
        let (phi, y) = build_regressor(&rec, &s).unwrap();
        assert!(phi.iter().all(|&x| x == 0.0) && y.iter().all(|&x| x == 0.0));
        let d = informativity_diagnostic(&rec, &s, DEFAULT_INFORMATIVITY_THRESHOLD).unwrap();
        assert_eq!(d.condition_number, f64::INFINITY);
        assert!(!d.informative);
        let est = estimate_direct(&rec, &s, DEFAULT_INFORMATIVITY_THRESHOLD).unwrap();
        assert!(!est.informative);
        assert_eq!(est.rank, 0);
        assert!(est.theta_hat.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn structure_validation() {
        assert!(DirectModelStructure::new(1, vec![]).is_err());
        assert!(DirectModelStructure::new(1, vec![EdgeBand { source: 2, delay: 2, max_degree: 1 }]).is_err());
        assert!(DirectModelStructure::new(1, vec![EdgeBand { source: 1, delay: 0, max_degree: 1 }]).is_err());
        let s = DirectModelStructure::new(1, vec![EdgeBand { source: 2, delay: 0, max_degree: 5 }]).unwrap();
        assert!(matches!(
            build_regressor(&record_from_w(vec![vec![0.0; 5]; 2]), &s),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn noise_free_full_excitation_is_exact() {
        let m = build_case_study::<f64>();
        let s = DirectModelStructure::from_model(&m, 3).unwrap();
        let rec = simulate(&m, &ExcitationSpec::new(1..=20, 2000, 5)).unwrap();
        let est = estimate_direct(&rec, &s, DEFAULT_INFORMATIVITY_THRESHOLD).unwrap();
        assert!(est.informative);
        let a = est.edge_coeffs(4).unwrap();
        assert!((a[0] + 0.3).abs() < 1e-8 && (a[1] - 0.8).abs() < 1e-8, "{a:?}");
        assert!(est.residual_variance < 1e-20);
    }
}
