use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::network::model::NetworkModel;
use crate::scalar::Real;

/// Which nodes receive the disturbance `v`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseNodes {
    All,
    Only(BTreeSet<usize>),
}

/// External signals of one experiment.
///
/// Excited nodes get zero-mean white Gaussian `r` with variance `r_variance`;
/// nodes selected by `noise_nodes` get white Gaussian `v` with `v_variance`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSpec {
    pub excited_nodes: BTreeSet<usize>,
    pub r_variance: f64,
    pub v_variance: f64,
    pub noise_nodes: NoiseNodes,
    pub samples: usize,
    pub seed: u64,
}

impl ExcitationSpec {
    pub fn new(excited_nodes: impl IntoIterator<Item = usize>, samples: usize, seed: u64) -> Self {
        Self {
            excited_nodes: excited_nodes.into_iter().collect(),
            r_variance: 1.0,
            v_variance: 0.0,
            noise_nodes: NoiseNodes::All,
            samples,
            seed,
        }
    }

    pub fn with_noise(mut self, v_variance: f64, noise_nodes: NoiseNodes) -> Self {
        self.v_variance = v_variance;
        self.noise_nodes = noise_nodes;
        self
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        let nodes = self.excited_nodes.iter().chain(match &self.noise_nodes {
            NoiseNodes::All => None,
            NoiseNodes::Only(set) => Some(set.iter()),
        }.into_iter().flatten());
        for &node in nodes {
            if node == 0 || node > node_count {
                return Err(Error::NodeOutOfRange { node, node_count });
            }
        }
        if !(self.r_variance >= 0.0 && self.v_variance >= 0.0) {
            return Err(Error::InvalidExcitation("variances must be non-negative".into()));
        }
        Ok(())
    }

    fn is_noisy(&self, node: usize) -> bool {
        self.v_variance > 0.0
            && match &self.noise_nodes {
                NoiseNodes::All => true,
                NoiseNodes::Only(set) => set.contains(&node),
            }
    }
}

/// Node outputs `w`, excitations `r` and disturbances `v`, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord<T: Real> {
    pub w: Vec<Vec<T>>,
    pub r: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub excited_nodes: BTreeSet<usize>,
    pub seed: u64,
}

impl<T: Real> SignalRecord<T> {
    pub fn node_count(&self) -> usize {
        self.w.len()
    }

    pub fn samples(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }

    /// Output of node `k` (1-based).
    pub fn w(&self, k: usize) -> &[T] {
        &self.w[k - 1]
    }

    pub fn r(&self, k: usize) -> &[T] {
        &self.r[k - 1]
    }

    pub fn v(&self, k: usize) -> &[T] {
        &self.v[k - 1]
    }

    pub fn is_excited(&self, k: usize) -> bool {
        self.excited_nodes.contains(&k)
    }
}

/// Seeds the per-signal Gaussian stream.
///
/// Every `(node, kind)` pair owns its own ChaCha8 stream under the shared
/// seed, so `r_k` does not change when another node's excitation is toggled.
fn gaussian_series<T: Real>(seed: u64, stream: u64, std_dev: f64, n: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            T::lit(std_dev * x)
        })
        .collect()
}

/// Generates the external signals of `spec` and simulates the network.
pub fn simulate<T: Real>(model: &NetworkModel<T>, spec: &ExcitationSpec) -> Result<SignalRecord<T>> {
    let l = model.node_count();
    spec.validate(l)?;
    let n = spec.samples;
    let r_sd = spec.r_variance.sqrt();
    let v_sd = spec.v_variance.sqrt();
    let r: Vec<Vec<T>> = (1..=l)
        .map(|k| {
            if spec.excited_nodes.contains(&k) && spec.r_variance > 0.0 {
                gaussian_series(spec.seed, 2 * k as u64, r_sd, n)
            } else {
                vec![T::zero(); n]
            }
        })
        .collect();
    let v: Vec<Vec<T>> = (1..=l)
        .map(|k| {
            if spec.is_noisy(k) {
                gaussian_series(spec.seed, 2 * k as u64 + 1, v_sd, n)
            } else {
                vec![T::zero(); n]
            }
        })
        .collect();
    let w = simulate_signals(model, &r, &v)?;
    Ok(SignalRecord { w, r, v, excited_nodes: spec.excited_nodes.clone(), seed: spec.seed })
}

struct EdgeFilter<T: Real> {
    to: usize,
    from: usize,
    num: Vec<T>,
    den: Vec<T>,
    out: Vec<T>,
}

/// Runs `w = G w + r + v` from zero initial conditions for given external
/// signals (`r[k]` and `v[k]` are the series of node `k + 1`).
///
/// Each edge is a difference equation with its own output history. The
/// feedthrough coupling is resolved per sample with the precomputed
/// `(I - D0)^{-1}`.
pub fn simulate_signals<T: Real>(model: &NetworkModel<T>, r: &[Vec<T>], v: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let l = model.node_count();
    if r.len() != l || v.len() != l {
        return Err(Error::InvalidExcitation(format!("expected {l} signal rows")));
    }
    let n = r.first().map_or(0, Vec::len);
    if r.iter().chain(v).any(|s| s.len() != n) {
        return Err(Error::InvalidExcitation("signal rows differ in length".into()));
    }

    let mut edges: Vec<EdgeFilter<T>> = model
        .edges()
        .map(|((j, i), g)| EdgeFilter {
            to: j - 1,
            from: i - 1,
            num: g.num().coeffs().to_vec(),
            den: g.den().coeffs().to_vec(),
            out: vec![T::zero(); n],
        })
        .collect();
    let coupled = model.feedthrough_matrix().iter().any(|x| *x != T::zero());
    let solve: DMatrix<T> = model.feedthrough_solve_matrix();

    let mut w = vec![vec![T::zero(); n]; l];
    let mut rhs = vec![T::zero(); l];
    let mut past = vec![T::zero(); edges.len()];
    for t in 0..n {
        for k in 0..l {
            rhs[k] = r[k][t] + v[k][t];
        }
        for (e, edge) in edges.iter().enumerate() {
            let mut acc = T::zero();
            let src = &w[edge.from];
            for k in 1..edge.num.len().min(t + 1) {
                acc += edge.num[k] * src[t - k];
            }
            for k in 1..edge.den.len().min(t + 1) {
                acc -= edge.den[k] * edge.out[t - k];
            }
            past[e] = acc;
            rhs[edge.to] += acc;
        }
        if coupled {
            for row in 0..l {
                let mut acc = T::zero();
                for col in 0..l {
                    acc += solve[(row, col)] * rhs[col];
                }
                w[row][t] = acc;
            }
        } else {
            for row in 0..l {
                w[row][t] = rhs[row];
            }
        }
        for (e, edge) in edges.iter_mut().enumerate() {
            edge.out[t] = edge.num[0] * w[edge.from][t] + past[e];
        }
        if let Some(row) = (0..l).find(|&row| !w[row][t].is_finite()) {
            return Err(Error::SimulationDiverged { node: row + 1, sample: t });
        }
    }
    Ok(w)
}
