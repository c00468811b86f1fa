use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::local::{
    estimate_t_entries, fit_parametric, plan_experiment, plan_with, solve_theorem1, solve_theorem2, Band, MethodChoice,
    ModuleEstimate, SolvedEdges, TSubmatrixEstimate, Theorem, DEFAULT_FIR_ORDER, DEFAULT_GRID_POINTS,
};
use crate::network::{simulate, true_t, ExcitationSpec, NetworkModel, NoiseNodes};
use crate::scalar::Real;
use crate::tf::FreqGrid;

/// Settings of one local-method experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalConfig {
    pub samples: usize,
    pub seed: u64,
    pub fir_order: usize,
    pub grid_points: usize,
    pub r_variance: f64,
    /// Disturbance variance on every excited node.
    pub v_variance: f64,
    /// Forces a variant instead of the degree-based choice.
    pub theorem: Option<Theorem>,
    /// Skip simulation and use the exact `T` of the model.
    pub exact_t: bool,
    /// Parametric band of the target; read from the model edge when `None`.
    pub band: Option<Band>,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 1,
            fir_order: DEFAULT_FIR_ORDER,
            grid_points: DEFAULT_GRID_POINTS,
            r_variance: 1.0,
            v_variance: 1e-6,
            theorem: None,
            exact_t: false,
            band: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalReport<T: Real> {
    pub choice: MethodChoice,
    pub t_estimate: TSubmatrixEstimate<T>,
    pub solved: SolvedEdges<T>,
    pub estimate: ModuleEstimate<T>,
}

impl<T: Real> LocalReport<T> {
    pub fn fit_scores(&self) -> &BTreeMap<(usize, usize), T> {
        &self.t_estimate.fit_scores
    }
}

fn target_band<T: Real>(model: &NetworkModel<T>, (j, i): (usize, usize)) -> Result<Band> {
    let g = model.edge(j, i).ok_or(Error::EdgeNotInTopology { j, i })?;
    if !g.is_fir() {
        return Err(Error::InvalidStructure(format!("edge {j} <- {i} is not FIR; give the band explicitly")));
    }
    Ok(Band { delay: g.relative_degree().unwrap_or(0), max_degree: g.num().degree() })
}

/// Plan, simulate, estimate the `T` block, solve, and fit the target module.
///
/// Errors carry the label of the stage that produced them.
pub fn run_local_pipeline<T: Real>(
    model: &NetworkModel<T>,
    target: (usize, usize),
    config: &LocalConfig,
) -> Result<LocalReport<T>> {
    let (j, i) = target;
    let choice = model
        .local_topology(j, i)
        .and_then(|topo| match config.theorem {
            Some(which) => plan_with(&topo, which),
            None => plan_experiment(&topo),
        })
        .map_err(|e| e.in_stage("plan"))?;
    let band = match config.band {
        Some(b) => b,
        None => target_band(model, target).map_err(|e| e.in_stage("plan"))?,
    };
    let grid = FreqGrid::uniform(config.grid_points).map_err(|e| e.in_stage("plan"))?;

    let t_estimate = if config.exact_t {
        let t = true_t(model, &choice.t_rows, &choice.t_cols, &grid).map_err(|e| e.in_stage("estimate"))?;
        TSubmatrixEstimate::from_response(t)
    } else {
        let mut spec = ExcitationSpec::new(choice.excite.iter().copied(), config.samples, config.seed)
            .with_noise(config.v_variance, NoiseNodes::Only(choice.excite.iter().copied().collect()));
        spec.r_variance = config.r_variance;
        let record = simulate(model, &spec).map_err(|e| e.in_stage("simulate"))?;
        estimate_t_entries(&record, &choice.t_rows, &choice.t_cols, config.fir_order, &grid)
            .map_err(|e| e.in_stage("estimate"))?
    };

    let solved = match choice.which {
        Theorem::OutNeighbors => solve_theorem1(&t_estimate, i, &choice.t_rows),
        Theorem::InNeighbors => solve_theorem2(&t_estimate, j, &choice.t_cols),
    }
    .map_err(|e| e.in_stage("solve"))?;

    let samples = solved.response(j, i).expect("target edge is among the solved edges");
    let estimate = fit_parametric(target, &solved.omegas, samples, band).map_err(|e| e.in_stage("fit"))?;
    Ok(LocalReport { choice, t_estimate, solved, estimate })
}
