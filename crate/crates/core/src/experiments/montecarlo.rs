use rayon::prelude::*;

use crate::direct::{estimate_direct, DirectModelStructure, DEFAULT_INFORMATIVITY_THRESHOLD};
use crate::error::{Error, Result};
use crate::experiments::pipeline::{run_local_pipeline, LocalConfig};
use crate::experiments::scenario::{Method, Scenario};
use crate::network::{simulate, ExcitationSpec, NetworkModel};

/// Environment variable capping the number of Monte-Carlo worker threads.
pub const WORKERS_ENV: &str = "NETID_WORKERS";

/// Outcome of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    /// Target-module coefficients, one per delay of its band; empty on error.
    pub theta: Vec<f64>,
    pub informative: bool,
    pub error: Option<String>,
}

/// Aggregates of one scenario over its runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario_id: String,
    /// Sorted by `run`.
    pub runs: Vec<RunRecord>,
    pub mean: Vec<f64>,
    /// Sample standard deviation (n - 1 denominator).
    pub std: Vec<f64>,
    pub informative_rate: f64,
    pub failed_runs: usize,
}

impl ScenarioResult {
    pub fn from_runs(scenario_id: String, mut runs: Vec<RunRecord>) -> Self {
        runs.sort_by_key(|r| r.run);
        let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.error.is_none()).collect();
        let p = ok.iter().map(|r| r.theta.len()).max().unwrap_or(0);
        let n = ok.len() as f64;
        let mean: Vec<f64> = (0..p).map(|k| ok.iter().map(|r| r.theta[k]).sum::<f64>() / n).collect();
        let std = (0..p)
            .map(|k| {
                if ok.len() < 2 {
                    return 0.0;
                }
                let ss: f64 = ok.iter().map(|r| (r.theta[k] - mean[k]).powi(2)).sum();
                (ss / (n - 1.0)).sqrt()
            })
            .collect();
        let informative_rate = if runs.is_empty() {
            0.0
        } else {
            runs.iter().filter(|r| r.informative).count() as f64 / runs.len() as f64
        };
        let failed_runs = runs.len() - ok.len();
        Self { scenario_id, runs, mean, std, informative_rate, failed_runs }
    }
}

/// One row per scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ScenarioResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloOptions {
    /// Worker threads; `None` reads [`WORKERS_ENV`], falling back to all cores.
    pub workers: Option<usize>,
    pub informativity_threshold: f64,
    /// Used for `Method::Local` scenarios; samples, seed and variances come
    /// from the scenario.
    pub local: LocalConfig,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self { workers: None, informativity_threshold: DEFAULT_INFORMATIVITY_THRESHOLD, local: LocalConfig::default() }
    }
}

pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn single_run(scenario: &Scenario, model: &NetworkModel<f64>, structure: Option<&DirectModelStructure>, opts: &MonteCarloOptions, run: usize) -> RunRecord {
    let seed = scenario.base_seed.wrapping_add(run as u64);
    let (j, i) = scenario.target;
    let outcome = match scenario.method {
        Method::Direct => {
            let mut spec = ExcitationSpec::new(scenario.excited_nodes.iter().copied(), scenario.samples_per_run, seed)
                .with_noise(scenario.v_variance, scenario.noise_nodes());
            spec.r_variance = scenario.r_variance;
            simulate(model, &spec)
                .map_err(|e| e.in_stage("simulate"))
                .and_then(|rec| {
                    estimate_direct(&rec, structure.expect("direct structure"), opts.informativity_threshold)
                        .map_err(|e| e.in_stage("estimate"))
                })
                .map(|est| (est.edge_coeffs(i).expect("target edge in structure"), est.informative))
        }
        Method::Local => {
            let cfg = LocalConfig {
                samples: scenario.samples_per_run,
                seed,
                r_variance: scenario.r_variance,
                v_variance: scenario.v_variance,
                ..opts.local.clone()
            };
            run_local_pipeline(model, (j, i), &cfg).map(|rep| (rep.estimate.theta_hat, rep.solved.dropped.is_empty()))
        }
    };
    match outcome {
        Ok((theta, informative)) => RunRecord { run, theta, informative, error: None },
        Err(e) => RunRecord { run, theta: Vec::new(), informative: false, error: Some(e.to_string()) },
    }
}

/// Runs `scenario.runs` independent experiments with seeds
/// `base_seed, base_seed + 1, ...` and aggregates the target estimates.
///
/// Per-run estimator failures are recorded in the run, not returned.
pub fn run_monte_carlo(scenario: &Scenario, model: &NetworkModel<f64>, opts: &MonteCarloOptions) -> Result<ScenarioResult> {
    scenario.validate(model.node_count())?;
    let (j, i) = scenario.target;
    if model.edge(j, i).is_none() {
        return Err(Error::EdgeNotInTopology { j, i });
    }
    let structure = match scenario.method {
        Method::Direct => Some(DirectModelStructure::from_model(model, j)?),
        Method::Local => None,
    };
    let job = || -> Vec<RunRecord> {
        (0..scenario.runs)
            .into_par_iter()
            .map(|run| single_run(scenario, model, structure.as_ref(), opts, run))
            .collect()
    };
    let runs = match opts.workers.or_else(workers_from_env) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidExcitation(format!("cannot start {n} workers: {e}")))?
            .install(job),
        None => job(),
    };
    Ok(ScenarioResult::from_runs(scenario.id.clone(), runs))
}

pub fn run_all(scenarios: &[Scenario], model: &NetworkModel<f64>, opts: &MonteCarloOptions) -> Result<ResultTable> {
    let rows = scenarios.iter().map(|s| run_monte_carlo(s, model, opts)).collect::<Result<_>>()?;
    Ok(ResultTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scenario::NoiseSite;
    use crate::network::build_case_study;

    fn scenario(excited: &[usize], runs: usize, v: f64) -> Scenario {
        Scenario {
            id: "t".into(),
            excited_nodes: excited.iter().copied().collect(),
            method: Method::Direct,
            target: (3, 4),
            runs,
            samples_per_run: 500,
            base_seed: 9,
            r_variance: 1.0,
            v_variance: v,
            noise: NoiseSite::Target,
        }
    }

    #[test]
    fn noise_free_single_run_is_exact() {
        let m = build_case_study::<f64>();
        let res = run_monte_carlo(&scenario(&[3, 4, 5], 1, 0.0), &m, &MonteCarloOptions::default()).unwrap();
        assert_eq!(res.runs.len(), 1);
        assert!(res.runs[0].informative);
        assert!((res.mean[0] + 0.3).abs() < 1e-8 && (res.mean[1] - 0.8).abs() < 1e-8);
        assert_eq!(res.std, vec![0.0, 0.0]);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let m = build_case_study::<f64>();
        let s = scenario(&[3, 5], 6, 0.1);
        let one = run_monte_carlo(&s, &m, &MonteCarloOptions { workers: Some(1), ..Default::default() }).unwrap();
        let four = run_monte_carlo(&s, &m, &MonteCarloOptions { workers: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.runs.iter().map(|r| r.run).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn aggregation_skips_failed_runs() {
        let ok = |run, a: f64| RunRecord { run, theta: vec![a, 1.0], informative: true, error: None };
        let bad = RunRecord { run: 1, theta: vec![], informative: false, error: Some("x".into()) };
        let r = ScenarioResult::from_runs("s".into(), vec![ok(2, 3.0), bad, ok(0, 1.0)]);
        assert_eq!(r.runs[0].run, 0);
        assert_eq!(r.mean, vec![2.0, 1.0]);
        assert!((r.std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.failed_runs, 1);
        assert!((r.informative_rate - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_scenario_is_fatal() {
        let m = build_case_study::<f64>();
        assert!(run_monte_carlo(&scenario(&[30], 1, 0.0), &m, &MonteCarloOptions::default()).is_err());
    }
}
