use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::NoiseNodes;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Local,
}

/// Where the disturbance `v` enters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoiseSite {
    /// Only the target node `j`.
    Target,
    All,
    Nodes(BTreeSet<usize>),
}

/// One excitation experiment repeated `runs` times.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub excited_nodes: BTreeSet<usize>,
    pub method: Method,
    /// `(j, i)`: the module `G_{ji}` from node `i` to node `j`.
    pub target: (usize, usize),
    pub runs: usize,
    pub samples_per_run: usize,
    pub base_seed: u64,
    pub r_variance: f64,
    pub v_variance: f64,
    pub noise: NoiseSite,
}

impl Scenario {
    pub fn noise_nodes(&self) -> NoiseNodes {
        match &self.noise {
            NoiseSite::Target => NoiseNodes::Only([self.target.0].into()),
            NoiseSite::All => NoiseNodes::All,
            NoiseSite::Nodes(set) => NoiseNodes::Only(set.clone()),
        }
    }

    /// Checks every node index against a network of `node_count` nodes.
    pub fn validate(&self, node_count: usize) -> Result<()> {
        let (j, i) = self.target;
        let noise = match &self.noise {
            NoiseSite::Nodes(set) => set.iter().copied().collect(),
            _ => Vec::new(),
        };
        for node in self.excited_nodes.iter().copied().chain([j, i]).chain(noise) {
            if node == 0 || node > node_count {
                return Err(Error::NodeOutOfRange { node, node_count });
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    schema_version: u32,
    #[serde(default)]
    defaults: RawDefaults,
    #[serde(default)]
    scenario: Vec<RawScenario>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    method: Option<Method>,
    target: Option<(usize, usize)>,
    runs: Option<usize>,
    samples: Option<usize>,
    base_seed: Option<u64>,
    r_variance: Option<f64>,
    v_variance: Option<f64>,
    noise: Option<RawNoise>,
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum RawNoise {
    Keyword(String),
    Nodes(Vec<usize>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    excited: Vec<usize>,
    method: Option<Method>,
    target: Option<(usize, usize)>,
    runs: Option<usize>,
    samples: Option<usize>,
    base_seed: Option<u64>,
    r_variance: Option<f64>,
    v_variance: Option<f64>,
    noise: Option<RawNoise>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the `index`-th `[[scenario]]` header, for errors found after parsing.
fn scenario_line(text: &str, index: usize) -> usize {
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("[[scenario]]"))
        .nth(index)
        .map_or(1, |(n, _)| n + 1)
}

/// Parses a scenario file. `origin` only labels error messages.
pub fn parse_scenarios(text: &str, origin: &Path) -> Result<Vec<Scenario>> {
    let fail = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of(text, s.start));
        fail(line, e.message().to_string())
    })?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(fail(1, format!("unsupported schema_version {}, expected {SCHEMA_VERSION}", raw.schema_version)));
    }
    if raw.scenario.is_empty() {
        return Err(fail(1, "no [[scenario]] entries".into()));
    }
    let d = &raw.defaults;
    let mut out: Vec<Scenario> = Vec::with_capacity(raw.scenario.len());
    for (idx, s) in raw.scenario.into_iter().enumerate() {
        let line = scenario_line(text, idx);
        let target = s.target.or(d.target).ok_or_else(|| fail(line, format!("scenario {}: no target", s.id)))?;
        let noise = match s.noise.or_else(|| d.noise.clone()) {
            None => NoiseSite::Target,
            Some(RawNoise::Keyword(k)) if k == "target" => NoiseSite::Target,
            Some(RawNoise::Keyword(k)) if k == "all" => NoiseSite::All,
            Some(RawNoise::Keyword(k)) => {
                return Err(fail(line, format!("scenario {}: noise must be \"target\", \"all\" or a node list, got {k:?}", s.id)))
            }
            Some(RawNoise::Nodes(nodes)) => NoiseSite::Nodes(nodes.into_iter().collect()),
        };
        let scenario = Scenario {
            excited_nodes: s.excited.into_iter().collect(),
            method: s.method.or(d.method).unwrap_or(Method::Direct),
            target,
            runs: s.runs.or(d.runs).unwrap_or(1),
            samples_per_run: s.samples.or(d.samples).unwrap_or(10_000),
            base_seed: s.base_seed.or(d.base_seed).unwrap_or(0),
            r_variance: s.r_variance.or(d.r_variance).unwrap_or(1.0),
            v_variance: s.v_variance.or(d.v_variance).unwrap_or(0.0),
            noise,
            id: s.id,
        };
        if scenario.runs == 0 || scenario.samples_per_run == 0 {
            return Err(fail(line, format!("scenario {}: runs and samples must be at least 1", scenario.id)));
        }
        if !(scenario.r_variance >= 0.0 && scenario.v_variance >= 0.0) {
            return Err(fail(line, format!("scenario {}: variances must be non-negative", scenario.id)));
        }
        let zero_node = scenario.excited_nodes.contains(&0)
            || target.0 == 0
            || target.1 == 0
            || matches!(&scenario.noise, NoiseSite::Nodes(n) if n.contains(&0));
        if zero_node {
            return Err(fail(line, format!("scenario {}: node indices start at 1", scenario.id)));
        }
        if target.0 == target.1 {
            return Err(fail(line, format!("scenario {}: target must join two distinct nodes", scenario.id)));
        }
        if out.iter().any(|o| o.id == scenario.id) {
            return Err(fail(line, format!("duplicate scenario id {}", scenario.id)));
        }
        out.push(scenario);
    }
    Ok(out)
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenarios(&text, path)
}

/// The shipped Table 1 scenarios on the 20-node benchmark network.
pub fn default_scenarios() -> Vec<Scenario> {
    parse_scenarios(DEFAULT_SCENARIOS, Path::new("scenarios.toml")).expect("shipped scenario file parses")
}

pub const DEFAULT_SCENARIOS: &str = include_str!("../../data/scenarios.toml");

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<Scenario>> {
        parse_scenarios(text, Path::new("t.toml"))
    }

    #[test]
    fn shipped_file_matches_the_table() {
        let all = default_scenarios();
        assert_eq!(all.len(), 18);
        assert!(all.iter().all(|s| s.runs == 1000 && s.samples_per_run == 10_000 && s.target == (3, 4)));
        assert_eq!(all[0].excited_nodes, (1..=20).collect());
        assert_eq!(all[1].excited_nodes, [3, 4, 5].into());
        assert_eq!(all[16].excited_nodes, [1, 7].into());
        assert_eq!(all[17].excited_nodes, [1, 16].into());
        for s in &all {
            s.validate(20).unwrap();
        }
    }

    #[test]
    fn empty_and_unknown_keys_are_rejected() {
        assert!(parse("").is_err());
        assert!(parse("schema_version = 1\n").is_err());
        let err = parse("schema_version = 1\n[[scenario]]\nid = \"a\"\nexcited = [1]\ntarget = [2, 1]\nbogus = 3\n").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 6, "{message}");
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn node_indices_are_checked() {
        let zero = parse("schema_version = 1\n[[scenario]]\nid = \"a\"\nexcited = [0]\ntarget = [2, 1]\n");
        assert!(matches!(zero, Err(Error::Parse { line: 2, .. })));
        let s = parse("schema_version = 1\n[[scenario]]\nid = \"a\"\nexcited = [25]\ntarget = [2, 1]\n").unwrap();
        assert!(matches!(s[0].validate(20), Err(Error::NodeOutOfRange { node: 25, .. })));
    }

    #[test]
    fn defaults_apply_and_entries_override() {
        let text = r#"
schema_version = 1
[defaults]
target = [3, 4]
runs = 5
noise = "all"
[[scenario]]
id = "x"
excited = [3, 4]
runs = 2
noise = [1, 2]
[[scenario]]
id = "y"
excited = [3]
"#;
        let s = parse(text).unwrap();
        assert_eq!(s[0].runs, 2);
        assert_eq!(s[0].noise, NoiseSite::Nodes([1, 2].into()));
        assert_eq!(s[1].runs, 5);
        assert_eq!(s[1].noise, NoiseSite::All);
        assert_eq!(s[1].target, (3, 4));
    }
}
