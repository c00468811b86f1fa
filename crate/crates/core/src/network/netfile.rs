//! Plain-text network files.
//!
//! ```text
//! # comment
//! nodes 20
//! # j i num den   (comma-separated coefficients, ascending powers of q^-1)
//! 3 4 0,-0.3,0.8 1
//! 11 10 0,2.4710993e-1 1,-5.0578013e-1
//! ```
//!
//! Coefficients are written in shortest round-trip form, so
//! `parse(write(m)) == m` holds exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::model::NetworkModel;
use crate::scalar::Real;
use crate::tf::RationalTf;

pub fn parse_network<T: Real>(text: &str, origin: &Path) -> Result<NetworkModel<T>> {
    let err = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
    let mut node_count = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "nodes" {
            if node_count.is_some() {
                return Err(err(line_no, "duplicate `nodes` header".into()));
            }
            if fields.len() != 2 {
                return Err(err(line_no, "expected `nodes <L>`".into()));
            }
            let l = fields[1].parse::<usize>().map_err(|e| err(line_no, format!("bad node count: {e}")))?;
            node_count = Some(l);
            continue;
        }
        let l = node_count.ok_or_else(|| err(line_no, "edge record before `nodes` header".into()))?;
        if fields.len() != 4 {
            return Err(err(line_no, format!("expected `j i num den`, found {} fields", fields.len())));
        }
        let node = |s: &str| -> Result<usize> {
            let k = s.parse::<usize>().map_err(|e| err(line_no, format!("bad node index `{s}`: {e}")))?;
            if k == 0 || k > l {
                return Err(err(line_no, format!("node index {k} out of range 1..={l}")));
            }
            Ok(k)
        };
        let coeffs = |s: &str| -> Result<Vec<T>> {
            s.split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map(T::lit)
                        .map_err(|e| err(line_no, format!("bad coefficient `{c}`: {e}")))
                })
                .collect()
        };
        let (j, i) = (node(fields[0])?, node(fields[1])?);
        let g = RationalTf::from_coeffs(&coeffs(fields[2])?, &coeffs(fields[3])?)
            .map_err(|e| err(line_no, e.to_string()))?;
        edges.push(((j, i), g));
    }
    let l = node_count.ok_or_else(|| err(0, "missing `nodes` header".into()))?;
    NetworkModel::new(l, edges).map_err(|e| err(0, e.to_string()))
}

pub fn write_network<T: Real>(model: &NetworkModel<T>) -> String {
    let mut out = String::new();
    out.push_str("# netid network file\n");
    let _ = writeln!(out, "nodes {}", model.node_count());
    out.push_str("# j i num den\n");
    let list = |c: &[T]| c.iter().map(|x| format!("{:e}", x.to_f64_lossy())).collect::<Vec<_>>().join(",");
    for ((j, i), g) in model.edges() {
        let _ = writeln!(out, "{j} {i} {} {}", list(g.num().coeffs()), list(g.den().coeffs()));
    }
    out
}

pub fn load_network<T: Real>(path: impl AsRef<Path>) -> Result<NetworkModel<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text, path)
}

pub fn save_network<T: Real>(model: &NetworkModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_network(model)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<NetworkModel<f64>> {
        parse_network(text, Path::new("test.net"))
    }

    #[test]
    fn parses_comments_and_rationals() {
        let m = parse("# demo\nnodes 3\n3 2 0,-0.3,0.8 1  # target\n2 1 0,2.5e-1 1,-0.5\n").unwrap();
        assert_eq!(m.edge(3, 2).unwrap().num().coeffs(), &[0.0, -0.3, 0.8]);
        assert_eq!(m.edge(2, 1).unwrap().den().coeffs(), &[1.0, -0.5]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("nodes 2\n\n2 5 1 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse("nodes 2\n2 1 1,x 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(parse("2 1 1 1\n").is_err());
        assert!(parse("").is_err());
        assert!(parse("nodes 2\n2 1 1 0,1\n").is_err());
    }

    #[test]
    fn case_study_round_trips_exactly() {
        let m = crate::network::build_case_study::<f64>();
        let back = parse(&write_network(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn shipped_file_matches_builder() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/case_study_20.net");
        let m: NetworkModel<f64> = load_network(path).unwrap();
        assert_eq!(m, crate::network::build_case_study());
    }
}
