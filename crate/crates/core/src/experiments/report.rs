use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::montecarlo::{ResultTable, RunRecord, ScenarioResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

pub const CSV_FILE: &str = "results.csv";

fn param_count(table: &ResultTable) -> usize {
    table.rows.iter().flat_map(|r| &r.runs).map(|r| r.theta.len()).max().unwrap_or(0)
}

/// Raw per-run estimates as CSV: `scenario_id, run, a1..ap, informative, error`.
///
/// Floats use the shortest representation that parses back to the same
/// value, so reading the file reproduces the table exactly.
pub fn write_csv<W: std::io::Write>(table: &ResultTable, out: W) -> Result<()> {
    let p = param_count(table);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scenario_id".to_string(), "run".to_string()];
    header.extend((1..=p).map(|k| format!("a{k}")));
    header.extend(["informative".to_string(), "error".to_string()]);
    w.write_record(&header)?;
    for row in &table.rows {
        for run in &row.runs {
            let mut rec = vec![row.scenario_id.clone(), run.run.to_string()];
            rec.extend((0..p).map(|k| run.theta.get(k).map_or_else(String::new, |x| x.to_string())));
            rec.push(run.informative.to_string());
            rec.push(run.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn csv_string(table: &ResultTable) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Parses CSV written by [`write_csv`]; scenarios keep their first-seen order.
pub fn read_csv<R: std::io::Read>(input: R, origin: &Path) -> Result<ResultTable> {
    let fail = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let n = header.len();
    if n < 4 || &header[0] != "scenario_id" || &header[1] != "run" || &header[n - 2] != "informative" || &header[n - 1] != "error" {
        return Err(fail(1, "unexpected header".into()));
    }
    let p = n - 4;
    let mut groups: Vec<(String, Vec<RunRecord>)> = Vec::new();
    for (idx, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = idx + 2;
        let run = rec[1].parse().map_err(|_| fail(line, format!("bad run index {:?}", &rec[1])))?;
        let mut theta = Vec::with_capacity(p);
        for k in 0..p {
            let field = &rec[2 + k];
            if !field.is_empty() {
                theta.push(field.parse::<f64>().map_err(|_| fail(line, format!("bad value {field:?}")))?);
            }
        }
        let informative = rec[n - 2].parse().map_err(|_| fail(line, format!("bad flag {:?}", &rec[n - 2])))?;
        let error = Some(rec[n - 1].to_string()).filter(|s| !s.is_empty());
        let record = RunRecord { run, theta, informative, error };
        match groups.iter_mut().find(|(id, _)| id == &rec[0]) {
            Some((_, runs)) => runs.push(record),
            None => groups.push((rec[0].to_string(), vec![record])),
        }
    }
    Ok(ResultTable { rows: groups.into_iter().map(|(id, runs)| ScenarioResult::from_runs(id, runs)).collect() })
}

fn nice_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    (lo - pad, hi + pad)
}

/// Scatter of the first two parameters of every successful run, axes fitted
/// to the data. `truth` draws a cross at the true parameters.
pub fn scatter_svg(row: &ScenarioResult, truth: Option<(f64, f64)>) -> String {
    const W: f64 = 480.0;
    const H: f64 = 400.0;
    const M: f64 = 56.0;
    let pts: Vec<(f64, f64)> = row
        .runs
        .iter()
        .filter(|r| r.error.is_none() && r.theta.len() >= 2)
        .map(|r| (r.theta[0], r.theta[1]))
        .collect();
    let extra: Vec<(f64, f64)> = truth.into_iter().collect();
    let (x0, x1) = nice_range(pts.iter().chain(&extra).map(|p| p.0));
    let (y0, y1) = nice_range(pts.iter().chain(&extra).map(|p| p.1));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">scenario {}: {} runs</text>"#, W / 2.0, xml_escape(&row.scenario_id), pts.len());
    let _ = writeln!(s, r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * M, H - 2.0 * M);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#, sx(xv), H - M + 14.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#, M - 4.0, sy(yv) + 3.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">a1</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {})">a2</text>"#, H / 2.0, H / 2.0);
    for (x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="steelblue" fill-opacity="0.6"/>"#, sx(*x), sy(*y));
    }
    if let Some((tx, ty)) = truth {
        let (cx, cy) = (sx(tx), sy(ty));
        let _ = writeln!(s, r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="crimson" stroke-width="2"/>"#, cx - 6.0, cy - 6.0, cx + 6.0, cy + 6.0, cx - 6.0, cy + 6.0, cx + 6.0, cy - 6.0);
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn file_safe(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes `results.csv` or one `scatter_<id>.svg` per scenario into `dir`.
pub fn emit_results(table: &ResultTable, format: OutputFormat, dir: &Path, truth: Option<(f64, f64)>) -> Result<Vec<PathBuf>> {
    if table.rows.is_empty() {
        return Err(Error::InvalidExcitation("empty result table".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match format {
        OutputFormat::Csv => {
            let path = dir.join(CSV_FILE);
            std::fs::write(&path, csv_string(table)).map_err(|e| Error::io(&path, e))?;
            Ok(vec![path])
        }
        OutputFormat::Svg => table
            .rows
            .iter()
            .map(|row| {
                let path = dir.join(format!("scatter_{}.svg", file_safe(&row.scenario_id)));
                std::fs::write(&path, scatter_svg(row, truth)).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let runs = vec![
            RunRecord { run: 0, theta: vec![-0.30012345678901234, 0.8], informative: true, error: None },
            RunRecord { run: 1, theta: vec![], informative: false, error: Some("simulate: diverged, at \"x\"".into()) },
        ];
        let other = vec![RunRecord { run: 0, theta: vec![1e-300, -7.5e12], informative: false, error: None }];
        ResultTable { rows: vec![ScenarioResult::from_runs("1".into(), runs), ScenarioResult::from_runs("b,2".into(), other)] }
    }

    #[test]
    fn csv_round_trip() {
        let t = table();
        let text = csv_string(&t);
        assert!(text.starts_with("scenario_id,run,a1,a2,informative,error\n"));
        let back = read_csv(text.as_bytes(), Path::new("r.csv")).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn one_row_gives_header_and_one_line() {
        let t = ResultTable {
            rows: vec![ScenarioResult::from_runs("1".into(), vec![RunRecord { run: 0, theta: vec![-0.3, 0.8], informative: true, error: None }])],
        };
        assert_eq!(csv_string(&t).lines().count(), 2);
    }

    #[test]
    fn svg_has_a_point_per_run() {
        let svg = scatter_svg(&table().rows[0], Some((-0.3, 0.8)));
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn emits_files() {
        let dir = tempfile::tempdir().unwrap();
        let csv = emit_results(&table(), OutputFormat::Csv, dir.path(), None).unwrap();
        assert_eq!(csv, vec![dir.path().join("results.csv")]);
        let svg = emit_results(&table(), OutputFormat::Svg, dir.path(), None).unwrap();
        assert_eq!(svg.len(), 2);
        assert!(svg[1].ends_with("scatter_b_2.svg"));
        assert!(emit_results(&ResultTable::default(), OutputFormat::Csv, dir.path(), None).is_err());
    }
}
