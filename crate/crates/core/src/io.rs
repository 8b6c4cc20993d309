//! CSV formats for samples, densities and MCMC traces.
//!
//! Sample files look like
//!
//! ```text
//! # manifold: {"kind":"hyperboloid","dim":2,"scale":1.0}
//! x0,x1,x2
//! 1.2000000000000000e-01,...
//! ```
//!
//! Numbers are written with 17 significant digits so they round-trip exactly.

use crate::dist::ManifoldSpec;
use crate::error::{Error, Result};
use crate::lsnm::Trace;
use crate::manifold::{ManifoldId, Point};

const MANIFOLD_TAG: &str = "# manifold:";

/// 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header row and numeric rows.
pub fn write_table(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn coord_header(m: ManifoldId) -> Vec<String> {
    (0..m.ambient_dim()).map(|i| format!("x{i}")).collect()
}

pub fn write_samples(manifold: ManifoldId, points: &[Point]) -> String {
    let spec = serde_json::to_string(&ManifoldSpec::from(manifold)).expect("manifold serialises");
    let rows: Vec<Vec<f64>> = points.iter().map(Point::to_vec).collect();
    format!("{MANIFOLD_TAG} {spec}\n{}", write_table(&coord_header(manifold), &rows))
}

/// Manifold named in a `# manifold:` comment line, if any.
pub fn manifold_from_header(text: &str) -> Result<Option<ManifoldId>> {
    for line in text.lines() {
        if let Some(rest) = line.trim().strip_prefix(MANIFOLD_TAG) {
            let spec: ManifoldSpec =
                serde_json::from_str(rest.trim()).map_err(|e| Error::Parse(format!("manifold comment: {e}")))?;
            return spec.to_manifold().map(Some);
        }
    }
    Ok(None)
}

/// Reads numeric rows, skipping `#` comments and a non-numeric header row.
pub fn read_table(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // header row
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("row {}: non-numeric value in {record:?}", i + 1))),
        }
    }
    Ok(rows)
}

/// Points from a sample file. The manifold comes from the `# manifold:`
/// comment unless one is given; if both are present they must agree.
pub fn read_samples(text: &str, manifold: Option<ManifoldId>) -> Result<(ManifoldId, Vec<Point>)> {
    let declared = manifold_from_header(text)?;
    let m = match (manifold, declared) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Parse(format!("file declares {b:?} but {a:?} was expected")));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::Parse("no manifold given and no '# manifold:' comment".into())),
    };
    let rows = read_table(text)?;
    let points = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != m.ambient_dim() {
                return Err(Error::Parse(format!("row {}: {} columns, expected {}", i + 1, row.len(), m.ambient_dim())));
            }
            Point::new(m, row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((m, points))
}

pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::from("iteration,log_posterior,alpha,accept_rate_pos,accept_rate_alpha\n");
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration,
            format_f64(r.log_posterior),
            format_f64(r.alpha),
            format_f64(r.accept_rate_pos),
            format_f64(r.accept_rate_alpha)
        ));
    }
    out
}
