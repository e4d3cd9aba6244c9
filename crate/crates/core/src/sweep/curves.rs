//! Long-format CSV for metric curves.
//!
//! ```text
//! # stretchnet curves v1
//! # curve {"label":"polylog-compact","metric":"coverage",...}
//! curve,x,y,err,note
//! polylog-compact,-1.00000000000e1,8.60970000000e-1,1.2e-10,
//! ```
//!
//! Numbers carry twelve significant digits, so a file read back and written
//! again is byte-identical. Gaps have an empty `y` and the reason in `note`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::analytic::{CurveMethod, CurvePoint, Metric, MetricCurve, SirThreshold};
use crate::error::{Error, Result};
use crate::pathloss::NetworkParams;

const MAGIC: &str = "# stretchnet curves v1";
const HEADER: [&str; 5] = ["curve", "x", "y", "err", "note"];

/// Everything about a curve except its points.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveHeader {
    label: String,
    metric: Metric,
    method: CurveMethod,
    abscissa: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<NetworkParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<SirThreshold>,
}

fn num(v: f64) -> String {
    format!("{v:.11e}")
}

fn single_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn write_curves_csv<W: Write>(curves: &[MetricCurve], mut out: W) -> Result<()> {
    let mut seen = HashMap::new();
    for c in curves {
        c.validate()?;
        if seen.insert(c.label.as_str(), ()).is_some() {
            return Err(Error::Validation(format!("duplicate curve label '{}'", c.label)));
        }
    }
    writeln!(out, "{MAGIC}")?;
    for c in curves {
        let header = CurveHeader {
            label: c.label.clone(),
            metric: c.metric,
            method: c.method.clone(),
            abscissa: c.abscissa.clone(),
            params: c.params,
            theta: c.theta,
        };
        writeln!(out, "# curve {}", serde_json::to_string(&header)?)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.label.clone(),
                num(p.x),
                p.y.map(num).unwrap_or_default(),
                p.err.map(num).unwrap_or_default(),
                p.note.as_deref().map(single_line).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_opt(field: &str, what: &str, row: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    let v: f64 = field
        .parse()
        .map_err(|e| Error::Parse(format!("row {row}: bad {what} '{field}': {e}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("row {row}: {what} must be finite")));
    }
    Ok(Some(v))
}

pub fn read_curves_csv<R: BufRead>(input: R) -> Result<Vec<MetricCurve>> {
    let mut text = String::new();
    let mut headers = Vec::new();
    let mut first = true;
    for line in input.lines() {
        let line = line?;
        if first {
            if line.trim_end() != MAGIC {
                return Err(Error::Parse(format!("expected '{MAGIC}' on the first line")));
            }
            first = false;
            continue;
        }
        if let Some(json) = line.strip_prefix("# curve ") {
            let h: CurveHeader =
                serde_json::from_str(json).map_err(|e| Error::Parse(format!("bad curve metadata: {e}")))?;
            headers.push(h);
        } else if !line.starts_with('#') {
            text.push_str(&line);
            text.push('\n');
        }
    }
    if first {
        return Err(Error::Parse("empty curve file".into()));
    }
    let mut curves: Vec<MetricCurve> = Vec::with_capacity(headers.len());
    let mut index = HashMap::new();
    for h in headers {
        if index.insert(h.label.clone(), curves.len()).is_some() {
            return Err(Error::Parse(format!("duplicate curve label '{}'", h.label)));
        }
        curves.push(MetricCurve {
            label: h.label,
            metric: h.metric,
            method: h.method,
            abscissa: h.abscissa,
            points: Vec::new(),
            params: h.params,
            theta: h.theta,
        });
    }
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    if reader.headers()?.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse(format!("expected header '{}'", HEADER.join(","))));
    }
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != HEADER.len() {
            return Err(Error::Parse(format!("row {row}: expected {} fields", HEADER.len())));
        }
        let &k = index
            .get(&record[0])
            .ok_or_else(|| Error::Parse(format!("row {row}: unknown curve '{}'", &record[0])))?;
        let x = parse_opt(&record[1], "x", row)?.ok_or_else(|| Error::Parse(format!("row {row}: missing x")))?;
        let note = (!record[4].is_empty()).then(|| record[4].to_string());
        curves[k].points.push(CurvePoint {
            x,
            y: parse_opt(&record[2], "y", row)?,
            err: parse_opt(&record[3], "err", row)?,
            note,
        });
    }
    for c in &curves {
        c.validate().map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(curves)
}
