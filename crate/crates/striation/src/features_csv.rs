//! Feature table: `source_id,interval_index,label,kind,v0,...`.

use std::io::Write;
use std::path::Path;

use striation_core::{FeatureKind, FeatureVector, Label};

use crate::error::{Error, Result};
use crate::output::write_atomic;

pub fn write_features(w: &mut dyn Write, rows: &[FeatureVector]) -> std::io::Result<()> {
    let d = rows.iter().map(|r| r.dim()).max().unwrap_or(0);
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    let mut header: Vec<String> = ["source_id", "interval_index", "label", "kind"].map(String::from).to_vec();
    header.extend((0..d).map(|i| format!("v{i}")));
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.source_id.clone(),
            r.interval_index.to_string(),
            r.label.map(|l| l.to_string()).unwrap_or_default(),
            r.kind.to_string(),
        ];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush()
}

pub fn save_features(path: &Path, rows: &[FeatureVector]) -> Result<()> {
    write_atomic(path, |w| write_features(w, rows))
}

pub fn load_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |msg: String| Error::Format { path: path.to_path_buf(), line, msg };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() < 4 {
            return Err(bad(format!("expected at least 4 fields, got {}", rec.len())));
        }
        let interval_index = rec[1].parse().map_err(|_| bad(format!("bad interval_index {:?}", &rec[1])))?;
        let label = match &rec[2] {
            "" => None,
            s => Some(s.parse::<Label>().map_err(|e| bad(e.to_string()))?),
        };
        let kind: FeatureKind = rec[3].parse().map_err(|e: striation_core::Error| bad(e.to_string()))?;
        let values = rec
            .iter()
            .skip(4)
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad value {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureVector { kind, values, label, source_id: rec[0].to_string(), interval_index });
    }
    Ok(rows)
}
