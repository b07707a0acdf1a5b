//! CSV renderings of the analysis tables.

use std::io::Write;

use crate::localness::LocalnessDistribution;
use crate::origins::{DerivativeCount, OriginFrequencyTable};

fn finish<W: Write>(w: csv::Writer<W>) -> std::io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

/// Columns: rank, origin_type, signature, edge_count, share. Only the first
/// `limit` rows are written; shares are relative to all edges.
pub fn write_frequency_csv<W: Write>(
    out: W,
    table: &OriginFrequencyTable,
    limit: Option<usize>,
) -> std::io::Result<()> {
    let total = table.total_edges();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "origin_type", "signature", "edge_count", "share"])?;
    for (i, row) in table.top(limit.unwrap_or(usize::MAX)).iter().enumerate() {
        let share = if total == 0 {
            0.0
        } else {
            row.edge_count as f64 / total as f64
        };
        w.write_record([
            (i + 1).to_string(),
            row.origin.origin_type.to_string(),
            row.origin.signature.to_string(),
            row.edge_count.to_string(),
            share.to_string(),
        ])?;
    }
    finish(w)
}

/// Columns: origin_type, signature, derivatives.
pub fn write_derivatives_csv<W: Write>(out: W, counts: &[DerivativeCount]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["origin_type", "signature", "derivatives"])?;
    for c in counts {
        w.write_record([
            c.origin.origin_type.to_string(),
            c.origin.signature.to_string(),
            c.derivatives.to_string(),
        ])?;
    }
    finish(w)
}

/// Columns: origin, level0..level3. Origins without derivatives get empty
/// level cells.
pub fn write_localness_csv<W: Write>(out: W, dist: &LocalnessDistribution) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["origin", "level0", "level1", "level2", "level3"])?;
    for row in &dist.rows {
        let mut record = vec![row.origin.to_string()];
        match row.frequencies {
            Some(f) => record.extend(f.iter().map(|x| x.to_string())),
            None => record.extend(std::iter::repeat_n(String::new(), 4)),
        }
        w.write_record(&record)?;
    }
    finish(w)
}
