//! Flat CSV view of a report for external plotting.
//!
//! One long-format table with columns `table,name,frame,value`:
//! - `correlations_all` / `correlations_keyframes`: one row per group, empty
//!   `frame`, empty `value` when the coefficient is undefined.
//! - `threshold`: a single row.
//! - `signal`: one row per user frame with the aligned latent distance;
//!   `name` is `flagged` for frames inside a flagged segment, else `aligned`.

use std::io::Write;

use swingdiff_core::{AnalysisReport, CorrelationTable};

pub fn write_csv<W: Write>(report: &AnalysisReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["table", "name", "frame", "value"])?;
    let mut table = |label: &str, t: &CorrelationTable| -> csv::Result<()> {
        for (group, r) in &t.entries {
            let value = r.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([label, group, "", &value])?;
        }
        Ok(())
    };
    table("correlations_all", &report.correlations_all)?;
    table("correlations_keyframes", &report.correlations_keyframes)?;
    w.write_record(["threshold", "threshold", "", &report.threshold.to_string()])?;
    for (i, v) in report.signal().iter().enumerate() {
        let name = if report.discrepancy.contains(i) {
            "flagged"
        } else {
            "aligned"
        };
        w.write_record(["signal", name, &i.to_string(), &v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
