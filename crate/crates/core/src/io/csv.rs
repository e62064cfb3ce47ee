//! Monitor time series as CSV.

use std::fmt::Write as _;
use std::path::Path;

use crate::verify::MonitorRecord;
use crate::{Error, Result};

pub const MONITOR_HEADER: &str =
    "t,min_S,max_S,min_I,max_I,min_C,max_C,int_S,int_I,int_R,int_C,int_N,l2_U,h1_U,div_res,picard_iters";

/// One header line plus one row per record, floats at 17 significant digits.
pub fn monitor_csv(records: &[MonitorRecord]) -> String {
    let mut out = String::with_capacity(300 * (records.len() + 1));
    out.push_str(MONITOR_HEADER);
    out.push('\n');
    for r in records {
        for v in [
            r.t, r.min_s, r.max_s, r.min_i, r.max_i, r.min_c, r.max_c, r.int_s, r.int_i, r.int_r, r.int_c, r.int_n,
            r.l2_u, r.h1_u, r.div_res,
        ] {
            let _ = write!(out, "{v:.16e},");
        }
        let _ = writeln!(out, "{}", r.picard_iters);
    }
    out
}

pub fn write_monitor_csv(records: &[MonitorRecord], path: &Path) -> Result<()> {
    std::fs::write(path, monitor_csv(records)).map_err(|e| Error::io(path, e))
}

/// Parses the numeric columns back, in header order (`picard_iters` as a float).
pub fn read_monitor_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(MONITOR_HEADER) {
        return Err(Error::Parse(format!("{}: unexpected monitor header", path.display())));
    }
    lines
        .enumerate()
        .map(|(k, l)| {
            l.split(',')
                .map(|w| w.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), k + 1)))
        })
        .collect()
}
