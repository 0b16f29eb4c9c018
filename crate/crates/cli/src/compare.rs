//! `compare`: a text table over completed runs, best total RRE first.

use std::fs;
use std::path::Path;

use crate::run::{summary_path, Summary};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub run: String,
    pub label: String,
    pub rre_total: f64,
    pub iters_at_dp: Option<usize>,
    pub rre_per_frame: Vec<f64>,
    pub ssim_per_frame: Vec<f64>,
}

pub fn load(dir: &Path) -> Result<Summary, CliError> {
    let path = summary_path(dir);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Format(format!("{}: no completed run ({e})", dir.display())))?;
    let summary: Summary =
        serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    for solve in &summary.solves {
        if !dir.join(&solve.history).is_file() {
            return Err(CliError::Format(format!(
                "{}: missing history file {}",
                dir.display(),
                solve.history
            )));
        }
    }
    Ok(summary)
}

/// Rows sorted by total RRE; ties keep the command-line order.
pub fn rows(dirs: &[&Path]) -> Result<Vec<Row>, CliError> {
    if dirs.len() < 2 {
        return Err(CliError::Config("compare needs at least two run directories".into()));
    }
    let mut rows = dirs
        .iter()
        .map(|dir| {
            let s = load(dir)?;
            Ok(Row {
                run: dir.display().to_string(),
                label: format!("{} [{}]", s.method, s.experiment),
                rre_total: s.quality.rre_total,
                iters_at_dp: s.quality.iters_at_dp,
                rre_per_frame: s.quality.rre_per_frame,
                ssim_per_frame: s.quality.ssim_per_frame,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    rows.sort_by(|a, b| a.rre_total.total_cmp(&b.rre_total));
    Ok(rows)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")
}

pub fn render(rows: &[Row]) -> String {
    let mut out = String::from("run\tmethod\tRRE\titers@DP\tRRE per frame\tSSIM per frame\n");
    for r in rows {
        let dp = r.iters_at_dp.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{}\t{}\t{:.4}\t{}\t{}\t{}\n",
            r.run,
            r.label,
            r.rre_total,
            dp,
            join(&r.rre_per_frame),
            join(&r.ssim_per_frame)
        ));
    }
    out
}
