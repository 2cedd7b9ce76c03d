use std::fs;
use std::io;
use std::path::Path;

use inviscid_core::harness::SweepResult;
use inviscid_core::{PicardReport, Trajectory};

/// 17 significant digits, locale independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write(dir: &Path, name: &str, header: &str, rows: &[String]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(dir.join(name), text)
}

/// Per-step `L²`, `H¹` and `H²` seminorms and the running energy norm.
pub fn trajectory_rows(traj: &Trajectory) -> Vec<String> {
    let mut sup_ut = 0.0f64;
    let mut sup_grad = 0.0f64;
    traj.grid()
        .nodes()
        .enumerate()
        .map(|(i, t)| {
            let u = &traj.u()[i];
            sup_ut = sup_ut.max(traj.ut()[i].norm_sq());
            sup_grad = sup_grad.max(u.weighted_norm_sq(1));
            format!(
                "{},{},{},{},{}",
                num(t),
                num(u.l2_norm()),
                num(u.weighted_norm_sq(1).sqrt()),
                num(u.weighted_norm_sq(2).sqrt()),
                num((sup_ut + sup_grad).sqrt())
            )
        })
        .collect()
}

pub fn picard_rows(report: &PicardReport) -> Vec<String> {
    report
        .diffs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let ratio = if i == 0 {
                None
            } else {
                report.ratios.get(i - 1).copied()
            };
            format!("{},{},{}", i + 1, num(*d), opt(ratio))
        })
        .collect()
}

pub fn sweep_rows(result: &SweepResult) -> Vec<String> {
    result
        .rows
        .iter()
        .map(|row| {
            let stats = row.outcome.as_ref().ok();
            format!(
                "{},{},{},{},{}",
                num(row.b),
                opt(stats.map(|s| s.e_diff)),
                opt(stats.map(|s| s.x_diff)),
                row.iterations(),
                u8::from(row.is_degenerate())
            )
        })
        .collect()
}

pub fn rate_rows(result: &SweepResult) -> Vec<String> {
    result
        .rates
        .series
        .iter()
        .map(|s| {
            let f = s.fit;
            format!(
                "{},{},{},{}",
                s.norm,
                opt(f.map(|f| f.slope)),
                opt(f.map(|f| f.intercept)),
                opt(f.map(|f| f.r_squared))
            )
        })
        .collect()
}
