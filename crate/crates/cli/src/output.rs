//! CSV and plot-script emission.

use std::fs;
use std::path::Path;

use isoflow_core::integrate::TrajectoryLog;

use crate::error::Result;
use crate::matfile::format_full;

/// Writes one trajectory as `t,d_ev,d_off,f` rows, one per sample.
pub fn write_csv(path: &Path, log: &TrajectoryLog) -> Result<()> {
    let mut out = String::from("t,d_ev,d_off,f\n");
    for i in 0..log.times.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_full(log.times[i]),
            format_full(log.d_ev[i]),
            format_full(log.d_off[i]),
            format_full(log.f[i]),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Merged two-flow table with a leading `flow` column.
pub fn write_compare_csv(path: &Path, runs: &[(&str, &TrajectoryLog)]) -> Result<()> {
    let mut out = String::from("flow,t,d_ev,d_off,f\n");
    for (label, log) in runs {
        for i in 0..log.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                label,
                format_full(log.times[i]),
                format_full(log.d_ev[i]),
                format_full(log.d_off[i]),
                format_full(log.f[i]),
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Emits a standalone Python script that plots `d_off` against `t` on a
/// semilog-y axis for each listed CSV. Plotting stays out of process; the
/// harness itself only writes data.
pub fn write_plot_script(path: &Path, title: &str, curves: &[(&str, &str)]) -> Result<()> {
    let mut loads = String::new();
    for (label, csv) in curves {
        loads.push_str(&format!(
            "plot_curve(\"{csv}\", \"{label}\")\n"
        ));
    }
    let script = format!(
        r#"#!/usr/bin/env python3
"""Convergence plot for {title}: semilog-y of d_off against t."""
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def plot_curve(csv_path, label):
    ts, doffs = [], []
    with open(csv_path, newline="") as fh:
        for row in csv.DictReader(fh):
            ts.append(float(row["t"]))
            doffs.append(float(row["d_off"]))
    plt.semilogy(ts, doffs, label=label)


{loads}
plt.xlabel("t")
plt.ylabel("d_off")
plt.title("{title}")
plt.grid(True, which="both", alpha=0.3)
plt.legend()
out = sys.argv[1] if len(sys.argv) > 1 else "d_off.png"
plt.savefig(out, dpi=150, bbox_inches="tight")
print(f"wrote {{out}}")
"#
    );
    fs::write(path, script)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use isoflow_core::SymMatrix;

    #[test]
    fn csv_row_count_matches_log_length() {
        let log = TrajectoryLog {
            times: vec![0.0, 0.5, 1.0],
            d_ev: vec![0.0, 1e-15, 2e-15],
            d_off: vec![1.0, 0.5, 0.25],
            f: vec![3.0, 2.0, 1.0],
            accepted_steps: 2,
            rejected_steps: 0,
            final_state: SymMatrix::identity(2),
            singular_flag_count: 0,
            truncated: false,
            snapshots: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        write_csv(&path, &log).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,d_ev,d_off,f"));
        assert_eq!(lines.count(), log.times.len());
    }
}
