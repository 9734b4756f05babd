//! Result tables and plot-ready series.

use super::metrics::MetricsRow;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse_tag(s: &str) -> Option<ReportFormat> {
        match s {
            "csv" => Some(ReportFormat::Csv),
            "json" => Some(ReportFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed table field {field}: {detail}")]
    Malformed { field: &'static str, detail: String },
}

const HEADERS: [&str; 13] = [
    "instance",
    "s_best",
    "s_ave",
    "t_m_s",
    "n_m",
    "used_warehouses",
    "ub",
    "pct_s_ub",
    "s_sa_best",
    "pct_s_sa",
    "s_wi_best",
    "pct_s_wi",
    "pct_r_sd",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn row_record(row: &MetricsRow) -> Vec<String> {
    vec![
        row.instance.clone(),
        row.s_best.to_string(),
        row.s_ave.to_string(),
        row.t_m_seconds.to_string(),
        row.n_multi_allocation.to_string(),
        row.used_warehouses
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(","),
        opt(row.ub),
        opt(row.pct_s_ub),
        opt(row.s_sa_best),
        opt(row.pct_s_sa),
        opt(row.s_wi_best),
        opt(row.pct_s_wi),
        row.pct_r_sd.to_string(),
    ]
}

/// Serialize rows to `results.csv`/`results.json` plus the two plot series:
/// capacity class versus the no-transfer gap, and instance size versus the
/// time of the best run. Returns the paths written.
pub fn emit_report(
    rows: &[MetricsRow],
    format: ReportFormat,
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let results_path = match format {
        ReportFormat::Csv => {
            let path = out_dir.join("results.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(HEADERS)?;
            for row in rows {
                w.write_record(row_record(row))?;
            }
            w.flush()?;
            path
        }
        ReportFormat::Json => {
            let path = out_dir.join("results.json");
            let mut text = serde_json::to_string_pretty(rows)?;
            text.push('\n');
            std::fs::write(&path, text)?;
            path
        }
    };
    written.push(results_path);

    // Capacity-class series: rows named W-F-C-<class> grouped by family.
    let mut swi = csv::Writer::from_path(out_dir.join("swi_by_capacity.csv"))?;
    swi.write_record(["family", "capacity_class", "pct_s_wi"])?;
    for class in ["C", "M", "S", "L"] {
        for row in rows {
            if let Some((family, suffix)) = row.instance.rsplit_once('-') {
                if suffix == class {
                    if let Some(gap) = row.pct_s_wi {
                        swi.write_record([family, class, &gap.to_string()])?;
                    }
                }
            }
        }
    }
    swi.flush()?;
    written.push(out_dir.join("swi_by_capacity.csv"));

    // Size series: non-warehouse node count parsed from W-F-C-<class> names.
    let mut times = csv::Writer::from_path(out_dir.join("time_by_size.csv"))?;
    times.write_record(["instance", "non_warehouse_nodes", "t_m_s"])?;
    for row in rows {
        let parts: Vec<&str> = row.instance.split('-').collect();
        if parts.len() == 4 {
            if let (Ok(f), Ok(c)) = (parts[1].parse::<usize>(), parts[2].parse::<usize>()) {
                times.write_record([
                    row.instance.as_str(),
                    &(f + c).to_string(),
                    &row.t_m_seconds.to_string(),
                ])?;
            }
        }
    }
    times.flush()?;
    written.push(out_dir.join("time_by_size.csv"));

    Ok(written)
}

fn parse_opt(field: &'static str, s: &str) -> Result<Option<f64>, ReportError> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse()
            .map(Some)
            .map_err(|e| ReportError::Malformed { field, detail: format!("{e}: {s}") })
    }
}

fn parse_req(field: &'static str, s: &str) -> Result<f64, ReportError> {
    s.parse()
        .map_err(|e| ReportError::Malformed { field, detail: format!("{e}: {s}") })
}

/// Parse a `results.csv` written by [`emit_report`] back into rows.
pub fn parse_report(path: &Path) -> Result<Vec<MetricsRow>, ReportError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        let used = if r[5].is_empty() {
            Vec::new()
        } else {
            r[5].split(',')
                .map(|t| {
                    t.parse().map_err(|e| ReportError::Malformed {
                        field: "used_warehouses",
                        detail: format!("{e}: {t}"),
                    })
                })
                .collect::<Result<Vec<usize>, _>>()?
        };
        rows.push(MetricsRow {
            instance: r[0].to_string(),
            s_best: parse_req("s_best", &r[1])?,
            s_ave: parse_req("s_ave", &r[2])?,
            t_m_seconds: parse_req("t_m_s", &r[3])?,
            n_multi_allocation: r[4].parse().map_err(|e| ReportError::Malformed {
                field: "n_m",
                detail: format!("{e}: {}", &r[4]),
            })?,
            used_warehouses: used,
            ub: parse_opt("ub", &r[6])?,
            pct_s_ub: parse_opt("pct_s_ub", &r[7])?,
            s_sa_best: parse_opt("s_sa_best", &r[8])?,
            pct_s_sa: parse_opt("pct_s_sa", &r[9])?,
            s_wi_best: parse_opt("s_wi_best", &r[10])?,
            pct_s_wi: parse_opt("pct_s_wi", &r[11])?,
            pct_r_sd: parse_req("pct_r_sd", &r[12])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(name: &str, swi: Option<f64>) -> MetricsRow {
        MetricsRow {
            instance: name.to_string(),
            s_best: 23597.16,
            s_ave: 23600.421,
            t_m_seconds: 52.96,
            n_multi_allocation: 2,
            used_warehouses: vec![0, 2, 3],
            ub: Some(23597.16),
            pct_s_ub: Some(0.0),
            s_sa_best: Some(23867.31),
            pct_s_sa: Some(1.131889),
            s_wi_best: Some(30031.14),
            pct_s_wi: swi,
            pct_r_sd: 0.013,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            sample_row("5-5-5-C", Some(21.424)),
            MetricsRow {
                ub: None,
                pct_s_ub: None,
                s_sa_best: None,
                pct_s_sa: None,
                ..sample_row("5-5-5-M", Some(0.1 + 0.2))
            },
        ];
        emit_report(&rows, ReportFormat::Csv, dir.path()).unwrap();
        let back = parse_report(&dir.path().join("results.csv")).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_rows_emit_header_only() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[], ReportFormat::Csv, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("instance,"));
    }

    #[test]
    fn capacity_series_is_in_class_order() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            sample_row("7-5-10-S", Some(9.78)),
            sample_row("7-5-10-C", Some(22.58)),
            sample_row("7-5-10-M", Some(14.16)),
        ];
        emit_report(&rows, ReportFormat::Csv, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("swi_by_capacity.csv")).unwrap();
        let classes: Vec<&str> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(classes, vec!["C", "M", "S"]);
    }
}
