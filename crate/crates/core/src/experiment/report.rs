use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::print_config;
use super::run::{ExperimentReport, FibersReport};
use crate::numfmt::fmt12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Json, Format::Csv, Format::Text];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (json, csv, text)")),
        }
    }
}

/// Anything that renders in the three report formats.
pub trait Report: Serialize {
    fn csv_rows(&self) -> Vec<[String; 4]>;
    fn summary(&self) -> String;
    fn config_header(&self) -> String;
}

fn row(nu: impl ToString, test: &str, value: impl ToString, pass: impl ToString) -> [String; 4] {
    [
        nu.to_string(),
        test.to_string(),
        value.to_string(),
        pass.to_string(),
    ]
}

fn opt(v: Option<u32>) -> String {
    v.map_or("none".to_string(), |v| v.to_string())
}

impl Report for ExperimentReport {
    fn csv_rows(&self) -> Vec<[String; 4]> {
        let mut rows = Vec::new();
        if let Some(imp) = &self.implicitization {
            rows.push(row("", "relation_count", imp.basis.dim(), ""));
            rows.push(row(
                "",
                "holdout_residual",
                fmt12(imp.basis.holdout_residual),
                "",
            ));
        }
        if let Some(p) = &self.proper {
            rows.push(row("", "proper_min_margin", fmt12(p.min_margin), p.pass));
        }
        for a in &self.approximants {
            rows.push(row(a.nu, "sup_distance", fmt12(a.sup_distance), ""));
            if let Some(m) = a.membership_max {
                rows.push(row(a.nu, "membership", fmt12(m), true));
            }
        }
        if let Some(c) = &self.convergence {
            for rec in &c.records {
                rows.push(row(
                    rec.nu,
                    "sup_1l",
                    fmt12(rec.full_1l.sup_1l),
                    rec.full_1l.pass,
                ));
                rows.push(row(
                    rec.nu,
                    "spurious_2l",
                    rec.full_2l.spurious.len(),
                    rec.full_2l.pass,
                ));
                rows.push(row(
                    rec.nu,
                    "sup_1l_pure",
                    fmt12(rec.pure_1l.sup_1l),
                    rec.pure_1l.pass,
                ));
                rows.push(row(
                    rec.nu,
                    "spurious_2l_pure",
                    rec.pure_2l.spurious.len(),
                    rec.pure_2l.pass,
                ));
                if let Some(pass) = rec.degree_pass {
                    let failing = rec.degree_tests.iter().filter(|t| !t.pass).count();
                    rows.push(row(rec.nu, "degree_mismatches", failing, pass));
                }
                rows.push(row(
                    rec.nu,
                    "sheets_pure",
                    rec.sheet_pure.generic_cardinality,
                    rec.sheet_pure.generic_cardinality == c.sheet_x.generic_cardinality,
                ));
                rows.push(row(rec.nu, "removed_roots", rec.removed_roots.len(), ""));
            }
        }
        rows.push(row(
            "",
            "verdict",
            self.failed_stage.as_deref().unwrap_or("none"),
            self.pass,
        ));
        rows
    }

    fn config_header(&self) -> String {
        print_config(&self.config)
    }

    fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.config.name);
        if let Some(imp) = &self.implicitization {
            let b = &imp.basis;
            let _ = writeln!(
                s,
                "implicitization: {} relations of degree <= {} from {} samples, holdout residual {}",
                b.dim(),
                b.degree_bound,
                b.sample_count,
                fmt12(b.holdout_residual)
            );
            for r in &imp.linear_relations {
                let _ = writeln!(s, "  linear: {r}");
            }
        }
        if let Some(r) = self.r {
            let _ = writeln!(s, "ball radius r: {}", fmt12(r));
        }
        if let Some(p) = &self.proper {
            let _ = writeln!(
                s,
                "properness: {} (min margin {})",
                if p.pass { "pass" } else { "fail" },
                fmt12(p.min_margin)
            );
        }
        for a in &self.approximants {
            let _ = writeln!(s, "  nu={} sup|H_nu - H| = {}", a.nu, fmt12(a.sup_distance));
        }
        if let Some(c) = &self.convergence {
            for rec in &c.records {
                let _ = writeln!(
                    s,
                    "  nu={} sup_1l={} spurious={} pure sup_1l={} pure spurious={} degrees={} sheets={} removed={}",
                    rec.nu,
                    fmt12(rec.full_1l.sup_1l),
                    rec.full_2l.spurious.len(),
                    fmt12(rec.pure_1l.sup_1l),
                    rec.pure_2l.spurious.len(),
                    match rec.degree_pass {
                        None => "skipped",
                        Some(true) => "pass",
                        Some(false) => "fail",
                    },
                    rec.sheet_pure.generic_cardinality,
                    rec.removed_roots.len()
                );
            }
            let _ = writeln!(
                s,
                "nu*: 1l={} 2l={} 1l_pure={} 2l_pure={} chain={}; sheets of X: {}",
                opt(c.nu_star_1l),
                opt(c.nu_star_2l),
                opt(c.nu_star_1l_pure),
                opt(c.nu_star_2l_pure),
                opt(c.nu_star_chain),
                c.sheet_x.generic_cardinality
            );
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error in stage {}: {}", e.stage, e.message);
        }
        let _ = writeln!(
            s,
            "verdict: {}{}",
            if self.pass { "pass" } else { "fail" },
            self.failed_stage
                .as_ref()
                .map_or(String::new(), |f| format!(" at {f}"))
        );
        s
    }
}

impl Report for FibersReport {
    fn csv_rows(&self) -> Vec<[String; 4]> {
        let mut rows = Vec::new();
        for p in &self.points {
            let x =
                p.x.iter()
                    .map(|c| format!("{}{:+}i", fmt12(c.re), fmt12(c.im)))
                    .collect::<Vec<_>>()
                    .join(";");
            let persistent = p.persistent.iter().filter(|b| **b).count();
            rows.push(row(
                self.nu,
                &format!("roots@{x}"),
                p.slice.roots.len(),
                persistent == p.slice.roots.len(),
            ));
        }
        rows
    }

    fn config_header(&self) -> String {
        print_config(&self.config)
    }

    fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "fibers of X_nu for nu={} ({} base points)",
            self.nu,
            self.points.len()
        );
        let removed: usize = self
            .points
            .iter()
            .map(|p| p.persistent.iter().filter(|b| !**b).count())
            .sum();
        let _ = writeln!(s, "non-persistent roots: {removed}");
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error in stage {}: {}", e.stage, e.message);
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a report. Output depends only on the report contents.
pub fn emit_report(report: &impl Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("nu,test,value,pass\n");
            for r in report.csv_rows() {
                let _ = writeln!(
                    s,
                    "{}",
                    r.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::from("# config\n");
            s.push_str(&report.config_header());
            s.push_str("\n# results\n");
            s.push_str(&report.summary());
            s
        }
    }
}

/// Writes `<dir>/report.<ext>` for each format and returns the paths.
pub fn write_reports(
    report: &impl Report,
    dir: &Path,
    formats: &[Format],
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    formats
        .iter()
        .map(|&f| {
            let path = dir.join(format!("report.{}", f.extension()));
            std::fs::write(&path, emit_report(report, f))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{demo, run_experiment};

    #[test]
    fn formats() {
        let report = run_experiment(&demo("example12").unwrap()).unwrap();
        let json = emit_report(&report, Format::Json);
        assert!(json.contains("\"nu_star_chain\": 1"));
        let csv = emit_report(&report, Format::Csv);
        assert!(csv.starts_with("nu,test,value,pass\n"));
        assert!(csv.lines().all(|l| l.split(',').count() == 4));
        assert!(csv.contains("16,spurious_2l,1,false\n"));
        let text = emit_report(&report, Format::Text);
        assert!(text.starts_with("# config\n{"));
        assert!(text.contains("\"degree_bound\": 2"));
        assert!(text.ends_with("verdict: pass\n"));
    }

    #[test]
    fn byte_identical_reruns() {
        let cfg = demo("linear-sections-constrained").unwrap();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        for f in Format::ALL {
            assert_eq!(emit_report(&a, f), emit_report(&b, f));
        }
    }

    #[test]
    fn writes_one_file_per_format() {
        let dir = std::env::temp_dir().join(format!("nashlab-report-{}", std::process::id()));
        let report = run_experiment(&demo("twisted-cubic-implicitize").unwrap()).unwrap();
        let paths = write_reports(&report, &dir, &Format::ALL).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths[2].ends_with("report.txt"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
