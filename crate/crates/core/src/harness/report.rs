use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::svg::{bar_chart, line_chart, Series};
use super::{OverlapRow, SweepPoint, TransferCell};
use crate::classifier::CvReport;
use crate::error::{Error, Result};

/// Any experiment's output rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum Results {
    Cv(Vec<CvReport>),
    Transfer(Vec<TransferCell>),
    Sweep(Vec<SweepPoint>),
    Overlap(Vec<OverlapRow>),
}

impl Results {
    pub fn len(&self) -> usize {
        match self {
            Results::Cv(r) => r.len(),
            Results::Transfer(r) => r.len(),
            Results::Sweep(r) => r.len(),
            Results::Overlap(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Results::Cv(_) => "cv",
            Results::Transfer(_) => "transfer",
            Results::Sweep(_) => "sweep",
            Results::Overlap(_) => "overlap",
        }
    }

    /// Chart styles that make sense for these results.
    pub fn figure_formats(&self) -> &'static [ReportFormat] {
        match self {
            Results::Sweep(_) => &[ReportFormat::SvgLine],
            _ => &[ReportFormat::SvgBar],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    SvgBar,
    SvgLine,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg_bar" | "svg-bar" => Ok(ReportFormat::SvgBar),
            "svg_line" | "svg-line" => Ok(ReportFormat::SvgLine),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::SvgBar | ReportFormat::SvgLine => "svg",
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(results: &Results) -> String {
    let mut out = String::new();
    match results {
        Results::Transfer(cells) => {
            out.push_str("train,test,strategy,f1,n_train,n_test\n");
            for c in cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6},{},{}",
                    csv_field(&c.train_source),
                    csv_field(&c.test_target),
                    csv_field(&c.strategy),
                    c.macro_f1,
                    c.n_train,
                    c.n_test
                );
            }
        }
        Results::Cv(reports) => {
            out.push_str("strategy,fold,macro_f1,std\n");
            for r in reports {
                let name = csv_field(&r.strategy);
                for (f, v) in r.per_fold_macro_f1.iter().enumerate() {
                    let _ = writeln!(out, "{name},{f},{v:.6},");
                }
                let _ = writeln!(out, "{name},mean,{:.6},{:.6}", r.mean, r.std);
            }
        }
        Results::Sweep(points) => {
            out.push_str("rate,strategy,regime,f1,seed,n_train\n");
            for p in points {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6},{},{}",
                    p.sampling_rate,
                    csv_field(&p.strategy),
                    p.regime.as_str(),
                    p.macro_f1,
                    p.seed,
                    p.n_train
                );
            }
        }
        Results::Overlap(rows) => {
            out.push_str("train_lang,test_lang,overlap\n");
            for r in rows {
                let _ = writeln!(out, "{},{},{:.6}", csv_field(&r.train_lang), csv_field(&r.test_lang), r.overlap);
            }
        }
    }
    out
}

/// Distinct values in first-seen order.
fn distinct<'a>(values: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in values {
        if !out.iter().any(|o| o == v) {
            out.push(v.to_string());
        }
    }
    out
}

/// Pivots `(category, series, value)` triples into bar-chart series.
fn pivot(triples: &[(String, String, f64)]) -> (Vec<String>, Vec<Series>) {
    let categories = distinct(triples.iter().map(|t| t.0.as_str()));
    let labels = distinct(triples.iter().map(|t| t.1.as_str()));
    let series = labels
        .into_iter()
        .map(|label| {
            let values = categories
                .iter()
                .map(|c| triples.iter().find(|t| &t.0 == c && t.1 == label).map_or(0.0, |t| t.2))
                .collect();
            Series { label, values }
        })
        .collect();
    (categories, series)
}

fn render_bar(results: &Results) -> String {
    let (title, triples): (&str, Vec<(String, String, f64)>) = match results {
        Results::Transfer(cells) => (
            "macro-F1 by test target (series: training source)",
            cells.iter().map(|c| (c.test_target.clone(), format!("{} / {}", c.train_source, c.strategy), c.macro_f1)).collect(),
        ),
        Results::Cv(reports) => (
            "cross-validated macro-F1 by strategy",
            reports.iter().map(|r| (r.strategy.clone(), "mean".to_string(), r.mean)).collect(),
        ),
        Results::Sweep(points) => (
            "macro-F1 by sampling rate",
            points
                .iter()
                .map(|p| (p.sampling_rate.to_string(), format!("{} / {}", p.strategy, p.regime.as_str()), p.macro_f1))
                .collect(),
        ),
        Results::Overlap(rows) => (
            "top-k feature overlap (series: training language)",
            rows.iter().map(|r| (r.test_lang.clone(), r.train_lang.clone(), r.overlap)).collect(),
        ),
    };
    let (categories, series) = pivot(&triples);
    bar_chart(title, &categories, &series)
}

fn render_line(results: &Results) -> Result<String> {
    let Results::Sweep(points) = results else {
        return Err(Error::InvalidArgument(format!("svg_line needs sweep results, got {}", results.kind())));
    };
    let mut xs: Vec<f64> = Vec::new();
    for p in points {
        if !xs.contains(&p.sampling_rate) {
            xs.push(p.sampling_rate);
        }
    }
    xs.sort_by(f64::total_cmp);
    let labels = distinct(points.iter().map(|p| p.strategy.as_str()));
    let mut series = Vec::new();
    for regime in [super::Regime::Native, super::Regime::EnglishTransfer] {
        for label in &labels {
            let values: Vec<f64> = xs
                .iter()
                .filter_map(|x| {
                    points
                        .iter()
                        .find(|p| p.sampling_rate == *x && &p.strategy == label && p.regime == regime)
                        .map(|p| p.macro_f1)
                })
                .collect();
            if values.len() == xs.len() {
                series.push(Series { label: format!("{label} / {}", regime.as_str()), values });
            }
        }
    }
    Ok(line_chart("macro-F1 vs. training sampling rate", &xs, &series))
}

/// Renders `results` in `format` as a string.
pub fn render_report(results: &Results, format: ReportFormat) -> Result<String> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("nothing to report".into()));
    }
    match format {
        ReportFormat::Csv => Ok(render_csv(results)),
        ReportFormat::Json => Ok(serde_json::to_string_pretty(results)? + "\n"),
        ReportFormat::SvgBar => Ok(render_bar(results)),
        ReportFormat::SvgLine => render_line(results),
    }
}

pub fn emit_report(results: &Results, format: ReportFormat, path: &Path) -> Result<()> {
    let text = render_report(results, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
