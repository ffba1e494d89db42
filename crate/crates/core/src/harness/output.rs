use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::run::{run_scenario, MetricsRow, ScenarioReport, TraceRecord};
use crate::error::{Error, Result};
use crate::orchestrator::PolicyKind;

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_FILE: &str = "trace.ndjson";
/// Column order of `metrics.csv`.
pub const METRICS_HEADER: [&str; 9] = [
    "scenario_point",
    "policy",
    "acceptance_mean",
    "acceptance_std",
    "energy_mean",
    "energy_std",
    "latency_mean",
    "latency_std",
    "oracle_ratio",
];
/// Version tag of trace files.
pub const TRACE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Acceptance,
    Energy,
    Latency,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Acceptance, Metric::Energy, Metric::Latency];

    pub fn file_name(self) -> &'static str {
        match self {
            Metric::Acceptance => "acceptance.svg",
            Metric::Energy => "energy.svg",
            Metric::Latency => "latency.svg",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Acceptance => "accepted requests (%)",
            Metric::Energy => "energy per request (J)",
            Metric::Latency => "E2E latency (ms)",
        }
    }

    /// (mean, std) of a row.
    pub fn of(self, row: &MetricsRow) -> (f64, f64) {
        match self {
            Metric::Acceptance => (row.acceptance_mean, row.acceptance_std),
            Metric::Energy => (row.energy_mean, row.energy_std),
            Metric::Latency => (row.latency_mean, row.latency_std),
        }
    }
}

/// Files written by [`emit_outputs`].
#[derive(Clone, Debug, PartialEq)]
pub struct OutputFiles {
    pub metrics: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    rows: &'a [MetricsRow],
    episodes: &'a [super::run::EpisodeSummary],
}

fn io_at(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

pub fn write_metrics_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_at(path))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(METRICS_HEADER).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.flush().map_err(io_at(path))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        })
        .collect()
}

const PALETTE: [RGBColor; 4] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
];

fn policy_color(policy: PolicyKind) -> RGBColor {
    match policy {
        PolicyKind::Perfect => PALETTE[0],
        PolicyKind::Random => PALETTE[1],
        PolicyKind::OracleReplay => PALETTE[2],
    }
}

/// One line per policy over the sweep, with a shaded ±1 std band.
pub fn plot_metric(rows: &[MetricsRow], metric: Metric, x_label: &str, path: &Path) -> Result<()> {
    let draw_err = |e: Box<dyn std::error::Error>| Error::Serialize(format!("plot {}: {e}", path.display()));
    let xs: Vec<f64> = rows.iter().map(|r| r.scenario_point).collect();
    let (mut x0, mut x1) = (
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    if x0 == x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let lows = rows.iter().map(|r| metric.of(r)).map(|(m, s)| m - s);
    let highs = rows.iter().map(|r| metric.of(r)).map(|(m, s)| m + s);
    let mut y0 = lows.fold(f64::INFINITY, f64::min).min(0.0);
    let mut y1 = highs.fold(f64::NEG_INFINITY, f64::max);
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= if y0 < 0.0 { pad } else { 0.0 };
    y1 += pad;

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw_err(Box::new(e)))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(metric.label(), ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| draw_err(Box::new(e)))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(metric.label())
        .draw()
        .map_err(|e| draw_err(Box::new(e)))?;

    let mut policies: Vec<PolicyKind> = rows.iter().map(|r| r.policy).collect();
    policies.sort();
    policies.dedup();
    for policy in policies {
        let color = policy_color(policy);
        let series: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| {
                let (m, s) = metric.of(r);
                (r.scenario_point, m, s)
            })
            .collect();
        let mut band: Vec<(f64, f64)> = series.iter().map(|&(x, m, s)| (x, m + s)).collect();
        band.extend(series.iter().rev().map(|&(x, m, s)| (x, m - s)));
        chart
            .draw_series(std::iter::once(Polygon::new(band, color.mix(0.2).filled())))
            .map_err(|e| draw_err(Box::new(e)))?;
        chart
            .draw_series(LineSeries::new(
                series.iter().map(|&(x, m, _)| (x, m)),
                color.stroke_width(2),
            ))
            .map_err(|e| draw_err(Box::new(e)))?
            .label(policy.name())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart
            .draw_series(series.iter().map(|&(x, m, _)| Circle::new((x, m), 3, color.filled())))
            .map_err(|e| draw_err(Box::new(e)))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| draw_err(Box::new(e)))?;
    root.present().map_err(|e| draw_err(Box::new(e)))?;
    Ok(())
}

/// Writes `metrics.csv`, `summary.json` and one plot per metric into `dir`.
pub fn emit_outputs(report: &ScenarioReport, x_label: &str, dir: &Path) -> Result<OutputFiles> {
    if report.rows.is_empty() {
        return Err(Error::Argument("no metrics rows to write".into()));
    }
    std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    let metrics = dir.join(METRICS_FILE);
    write_metrics_csv(&report.rows, &metrics)?;

    let summary = dir.join(SUMMARY_FILE);
    let doc = Summary {
        scenario: report.scenario.name(),
        rows: &report.rows,
        episodes: &report.episodes,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(&summary, text).map_err(io_at(&summary))?;

    let mut plots = Vec::new();
    for metric in Metric::ALL {
        let path = dir.join(metric.file_name());
        plot_metric(&report.rows, metric, x_label, &path)?;
        plots.push(path);
    }
    Ok(OutputFiles { metrics, summary, plots })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub version: u32,
    pub config: RunConfig,
}

/// Header line with the run configuration, then one line per frame record.
pub fn write_run_trace(config: &RunConfig, records: &[TraceRecord], path: &Path) -> Result<()> {
    let ser = |e: serde_json::Error| Error::Serialize(e.to_string());
    let file = File::create(path).map_err(io_at(path))?;
    let mut w = BufWriter::new(file);
    let header = TraceHeader {
        version: TRACE_VERSION,
        config: config.clone(),
    };
    writeln!(w, "{}", serde_json::to_string(&header).map_err(ser)?).map_err(io_at(path))?;
    for r in records {
        writeln!(w, "{}", serde_json::to_string(r).map_err(ser)?).map_err(io_at(path))?;
    }
    w.flush().map_err(io_at(path))
}

pub fn read_run_trace(path: &Path) -> Result<(TraceHeader, Vec<TraceRecord>)> {
    let file = File::open(path).map_err(io_at(path))?;
    let parse = |line: usize, e: serde_json::Error| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {e}"),
    };
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            message: "empty trace".into(),
        })?
        .map_err(io_at(path))?;
    let header: TraceHeader = serde_json::from_str(&first).map_err(|e| parse(1, e))?;
    if header.version != TRACE_VERSION {
        return Err(Error::Config(format!("trace version {}", header.version)));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_at(path))?;
        if !line.trim().is_empty() {
            records.push(serde_json::from_str(&line).map_err(|e| parse(i + 2, e))?);
        }
    }
    Ok((header, records))
}

/// Runs a configuration and writes its outputs, plus the trace when the
/// configuration asks for one.
pub fn run_and_emit(config: &RunConfig, dir: &Path) -> Result<(ScenarioReport, OutputFiles)> {
    let report = run_scenario(config)?;
    let files = emit_outputs(&report, config.scenario.axis(), dir)?;
    if config.trace {
        write_run_trace(config, &report.trace, &dir.join(TRACE_FILE))?;
    }
    Ok((report, files))
}

/// Re-runs the configuration recorded in a trace, checks every frame
/// against the recording and writes the outputs into `dir`.
pub fn replay(trace: &Path, dir: &Path) -> Result<(ScenarioReport, OutputFiles)> {
    let (header, recorded) = read_run_trace(trace)?;
    let config = RunConfig {
        trace: true,
        ..header.config
    };
    let report = run_scenario(&config)?;
    if report.trace.len() != recorded.len() {
        return Err(Error::Structural(format!(
            "replay produced {} frame records, the trace holds {}",
            report.trace.len(),
            recorded.len()
        )));
    }
    if let Some(i) = (0..recorded.len()).find(|&i| report.trace[i] != recorded[i]) {
        let r = &recorded[i];
        return Err(Error::Structural(format!(
            "replay diverged at point {} policy {} seed {} frame {}",
            r.point, r.policy, r.seed, r.outcome.frame
        )));
    }
    let files = emit_outputs(&report, config.scenario.axis(), dir)?;
    Ok((report, files))
}
