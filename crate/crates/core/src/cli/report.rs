//! Long-format plot data and static SVG charts from a report directory.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};

/// Report CSVs turned into panels: (file stem, x label, y label).
pub const PANELS: [(&str, &str, &str); 5] = [
    ("rcl", "round", "relative cumulative loss"),
    ("queries", "round", "cumulative queries"),
    ("cumulative_loss", "round", "cumulative loss"),
    ("regret", "round", "regret vs best policy"),
    ("sweep", "budget", "final cumulative loss"),
];

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

#[derive(Debug, Clone, PartialEq)]
struct Series {
    learner: String,
    x: Vec<f64>,
    mean: Vec<f64>,
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_field(path: &Path, line: usize, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| parse_err(path, line, format!("`{s}` is not a number")))
}

/// Reads a `x, <name>_mean[, <name>_lo, <name>_hi]...` table.
fn read_panel(path: &Path) -> Result<Vec<Series>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(path, 1, e.to_string()))?;
    let header = reader.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let mut series: Vec<Series> = Vec::new();
    // column -> (series index, 0 mean / 1 lo / 2 hi)
    let mut slots = Vec::new();
    for col in header.iter().skip(1) {
        let (name, kind) = col
            .rsplit_once('_')
            .ok_or_else(|| parse_err(path, 1, format!("column `{col}` has no _mean/_lo/_hi suffix")))?;
        let kind = match kind {
            "mean" => 0,
            "lo" => 1,
            "hi" => 2,
            _ => return Err(parse_err(path, 1, format!("column `{col}` has no _mean/_lo/_hi suffix"))),
        };
        let idx = match series.iter().position(|s| s.learner == name) {
            Some(i) => i,
            None => {
                series.push(Series {
                    learner: name.to_string(),
                    x: Vec::new(),
                    mean: Vec::new(),
                    lo: None,
                    hi: None,
                });
                series.len() - 1
            }
        };
        match kind {
            1 => series[idx].lo = Some(Vec::new()),
            2 => series[idx].hi = Some(Vec::new()),
            _ => {}
        }
        slots.push((idx, kind));
    }
    if series.is_empty() {
        return Err(parse_err(path, 1, "no learner columns"));
    }
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_err(path, line, e.to_string()))?;
        let x = parse_field(path, line, row.get(0).unwrap_or(""))?
            .ok_or_else(|| parse_err(path, line, "missing x value"))?;
        for s in series.iter_mut() {
            s.x.push(x);
        }
        for (&(idx, kind), field) in slots.iter().zip(row.iter().skip(1)) {
            let v = parse_field(path, line, field)?;
            let s = &mut series[idx];
            match kind {
                0 => s.mean.push(v.ok_or_else(|| parse_err(path, line, "missing mean"))?),
                1 => s.lo.as_mut().expect("declared").push(v.unwrap_or(f64::NAN)),
                _ => s.hi.as_mut().expect("declared").push(v.unwrap_or(f64::NAN)),
            }
        }
    }
    Ok(series)
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn draw_panel(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<()> {
    let finite = |v: &f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.x.iter().copied()).filter(finite);
    let ys = series.iter().flat_map(|s| {
        s.mean
            .iter()
            .chain(s.lo.iter().flatten())
            .chain(s.hi.iter().flatten())
            .copied()
    });
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (y0, y1) = ys
        .filter(finite)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !(x0.is_finite() && y0.is_finite()) {
        return Ok(());
    }
    let pad = ((y1 - y0) * 0.05).max(1e-9);
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };

    let draw_err = |e: String| Error::Internal(format!("{}: {e}", path.display()));
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw_err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))
        .map_err(|e| draw_err(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(|e| draw_err(e.to_string()))?;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points = |v: &[f64]| -> Vec<(f64, f64)> {
            s.x.iter().copied().zip(v.iter().copied()).filter(|(_, y)| y.is_finite()).collect()
        };
        for band in [&s.lo, &s.hi].into_iter().flatten() {
            chart
                .draw_series(LineSeries::new(points(band), color.mix(0.35)))
                .map_err(|e| draw_err(e.to_string()))?;
        }
        chart
            .draw_series(LineSeries::new(points(&s.mean), color.stroke_width(2)))
            .map_err(|e| draw_err(e.to_string()))?
            .label(s.learner.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(|e| draw_err(e.to_string()))?;
    root.present().map_err(|e| draw_err(e.to_string()))
}

/// Reads every panel CSV present in `input` and writes `plot_data.csv`
/// (columns `panel, learner, x, mean, lo, hi`) plus, with `svg`, one chart
/// per panel into `out`. Returns the files written.
pub fn write_plot_data(input: &Path, out: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let mut panels = Vec::new();
    for (stem, x_label, y_label) in PANELS {
        let path = input.join(format!("{stem}.csv"));
        if path.is_file() {
            panels.push((stem, x_label, y_label, read_panel(&path)?));
        }
    }
    if panels.is_empty() {
        return Err(Error::Config(format!(
            "input: {} contains no report CSVs ({})",
            input.display(),
            PANELS.map(|p| p.0).join(", ")
        )));
    }

    let data_path = out.join("plot_data.csv");
    let io_err = |e: csv::Error| Error::Internal(format!("{}: {e}", data_path.display()));
    let mut w = csv::Writer::from_path(&data_path).map_err(io_err)?;
    w.write_record(["panel", "learner", "x", "mean", "lo", "hi"]).map_err(io_err)?;
    for (stem, _, _, series) in &panels {
        for s in series {
            for (t, &x) in s.x.iter().enumerate() {
                let band = |b: &Option<Vec<f64>>| b.as_ref().map(|v| fmt(v[t])).unwrap_or_default();
                w.write_record([stem.to_string(), s.learner.clone(), fmt(x), fmt(s.mean[t]), band(&s.lo), band(&s.hi)])
                    .map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&data_path, e))?;

    let mut written = vec![data_path.clone()];
    if svg {
        for (stem, x_label, y_label, series) in &panels {
            let path = out.join(format!("{stem}.svg"));
            draw_panel(&path, &stem.replace('_', " "), x_label, y_label, series)?;
            written.push(path);
        }
    }
    Ok(written)
}
