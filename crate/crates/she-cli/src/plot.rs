//! Minimal SVG rendering of a report's series block.
//!
//! No plotting stack in the sandboxed toolchain is worth a dependency for
//! polylines and tick marks, so this writes the SVG by hand: one polyline
//! per series, shared axes, a small legend. Output lands next to the report
//! with an `.svg` extension.

use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

struct Extent {
    min: f64,
    max: f64,
}

impl Extent {
    fn new() -> Self {
        Self { min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    fn add(&mut self, v: f64) {
        if v.is_finite() {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
    }

    fn padded(mut self) -> CliResult<Self> {
        if self.min > self.max {
            return Err(CliError::Config("series contain no finite points".into()));
        }
        if self.min == self.max {
            self.min -= 1.0;
            self.max += 1.0;
        }
        Ok(self)
    }
}

/// Renders the `series` array of a report JSON to `<report stem>.svg`.
pub fn render_report(report_path: &Path) -> CliResult<PathBuf> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", report_path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} is not a report: {e}", report_path.display())))?;
    let title = value["experiment"].as_str().unwrap_or("report").to_string();
    let series = value["series"]
        .as_array()
        .ok_or_else(|| CliError::Config("report has no series block".into()))?;
    if series.is_empty() {
        return Err(CliError::Config("report's series block is empty; nothing to plot".into()));
    }

    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut ex = Extent::new();
    let mut ey = Extent::new();
    for s in series {
        let name = s["name"].as_str().unwrap_or("series").to_string();
        let xs = s["x"].as_array().cloned().unwrap_or_default();
        let ys = s["y"].as_array().cloned().unwrap_or_default();
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ys)
            .filter_map(|(x, y)| Some((x.as_f64()?, y.as_f64()?)))
            .collect();
        for &(x, y) in &pts {
            ex.add(x);
            ey.add(y);
        }
        curves.push((name, pts));
    }
    let ex = ex.padded()?;
    let ey = ey.padded()?;

    let px = |x: f64| MARGIN_L + (x - ex.min) / (ex.max - ex.min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - ey.min) / (ey.max - ey.min) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    ));

    // Axes and ticks.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B
    ));
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = ex.min + f * (ex.max - ex.min);
        let yv = ey.min + f * (ey.max - ey.min);
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n<text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{4}</text>\n",
            px(xv),
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0,
            HEIGHT - MARGIN_B + 20.0,
            fmt_tick(xv)
        ));
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n<text x=\"{3}\" y=\"{4}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{5}</text>\n",
            MARGIN_L - 5.0,
            py(yv),
            MARGIN_L,
            MARGIN_L - 8.0,
            py(yv) + 4.0,
            fmt_tick(yv)
        ));
    }

    for (idx, (name, pts)) in curves.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if !pts.is_empty() {
            let points: Vec<String> =
                pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                points.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            MARGIN_L + 10.0,
            MARGIN_T + 16.0 * (idx as f64 + 1.0)
        ));
    }
    svg.push_str("</svg>\n");

    let out = report_path.with_extension("svg");
    std::fs::write(&out, svg)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polylines_from_a_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demo_report.json");
        std::fs::write(
            &path,
            serde_json::json!({
                "experiment": "demo",
                "series": [
                    {"name": "alpha", "x": [0.0, 1.0, 2.0], "y": [0.0, 1.0, 0.5]},
                    {"name": "beta", "x": [0.0, 1.0, 2.0], "y": [1.0, 0.2, 0.9]}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let svg_path = render_report(&path).unwrap();
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("alpha"));
        assert!(svg.contains("#d62728"));
    }

    #[test]
    fn refuses_reports_without_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty_report.json");
        std::fs::write(&path, serde_json::json!({"experiment": "x", "series": []}).to_string()).unwrap();
        assert!(matches!(render_report(&path), Err(CliError::Config(_))));
    }
}
