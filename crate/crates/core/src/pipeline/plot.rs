//! Static SVG/CSV figures of a report. Presentation only, never read back.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::report::CalibrationReport;
use super::{PipelineError, PipelineKind, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 64.0;

struct Figure<'a> {
    name: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    points: Vec<(f64, f64, f64)>,
    line: Option<(f64, f64)>,
}

/// Writes the figures for `report` into `dir` and returns the files written.
pub fn write_plots(report: &CalibrationReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)
        .map_err(|e| PipelineError::Io(format!("creating {}: {e}", dir.display())))?;
    let fit = Some((report.regression.slope, report.regression.intercept));
    let main = |x_label, y_label| Figure {
        name: "",
        x_label,
        y_label,
        points: report
            .points
            .iter()
            .map(|p| (p.regressor, p.observable, p.observable_sigma))
            .collect(),
        line: fit,
    };
    let mut figures = Vec::new();
    match report.pipeline {
        PipelineKind::QubitStark => {
            figures.push(Figure {
                name: "stark_slope",
                ..main("applied power (W)", "stark shift x kappa^2 (rad^3/s^3)")
            });
            let kappa: Vec<_> = report
                .points
                .iter()
                .filter_map(|p| p.details.get("kappa_rad_s").map(|k| (p.setpoint, *k, 0.0)))
                .collect();
            figures.push(Figure {
                name: "kappa_power",
                x_label: "applied power (W)",
                y_label: "kappa (rad/s)",
                points: kappa,
                line: None,
            });
        }
        PipelineKind::Emia => figures.push(Figure {
            name: "emia_linewidth",
            ..main("drive regressor (rad/s^2)", "effective linewidth (rad/s)")
        }),
        PipelineKind::Gm0Thermal => figures.push(Figure {
            name: "thermal_noise",
            ..main("temperature (K)", "frequency noise / (2pi)^2 (Hz^2)")
        }),
    }

    let mut written = Vec::new();
    for fig in &figures {
        for (ext, body) in [("csv", render_csv(fig)), ("svg", render_svg(fig))] {
            let path = dir.join(format!("{}.{ext}", fig.name));
            std::fs::write(&path, body)
                .map_err(|e| PipelineError::Io(format!("writing {}: {e}", path.display())))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn render_csv(fig: &Figure) -> String {
    let mut s = String::from("x,y,y_sigma\n");
    for (x, y, e) in &fig.points {
        let _ = writeln!(s, "{x:e},{y:e},{e:e}");
    }
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
    (lo - pad, hi + pad)
}

fn render_svg(fig: &Figure) -> String {
    let (x0, x1) = bounds(fig.points.iter().map(|p| p.0));
    let (y0, y1) = bounds(fig.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (v, x, anchor) in [(x0, MARGIN, "start"), (x1, WIDTH - MARGIN, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}">{v:.3e}</text>"#,
            HEIGHT - MARGIN + 16.0
        );
    }
    for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN + 10.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3e}</text>"#, MARGIN - 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        fig.x_label
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        fig.y_label
    );
    if let Some((slope, intercept)) = fig.line {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
            px(x0),
            py(intercept + slope * x0),
            px(x1),
            py(intercept + slope * x1)
        );
    }
    for (x, y, e) in &fig.points {
        if *e > 0.0 {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="steelblue"/>"#,
                px(*x),
                py(y - e),
                py(y + e)
            );
        }
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(*x),
            py(*y)
        );
    }
    s.push_str("</svg>\n");
    s
}
