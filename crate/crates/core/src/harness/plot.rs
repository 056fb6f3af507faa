//! Static SVG charts built only from an [`AggregateResult`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{write_file, AggregateResult, CellResult, Mode};
use crate::error::{Error, Result};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 44.0;

fn color(mode: Mode) -> &'static str {
    match mode {
        Mode::Hybrid => "#1f77b4",
        Mode::Standard => "#8c8c8c",
    }
}

fn label(mode: Mode) -> &'static str {
    match mode {
        Mode::Hybrid => "LLM+TS",
        Mode::Standard => "standard TS",
    }
}

struct Frame {
    y_max: f64,
}

impl Frame {
    fn new(y_max: f64) -> Self {
        let y_max = if y_max.is_finite() && y_max > 0.0 { nice_ceiling(y_max) } else { 1.0 };
        Self { y_max }
    }

    fn plot_w(&self) -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_h(&self) -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    fn y(&self, v: f64) -> f64 {
        MARGIN_TOP + self.plot_h() * (1.0 - v / self.y_max)
    }

    fn header(&self, out: &mut String, title: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
        let _ = writeln!(
            out,
            r#"<text transform="translate(14 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + self.plot_h() / 2.0,
            escape(y_label)
        );
        let x0 = MARGIN_LEFT;
        let x1 = MARGIN_LEFT + self.plot_w();
        let y1 = MARGIN_TOP + self.plot_h();
        let _ = writeln!(out, r#"<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
        let _ = writeln!(out, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>"#);
        for i in 0..=4 {
            let v = self.y_max * f64::from(i) / 4.0;
            let y = fmt(self.y(v));
            let _ = writeln!(out, r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>"#, x0 - 4.0);
            let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end" dy="4">{}</text>"#, x0 - 6.0, fmt(v));
        }
    }

    fn legend(&self, out: &mut String, modes: &[Mode]) {
        for (i, &m) in modes.iter().enumerate() {
            let x = MARGIN_LEFT + 8.0 + 110.0 * i as f64;
            let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/>"#, MARGIN_TOP - 4.0, color(m));
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x + 14.0, MARGIN_TOP + 5.0, label(m));
        }
    }
}

/// Rounds up to 1, 2 or 5 times a power of ten.
fn nice_ceiling(v: f64) -> f64 {
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&c| c >= v).unwrap_or(10.0 * mag)
}

fn fmt(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn modes_of(cell: &CellResult) -> Vec<Mode> {
    cell.modes.iter().map(|m| m.mode).collect()
}

pub fn total_reward_svg(cell: &CellResult) -> String {
    let frame = Frame::new(cell.modes.iter().map(|m| m.quartiles.q75).fold(0.0, f64::max));
    let mut out = String::new();
    frame.header(&mut out, &format!("Total reward, {}", cell.cell.slug()), "total reward");
    let slot = frame.plot_w() / cell.modes.len().max(1) as f64;
    for (i, m) in cell.modes.iter().enumerate() {
        let q = m.quartiles;
        let x = MARGIN_LEFT + slot * i as f64 + slot * 0.25;
        let w = slot * 0.5;
        let top = frame.y(q.median);
        let base = frame.y(0.0);
        let cx = x + w / 2.0;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" data-mode="{}" data-median="{}"/>"#,
            fmt(x),
            fmt(top),
            fmt(w),
            fmt(base - top),
            color(m.mode),
            m.mode,
            q.median
        );
        let (y25, y75) = (fmt(frame.y(q.q25)), fmt(frame.y(q.q75)));
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{y25}" x2="{0}" y2="{y75}" stroke="black" data-q25="{1}" data-q75="{2}"/>"#,
            fmt(cx),
            q.q25,
            q.q75
        );
        for y in [&y25, &y75] {
            let _ = writeln!(out, r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#, fmt(cx - 6.0), fmt(cx + 6.0));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, fmt(cx), fmt(base + 16.0), label(m.mode));
    }
    out.push_str("</svg>\n");
    out
}

pub fn action_histogram_svg(cell: &CellResult) -> String {
    let max = cell.modes.iter().flat_map(|m| m.action_counts).max().unwrap_or(0);
    let frame = Frame::new(max as f64);
    let mut out = String::new();
    frame.header(&mut out, &format!("Executed actions, {}", cell.cell.slug()), "count");
    frame.legend(&mut out, &modes_of(cell));
    let group = frame.plot_w() / 4.0;
    let bar = group * 0.8 / cell.modes.len().max(1) as f64;
    let base = frame.y(0.0);
    for action in 0..4 {
        let gx = MARGIN_LEFT + group * action as f64 + group * 0.1;
        for (i, m) in cell.modes.iter().enumerate() {
            let count = m.action_counts[action];
            let top = frame.y(count as f64);
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" data-mode="{}" data-action="{action}" data-count="{count}"/>"#,
                fmt(gx + bar * i as f64),
                fmt(top),
                fmt(bar),
                fmt(base - top),
                color(m.mode),
                m.mode
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">a={action}</text>"#,
            fmt(MARGIN_LEFT + group * (action as f64 + 0.5)),
            fmt(base + 16.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn cumulative_svg(cell: &CellResult) -> String {
    let y_max = cell
        .modes
        .iter()
        .flat_map(|m| m.cumulative.iter().map(|q| q.q75))
        .fold(0.0, f64::max);
    let horizon = cell.modes.iter().map(|m| m.cumulative.len()).max().unwrap_or(0).max(1);
    let frame = Frame::new(y_max);
    let mut out = String::new();
    frame.header(&mut out, &format!("Cumulative reward, {}", cell.cell.slug()), "cumulative reward");
    frame.legend(&mut out, &modes_of(cell));
    let x = |t: usize| MARGIN_LEFT + frame.plot_w() * (t as f64 + 1.0) / horizon as f64;
    for m in &cell.modes {
        if m.cumulative.is_empty() {
            continue;
        }
        let upper = m.cumulative.iter().enumerate().map(|(t, q)| format!("{},{}", fmt(x(t)), fmt(frame.y(q.q75))));
        let lower = m
            .cumulative
            .iter()
            .enumerate()
            .rev()
            .map(|(t, q)| format!("{},{}", fmt(x(t)), fmt(frame.y(q.q25))));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{}" fill-opacity="0.25" stroke="none"/>"#,
            band.join(" "),
            color(m.mode)
        );
        let median: Vec<String> = m
            .cumulative
            .iter()
            .enumerate()
            .map(|(t, q)| format!("{},{}", fmt(x(t)), fmt(frame.y(q.median))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2" data-mode="{}"/>"#,
            median.join(" "),
            color(m.mode),
            m.mode
        );
    }
    let base = frame.y(0.0);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">day</text>"#,
        fmt(MARGIN_LEFT + frame.plot_w() / 2.0),
        fmt(base + 30.0)
    );
    out.push_str("</svg>\n");
    out
}

/// Writes three charts per cell into `<dir>/plots/`. Cells without modes
/// produce nothing.
pub fn emit_plots(result: &AggregateResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let cells: Vec<&CellResult> = result.cells.iter().filter(|c| !c.modes.is_empty()).collect();
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    let mut written = Vec::new();
    for cell in cells {
        let slug = cell.cell.slug();
        for (suffix, svg) in [
            ("total_reward", total_reward_svg(cell)),
            ("actions", action_histogram_svg(cell)),
            ("cumulative", cumulative_svg(cell)),
        ] {
            let path = plots.join(format!("{slug}_{suffix}.svg"));
            write_file(&path, svg.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}
