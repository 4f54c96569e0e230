//! Minimal SVG line charts, no plotting dependency.
//!
//! Two kinds: `loss` plots the cumulative realized loss of a trace CSV
//! against the round index; `ratio` plots the counterexample scan CSV
//! (ratio against λ_q0).

use anyhow::{bail, Context, Result};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 60.0;

pub fn render_csv(input: &Path, kind: &str, output: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let (points, x_label, y_label, title) = match kind {
        "loss" => (
            cumulative_loss_points(&text)?,
            "round t",
            "cumulative realized loss",
            "cumulative loss",
        ),
        "ratio" => (
            ratio_points(&text)?,
            "lambda_q0",
            "integral ratio",
            "tail-integral ratio vs lambda_q0",
        ),
        other => bail!("render kind must be `loss` or `ratio`, got `{other}`"),
    };
    if points.len() < 2 {
        bail!("need at least two data points, got {}", points.len());
    }
    let svg = polyline_svg(&points, x_label, y_label, title);
    std::fs::write(output, svg).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn parse_header(text: &str) -> Result<(Vec<&str>, std::str::Lines<'_>)> {
    let mut lines = text.lines();
    let header = lines.next().context("empty CSV")?;
    Ok((header.trim().split(',').collect(), lines))
}

fn cumulative_loss_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let (cols, lines) = parse_header(text)?;
    let t_col = cols.iter().position(|c| *c == "t").context("no `t` column")?;
    let loss_col = cols
        .iter()
        .position(|c| *c == "round_loss")
        .context("no `round_loss` column")?;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let t: f64 = fields[t_col].parse().context("bad t value")?;
        let l: f64 = fields[loss_col].parse().context("bad round_loss value")?;
        acc += l;
        out.push((t, acc));
    }
    Ok(out)
}

fn ratio_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let (cols, lines) = parse_header(text)?;
    let x_col = cols
        .iter()
        .position(|c| *c == "lambda_q0")
        .context("no `lambda_q0` column")?;
    let y_col = cols.iter().position(|c| *c == "ratio").context("no `ratio` column")?;
    let mut out = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        out.push((
            fields[x_col].parse().context("bad lambda_q0 value")?,
            fields[y_col].parse().context("bad ratio value")?,
        ));
    }
    Ok(out)
}

fn polyline_svg(points: &[(f64, f64)], x_label: &str, y_label: &str, title: &str) -> String {
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let pad = 0.04 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut path = String::new();
    for (k, &(x, y)) in points.iter().enumerate() {
        let _ = write!(path, "{}{:.2},{:.2} ", if k == 0 { "" } else { "" }, sx(x), sy(y));
    }

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="24" font-family="monospace" font-size="16" text-anchor="middle">{title}</text>
"#,
        WIDTH / 2.0
    );
    // axes
    let _ = write!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>
<line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>
"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    );
    // ticks: min/max labels on both axes
    let _ = write!(
        svg,
        r#"<text x="{m}" y="{by}" font-family="monospace" font-size="12" text-anchor="middle">{x0:.3}</text>
<text x="{r}" y="{by}" font-family="monospace" font-size="12" text-anchor="middle">{x1:.3}</text>
<text x="{lx}" y="{b}" font-family="monospace" font-size="12" text-anchor="end">{y0:.3}</text>
<text x="{lx}" y="{ty}" font-family="monospace" font-size="12" text-anchor="end">{y1:.3}</text>
<text x="{cx}" y="{xl}" font-family="monospace" font-size="14" text-anchor="middle">{x_label}</text>
<text x="16" y="{cy}" font-family="monospace" font-size="14" text-anchor="middle" transform="rotate(-90 16 {cy})">{y_label}</text>
"#,
        m = MARGIN,
        r = WIDTH - MARGIN,
        by = HEIGHT - MARGIN + 20.0,
        lx = MARGIN - 8.0,
        b = HEIGHT - MARGIN + 4.0,
        ty = MARGIN + 4.0,
        cx = WIDTH / 2.0,
        xl = HEIGHT - 16.0,
        cy = HEIGHT / 2.0,
        x0 = x_min,
        x1 = x_max,
        y0 = y_min + pad,
        y1 = y_max - pad,
    );
    let _ = write!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f6fb2" stroke-width="1.6"/>
</svg>
"##,
        path.trim_end()
    );
    svg
}
