//! Self-contained SVG density heat maps (no plotting dependency).
//!
//! One rectangle per grid cell over a dark background: rows are time slices
//! (t increasing downward), columns are spatial points. Each panel is
//! normalized by its own maximum; cells below `1e-3` of that maximum are
//! skipped and show the background. Masked (singular) cells are drawn in a
//! distinct blue regardless of value.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use curved_dirac::flat::GridSpec;
use curved_dirac::MaskedDensity;

use crate::CliError;

const PLOT_W: f64 = 820.0;
const PLOT_H: f64 = 460.0;
const MARGIN_L: f64 = 58.0;
const MARGIN_R: f64 = 22.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 46.0;
const BACKGROUND: &str = "#0b0b12";
const MASK_COLOR: &str = "#2f6bff";
const SKIP_BELOW: f64 = 1e-3;

/// Piecewise-linear dark-to-bright colormap (black, violet, ember, amber,
/// white).
fn colormap(v: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.00, [11.0, 11.0, 18.0]),
        (0.25, [92.0, 24.0, 118.0]),
        (0.55, [214.0, 73.0, 42.0]),
        (0.80, [250.0, 196.0, 80.0]),
        (1.00, [255.0, 255.0, 255.0]),
    ];
    let v = v.clamp(0.0, 1.0);
    let mut rgb = STOPS[STOPS.len() - 1].1;
    for w in STOPS.windows(2) {
        let (a, ca) = w[0];
        let (b, cb) = w[1];
        if v <= b {
            let s = if b > a { (v - a) / (b - a) } else { 0.0 };
            rgb = [
                ca[0] + s * (cb[0] - ca[0]),
                ca[1] + s * (cb[1] - ca[1]),
                ca[2] + s * (cb[2] - ca[2]),
            ];
            break;
        }
    }
    format!(
        "#{:02x}{:02x}{:02x}",
        rgb[0].round() as u8,
        rgb[1].round() as u8,
        rgb[2].round() as u8
    )
}

/// Renders a heat map of `rows[i].values[j]` over the (t, x) window; `rows`
/// must have one entry per element of `times`.
pub fn density_heatmap(
    path: &Path,
    title: &str,
    grid: &GridSpec,
    times: &[f64],
    rows: &[MaskedDensity],
) -> Result<(), CliError> {
    if rows.is_empty() || rows.len() != times.len() {
        return Err(CliError::Runtime(format!(
            "heat map needs one density row per time slice (got {} rows, {} times)",
            rows.len(),
            times.len()
        )));
    }
    let ncols = grid.n();
    let nrows = rows.len();
    let peak = rows
        .iter()
        .flat_map(|r| {
            r.values
                .iter()
                .zip(&r.mask)
                .filter_map(|(&v, &m)| (!m).then_some(v))
        })
        .fold(0.0f64, f64::max);

    let width = MARGIN_L + PLOT_W + MARGIN_R;
    let height = MARGIN_T + PLOT_H + MARGIN_B;
    let cw = PLOT_W / ncols as f64;
    let ch = PLOT_H / nrows as f64;

    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">"
    )?;
    writeln!(w, "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>")?;
    writeln!(
        w,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         fill=\"{BACKGROUND}\"/>"
    )?;
    writeln!(
        w,
        "<text x=\"{:.1}\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>",
        MARGIN_L + PLOT_W / 2.0,
        xml_escape(title)
    )?;

    for (i, row) in rows.iter().enumerate() {
        let y = MARGIN_T + i as f64 * ch;
        for j in 0..ncols {
            let x = MARGIN_L + j as f64 * cw;
            let fill = if row.mask[j] {
                MASK_COLOR.to_string()
            } else if peak > 0.0 && row.values[j] / peak >= SKIP_BELOW {
                colormap(row.values[j] / peak)
            } else {
                continue;
            };
            writeln!(
                w,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                cw.max(0.75),
                ch.max(0.75),
            )?;
        }
    }

    // axis annotations
    let label = |w: &mut BufWriter<File>, x: f64, y: f64, anchor: &str, text: String| {
        writeln!(
            w,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"{anchor}\">{text}</text>"
        )
    };
    label(&mut w, MARGIN_L, height - 16.0, "start", format!("x = {}", grid.x_min()))?;
    label(&mut w, MARGIN_L + PLOT_W, height - 16.0, "end", format!("x = {}", grid.x_max()))?;
    label(&mut w, MARGIN_L - 8.0, MARGIN_T + 12.0, "end", format!("t = {}", times[0]))?;
    label(
        &mut w,
        MARGIN_L - 8.0,
        MARGIN_T + PLOT_H,
        "end",
        format!("t = {}", times[nrows - 1]),
    )?;
    writeln!(w, "</svg>")?;
    w.flush()?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
