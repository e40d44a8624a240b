//! The built-in six-panel figure: Gaussian packets launched from three
//! starting positions, each rendered on the flat background and on the
//! wormhole background.
//!
//! Window: x in [-60, 60] on 256 points, t in [0, 40] sampled every 0.5
//! (81 frames), sigma = 5. Panels (a, c, e) are flat and (b, d, f) are the
//! wormhole images for x0 = -10, 1, 5 respectively. Each panel writes a CSV
//! of its frames and an SVG heat map of the curved density (which equals the
//! flat density on the flat panels), plus one `summary.json` with the window,
//! normalization, and distortion metrics.

use std::path::Path;

use serde_json::json;

use curved_dirac::flat::{sample_closed_form, GaussianPacket, GridSpec};
use curved_dirac::map::curved_density;
use curved_dirac::metric::{wormhole_conformal_factor, ConformalFactor};

use crate::output::{write_csv, Frame, FrameSet};
use crate::svg::density_heatmap;
use crate::CliError;

pub const X_MIN: f64 = -60.0;
pub const X_MAX: f64 = 60.0;
pub const GRID_POINTS: usize = 256;
pub const T_MAX: f64 = 40.0;
pub const FRAME_STEP: f64 = 0.5;
pub const SIGMA: f64 = 5.0;
pub const STARTS: [f64; 3] = [-10.0, 1.0, 5.0];

struct Panel {
    file: &'static str,
    x0: f64,
    curved: bool,
}

const PANELS: [Panel; 6] = [
    Panel { file: "fig1_a", x0: STARTS[0], curved: false },
    Panel { file: "fig1_b", x0: STARTS[0], curved: true },
    Panel { file: "fig1_c", x0: STARTS[1], curved: false },
    Panel { file: "fig1_d", x0: STARTS[1], curved: true },
    Panel { file: "fig1_e", x0: STARTS[2], curved: false },
    Panel { file: "fig1_f", x0: STARTS[2], curved: true },
];

fn frame_times() -> Vec<f64> {
    let n = (T_MAX / FRAME_STEP).round() as usize;
    (0..=n).map(|k| k as f64 * FRAME_STEP).collect()
}

/// Densities for one panel. The window is rendered from the closed-form
/// flat solution, so the packet is allowed to leave the frame at late times
/// (the figure shows a fixed window, not a containment-checked evolution).
fn panel_frames(
    grid: &GridSpec,
    cf: &ConformalFactor,
    x0: f64,
) -> Result<FrameSet, CliError> {
    let packet = GaussianPacket::new(x0, SIGMA)?;
    let mut frames = Vec::new();
    for t in frame_times() {
        let field = sample_closed_form(&packet, grid, t);
        let density_flat = field.density();
        let density_curved = curved_density(&density_flat, cf, grid);
        frames.push(Frame {
            t,
            up: field.up,
            down: field.down,
            density_flat,
            density_curved,
        });
    }
    Ok(FrameSet {
        grid: grid.clone(),
        provenance: "closed-form",
        frames,
    })
}

fn panel_max_density(frames: &FrameSet) -> f64 {
    frames
        .frames
        .iter()
        .flat_map(|f| {
            (0..frames.grid.n()).filter_map(|j| f.density_curved.get(j))
        })
        .fold(0.0f64, f64::max)
}

pub fn run(out_dir: &Path, b0: f64) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let grid = GridSpec::new(X_MIN, X_MAX, GRID_POINTS)?;
    let flat_cf = ConformalFactor::flat();
    let worm_cf = wormhole_conformal_factor(b0)?;
    let times = frame_times();

    let mut panel_meta = Vec::new();
    let mut flat_peaks = std::collections::HashMap::new();
    for panel in &PANELS {
        let cf = if panel.curved { &worm_cf } else { &flat_cf };
        let frames = panel_frames(&grid, cf, panel.x0)?;
        let peak = panel_max_density(&frames);
        if !panel.curved {
            flat_peaks.insert(panel.file, peak);
        }

        write_csv(&out_dir.join(format!("{}.csv", panel.file)), &frames)?;
        let rows: Vec<_> = frames
            .frames
            .iter()
            .map(|f| f.density_curved.clone())
            .collect();
        let title = format!(
            "{} background, x0 = {}",
            if panel.curved { "wormhole" } else { "flat" },
            panel.x0
        );
        density_heatmap(
            &out_dir.join(format!("{}.svg", panel.file)),
            &title,
            &grid,
            &times,
            &rows,
        )?;

        panel_meta.push((panel, peak));
    }

    // distortion: curved-panel peak density over the flat peak of the same
    // packet (the flat peak is time independent)
    let flat_peak = flat_peaks.values().copied().fold(0.0f64, f64::max);
    let summary_panels: Vec<serde_json::Value> = panel_meta
        .iter()
        .map(|(panel, peak)| {
            json!({
                "file": panel.file,
                "x0": panel.x0,
                "metric": if panel.curved { "wormhole" } else { "flat" },
                "max_density": peak,
                "distortion": if panel.curved { json!(peak / flat_peak) } else { serde_json::Value::Null },
            })
        })
        .collect();
    let summary = json!({
        "window": {
            "x_min": X_MIN,
            "x_max": X_MAX,
            "n": GRID_POINTS,
            "t_min": 0.0,
            "t_max": T_MAX,
            "frame_step": FRAME_STEP,
            "frames": times.len(),
        },
        "sigma": SIGMA,
        "b0": b0,
        "normalization": "each heat map is normalized by its own panel maximum",
        "panels": summary_panels,
    });
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Runtime(format!("json serialization failed: {e}")))?
            + "\n",
    )?;
    Ok(())
}
