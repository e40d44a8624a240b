//! Frame containers and the CSV / JSON writers.
//!
//! The CSV schema is stable and bit-exact across runs:
//!
//! ```text
//! t,x,re_up,im_up,re_dn,im_dn,density_flat,density_curved,masked,provenance
//! ```
//!
//! All floats are printed with 17 significant digits (`{:.16e}`), lines end
//! with `\n`, and masked rows leave `density_curved` empty with `masked=1`.
//! The spinor columns always carry the flat-spacetime solution; the curved
//! amplitudes follow from it and `density_curved` records their density.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use curved_dirac::flat::GridSpec;
use curved_dirac::MaskedDensity;

use crate::CliError;

pub const CSV_HEADER: &str =
    "t,x,re_up,im_up,re_dn,im_dn,density_flat,density_curved,masked,provenance";

/// One output instant: the flat spinor plus the flat and curved densities.
#[derive(Debug, Clone)]
pub struct Frame {
    pub t: f64,
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
    pub density_flat: Vec<f64>,
    pub density_curved: MaskedDensity,
}

/// An ordered set of frames on one grid, tagged with how it was produced.
#[derive(Debug, Clone)]
pub struct FrameSet {
    pub grid: GridSpec,
    pub provenance: &'static str,
    pub frames: Vec<Frame>,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, frames: &FrameSet) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "{CSV_HEADER}\n")?;
    for frame in &frames.frames {
        for j in 0..frames.grid.n() {
            let x = frames.grid.point(j);
            let masked = frame.density_curved.mask[j];
            let curved = if masked {
                String::new()
            } else {
                fmt(frame.density_curved.values[j])
            };
            write!(
                w,
                "{},{},{},{},{},{},{},{},{},{}\n",
                fmt(frame.t),
                fmt(x),
                fmt(frame.up[j].re),
                fmt(frame.up[j].im),
                fmt(frame.down[j].re),
                fmt(frame.down[j].im),
                fmt(frame.density_flat[j]),
                curved,
                masked as u8,
                frames.provenance,
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, config_echo: &str, frames: &FrameSet) -> Result<(), CliError> {
    let config_lines: Vec<&str> = config_echo.lines().collect();
    let frame_values: Vec<serde_json::Value> = frames
        .frames
        .iter()
        .map(|frame| {
            let curved: Vec<serde_json::Value> = (0..frames.grid.n())
                .map(|j| match frame.density_curved.get(j) {
                    Some(v) => json!(v),
                    None => serde_json::Value::Null,
                })
                .collect();
            json!({
                "t": frame.t,
                "re_up": frame.up.iter().map(|c| c.re).collect::<Vec<_>>(),
                "im_up": frame.up.iter().map(|c| c.im).collect::<Vec<_>>(),
                "re_dn": frame.down.iter().map(|c| c.re).collect::<Vec<_>>(),
                "im_dn": frame.down.iter().map(|c| c.im).collect::<Vec<_>>(),
                "density_flat": frame.density_flat,
                "density_curved": curved,
                "masked": frame.density_curved.mask,
            })
        })
        .collect();
    let doc = json!({
        "config": config_lines,
        "provenance": frames.provenance,
        "grid": {
            "x_min": frames.grid.x_min(),
            "x_max": frames.grid.x_max(),
            "n": frames.grid.n(),
        },
        "x": frames.grid.points().collect::<Vec<_>>(),
        "frames": frame_values,
    });
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc)
        .map_err(|e| CliError::Runtime(format!("json serialization failed: {e}")))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Sidecar path for the CSV config echo: `<out>.config`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config");
    PathBuf::from(name)
}

pub fn write_config_sidecar(out: &Path, config_echo: &str) -> Result<(), CliError> {
    std::fs::write(sidecar_path(out), config_echo)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_frameset() -> FrameSet {
        let grid = GridSpec::new(0.0, 16.0, 16).unwrap();
        let n = grid.n();
        let up = vec![Complex64::new(0.5, -0.25); n];
        let down = up.clone();
        let density_flat = vec![0.625; n];
        let mut mask = vec![false; n];
        mask[3] = true;
        let mut values = vec![1.25; n];
        values[3] = 0.0;
        FrameSet {
            grid,
            provenance: "closed-form",
            frames: vec![Frame {
                t: 2.0,
                up,
                down,
                density_flat,
                density_curved: MaskedDensity { values, mask },
            }],
        }
    }

    #[test]
    fn csv_layout_and_masking() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&path, &tiny_frameset()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 17);
        assert!(!text.contains('\r'));
        // unmasked row: full precision values, masked=0
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[0], "2.0000000000000000e0");
        assert_eq!(cells[8], "0");
        assert_eq!(cells[9], "closed-form");
        // masked row (j = 3): empty curved density, masked=1
        let cells: Vec<&str> = lines[4].split(',').collect();
        assert_eq!(cells[7], "");
        assert_eq!(cells[8], "1");
    }

    #[test]
    fn csv_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        write_csv(&a, &tiny_frameset()).unwrap();
        write_csv(&b, &tiny_frameset()).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn json_masked_is_null() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_json(&path, "x0=1\n", &tiny_frameset()).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc["config"][0], "x0=1");
        assert!(doc["frames"][0]["density_curved"][3].is_null());
        assert!(doc["frames"][0]["density_curved"][0].is_number());
        assert_eq!(doc["frames"][0]["masked"][3], true);
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(
            sidecar_path(Path::new("runs/out.csv")),
            PathBuf::from("runs/out.csv.config")
        );
    }
}
