//! The `simulate` pipeline: evolve the flat packet, apply the conformal
//! map, and collect output frames.
//!
//! Every frame is audited before it is emitted: the density of the mapped
//! spinor must agree with `density_flat / Omega` to 1e-12 (relative), which
//! catches any drift between the amplitude map and the density relation.

use curved_dirac::flat::{
    evolve_gaussian_closed_form, evolve_spectral, gaussian_initial,
};
use curved_dirac::map::{curved_density, map_to_curved};

use crate::config::{Method, RunConfig};
use crate::output::{Frame, FrameSet};
use crate::CliError;

const DENSITY_AUDIT_TOL: f64 = 1e-12;

/// Output instants: internal step `dt = 0.5*dx`, one frame every `stride`
/// steps plus the final instant.
pub fn frame_times(config: &RunConfig, dx: f64) -> Vec<f64> {
    if config.t_end == 0.0 {
        return vec![0.0];
    }
    let dt_raw = 0.5 * dx;
    let nsteps = (config.t_end / dt_raw).ceil() as usize;
    let dt = config.t_end / nsteps as f64;
    let mut times: Vec<f64> = (0..)
        .map(|k| k * config.stride)
        .take_while(|&s| s < nsteps)
        .map(|s| s as f64 * dt)
        .collect();
    times.push(config.t_end);
    times
}

pub fn run(config: &RunConfig) -> Result<FrameSet, CliError> {
    let grid = config.grid()?;
    let cf = config.conformal_factor()?;
    let packet = config.packet()?;
    let initial = gaussian_initial(&packet, &grid)?;

    let mut frames = Vec::new();
    for t in frame_times(config, grid.spacing()) {
        let field = match config.method {
            Method::ClosedForm => evolve_gaussian_closed_form(&packet, &grid, t)?,
            Method::Spectral => evolve_spectral(&initial, t)?,
        };
        let density_flat = field.density();
        let induced = curved_density(&density_flat, &cf, &grid);

        // cross-check the mapped amplitudes against the density relation
        let mapped = map_to_curved(&field, &cf);
        let direct = mapped.curved.density();
        for j in 0..grid.n() {
            if induced.mask[j] {
                continue;
            }
            let scale = induced.values[j].abs().max(1.0);
            if (direct[j] - induced.values[j]).abs() > DENSITY_AUDIT_TOL * scale {
                return Err(CliError::Runtime(format!(
                    "density audit failed at t = {t}, x = {}: mapped density {} vs induced {}",
                    grid.point(j),
                    direct[j],
                    induced.values[j]
                )));
            }
        }

        frames.push(Frame {
            t,
            up: field.up,
            down: field.down,
            density_flat,
            density_curved: induced,
        });
    }

    Ok(FrameSet {
        grid,
        provenance: config.method.provenance(),
        frames,
    })
}
