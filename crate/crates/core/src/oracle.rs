//! Direct integrator for the curved static massless Dirac equation.
//!
//! Evolves `d psi/dt = -sigma_x d psi/dx - (Omega'/2Omega) sigma_x psi`
//! with classic four-stage Runge-Kutta in time and a spectral or
//! fourth-order central derivative in space. The integrator never applies
//! the `Omega^{-1/2}` transformation: its only metric input is a sampled
//! `Omega'/Omega`, which makes agreement with the curvature map a genuine
//! cross-check.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::flat::{GridSpec, SpinorField, CONTAINMENT_RATIO};
use crate::metric::ConformalFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    Spectral,
    FourthOrderCentral,
}

/// Time-integration settings; CFL `dt <= 0.5*dx` is enforced at construction.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    dt: f64,
    t_end: f64,
    scheme: DerivativeScheme,
    output_stride: usize,
}

impl SolverConfig {
    pub fn new(
        grid: &GridSpec,
        dt: f64,
        t_end: f64,
        scheme: DerivativeScheme,
        output_stride: usize,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidSolverConfig {
                reason: format!("dt = {dt} must be strictly positive"),
            });
        }
        if t_end < 0.0 {
            return Err(Error::InvalidSolverConfig {
                reason: format!("t_end = {t_end} must be non-negative"),
            });
        }
        if output_stride == 0 {
            return Err(Error::InvalidSolverConfig {
                reason: "output stride must be at least 1".into(),
            });
        }
        let limit = 0.5 * grid.spacing();
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
        Ok(Self {
            dt,
            t_end,
            scheme,
            output_stride,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn output_stride(&self) -> usize {
        self.output_stride
    }
}

/// Time-indexed sequence of spinor fields, the unit of solver output.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub fields: Vec<SpinorField>,
}

impl EvolutionRecord {
    pub fn last(&self) -> &SpinorField {
        self.fields.last().expect("record is never empty")
    }

    /// Per-frame probability densities.
    pub fn densities(&self) -> Vec<Vec<f64>> {
        self.fields.iter().map(|f| f.density()).collect()
    }
}

// ---------------------------------------------------------------------------
// Spatial derivative
// ---------------------------------------------------------------------------

struct SpaceDerivative {
    scheme: DerivativeScheme,
    dx: f64,
    n: usize,
    spectral: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>, Vec<f64>)>,
}

impl SpaceDerivative {
    fn new(grid: &GridSpec, scheme: DerivativeScheme) -> Result<Self> {
        let spectral = match scheme {
            DerivativeScheme::Spectral => {
                if !grid.is_power_of_two() {
                    return Err(Error::NonPowerOfTwoGrid { n: grid.n() });
                }
                let mut planner = FftPlanner::new();
                Some((
                    planner.plan_fft_forward(grid.n()),
                    planner.plan_fft_inverse(grid.n()),
                    grid.wavenumbers(),
                ))
            }
            DerivativeScheme::FourthOrderCentral => None,
        };
        Ok(Self {
            scheme,
            dx: grid.spacing(),
            n: grid.n(),
            spectral,
        })
    }

    fn apply(&self, f: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        match self.scheme {
            DerivativeScheme::Spectral => {
                let (fft, ifft, k) = self.spectral.as_ref().unwrap();
                scratch.clear();
                scratch.extend_from_slice(f);
                fft.process(scratch);
                for (c, &km) in scratch.iter_mut().zip(k.iter()) {
                    *c *= Complex64::new(0.0, km);
                }
                ifft.process(scratch);
                let scale = 1.0 / self.n as f64;
                for (o, c) in out.iter_mut().zip(scratch.iter()) {
                    *o = c * scale;
                }
            }
            DerivativeScheme::FourthOrderCentral => {
                let n = self.n;
                let c = 1.0 / (12.0 * self.dx);
                for j in 0..n {
                    let jp1 = (j + 1) % n;
                    let jp2 = (j + 2) % n;
                    let jm1 = (j + n - 1) % n;
                    let jm2 = (j + n - 2) % n;
                    out[j] = (8.0 * (f[jp1] - f[jm1]) - (f[jp2] - f[jm2])) * c;
                }
            }
        }
    }
}

fn check_one_branch(grid: &GridSpec, cf: &ConformalFactor) -> Result<()> {
    if let Some(&j) = grid.excluded_indices(cf).first() {
        let point = cf
            .singularity_at(grid.point(j))
            .unwrap_or_else(|| grid.point(j));
        return Err(Error::DomainStraddlesSingularity { point });
    }
    Ok(())
}

fn sample_log_derivative(grid: &GridSpec, cf: &ConformalFactor) -> Result<Vec<f64>> {
    grid.points().map(|x| cf.log_derivative(x)).collect()
}

fn rhs_into(
    up: &[Complex64],
    down: &[Complex64],
    half_log_deriv: &[f64],
    deriv: &SpaceDerivative,
    scratch: &mut Vec<Complex64>,
    out_up: &mut [Complex64],
    out_down: &mut [Complex64],
) {
    // d/dt up = -d/dx down - (Omega'/2Omega) down
    deriv.apply(down, out_up, scratch);
    for (j, o) in out_up.iter_mut().enumerate() {
        *o = -*o - half_log_deriv[j] * down[j];
    }
    // d/dt down = -d/dx up - (Omega'/2Omega) up
    deriv.apply(up, out_down, scratch);
    for (j, o) in out_down.iter_mut().enumerate() {
        *o = -*o - half_log_deriv[j] * up[j];
    }
}

/// The curved-equation right-hand side, `d psi/dt`, as a spinor field.
pub fn rhs(
    field: &SpinorField,
    cf: &ConformalFactor,
    scheme: DerivativeScheme,
) -> Result<SpinorField> {
    check_one_branch(&field.grid, cf)?;
    let half: Vec<f64> = sample_log_derivative(&field.grid, cf)?
        .into_iter()
        .map(|v| 0.5 * v)
        .collect();
    let deriv = SpaceDerivative::new(&field.grid, scheme)?;
    let mut out = SpinorField::zeros(field.grid.clone(), field.time);
    let mut scratch = Vec::with_capacity(field.grid.n());
    rhs_into(
        &field.up,
        &field.down,
        &half,
        &deriv,
        &mut scratch,
        &mut out.up,
        &mut out.down,
    );
    Ok(out)
}

/// Integrates the curved equation from `initial` up to `config.t_end`,
/// recording every `output_stride` steps (and the final step).
pub fn evolve_curved(
    initial: &SpinorField,
    cf: &ConformalFactor,
    config: &SolverConfig,
) -> Result<EvolutionRecord> {
    let grid = &initial.grid;
    check_one_branch(grid, cf)?;
    let half: Vec<f64> = sample_log_derivative(grid, cf)?
        .into_iter()
        .map(|v| 0.5 * v)
        .collect();
    let deriv = SpaceDerivative::new(grid, config.scheme)?;

    let n = grid.n();
    let nsteps = if config.t_end == 0.0 {
        0
    } else {
        (config.t_end / config.dt).ceil() as usize
    };
    let dt = if nsteps == 0 {
        config.dt
    } else {
        config.t_end / nsteps as f64
    };

    let mut up = initial.up.clone();
    let mut down = initial.down.clone();
    let mut times = vec![initial.time];
    let mut fields = vec![initial.clone()];

    let mut scratch = Vec::with_capacity(n);
    let mut k1u = vec![Complex64::default(); n];
    let mut k1d = vec![Complex64::default(); n];
    let mut k2u = vec![Complex64::default(); n];
    let mut k2d = vec![Complex64::default(); n];
    let mut k3u = vec![Complex64::default(); n];
    let mut k3d = vec![Complex64::default(); n];
    let mut k4u = vec![Complex64::default(); n];
    let mut k4d = vec![Complex64::default(); n];
    let mut stage_u = vec![Complex64::default(); n];
    let mut stage_d = vec![Complex64::default(); n];

    for step in 1..=nsteps {
        rhs_into(&up, &down, &half, &deriv, &mut scratch, &mut k1u, &mut k1d);
        for j in 0..n {
            stage_u[j] = up[j] + 0.5 * dt * k1u[j];
            stage_d[j] = down[j] + 0.5 * dt * k1d[j];
        }
        rhs_into(&stage_u, &stage_d, &half, &deriv, &mut scratch, &mut k2u, &mut k2d);
        for j in 0..n {
            stage_u[j] = up[j] + 0.5 * dt * k2u[j];
            stage_d[j] = down[j] + 0.5 * dt * k2d[j];
        }
        rhs_into(&stage_u, &stage_d, &half, &deriv, &mut scratch, &mut k3u, &mut k3d);
        for j in 0..n {
            stage_u[j] = up[j] + dt * k3u[j];
            stage_d[j] = down[j] + dt * k3d[j];
        }
        rhs_into(&stage_u, &stage_d, &half, &deriv, &mut scratch, &mut k4u, &mut k4d);
        let w = dt / 6.0;
        for j in 0..n {
            up[j] += w * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
            down[j] += w * (k1d[j] + 2.0 * k2d[j] + 2.0 * k3d[j] + k4d[j]);
        }
        let t = initial.time + step as f64 * dt;

        let field = SpinorField {
            grid: grid.clone(),
            up: up.clone(),
            down: down.clone(),
            time: t,
        };
        let ratio = field.boundary_ratio();
        if ratio > CONTAINMENT_RATIO {
            return Err(Error::ContainmentViolation { t, ratio });
        }
        if step % config.output_stride == 0 || step == nsteps {
            times.push(t);
            fields.push(field);
        }
    }

    Ok(EvolutionRecord { times, fields })
}

/// Max-norm residual of the curved equation over a recorded evolution,
/// using central time differences and the given space scheme. Masked points
/// and 3 cells on each side of them are excluded.
pub fn residual(
    record: &EvolutionRecord,
    cf: &ConformalFactor,
    scheme: DerivativeScheme,
) -> Result<f64> {
    let m = record.fields.len();
    if m < 3 {
        return Err(Error::InsufficientSlices { got: m });
    }
    let dt_out = record.times[1] - record.times[0];
    for w in record.times.windows(2) {
        if ((w[1] - w[0]) - dt_out).abs() > 1e-9 * dt_out.abs().max(1.0) {
            return Err(Error::InsufficientSlices { got: m });
        }
    }

    let grid = &record.fields[0].grid;
    let n = grid.n();
    let mut skip = vec![false; n];
    for j in grid.excluded_indices(cf) {
        for d in j.saturating_sub(3)..=(j + 3).min(n - 1) {
            skip[d] = true;
        }
    }
    let half: Vec<f64> = grid
        .points()
        .map(|x| {
            if cf.is_singular_at(x) {
                Ok(0.0)
            } else {
                cf.log_derivative(x).map(|v| 0.5 * v)
            }
        })
        .collect::<Result<_>>()?;
    let deriv = SpaceDerivative::new(grid, scheme)?;

    let mut scratch = Vec::with_capacity(n);
    let mut dxu = vec![Complex64::default(); n];
    let mut dxd = vec![Complex64::default(); n];
    let mut worst = 0.0f64;
    for s in 1..m - 1 {
        let prev = &record.fields[s - 1];
        let next = &record.fields[s + 1];
        let cur = &record.fields[s];
        deriv.apply(&cur.up, &mut dxu, &mut scratch);
        deriv.apply(&cur.down, &mut dxd, &mut scratch);
        for j in 0..n {
            if skip[j] {
                continue;
            }
            let dtu = (next.up[j] - prev.up[j]) / (2.0 * dt_out);
            let dtd = (next.down[j] - prev.down[j]) / (2.0 * dt_out);
            // residual of d psi/dt + sigma_x d psi/dx + (Omega'/2Omega) sigma_x psi
            let ru = dtu + dxd[j] + half[j] * cur.down[j];
            let rd = dtd + dxu[j] + half[j] * cur.up[j];
            worst = worst.max(ru.norm()).max(rd.norm());
        }
    }
    Ok(worst)
}

/// The weighted norm `integral Omega |psi|^2 dx` (trapezoid rule, masked
/// points excluded); conserved by the curved evolution and equal to the flat
/// L2 norm of the transformed solution.
pub fn weighted_norm(field: &SpinorField, cf: &ConformalFactor) -> Result<f64> {
    let grid = &field.grid;
    let n = grid.n();
    let mut sum = 0.0;
    for j in 0..n {
        let x = grid.point(j);
        if cf.is_singular_at(x) {
            continue;
        }
        let w = cf.omega(x)? * (field.up[j].norm_sqr() + field.down[j].norm_sqr());
        let coeff = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        sum += coeff * w;
    }
    Ok(sum * grid.spacing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::{
        evolve_gaussian_closed_form, gaussian_initial, sample_closed_form, GaussianPacket,
    };
    use crate::map::map_to_curved;
    use crate::metric::wormhole_conformal_factor;

    fn max_diff(a: &SpinorField, b: &SpinorField) -> f64 {
        a.up.iter()
            .zip(&b.up)
            .chain(a.down.iter().zip(&b.down))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn cfl_enforced() {
        let grid = GridSpec::new(0.0, 16.0, 64).unwrap();
        // dx = 0.25, limit 0.125
        assert!(matches!(
            SolverConfig::new(&grid, 0.2, 1.0, DerivativeScheme::Spectral, 1),
            Err(Error::CflViolation { .. })
        ));
        assert!(SolverConfig::new(&grid, 0.1, 1.0, DerivativeScheme::Spectral, 1).is_ok());
    }

    #[test]
    fn rhs_constant_field_gives_damping_term() {
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let grid = GridSpec::new(2.0, 130.0, 4096).unwrap();
        let mut field = SpinorField::zeros(grid.clone(), 0.0);
        for j in 0..grid.n() {
            field.up[j] = Complex64::new(1.0, 0.0);
            field.down[j] = Complex64::new(1.0, 0.0);
        }
        let out = rhs(&field, &cf, DerivativeScheme::Spectral).unwrap();
        let j = (0..grid.n()).find(|&j| grid.point(j) == 10.0).unwrap();
        assert!((out.up[j] - Complex64::new(-0.025, 0.0)).norm() < 1e-9);
        assert!((out.down[j] - Complex64::new(-0.025, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn rhs_zero_field_is_zero() {
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let grid = GridSpec::new(2.0, 130.0, 1024).unwrap();
        let field = SpinorField::zeros(grid, 0.0);
        let out = rhs(&field, &cf, DerivativeScheme::Spectral).unwrap();
        assert!(out.max_abs() == 0.0);
    }

    #[test]
    fn rhs_flat_plane_wave_preserves_density() {
        let cf = crate::metric::ConformalFactor::flat();
        let grid = GridSpec::new(0.0, 32.0, 64).unwrap();
        let k = 2.0 * std::f64::consts::PI * 2.0 / 32.0;
        let mut field = SpinorField::zeros(grid.clone(), 0.0);
        for j in 0..64 {
            let w = Complex64::from_polar(1.0, k * grid.point(j));
            field.up[j] = w;
            field.down[j] = w;
        }
        let out = rhs(&field, &cf, DerivativeScheme::Spectral).unwrap();
        for j in 0..64 {
            // d/dt |psi|^2 = 2 Re(conj(psi) dpsi/dt) = 0 for a plane wave
            let d = (field.up[j].conj() * out.up[j] + field.down[j].conj() * out.down[j]).re;
            assert!(d.abs() < 1e-10);
            // transport term: dpsi/dt = -ik psi
            assert!((out.up[j] - Complex64::new(0.0, -k) * field.up[j]).norm() < 1e-10);
        }
    }

    #[test]
    fn straddling_singularity_rejected() {
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let grid = GridSpec::new(-60.0, 60.0, 512).unwrap(); // x = 0 on the grid
        let field = SpinorField::zeros(grid.clone(), 0.0);
        assert!(matches!(
            rhs(&field, &cf, DerivativeScheme::Spectral),
            Err(Error::DomainStraddlesSingularity { point }) if point == 0.0
        ));
        let config = SolverConfig::new(&grid, 0.05, 1.0, DerivativeScheme::Spectral, 1).unwrap();
        assert!(matches!(
            evolve_curved(&field, &cf, &config),
            Err(Error::DomainStraddlesSingularity { .. })
        ));
    }

    #[test]
    fn flat_evolution_matches_closed_form() {
        let cf = crate::metric::ConformalFactor::flat();
        let grid = GridSpec::new(-64.0, 64.0, 2048).unwrap();
        let packet = GaussianPacket::new(-10.0, 5.0).unwrap();
        let initial = gaussian_initial(&packet, &grid).unwrap();
        let config =
            SolverConfig::new(&grid, 0.5 * grid.spacing(), 10.0, DerivativeScheme::Spectral, 64)
                .unwrap();
        let record = evolve_curved(&initial, &cf, &config).unwrap();
        let exact = evolve_gaussian_closed_form(&packet, &grid, 10.0).unwrap();
        let err = max_diff(record.last(), &exact);
        assert!(err < 1e-8, "max-norm {err}");
    }

    #[test]
    fn fourth_order_central_flat_evolution() {
        let cf = crate::metric::ConformalFactor::flat();
        let grid = GridSpec::new(-64.0, 64.0, 2048).unwrap();
        let packet = GaussianPacket::new(-10.0, 5.0).unwrap();
        let initial = gaussian_initial(&packet, &grid).unwrap();
        let config = SolverConfig::new(
            &grid,
            0.5 * grid.spacing(),
            10.0,
            DerivativeScheme::FourthOrderCentral,
            64,
        )
        .unwrap();
        let record = evolve_curved(&initial, &cf, &config).unwrap();
        let exact = evolve_gaussian_closed_form(&packet, &grid, 10.0).unwrap();
        assert!(max_diff(record.last(), &exact) < 1e-5);
    }

    #[test]
    fn wormhole_evolution_matches_transformation() {
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let grid = GridSpec::new(2.0, 130.0, 4096).unwrap();
        let packet = GaussianPacket::new(30.0, 5.0).unwrap();
        let phi0 = gaussian_initial(&packet, &grid).unwrap();
        let psi0 = map_to_curved(&phi0, &cf).curved;
        let config =
            SolverConfig::new(&grid, 0.5 * grid.spacing(), 10.0, DerivativeScheme::Spectral, 64)
                .unwrap();
        let record = evolve_curved(&psi0, &cf, &config).unwrap();
        let phi_t = evolve_gaussian_closed_form(&packet, &grid, 10.0).unwrap();
        let psi_exact = map_to_curved(&phi_t, &cf).curved;

        let last = record.last();
        let mut err = 0.0f64;
        for j in 0..grid.n() {
            let x = grid.point(j);
            if !(5.0..=100.0).contains(&x) {
                continue;
            }
            err = err
                .max((last.up[j] - psi_exact.up[j]).norm())
                .max((last.down[j] - psi_exact.down[j]).norm());
        }
        assert!(err < 5e-6, "max-norm on [5,100]: {err}");

        // weighted norm conserved over the run
        let w0 = weighted_norm(&record.fields[0], &cf).unwrap();
        for f in &record.fields {
            let w = weighted_norm(f, &cf).unwrap();
            assert!((w - w0).abs() <= 1e-8 * w0, "drift {}", (w - w0).abs() / w0);
        }
    }

    #[test]
    fn evolution_is_linear() {
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let grid = GridSpec::new(2.0, 130.0, 1024).unwrap();
        let f1 = gaussian_initial(&GaussianPacket::new(40.0, 5.0).unwrap(), &grid).unwrap();
        let f2 = gaussian_initial(&GaussianPacket::new(60.0, 4.0).unwrap(), &grid).unwrap();
        let (a, b) = (Complex64::new(0.4, 0.1), Complex64::new(-0.3, 0.9));
        let mut combo = SpinorField::zeros(grid.clone(), 0.0);
        for j in 0..grid.n() {
            combo.up[j] = a * f1.up[j] + b * f2.up[j];
            combo.down[j] = a * f1.down[j] + b * f2.down[j];
        }
        let config =
            SolverConfig::new(&grid, 0.5 * grid.spacing(), 2.0, DerivativeScheme::Spectral, 8)
                .unwrap();
        let r1 = evolve_curved(&f1, &cf, &config).unwrap();
        let r2 = evolve_curved(&f2, &cf, &config).unwrap();
        let rc = evolve_curved(&combo, &cf, &config).unwrap();
        let (l1, l2, lc) = (r1.last(), r2.last(), rc.last());
        for j in 0..grid.n() {
            let expect = a * l1.up[j] + b * l2.up[j];
            assert!((lc.up[j] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn containment_violation_detected() {
        let cf = crate::metric::ConformalFactor::flat();
        let grid = GridSpec::new(-30.0, 30.0, 512).unwrap();
        let packet = GaussianPacket::new(0.0, 5.0).unwrap();
        let initial = gaussian_initial(&packet, &grid).unwrap();
        let config =
            SolverConfig::new(&grid, 0.5 * grid.spacing(), 25.0, DerivativeScheme::Spectral, 16)
                .unwrap();
        match evolve_curved(&initial, &cf, &config) {
            Err(Error::ContainmentViolation { t, .. }) => assert!(t > 0.0 && t < 25.0),
            other => panic!("expected containment violation, got {:?}", other.map(|r| r.times)),
        }
    }

    #[test]
    fn residual_needs_three_uniform_slices() {
        let cf = crate::metric::ConformalFactor::flat();
        let grid = GridSpec::new(-64.0, 64.0, 256).unwrap();
        let f = SpinorField::zeros(grid, 0.0);
        let record = EvolutionRecord {
            times: vec![0.0, 1.0],
            fields: vec![f.clone(), f.clone()],
        };
        assert!(matches!(
            residual(&record, &cf, DerivativeScheme::Spectral),
            Err(Error::InsufficientSlices { got: 2 })
        ));
        let record = EvolutionRecord {
            times: vec![0.0, 1.0, 3.0],
            fields: vec![f.clone(), f.clone(), f],
        };
        assert!(residual(&record, &cf, DerivativeScheme::Spectral).is_err());
    }

    #[test]
    fn flat_closed_form_residual_small() {
        let cf = crate::metric::ConformalFactor::flat();
        let grid = GridSpec::new(-40.0, 40.0, 65536).unwrap(); // dx ~ 1.2e-3
        let packet = GaussianPacket::new(-10.0, 5.0).unwrap();
        let dt = 1e-3;
        let record = EvolutionRecord {
            times: vec![3.0 - dt, 3.0, 3.0 + dt],
            fields: (0..3)
                .map(|i| sample_closed_form(&packet, &grid, 3.0 + (i as f64 - 1.0) * dt))
                .collect(),
        };
        let r = residual(&record, &cf, DerivativeScheme::Spectral).unwrap();
        assert!(r < 1e-4, "residual {r}");
    }

    #[test]
    fn mapped_solution_residual_second_order_in_dt() {
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let grid = GridSpec::new(2.0, 130.0, 4096).unwrap();
        let packet = GaussianPacket::new(30.0, 5.0).unwrap();
        let res_at = |dt: f64| {
            let record = EvolutionRecord {
                times: vec![5.0 - dt, 5.0, 5.0 + dt],
                fields: (0..3)
                    .map(|i| {
                        let t = 5.0 + (i as f64 - 1.0) * dt;
                        map_to_curved(&sample_closed_form(&packet, &grid, t), &cf).curved
                    })
                    .collect(),
            };
            residual(&record, &cf, DerivativeScheme::Spectral).unwrap()
        };
        let coarse = res_at(0.1);
        let fine = res_at(0.05);
        assert!(coarse / fine >= 3.9, "ratio {}", coarse / fine);
    }

    #[test]
    fn unmapped_field_residual_stays_large() {
        // deliberately wrong field: phi without the Omega^{-1/2} factor
        let cf = wormhole_conformal_factor(10.0).unwrap();
        let packet = GaussianPacket::new(1.0, 5.0).unwrap();
        for &n in &[4096usize, 8192] {
            let grid = GridSpec::new(-60.0, 60.0, n).unwrap();
            let dt = 0.5 * grid.spacing();
            let record = EvolutionRecord {
                times: vec![0.0, dt, 2.0 * dt],
                fields: (0..3)
                    .map(|i| sample_closed_form(&packet, &grid, i as f64 * dt))
                    .collect(),
            };
            let r = residual(&record, &cf, DerivativeScheme::Spectral).unwrap();
            assert!(r > 1e-2, "n={n}: residual {r}");
        }
    }
}
