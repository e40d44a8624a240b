//! Free massless Dirac dynamics in flat 1+1D spacetime.
//!
//! The closed-form right-moving Gaussian packet and a spectral evolver for
//! arbitrary spinor data. The massless equation decouples in the sigma_x
//! eigenbasis into chirality components chi_+- = (up +- down)/sqrt(2),
//! transported rightward/leftward at unit speed.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::metric::ConformalFactor;

/// Boundary amplitude (relative to peak) above which a packet counts as
/// clipped by the grid.
pub const CONTAINMENT_RATIO: f64 = 1e-8;

/// sigma_x eigenvector with eigenvalue +1, positive-energy convention.
pub const U_POS: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
/// Negative-energy counterpart; also a sigma_x eigenvector with eigenvalue +1.
pub const U_NEG: [f64; 2] = [-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];

/// Uniform spatial grid, periodic convention: `x_j = x_min + j*dx`,
/// `j = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::InvalidGrid {
                reason: format!("x_min = {x_min} must be below x_max = {x_max}"),
            });
        }
        if n < 16 {
            return Err(Error::InvalidGrid {
                reason: format!("n = {n} is below the minimum of 16"),
            });
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.point(j))
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Grid indices falling inside the singularity-exclusion radius of any
    /// singular point of `cf`.
    pub fn excluded_indices(&self, cf: &ConformalFactor) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| cf.is_singular_at(self.point(j)))
            .collect()
    }

    /// Fourier wavenumbers in FFT ordering.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let length = self.x_max - self.x_min;
        (0..self.n)
            .map(|m| {
                let m = if m <= self.n / 2 {
                    m as f64
                } else {
                    m as f64 - self.n as f64
                };
                2.0 * std::f64::consts::PI * m / length
            })
            .collect()
    }
}

/// Two-component complex spinor sampled on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
    pub time: f64,
}

impl SpinorField {
    pub fn zeros(grid: GridSpec, time: f64) -> Self {
        let n = grid.n();
        Self {
            grid,
            up: vec![Complex64::new(0.0, 0.0); n],
            down: vec![Complex64::new(0.0, 0.0); n],
            time,
        }
    }

    /// Pointwise probability density `|up|^2 + |down|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect()
    }

    /// Trapezoid-rule total probability over the grid.
    pub fn total_probability(&self) -> f64 {
        let d = self.density();
        let sum: f64 = d.iter().sum();
        self.grid.spacing() * (sum - 0.5 * (d[0] + d[self.grid.n() - 1]))
    }

    pub fn max_abs(&self) -> f64 {
        self.up
            .iter()
            .chain(&self.down)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest boundary amplitude relative to the peak amplitude.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.grid.n();
        let edge = [0, 1, n - 2, n - 1]
            .iter()
            .map(|&j| self.up[j].norm().max(self.down[j].norm()))
            .fold(0.0, f64::max);
        edge / peak
    }

    /// Chirality split `chi_+- = (up +- down)/sqrt(2)`.
    pub fn chirality(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = self
            .up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| (u + d) * s)
            .collect();
        let minus = self
            .up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| (u - d) * s)
            .collect();
        (plus, minus)
    }

    pub fn from_chirality(
        grid: GridSpec,
        plus: Vec<Complex64>,
        minus: Vec<Complex64>,
        time: f64,
    ) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let up = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p + m) * s)
            .collect();
        let down = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) * s)
            .collect();
        Self {
            grid,
            up,
            down,
            time,
        }
    }
}

/// Parameters of the initial Gaussian wavepacket,
/// `phi(x,0) = N^{-1/2} exp(-(x-x0)^2/sigma^2) (1 1)^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub x0: f64,
    pub sigma: f64,
}

impl GaussianPacket {
    pub fn new(x0: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidPacket {
                reason: format!("sigma = {sigma} must be strictly positive"),
            });
        }
        Ok(Self { x0, sigma })
    }

    /// Normalization constant `N = sqrt(2 pi sigma^2)`.
    pub fn normalization(&self) -> f64 {
        (2.0 * std::f64::consts::PI * self.sigma * self.sigma).sqrt()
    }

    /// Per-component amplitude of the evolved packet at `(x, t)`.
    pub fn amplitude(&self, x: f64, t: f64) -> f64 {
        let u = t - (x - self.x0);
        (-u * u / (self.sigma * self.sigma)).exp() / self.normalization().sqrt()
    }
}

/// Samples the evolved closed-form packet on a grid without containment
/// checks. Windowed rendering of the analytic solution goes through here.
pub fn sample_closed_form(packet: &GaussianPacket, grid: &GridSpec, t: f64) -> SpinorField {
    let mut field = SpinorField::zeros(grid.clone(), t);
    for j in 0..grid.n() {
        let a = Complex64::new(packet.amplitude(grid.point(j), t), 0.0);
        field.up[j] = a;
        field.down[j] = a;
    }
    field
}

fn containment_check(packet: &GaussianPacket, grid: &GridSpec, t: f64) -> Result<()> {
    let ratio = packet
        .amplitude(grid.x_min(), t)
        .max(packet.amplitude(grid.x_max(), t))
        * packet.normalization().sqrt();
    if ratio > CONTAINMENT_RATIO {
        return Err(Error::GridTooSmall {
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            boundary_ratio: ratio,
        });
    }
    Ok(())
}

/// Samples the initial packet at `t = 0`; both spinor components equal.
pub fn gaussian_initial(packet: &GaussianPacket, grid: &GridSpec) -> Result<SpinorField> {
    containment_check(packet, grid, 0.0)?;
    Ok(sample_closed_form(packet, grid, 0.0))
}

/// Samples the closed-form evolved packet: the initial Gaussian rigidly
/// translated by `+t` (right-moving at the speed of light).
pub fn evolve_gaussian_closed_form(
    packet: &GaussianPacket,
    grid: &GridSpec,
    t: f64,
) -> Result<SpinorField> {
    if t < 0.0 {
        return Err(Error::InvalidPacket {
            reason: format!("evolution time t = {t} must be non-negative"),
        });
    }
    containment_check(packet, grid, t)?;
    Ok(sample_closed_form(packet, grid, t))
}

/// Advances arbitrary spinor data by `t` with the spectral method: each
/// Fourier mode of chi_+ picks up `exp(-i k t)` (rightward transport) and
/// each mode of chi_- picks up `exp(+i k t)`.
pub fn evolve_spectral(initial: &SpinorField, t: f64) -> Result<SpinorField> {
    let grid = &initial.grid;
    if !grid.is_power_of_two() {
        return Err(Error::NonPowerOfTwoGrid { n: grid.n() });
    }
    if initial.boundary_ratio() > CONTAINMENT_RATIO {
        log::warn!(
            "spectral evolution input touches the periodic seam (boundary ratio {:e})",
            initial.boundary_ratio()
        );
    }
    let n = grid.n();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let k = grid.wavenumbers();

    let (mut plus, mut minus) = initial.chirality();
    fft.process(&mut plus);
    fft.process(&mut minus);
    for m in 0..n {
        let phase = Complex64::from_polar(1.0, -k[m] * t);
        plus[m] *= phase;
        minus[m] *= phase.conj();
    }
    ifft.process(&mut plus);
    ifft.process(&mut minus);
    let scale = 1.0 / n as f64;
    for c in plus.iter_mut().chain(minus.iter_mut()) {
        *c *= scale;
    }

    let out = SpinorField::from_chirality(grid.clone(), plus, minus, initial.time + t);
    if out.boundary_ratio() > CONTAINMENT_RATIO {
        log::warn!(
            "spectral evolution output reached the periodic seam (boundary ratio {:e})",
            out.boundary_ratio()
        );
    }
    Ok(out)
}
