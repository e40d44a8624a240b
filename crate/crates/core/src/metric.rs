//! Static conformal metrics and closed-form quantities derived from them.
//!
//! A 1+1D static metric in conformal form `ds^2 = Omega^2(x)(dt^2 - dx^2)` is
//! represented by a [`ConformalFactor`]: the profile `Omega(x)`, its
//! derivative, and its singular points. The curved massless Dirac equation on
//! such a background carries the purely imaginary effective potential
//! `V(x) = -i Omega'/(2 Omega)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

type MetricFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// An evaluable static metric profile `Omega(x)` with its derivative.
///
/// Immutable after construction; safe to share across threads.
#[derive(Clone)]
pub struct ConformalFactor {
    omega: MetricFn,
    omega_prime: MetricFn,
    singular_points: Vec<f64>,
    label: String,
    exclusion_radius: f64,
    /// Whether `log(omega(x))` may be used directly as the phase integral.
    closed_form_phase: bool,
}

impl std::fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalFactor")
            .field("label", &self.label)
            .field("singular_points", &self.singular_points)
            .field("exclusion_radius", &self.exclusion_radius)
            .finish()
    }
}

impl ConformalFactor {
    /// Builds a conformal factor from closure evaluators.
    ///
    /// `singular_points` is sorted and deduplicated. `exclusion_radius`
    /// defines the neighbourhood of each singular point treated as singular.
    pub fn new<F, G>(
        omega: F,
        omega_prime: G,
        singular_points: Vec<f64>,
        label: impl Into<String>,
        exclusion_radius: f64,
        closed_form_phase: bool,
    ) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
        G: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        let mut pts = singular_points;
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        Self {
            omega: Arc::new(omega),
            omega_prime: Arc::new(omega_prime),
            singular_points: pts,
            label: label.into(),
            exclusion_radius,
            closed_form_phase,
        }
    }

    /// Flat spacetime, `Omega == 1`.
    pub fn flat() -> Self {
        Self::new(
            |_| Ok(1.0),
            |_| Ok(0.0),
            vec![],
            "flat",
            1e-9,
            true,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    /// The singular point whose exclusion neighbourhood contains `x`, if any.
    pub fn singularity_at(&self, x: f64) -> Option<f64> {
        self.singular_points
            .iter()
            .copied()
            .find(|p| (x - p).abs() <= self.exclusion_radius)
    }

    pub fn is_singular_at(&self, x: f64) -> bool {
        self.singularity_at(x).is_some()
    }

    /// Evaluates `Omega(x)`.
    pub fn omega(&self, x: f64) -> Result<f64> {
        (self.omega)(x)
    }

    /// Evaluates `Omega'(x)`.
    pub fn omega_prime(&self, x: f64) -> Result<f64> {
        (self.omega_prime)(x)
    }

    fn check_singular(&self, x: f64) -> Result<()> {
        match self.singularity_at(x) {
            Some(point) => Err(Error::SingularPoint { point, x }),
            None => Ok(()),
        }
    }

    /// The effective potential `V(x) = -i Omega'/(2 Omega)`; purely imaginary.
    pub fn effective_potential(&self, x: f64) -> Result<Complex64> {
        self.check_singular(x)?;
        let ratio = self.omega_prime(x)? / (2.0 * self.omega(x)?);
        Ok(Complex64::new(0.0, -ratio))
    }

    /// The logarithmic derivative `Omega'/Omega`.
    pub fn log_derivative(&self, x: f64) -> Result<f64> {
        self.check_singular(x)?;
        Ok(self.omega_prime(x)? / self.omega(x)?)
    }

    /// The antiderivative of `Omega'/Omega`, with the integration constant
    /// fixed so the result equals `log Omega(x)` (the phase vanishes at
    /// asymptotically flat infinity).
    ///
    /// Profiles without a closed form are integrated by adaptive quadrature
    /// of [`Self::log_derivative`] from a reference point on the same branch.
    pub fn phase_integral(&self, x: f64) -> Result<f64> {
        self.check_singular(x)?;
        if self.closed_form_phase {
            return Ok(self.omega(x)?.ln());
        }
        self.phase_integral_quadrature(x)
    }

    /// Quadrature route for the phase integral: `log Omega(ref)` plus the
    /// integral of `Omega'/Omega` from a reference point on the same branch.
    pub fn phase_integral_quadrature(&self, x: f64) -> Result<f64> {
        self.check_singular(x)?;
        let lower = self
            .singular_points
            .iter()
            .copied()
            .filter(|p| *p < x)
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))));
        let upper = self
            .singular_points
            .iter()
            .copied()
            .filter(|p| *p > x)
            .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))));
        let reference = match (lower, upper) {
            (Some(lo), _) => lo + 0.5 * (x - lo),
            (None, Some(hi)) => hi - 0.5 * (hi - x),
            (None, None) => 0.5 * x,
        };
        let integral = quadrature::integrate(
            |u| self.log_derivative(u).unwrap_or(f64::NAN),
            reference,
            x,
            quadrature::ABS_TOL,
            quadrature::REL_TOL,
        )?;
        Ok(self.omega(reference)?.ln() + integral)
    }
}

/// Which side of the wormhole throat a point lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// The traversable-wormhole family with shape function `b(r) = b0^2/r`.
///
/// In the conformal coordinate `x = +-sqrt(r^2 - b0^2)` the factor is
/// `Omega(x) = |x|/sqrt(x^2 + b0^2)`, singular at the throat `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WormholeMetric {
    b0: f64,
}

impl WormholeMetric {
    pub fn new(b0: f64) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(Error::InvalidThroatRadius { b0 });
        }
        Ok(Self { b0 })
    }

    pub fn throat_radius(&self) -> f64 {
        self.b0
    }

    /// The induced conformal factor, `Omega(x) = |x|/sqrt(x^2 + b0^2)`.
    pub fn conformal_factor(&self) -> ConformalFactor {
        let b0 = self.b0;
        let b0sq = b0 * b0;
        ConformalFactor::new(
            move |x: f64| Ok(x.abs() / (x * x + b0sq).sqrt()),
            move |x: f64| {
                // d/dx [ x / sqrt(x^2+b0^2) ] = b0^2 / (x^2+b0^2)^(3/2), odd in x
                let d = (x * x + b0sq).sqrt();
                Ok(x.signum() * b0sq / (d * d * d))
            },
            vec![0.0],
            format!("wormhole(b0={b0})"),
            1e-9 * b0.max(1.0),
            true,
        )
    }

    /// Maps a radius `r >= b0` to the conformal coordinate on a branch,
    /// `x = sign * sqrt(r^2 - b0^2)`.
    pub fn radius_to_x(&self, r: f64, branch: Branch) -> Result<f64> {
        if r < self.b0 {
            return Err(Error::InsideThroat { r, b0: self.b0 });
        }
        Ok(branch.sign() * (r * r - self.b0 * self.b0).sqrt())
    }

    /// Inverse coordinate map, `r = sqrt(x^2 + b0^2)`.
    pub fn x_to_radius(&self, x: f64) -> f64 {
        (x * x + self.b0 * self.b0).sqrt()
    }
}

/// Convenience constructor matching [`WormholeMetric::conformal_factor`].
pub fn wormhole_conformal_factor(b0: f64) -> Result<ConformalFactor> {
    Ok(WormholeMetric::new(b0)?.conformal_factor())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wh(b0: f64) -> ConformalFactor {
        wormhole_conformal_factor(b0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_throat() {
        assert!(matches!(
            WormholeMetric::new(0.0),
            Err(Error::InvalidThroatRadius { .. })
        ));
        assert!(matches!(
            wormhole_conformal_factor(-1.0),
            Err(Error::InvalidThroatRadius { .. })
        ));
    }

    #[test]
    fn wormhole_omega_values() {
        let cf = wh(10.0);
        assert_eq!(cf.omega(0.0).unwrap(), 0.0);
        assert!((cf.omega(10.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((cf.omega(1e7).unwrap() - 1.0).abs() < 1e-10);
        assert!((cf.omega(-1e7).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(cf.singular_points(), &[0.0]);
    }

    #[test]
    fn effective_potential_values() {
        let cf = wh(10.0);
        let v = cf.effective_potential(10.0).unwrap();
        assert!((v - Complex64::new(0.0, -0.025)).norm() < 1e-15);
        // x = b0 gives -i/(4 b0)
        assert!((v.im + 1.0 / 40.0).abs() < 1e-15);
        let flat = ConformalFactor::flat();
        assert_eq!(flat.effective_potential(3.7).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn effective_potential_singularity_error() {
        let cf = wh(10.0);
        match cf.effective_potential(0.0) {
            Err(Error::SingularPoint { point, .. }) => assert_eq!(point, 0.0),
            other => panic!("expected singularity error, got {other:?}"),
        }
        // within the exclusion radius counts as singular
        assert!(cf.effective_potential(1e-10).is_err());
    }

    #[test]
    fn log_derivative_values() {
        let cf = wh(10.0);
        assert!((cf.log_derivative(10.0).unwrap() - 0.05).abs() < 1e-15);
        assert!((cf.log_derivative(-10.0).unwrap() + 0.05).abs() < 1e-15);
        // decays as b0^2/x^3: ~1e-10 at x = 1e4
        let far = cf.log_derivative(1e4).unwrap();
        assert!(far < 1.1e-10 && far > 0.9e-10);
        assert!(cf.log_derivative(1e6).unwrap() < 1.1e-10);
    }

    #[test]
    fn log_derivative_odd() {
        let cf = wh(10.0);
        for i in 1..=100 {
            let x = 0.1 + 0.97 * i as f64;
            let s = cf.log_derivative(x).unwrap() + cf.log_derivative(-x).unwrap();
            assert!(s.abs() <= 1e-12, "not odd at x={x}: {s}");
        }
    }

    #[test]
    fn phase_integral_values() {
        let cf = wh(10.0);
        let p = cf.phase_integral(10.0).unwrap();
        assert!((p - 0.5 * 0.5f64.ln()).abs() < 1e-12);
        assert!(cf.phase_integral(1e7).unwrap().abs() < 1e-12);
        // exp(phase) = Omega
        for &x in &[0.5, 3.0, 10.0, -42.0, 250.0] {
            let w = cf.omega(x).unwrap();
            assert!((cf.phase_integral(x).unwrap().exp() - w).abs() < 1e-12 * w.max(1.0));
        }
    }

    #[test]
    fn phase_integral_quadrature_matches_closed_form() {
        // Omega = exp(-x^2/100): log Omega(3) = -0.09
        let cf = ConformalFactor::new(
            |x| Ok((-x * x / 100.0).exp()),
            |x| Ok((-x / 50.0) * (-x * x / 100.0).exp()),
            vec![],
            "gaussian-bump",
            1e-9,
            false,
        );
        let p = cf.phase_integral(3.0).unwrap();
        assert!((p + 0.09).abs() < 1e-9);
    }

    #[test]
    fn phase_integral_quadrature_on_branch() {
        // quadrature route for the wormhole itself must reproduce Eq-16 shape
        let cf = wh(10.0);
        for &x in &[3.0, 10.0, -25.0] {
            let q = cf.phase_integral_quadrature(x).unwrap();
            let exact = cf.omega(x).unwrap().ln();
            assert!((q - exact).abs() < 1e-9, "x={x}: {q} vs {exact}");
        }
    }

    #[test]
    fn coordinate_maps() {
        let m = WormholeMetric::new(10.0).unwrap();
        assert_eq!(m.radius_to_x(10.0, Branch::Positive).unwrap(), 0.0);
        let r = 10.0 * std::f64::consts::SQRT_2;
        assert!((m.radius_to_x(r, Branch::Positive).unwrap() - 10.0).abs() < 1e-12);
        assert!((m.radius_to_x(r, Branch::Negative).unwrap() + 10.0).abs() < 1e-12);
        assert!(matches!(
            m.radius_to_x(9.0, Branch::Positive),
            Err(Error::InsideThroat { .. })
        ));
        assert_eq!(m.x_to_radius(0.0), 10.0);
        assert!((m.x_to_radius(10.0) - r).abs() < 1e-12);
        for &r0 in &[10.0, 15.0, 100.0] {
            for branch in [Branch::Positive, Branch::Negative] {
                let x = m.radius_to_x(r0, branch).unwrap();
                assert!((m.x_to_radius(x) - r0).abs() <= 1e-12 * r0);
            }
        }
    }

    #[test]
    fn omega_prime_central_difference_order() {
        let cf = wh(10.0);
        let x = 7.0;
        let exact = cf.omega_prime(x).unwrap();
        let err = |h: f64| {
            let fd = (cf.omega(x + h).unwrap() - cf.omega(x - h).unwrap()) / (2.0 * h);
            (fd - exact).abs()
        };
        let (e1, e2, e3) = (err(1e-2), err(1e-3), err(1e-4));
        let order12 = (e1 / e2).log10();
        let order23 = (e2 / e3).log10();
        assert!(order12 >= 1.9, "observed order {order12}");
        assert!(order23 >= 1.9, "observed order {order23}");
    }

    #[test]
    fn wormhole_potential_closed_form_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cf = wh(10.0);
        let b0sq = 100.0;
        for _ in 0..1000 {
            let mag = rng.gen_range(0.1..100.0);
            let x: f64 = if rng.gen_bool(0.5) { mag } else { -mag };
            let v = cf.effective_potential(x).unwrap();
            let exact = -b0sq / (2.0 * x * (b0sq + x * x));
            assert!(
                (v.im - exact).abs() <= 1e-12 * exact.abs(),
                "x={x}: {} vs {exact}",
                v.im
            );
            assert_eq!(v.re, 0.0);
        }
    }
}
