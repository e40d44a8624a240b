//! The local phase transformation between flat and curved solutions.
//!
//! `psi = Omega^{-1/2} phi` converts any free flat-spacetime solution into a
//! solution of the curved static massless Dirac equation; since the phase is
//! real it changes amplitudes, not complex phases, and induces the density
//! relation `|psi|^2 = Omega^{-1} |phi|^2`. Grid points inside the
//! singularity-exclusion radius are masked out rather than regularized.

use crate::flat::{GridSpec, SpinorField};
use crate::metric::ConformalFactor;

/// A flat solution paired with its curved image on the same grid.
#[derive(Debug, Clone)]
pub struct MappedSolution {
    pub flat: SpinorField,
    pub curved: SpinorField,
    pub conformal: ConformalFactor,
    /// `true` where the map is singular; curved values there are undefined
    /// and stored as zero.
    pub mask: Vec<bool>,
}

impl MappedSolution {
    pub fn masked_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(j, &m)| m.then_some(j))
            .collect()
    }
}

/// Pointwise real multiplier `Omega(x)^{-1/2}` applied to both components.
pub fn map_to_curved(flat: &SpinorField, cf: &ConformalFactor) -> MappedSolution {
    let n = flat.grid.n();
    let mut curved = SpinorField::zeros(flat.grid.clone(), flat.time);
    let mut mask = vec![false; n];
    for j in 0..n {
        let x = flat.grid.point(j);
        if cf.is_singular_at(x) {
            mask[j] = true;
            continue;
        }
        match cf.omega(x) {
            Ok(omega) if omega > 0.0 => {
                let factor = omega.powf(-0.5);
                curved.up[j] = flat.up[j] * factor;
                curved.down[j] = flat.down[j] * factor;
            }
            _ => mask[j] = true,
        }
    }
    MappedSolution {
        flat: flat.clone(),
        curved,
        conformal: cf.clone(),
        mask,
    }
}

/// Exact inverse, `phi = Omega^{+1/2} psi`; masked points stay zero.
pub fn map_to_flat(curved: &SpinorField, cf: &ConformalFactor) -> SpinorField {
    let n = curved.grid.n();
    let mut flat = SpinorField::zeros(curved.grid.clone(), curved.time);
    for j in 0..n {
        let x = curved.grid.point(j);
        if cf.is_singular_at(x) {
            continue;
        }
        if let Ok(omega) = cf.omega(x) {
            if omega > 0.0 {
                let factor = omega.sqrt();
                flat.up[j] = curved.up[j] * factor;
                flat.down[j] = curved.down[j] * factor;
            }
        }
    }
    flat
}

/// A density array with singular points masked out.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedDensity {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl MaskedDensity {
    /// Value at `j`, or `None` if masked.
    pub fn get(&self, j: usize) -> Option<f64> {
        (!self.mask[j]).then(|| self.values[j])
    }
}

/// The induced curved density, `flat_density(x) / Omega(x)` on unmasked
/// points; for the wormhole this is `sqrt(b0^2+x^2)/|x|` times the flat
/// density.
pub fn curved_density(
    flat_density: &[f64],
    cf: &ConformalFactor,
    grid: &GridSpec,
) -> MaskedDensity {
    let n = grid.n();
    assert_eq!(flat_density.len(), n, "density length must match the grid");
    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    for j in 0..n {
        let x = grid.point(j);
        if cf.is_singular_at(x) {
            mask[j] = true;
            continue;
        }
        match cf.omega(x) {
            Ok(omega) if omega > 0.0 => values[j] = flat_density[j] / omega,
            _ => mask[j] = true,
        }
    }
    MaskedDensity { values, mask }
}
